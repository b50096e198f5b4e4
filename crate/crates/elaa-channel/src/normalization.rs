//! Analytic channel normalization.
//!
//! Realizations are scaled by the square root of the *expected* Frobenius
//! power, `H / sqrt(E||H||^2)`, never by the realized norm: per-realization
//! scaling would erase exactly the fluctuation statistics the Monte-Carlo
//! study measures. The expectation is the sum of per-link powers
//!
//! `E|h_m|^2 = p_m exp(sigma_los^2/2) beta^2 / d_m^(2q)
//!           + (1 - p_m) exp(sigma_nlos^2/2) alpha^2 / d_m^(2rho)`
//!
//! with `p_m` the per-link LoS probability and `d_m` the 3-D link distance.
//! For the visibility-region model the LoS term is absent and `p_m` becomes
//! the probability that antenna m is covered by the random region, which
//! has a closed form under the rounded log-normal length law.

use nalgebra::DMatrix;
use num_complex::Complex64;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::los_state::{los_probability, StateKind};
use crate::scenario::{
    distance_2d, distance_3d, ArrayGeometry, ModelOverrides, Point3, ScenarioParams, UserLayout,
};

/// Expected Frobenius power of a channel ensemble plus its per-link
/// breakdown (M x N_total, same shape as the channel matrix).
#[derive(Debug, Clone)]
pub struct NormalizationConstant {
    pub expected_frobenius_sq: f64,
    pub per_link_power: DMatrix<f64>,
}

/// Mean power of one link under the mixed NLoS/LoS model with per-state
/// log-normal shadowing.
pub fn expected_link_power(p_m: f64, d_m: f64, params: &ScenarioParams) -> Result<f64> {
    if !(0.0..=1.0).contains(&p_m) {
        return Err(Error::invalid(format!("p_m must be in [0, 1], got {p_m}")));
    }
    Error::require_positive(d_m, "distance")?;
    let los = (params.sigma_los * params.sigma_los / 2.0).exp() * params.beta * params.beta
        / d_m.powf(2.0 * params.q);
    let nlos = (params.sigma_nlos * params.sigma_nlos / 2.0).exp() * params.alpha * params.alpha
        / d_m.powf(2.0 * params.rho);
    Ok(p_m * los + (1.0 - p_m) * nlos)
}

/// Expected Frobenius power for a realized user layout under the standard
/// mixed model: per link, `p_m` is the 3GPP LoS probability at the link's
/// 2-D distance and `d_m` its 3-D distance.
pub fn expected_frobenius_sq(
    geometry: &ArrayGeometry,
    layout: &UserLayout,
    positions: &[Point3],
    params: &ScenarioParams,
) -> Result<f64> {
    let c = normalization_constant(
        geometry,
        layout,
        positions,
        params,
        ModelOverrides::default(),
        &StateKind::NlosLos,
    )?;
    Ok(c.expected_frobenius_sq)
}

/// Full per-link expected power table for a layout, honoring the model
/// overrides and the state semantics of the ensemble being normalized.
pub fn normalization_constant(
    geometry: &ArrayGeometry,
    layout: &UserLayout,
    positions: &[Point3],
    params: &ScenarioParams,
    overrides: ModelOverrides,
    kind: &StateKind,
) -> Result<NormalizationConstant> {
    if positions.len() != layout.users {
        return Err(Error::invalid(format!(
            "expected {} user positions, got {}",
            layout.users,
            positions.len()
        )));
    }
    if let Some(p) = overrides.p_los {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::invalid(format!(
                "LoS probability override must be in [0, 1], got {p}"
            )));
        }
    }
    params.validate()?;

    let m_count = geometry.len();
    let n_total = layout.total_antennas();
    if n_total == 0 {
        return Err(Error::invalid("layout has no transmit antennas"));
    }

    let coverage = match kind {
        StateKind::NlosLos => None,
        StateKind::Visibility { mu_len, sigma_len } => {
            Some(visibility_coverage(m_count, *mu_len, *sigma_len))
        }
    };

    let nlos_shadow_mean = (params.sigma_nlos * params.sigma_nlos / 2.0).exp();
    let mut per_link_power = DMatrix::zeros(m_count, n_total);
    for (k, &user) in positions.iter().enumerate() {
        for m in 0..m_count {
            let antenna = geometry.element_positions[m];
            let d = if overrides.unit_distance {
                1.0
            } else {
                distance_3d(user, antenna)
            };
            let power = match &coverage {
                None => {
                    let p = match overrides.p_los {
                        Some(p) => p,
                        None => los_probability(
                            distance_2d(user, antenna),
                            params.d1_bar,
                            params.d2_bar,
                        )?,
                    };
                    expected_link_power(p, d, params)?
                }
                Some(cov) => {
                    cov[m] * nlos_shadow_mean * params.alpha * params.alpha
                        / d.powf(2.0 * params.rho)
                }
            };
            for n in 0..layout.antennas_per_user {
                per_link_power[(m, k * layout.antennas_per_user + n)] = power;
            }
        }
    }

    let expected_frobenius_sq = per_link_power.iter().sum();
    Ok(NormalizationConstant {
        expected_frobenius_sq,
        per_link_power,
    })
}

/// Probability that antenna `m` of an M-element ULA falls inside a
/// visibility region whose length is log-normal (rounded to whole antennas,
/// clamped to `[1, M]`) and whose start is uniform over the fitting
/// placements.
pub fn visibility_coverage_probability(
    m: usize,
    m_count: usize,
    mu_len: f64,
    sigma_len: f64,
) -> f64 {
    visibility_coverage(m_count, mu_len, sigma_len)[m]
}

fn visibility_coverage(m_count: usize, mu_len: f64, sigma_len: f64) -> Vec<f64> {
    let pmf = rounded_length_pmf(m_count, mu_len, sigma_len);
    let mut coverage = vec![0.0; m_count];
    for (l, &mass) in pmf.iter().enumerate().skip(1) {
        if mass == 0.0 {
            continue;
        }
        let placements = (m_count - l + 1) as f64;
        for (m, cov) in coverage.iter_mut().enumerate() {
            // Number of start offsets a in [0, M-l] with a <= m < a + l.
            let lo = m.saturating_sub(l - 1);
            let hi = m.min(m_count - l);
            if hi >= lo {
                *cov += mass * (hi - lo + 1) as f64 / placements;
            }
        }
    }
    coverage
}

// PMF of clamp(round(LogNormal(mu, sigma)), 1, M) over 1..=M.
fn rounded_length_pmf(m_count: usize, mu_len: f64, sigma_len: f64) -> Vec<f64> {
    let mut pmf = vec![0.0; m_count + 1];
    if sigma_len == 0.0 {
        let l = (mu_len.exp().round() as usize).clamp(1, m_count);
        pmf[l] = 1.0;
        return pmf;
    }
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let cdf = |x: f64| normal.cdf((x.ln() - mu_len) / sigma_len);
    for (l, entry) in pmf.iter_mut().enumerate().skip(1) {
        let upper = if l == m_count {
            1.0
        } else {
            cdf(l as f64 + 0.5)
        };
        let lower = if l == 1 { 0.0 } else { cdf(l as f64 - 0.5) };
        *entry = (upper - lower).max(0.0);
    }
    pmf
}

/// Scales a realization by the analytic constant: `H / sqrt(E||H||^2)`.
pub fn normalize(
    matrix: &DMatrix<Complex64>,
    constant: &NormalizationConstant,
) -> Result<DMatrix<Complex64>> {
    let e = constant.expected_frobenius_sq;
    Error::require_positive(e, "expected Frobenius power")?;
    Ok(matrix / Complex64::from(e.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{build_ula, DensityMode};
    use rand::Rng as _;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn umi() -> ScenarioParams {
        ScenarioParams::default()
    }

    #[test]
    fn pure_los_without_shadowing_is_bare_path_loss() {
        let mut p = umi();
        p.sigma_los = 0.0;
        let v = expected_link_power(1.0, 20.0, &p).unwrap();
        let expect = p.beta * p.beta / 20f64.powf(2.0 * p.q);
        assert!((v - expect).abs() < 1e-20);
    }

    #[test]
    fn pure_nlos_without_shadowing_is_bare_path_loss() {
        let mut p = umi();
        p.sigma_nlos = 0.0;
        let v = expected_link_power(0.0, 10.0, &p).unwrap();
        let expect = p.alpha * p.alpha / 10f64.powf(2.0 * p.rho);
        assert!((v - expect).abs() < 1e-20);
        // 0.02^2 / 10^3.53 = 1.18048...e-7
        assert!((expect - 1.180_483_690_666_554e-7).abs() < 1e-18);
    }

    #[test]
    fn mixed_link_power_umi_frozen_value() {
        // 0.5 e^(0.92^2/2) 0.007^2/20^2.1 + 0.5 e^(1.8^2/2) 0.02^2/20^3.53
        let v = expected_link_power(0.5, 20.0, &umi()).unwrap();
        assert!((v - 9.512_979_764_347_354e-8).abs() / v < 1e-12);
    }

    #[test]
    fn link_power_rejects_bad_arguments() {
        assert!(expected_link_power(-0.1, 10.0, &umi()).is_err());
        assert!(expected_link_power(1.1, 10.0, &umi()).is_err());
        assert!(expected_link_power(0.5, 0.0, &umi()).is_err());
    }

    #[test]
    fn single_link_total_equals_link_power() {
        let params = umi();
        let g = build_ula(1, params.half_wavelength(), [0.0; 3], 10.0).unwrap();
        let layout = UserLayout::new(1, 1, DensityMode::High, [0.0, 30.0, 1.5]);
        let user = [0.0, 30.0, 1.5];
        let total = expected_frobenius_sq(&g, &layout, &[user], &params).unwrap();
        let p = los_probability(
            distance_2d(user, g.element_positions[0]),
            params.d1_bar,
            params.d2_bar,
        )
        .unwrap();
        let link =
            expected_link_power(p, distance_3d(user, g.element_positions[0]), &params).unwrap();
        assert!((total - link).abs() / link < 1e-14);
    }

    #[test]
    fn iid_override_gives_mn_total() {
        // Unit distance, forced NLoS, alpha = 1, no shadowing: every link has
        // unit power so the total is M * N.
        let mut params = umi();
        params.alpha = 1.0;
        params.sigma_nlos = 0.0;
        let g = build_ula(16, params.half_wavelength(), [0.0; 3], 10.0).unwrap();
        let layout = UserLayout::new(3, 2, DensityMode::High, [0.0, 30.0, 1.5]);
        let overrides = ModelOverrides {
            p_los: Some(0.0),
            unit_distance: true,
        };
        let c = normalization_constant(
            &g,
            &layout,
            &[[0.0, 30.0, 1.5]; 3],
            &params,
            overrides,
            &StateKind::NlosLos,
        )
        .unwrap();
        assert!((c.expected_frobenius_sq - (16 * 6) as f64).abs() < 1e-9);
        assert!(c.per_link_power.iter().all(|&v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn total_is_brute_force_sum_over_links() {
        let params = umi();
        let g = build_ula(4, params.half_wavelength(), [3.0, -2.0, 0.0], 7.0).unwrap();
        let layout = UserLayout::new(2, 1, DensityMode::Low, [0.0, 30.0, 1.5]);
        let positions = [[1.0, 22.0, 1.5], [-4.0, 35.0, 1.5]];
        let total = expected_frobenius_sq(&g, &layout, &positions, &params).unwrap();
        let mut by_hand = 0.0;
        for user in positions {
            for &antenna in &g.element_positions {
                let p = los_probability(distance_2d(user, antenna), params.d1_bar, params.d2_bar)
                    .unwrap();
                by_hand += expected_link_power(p, distance_3d(user, antenna), &params).unwrap();
            }
        }
        assert!((total - by_hand).abs() / by_hand < 1e-14);
    }

    #[test]
    fn total_is_invariant_under_user_reordering() {
        let params = umi();
        let g = build_ula(32, params.half_wavelength(), [0.0; 3], 10.0).unwrap();
        let layout = UserLayout::new(3, 4, DensityMode::Low, [0.0, 30.0, 1.5]);
        let a = [[1.0, 28.0, 1.5], [5.0, 31.0, 1.5], [-3.0, 30.0, 1.5]];
        let b = [a[2], a[0], a[1]];
        let ta = expected_frobenius_sq(&g, &layout, &a, &params).unwrap();
        let tb = expected_frobenius_sq(&g, &layout, &b, &params).unwrap();
        assert!((ta - tb).abs() / ta < 1e-14);
    }

    #[test]
    fn normalize_is_identity_for_unit_constant() {
        let h = DMatrix::from_fn(3, 2, |i, j| Complex64::new(i as f64, j as f64));
        let c = NormalizationConstant {
            expected_frobenius_sq: 1.0,
            per_link_power: DMatrix::zeros(3, 2),
        };
        let out = normalize(&h, &c).unwrap();
        assert_eq!(out, h);
    }

    #[test]
    fn normalize_is_scale_equivariant() {
        let h = DMatrix::from_fn(2, 2, |i, j| Complex64::new(1.0 + i as f64, -(j as f64)));
        let c1 = NormalizationConstant {
            expected_frobenius_sq: 3.0,
            per_link_power: DMatrix::zeros(2, 2),
        };
        let s = 2.5;
        let c2 = NormalizationConstant {
            expected_frobenius_sq: 3.0 * s * s,
            per_link_power: DMatrix::zeros(2, 2),
        };
        let a = normalize(&h, &c1).unwrap();
        let b = normalize(&(h.clone() * Complex64::from(s)), &c2).unwrap();
        for (x, y) in a.iter().zip(b.iter()) {
            assert!((x - y).norm() < 1e-14);
        }
    }

    #[test]
    fn normalize_rejects_non_positive_constant() {
        let h = DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0));
        for e in [0.0, -1.0, f64::NAN] {
            let c = NormalizationConstant {
                expected_frobenius_sq: e,
                per_link_power: DMatrix::zeros(1, 1),
            };
            assert!(normalize(&h, &c).is_err());
        }
    }

    #[test]
    fn coverage_probabilities_sum_to_expected_length() {
        // Sum over antennas of P(covered) = E[region length].
        let m_count = 64;
        let (mu, sigma) = (4f64.ln(), 0.2f64.ln().abs());
        let total: f64 = (0..m_count)
            .map(|m| visibility_coverage_probability(m, m_count, mu, sigma))
            .sum();
        let pmf = rounded_length_pmf(m_count, mu, sigma);
        let mean_len: f64 = pmf.iter().enumerate().map(|(l, &p)| l as f64 * p).sum();
        assert!((total - mean_len).abs() / mean_len < 1e-12);
    }

    #[test]
    fn coverage_matches_monte_carlo() {
        let m_count = 32;
        let (mu, sigma) = (4f64.ln(), 0.2f64.ln().abs());
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        let trials = 200_000;
        let mut hits = vec![0u32; m_count];
        for _ in 0..trials {
            let v = crate::los_state::generate_states_model5(m_count, mu, sigma, &mut rng).unwrap();
            for (m, &s) in v.states.iter().enumerate() {
                if s {
                    hits[m] += 1;
                }
            }
        }
        for m in [0, 7, 16, 31] {
            let freq = hits[m] as f64 / trials as f64;
            let expect = visibility_coverage_probability(m, m_count, mu, sigma);
            let sigma_est = (expect * (1.0 - expect) / trials as f64).sqrt();
            assert!(
                (freq - expect).abs() < 5.0 * sigma_est,
                "antenna {m}: {freq} vs {expect}"
            );
        }
    }

    #[test]
    fn deterministic_length_coverage() {
        // sigma = 0, mu = ln 4 on an 8-element array: the region always has
        // length 4, so antenna 0 is covered by 1 of 5 placements.
        let cov0 = visibility_coverage_probability(0, 8, 4f64.ln(), 0.0);
        assert!((cov0 - 0.2).abs() < 1e-12);
        let cov4 = visibility_coverage_probability(4, 8, 4f64.ln(), 0.0);
        assert!((cov4 - 0.8).abs() < 1e-12);
    }

    #[test]
    fn analytic_link_power_tracks_sampled_power() {
        // 20 random (p, d) pairs against a Monte-Carlo average of the mixed
        // coefficient, each within 3 sigma of the sample estimator.
        let params = umi();
        let mut rng = ChaCha8Rng::seed_from_u64(73);
        for _ in 0..20 {
            let p: f64 = rng.gen();
            let d: f64 = 5.0 + rng.gen::<f64>() * 95.0;
            let analytic = expected_link_power(p, d, &params).unwrap();
            let n = 400_000;
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            for _ in 0..n {
                let power = crate::fading::sample_mixed_link_power(p, d, &params, &mut rng);
                sum += power;
                sum_sq += power * power;
            }
            let mean = sum / n as f64;
            let var = (sum_sq / n as f64 - mean * mean).max(0.0);
            let se = (var / n as f64).sqrt();
            assert!(
                (mean - analytic).abs() < 3.0 * se.max(analytic * 1e-3),
                "p={p:.3} d={d:.1}: sampled {mean:.3e} vs analytic {analytic:.3e}"
            );
        }
    }
}
