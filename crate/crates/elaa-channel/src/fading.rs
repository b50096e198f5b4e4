//! Per-link complex channel coefficients.
//!
//! NLoS links are i.n.d. Rayleigh, `h = (alpha / d^rho) w` with w a
//! circularly-symmetric complex Gaussian of unit mean-square; LoS links are
//! i.n.d. Rician,
//! `h = (beta / d^q) (sqrt(k/(k+1)) phi + sqrt(1/(k+1)) w)` with
//! `phi = exp(-j 2 pi d / lambda)`. The mixed model gates the two by the
//! binary link state and applies the per-window shadowing multiplier under
//! a square root, so the shadowing value is a linear *power* multiplier.
//!
//! Small-scale draws are independent across every (antenna, user, user-
//! antenna) triple; only the state, shadowing and K-factor are shared
//! within a window.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use std::f64::consts::{FRAC_1_SQRT_2, TAU};

use crate::error::{Error, Result};
use crate::los_state::{LinkStateVector, StateKind};
use crate::normalization::{normalization_constant, normalize, NormalizationConstant};
use crate::scenario::{
    distance_3d, ArrayGeometry, ModelOverrides, Point3, ScenarioParams, UserLayout,
};

/// Breakdown of a coefficient into its deterministic and random factors.
#[derive(Debug, Clone, Copy)]
pub struct CoefficientParts {
    /// Amplitude path gain, attenuation / d^exponent (shadowing included
    /// when the coefficient came through the mixed model).
    pub path_gain: f64,
    /// Unit-modulus LoS phase, present only for LoS coefficients.
    pub los_phase: Option<Complex64>,
    /// The small-scale complex Gaussian draw.
    pub small_scale: Complex64,
}

/// One complex link coefficient, optionally with its factor breakdown.
#[derive(Debug, Clone, Copy)]
pub struct LinkCoefficient {
    pub value: Complex64,
    pub parts: Option<CoefficientParts>,
}

impl LinkCoefficient {
    pub fn zero() -> Self {
        LinkCoefficient {
            value: Complex64::new(0.0, 0.0),
            parts: None,
        }
    }
}

/// Circularly-symmetric complex Gaussian with `E|w|^2 = 1`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
}

/// Rayleigh link coefficient `(alpha / d^rho) w`.
pub fn nlos_coefficient<R: Rng + ?Sized>(
    d_m: f64,
    alpha: f64,
    rho: f64,
    rng: &mut R,
) -> Result<LinkCoefficient> {
    Error::require_positive(d_m, "link distance")?;
    let path_gain = alpha / d_m.powf(rho);
    let small_scale = complex_gaussian(rng);
    Ok(LinkCoefficient {
        value: small_scale * path_gain,
        parts: Some(CoefficientParts {
            path_gain,
            los_phase: None,
            small_scale,
        }),
    })
}

/// Rician link coefficient with deterministic phase `exp(-j 2 pi d / lambda)`
/// and K-factor `kappa`. Its mean power is `(beta / d^q)^2` for every kappa.
pub fn los_coefficient<R: Rng + ?Sized>(
    d_m: f64,
    beta: f64,
    q: f64,
    kappa: f64,
    lambda: f64,
    rng: &mut R,
) -> Result<LinkCoefficient> {
    Error::require_positive(d_m, "link distance")?;
    Error::require_positive(kappa, "K-factor")?;
    Error::require_positive(lambda, "wavelength")?;
    let path_gain = beta / d_m.powf(q);
    let los_phase = Complex64::from_polar(1.0, -TAU * d_m / lambda);
    let small_scale = complex_gaussian(rng);
    let specular = (kappa / (kappa + 1.0)).sqrt();
    let diffuse = (1.0 / (kappa + 1.0)).sqrt();
    Ok(LinkCoefficient {
        value: (los_phase * specular + small_scale * diffuse) * path_gain,
        parts: Some(CoefficientParts {
            path_gain,
            los_phase: Some(los_phase),
            small_scale,
        }),
    })
}

/// Gates the LoS/NLoS parts by the binary state and applies the shadowing
/// power multipliers: `b sqrt(e_los) h_los + (1 - b) sqrt(e_nlos) h_nlos`.
pub fn mixed_coefficient(
    b: bool,
    shadow_los: f64,
    shadow_nlos: f64,
    los_part: &LinkCoefficient,
    nlos_part: &LinkCoefficient,
) -> Result<LinkCoefficient> {
    Error::require_positive(shadow_los, "shadow_los")?;
    Error::require_positive(shadow_nlos, "shadow_nlos")?;
    let (scale, active) = if b {
        (shadow_los.sqrt(), los_part)
    } else {
        (shadow_nlos.sqrt(), nlos_part)
    };
    Ok(LinkCoefficient {
        value: active.value * scale,
        parts: active.parts.map(|p| CoefficientParts {
            path_gain: p.path_gain * scale,
            ..p
        }),
    })
}

/// Log-normal linear power multiplier, `exp(sigma z)` with z standard
/// normal; its mean is `exp(sigma^2 / 2)`.
pub fn sample_shadowing<R: Rng + ?Sized>(sigma: f64, rng: &mut R) -> Result<f64> {
    Error::require_nonnegative(sigma, "sigma")?;
    let z: f64 = rng.sample(StandardNormal);
    Ok((sigma * z).exp())
}

/// Log-normal Rician K-factor, `exp(mu + sigma z)`; strictly positive with
/// median `exp(mu)`.
pub fn sample_kappa<R: Rng + ?Sized>(mu_kappa: f64, sigma_kappa: f64, rng: &mut R) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    (mu_kappa + sigma_kappa * z).exp()
}

/// One full Monte-Carlo draw of the mixed model's link power at LoS
/// probability `p` and distance `d`: state, shadowing, K-factor and
/// small-scale fading are all sampled. Sampling oracle for
/// [`crate::normalization::expected_link_power`].
pub fn sample_mixed_link_power<R: Rng + ?Sized>(
    p: f64,
    d: f64,
    params: &ScenarioParams,
    rng: &mut R,
) -> f64 {
    if rng.gen_bool(p) {
        let shadow = sample_shadowing(params.sigma_los, rng).expect("sigma_los validated");
        let kappa = sample_kappa(params.mu_kappa, params.sigma_kappa, rng);
        let h = los_coefficient(d, params.beta, params.q, kappa, params.lambda, rng)
            .expect("valid LoS draw");
        shadow * h.value.norm_sqr()
    } else {
        let shadow = sample_shadowing(params.sigma_nlos, rng).expect("sigma_nlos validated");
        let h = nlos_coefficient(d, params.alpha, params.rho, rng).expect("valid NLoS draw");
        shadow * h.value.norm_sqr()
    }
}

/// A realized channel matrix together with the analytic normalization of
/// the ensemble it was drawn from.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    /// M x (K * N) complex channel matrix, service antennas along the rows.
    pub matrix: DMatrix<Complex64>,
    pub normalization: NormalizationConstant,
}

impl ChannelRealization {
    /// The realization scaled by its analytic constant.
    pub fn normalized(&self) -> Result<DMatrix<Complex64>> {
        normalize(&self.matrix, &self.normalization)
    }
}

/// Debug dump of a complex matrix as CSV, one row per service antenna with
/// alternating re, im columns.
pub fn write_matrix_csv(matrix: &DMatrix<Complex64>, path: &std::path::Path) -> Result<()> {
    use std::io::Write as _;
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = std::io::BufWriter::new(file);
    for m in 0..matrix.nrows() {
        let cells: Vec<String> = matrix
            .row(m)
            .iter()
            .flat_map(|z| [z.re.to_string(), z.im.to_string()])
            .collect();
        writeln!(out, "{}", cells.join(",")).map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}

/// Assembles the M x (K * N) channel matrix for a realized user layout.
///
/// Column (k, n) is built link by link with user k's state vector: all
/// antennas of a user share its states, per-window shadowing and K-factors,
/// while the small-scale draws are independent across every entry. Links of
/// a visibility-region vector bypass the mixed model: visible links are
/// Rayleigh, invisible links are exactly zero.
///
/// Draws consume the stream column by column (user-major), each column top
/// to bottom.
pub fn channel_matrix<R: Rng + ?Sized>(
    geometry: &ArrayGeometry,
    layout: &UserLayout,
    positions: &[Point3],
    states: &[LinkStateVector],
    params: &ScenarioParams,
    overrides: ModelOverrides,
    rng: &mut R,
) -> Result<ChannelRealization> {
    if positions.len() != layout.users || states.len() != layout.users {
        return Err(Error::invalid(format!(
            "need one position and one state vector per user: K = {}, got {} positions, {} state vectors",
            layout.users,
            positions.len(),
            states.len()
        )));
    }
    let m_count = geometry.len();
    for (k, sv) in states.iter().enumerate() {
        if sv.len() != m_count {
            return Err(Error::invalid(format!(
                "state vector of user {k} covers {} antennas, geometry has {m_count}",
                sv.len()
            )));
        }
        if sv.kind != states[0].kind {
            return Err(Error::invalid(
                "state vectors mix NLoS/LoS and visibility kinds",
            ));
        }
    }

    let normalization = normalization_constant(
        geometry,
        layout,
        positions,
        params,
        overrides,
        &states[0].kind,
    )?;

    let n_total = layout.total_antennas();
    let mut matrix = DMatrix::zeros(m_count, n_total);
    for (k, (&user, sv)) in positions.iter().zip(states.iter()).enumerate() {
        let window_ids = sv.window_ids();
        for n in 0..layout.antennas_per_user {
            let col = k * layout.antennas_per_user + n;
            for m in 0..m_count {
                let d = if overrides.unit_distance {
                    1.0
                } else {
                    distance_3d(user, geometry.element_positions[m])
                };
                let w = window_ids[m];
                let shadow = sv.shadowing[w];
                let value = match sv.kind {
                    StateKind::Visibility { .. } => {
                        if sv.states[m] {
                            let h = nlos_coefficient(d, params.alpha, params.rho, rng)?;
                            h.value * shadow.sqrt()
                        } else {
                            Complex64::new(0.0, 0.0)
                        }
                    }
                    StateKind::NlosLos => {
                        if sv.states[m] {
                            let kappa = sv.kappa[w].ok_or_else(|| {
                                Error::invalid(format!(
                                    "LoS window {w} of user {k} has no K-factor"
                                ))
                            })?;
                            let los = los_coefficient(
                                d,
                                params.beta,
                                params.q,
                                kappa,
                                params.lambda,
                                rng,
                            )?;
                            mixed_coefficient(true, shadow, 1.0, &los, &LinkCoefficient::zero())?
                                .value
                        } else {
                            let nlos = nlos_coefficient(d, params.alpha, params.rho, rng)?;
                            mixed_coefficient(false, 1.0, shadow, &LinkCoefficient::zero(), &nlos)?
                                .value
                        }
                    }
                };
                matrix[(m, col)] = value;
            }
        }
    }

    Ok(ChannelRealization {
        matrix,
        normalization,
    })
}
