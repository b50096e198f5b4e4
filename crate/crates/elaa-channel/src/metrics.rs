//! Per-trial observables and their empirical distributions.
//!
//! Capacity is the equal-power MIMO mutual information
//! `log2 det(I + (snr / n_tx) H^H H)` evaluated through a Cholesky
//! factorization of the Gram matrix (the smaller of the two Gram forms is
//! used; both give the same determinant).

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use nalgebra::{Cholesky, DMatrix, DMatrixView};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default dB floor substituted for structurally zero links.
pub const RSS_FLOOR_DB: f64 = -250.0;

/// Frobenius norm, `sqrt(sum |h_mn|^2)`.
pub fn frobenius_norm(h: &DMatrix<Complex64>) -> f64 {
    h.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Equal-power channel capacity in bits/s/Hz at the given average SNR.
///
/// `snr_db` is the ratio of total transmit power to noise power; `n_tx`
/// must equal the number of matrix columns (total transmit antennas).
pub fn capacity(h_bar: &DMatrix<Complex64>, snr_db: f64, n_tx: usize) -> Result<f64> {
    if h_bar.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::invalid("channel matrix has non-finite entries"));
    }
    if n_tx == 0 || n_tx != h_bar.ncols() {
        return Err(Error::invalid(format!(
            "n_tx must equal the column count: n_tx = {n_tx}, columns = {}",
            h_bar.ncols()
        )));
    }
    let gamma = 10f64.powf(snr_db / 10.0);
    let scale = Complex64::from(gamma / n_tx as f64);
    let gram = if h_bar.nrows() >= h_bar.ncols() {
        h_bar.adjoint() * h_bar
    } else {
        h_bar * h_bar.adjoint()
    };
    let dim = gram.nrows();
    let shifted = DMatrix::identity(dim, dim) + gram * scale;
    let chol = Cholesky::new(shifted)
        .ok_or_else(|| Error::invalid("capacity Gram matrix is not positive definite"))?;
    // det = prod diag(L)^2, so log2 det = 2 sum log2 diag(L).
    Ok(2.0 * chol.l().diagonal().iter().map(|d| d.re.log2()).sum::<f64>())
}

/// Per-service-antenna received signal strength for one user: the link
/// power averaged over the user's columns, in linear units (normalized by
/// the transmit power). Convert with [`to_db`] for output.
pub fn rss_per_link(user_columns: DMatrixView<Complex64>) -> Vec<f64> {
    let n = user_columns.ncols().max(1) as f64;
    (0..user_columns.nrows())
        .map(|m| {
            user_columns
                .row(m)
                .iter()
                .map(|z| z.norm_sqr())
                .sum::<f64>()
                / n
        })
        .collect()
}

/// Linear power to dB with a configurable floor for zero links.
pub fn to_db(linear: f64, floor_db: f64) -> f64 {
    if linear <= 0.0 {
        floor_db
    } else {
        (10.0 * linear.log10()).max(floor_db)
    }
}

/// Empirical CDF of a scalar sample set.
///
/// Values are sorted ascending with cumulative probability `(i + 1) / n` at
/// the i-th value, so the last cumulative probability is exactly 1.
/// Percentiles use the nearest-rank convention.
#[derive(Debug, Clone)]
pub struct CdfSummary {
    values: Vec<f64>,
}

impl CdfSummary {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Sample values, sorted ascending.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Nearest-rank percentile, `q` in [0, 1].
    pub fn percentile(&self, q: f64) -> f64 {
        let n = self.values.len();
        let rank = ((q * n as f64).ceil() as usize).clamp(1, n);
        self.values[rank - 1]
    }

    /// `(value, cumulative_probability)` pairs.
    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let n = self.values.len() as f64;
        self.values
            .iter()
            .enumerate()
            .map(move |(i, &v)| (v, (i + 1) as f64 / n))
    }

    /// Two-column CSV: value, cumulative_probability.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        writeln!(out, "value,cumulative_probability").map_err(|e| Error::io(path, e))?;
        for (v, p) in self.points() {
            writeln!(out, "{v},{p}").map_err(|e| Error::io(path, e))?;
        }
        Ok(())
    }
}

/// Builds the empirical CDF of the samples.
pub fn empirical_cdf(samples: &[f64]) -> Result<CdfSummary> {
    if samples.is_empty() {
        return Err(Error::invalid("empirical CDF needs at least one sample"));
    }
    if samples.iter().any(|v| v.is_nan()) {
        return Err(Error::invalid("samples must not contain NaN"));
    }
    let mut values = samples.to_vec();
    values.sort_by(|a, b| a.partial_cmp(b).expect("NaN excluded above"));
    Ok(CdfSummary { values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng as _;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rows: usize, cols: usize, seed: u64) -> DMatrix<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DMatrix::from_fn(rows, cols, |_, _| crate::fading::complex_gaussian(&mut rng))
    }

    // Laplace cofactor expansion; the independent determinant oracle.
    fn det_expansion(a: &DMatrix<Complex64>) -> Complex64 {
        let n = a.nrows();
        if n == 1 {
            return a[(0, 0)];
        }
        let mut det = Complex64::new(0.0, 0.0);
        for j in 0..n {
            let minor = a.clone().remove_row(0).remove_column(j);
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            det += a[(0, j)] * det_expansion(&minor) * sign;
        }
        det
    }

    #[test]
    fn frobenius_norm_basics() {
        assert_eq!(frobenius_norm(&DMatrix::zeros(4, 3)), 0.0);
        let eye = DMatrix::from_diagonal_element(3, 3, Complex64::new(1.0, 0.0));
        assert!((frobenius_norm(&eye) - 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn frobenius_norm_matches_elementwise_sum() {
        let h = random_matrix(5, 3, 1);
        let brute: f64 = h
            .iter()
            .map(|z| z.re * z.re + z.im * z.im)
            .sum::<f64>()
            .sqrt();
        let got = frobenius_norm(&h);
        assert!((got - brute).abs() / brute < 1e-12);
    }

    #[test]
    fn scalar_capacity_is_log2_one_plus_snr() {
        let h = DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0));
        let c = capacity(&h, 10.0, 1).unwrap();
        assert!((c - 3.459_431_618_637_297_3).abs() < 1e-12);
    }

    #[test]
    fn zero_channel_has_zero_capacity() {
        let h = DMatrix::zeros(6, 3);
        assert_eq!(capacity(&h, 10.0, 3).unwrap(), 0.0);
    }

    #[test]
    fn capacity_matches_direct_determinant_on_4x4() {
        for seed in 0..5u64 {
            let h = random_matrix(4, 4, 100 + seed);
            let got = capacity(&h, 10.0, 4).unwrap();
            let gram = h.adjoint() * &h;
            let shifted = DMatrix::identity(4, 4) + gram * Complex64::from(10.0 / 4.0);
            let expect = det_expansion(&shifted).norm().log2();
            assert!(
                (got - expect).abs() / expect.abs() < 1e-9,
                "seed {seed}: {got} vs {expect}"
            );
        }
    }

    #[test]
    fn both_gram_forms_agree_on_tall_matrices() {
        for seed in 0..5u64 {
            let h = random_matrix(12, 4, 200 + seed);
            let got = capacity(&h, 10.0, 4).unwrap();
            let scale = Complex64::from(10.0 / 4.0);
            let big = DMatrix::identity(12, 12) + (&h * h.adjoint()) * scale;
            let expect = big.determinant().norm().log2();
            assert!(
                (got - expect).abs() / expect.abs() < 1e-9,
                "seed {seed}: {got} vs {expect}"
            );
        }
    }

    #[test]
    fn capacity_is_invariant_under_column_permutation() {
        let h = random_matrix(8, 3, 7);
        let mut permuted = h.clone();
        permuted.swap_columns(0, 2);
        let a = capacity(&h, 10.0, 3).unwrap();
        let b = capacity(&permuted, 10.0, 3).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn capacity_rejects_bad_inputs() {
        let mut h = random_matrix(4, 2, 9);
        assert!(capacity(&h, 10.0, 4).is_err(), "n_tx must match columns");
        h[(0, 0)] = Complex64::new(f64::NAN, 0.0);
        assert!(capacity(&h, 10.0, 2).is_err());
    }

    #[test]
    fn rss_zero_column_hits_floor() {
        let h: DMatrix<Complex64> = DMatrix::zeros(4, 2);
        let rss = rss_per_link(h.columns(0, 2));
        assert!(rss.iter().all(|&v| v == 0.0));
        assert_eq!(to_db(rss[0], RSS_FLOOR_DB), RSS_FLOOR_DB);
    }

    #[test]
    fn rss_unit_amplitude_is_zero_db() {
        let h = DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0));
        let rss = rss_per_link(h.columns(0, 1));
        assert_eq!(to_db(rss[0], RSS_FLOOR_DB), 0.0);
    }

    #[test]
    fn los_links_carry_higher_median_rss_than_nlos_at_equal_distance() {
        use crate::los_state::generate_states_with_p;
        use crate::scenario::{build_ula, DensityMode, ModelOverrides, ScenarioParams, UserLayout};
        let params = ScenarioParams::default();
        let g = build_ula(1, params.half_wavelength(), [0.0, 0.0, 10.0], 10.0).unwrap();
        let layout = UserLayout::new(1, 1, DensityMode::High, [0.0, 20.0, 10.0]);
        let positions = [[0.0, 20.0, 10.0]];
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let mut median_power = |p: f64| {
            let mut powers: Vec<f64> = (0..1000)
                .map(|_| {
                    let states = vec![generate_states_with_p(&g, &params, &[p], &mut rng).unwrap()];
                    let r = crate::fading::channel_matrix(
                        &g,
                        &layout,
                        &positions,
                        &states,
                        &params,
                        ModelOverrides::default(),
                        &mut rng,
                    )
                    .unwrap();
                    rss_per_link(r.matrix.columns(0, 1))[0]
                })
                .collect();
            powers.sort_by(|a, b| a.partial_cmp(b).unwrap());
            powers[500]
        };
        let los_median = median_power(1.0);
        let nlos_median = median_power(0.0);
        assert!(
            los_median > nlos_median,
            "LoS median {los_median:.3e} should exceed NLoS median {nlos_median:.3e} at 20 m"
        );
    }

    #[test]
    fn cdf_single_sample_is_one_step() {
        let cdf = empirical_cdf(&[3.25]).unwrap();
        assert_eq!(cdf.len(), 1);
        assert_eq!(cdf.percentile(0.0), 3.25);
        assert_eq!(cdf.percentile(1.0), 3.25);
        let pts: Vec<_> = cdf.points().collect();
        assert_eq!(pts, vec![(3.25, 1.0)]);
    }

    #[test]
    fn nearest_rank_percentile() {
        let cdf = empirical_cdf(&[4.0, 2.0, 3.0, 1.0]).unwrap();
        assert_eq!(cdf.percentile(0.5), 2.0);
        assert_eq!(cdf.percentile(0.25), 1.0);
        assert_eq!(cdf.percentile(0.75), 3.0);
        assert_eq!(cdf.percentile(1.0), 4.0);
    }

    #[test]
    fn cdf_rejects_empty_and_nan() {
        assert!(empirical_cdf(&[]).is_err());
        assert!(empirical_cdf(&[1.0, f64::NAN]).is_err());
    }

    #[test]
    fn uniform_samples_pass_kolmogorov_smirnov() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let samples: Vec<f64> = (0..100_000).map(|_| rng.gen::<f64>()).collect();
        let cdf = empirical_cdf(&samples).unwrap();
        let n = cdf.len() as f64;
        let mut dist: f64 = 0.0;
        for (i, &v) in cdf.values().iter().enumerate() {
            dist = dist.max((v - i as f64 / n).abs());
            dist = dist.max(((i + 1) as f64 / n - v).abs());
        }
        assert!(dist < 0.01, "KS distance {dist}");
    }

    proptest! {
        #[test]
        fn capacity_is_monotone_in_snr(seed in 0u64..50) {
            let h = random_matrix(4, 2, seed);
            let mut prev = f64::NEG_INFINITY;
            for snr_db in [-10.0, 0.0, 5.0, 10.0, 20.0] {
                let c = capacity(&h, snr_db, 2).unwrap();
                prop_assert!(c >= prev - 1e-12);
                prev = c;
            }
        }

        #[test]
        fn cdf_points_are_nondecreasing(samples in prop::collection::vec(-1e6f64..1e6, 1..200)) {
            let cdf = empirical_cdf(&samples).unwrap();
            let pts: Vec<_> = cdf.points().collect();
            for w in pts.windows(2) {
                prop_assert!(w[1].0 >= w[0].0);
                prop_assert!(w[1].1 >= w[0].1);
            }
            prop_assert!((pts.last().unwrap().1 - 1.0).abs() < 1e-12);
        }
    }
}
