//! Correlated NLoS/LoS link states.
//!
//! Each user-to-service-antenna link carries a binary state b_m (1 = LoS).
//! States are not independent across the array: the probability for two
//! links to share a state decays exponentially with the antenna separation,
//! `P(l, m) = exp(-delta(l, m) / d_cor)`, which for a half-wavelength ULA
//! becomes `exp(-lambda |l - m| / (2 d_cor))`.
//!
//! The generator walks the array with an anchor antenna l:
//!
//! 1. the anchor state is Bernoulli with the 3GPP UMi LoS probability
//!    evaluated at the anchor's own 2-D distance;
//! 2. each subsequent antenna m matches the anchor with probability
//!    `exp(-delta(l, m) / d_cor)`; a match extends the current window;
//! 3. on a mismatch the candidate value is discarded and antenna m becomes
//!    a fresh anchor whose state is redrawn from its own Bernoulli law.
//!
//! The run of antennas served by one anchor is a *window*. All links of a
//! window share one shadowing multiplier and, when LoS, one Rician K-factor.
//! The induced window-length law is
//! `f(L) = exp(-lambda (L^2 - L) / (4 d_cor)) - exp(-lambda (L^2 + L) / (4 d_cor))`,
//! which [`window_length_pmf`] exposes as an analytic oracle for the
//! generator.
//!
//! Random draws consume the stream in a fixed order: anchor state, then
//! per-antenna match draws (interleaved as the walk progresses), then one
//! shadowing multiplier per window, then one K-factor per LoS window.
//! Results are therefore bit-reproducible per seed.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::scenario::{distance_2d, ArrayGeometry, ArrayLayout, Point3, ScenarioParams};

/// How the binary states of a [`LinkStateVector`] are to be read.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StateKind {
    /// `true` = LoS link, `false` = NLoS link.
    NlosLos,
    /// `true` = inside the visibility region (full gain), `false` = zero
    /// gain. Carries the log-normal law the region length was drawn from so
    /// the normalization can be computed analytically.
    Visibility { mu_len: f64, sigma_len: f64 },
}

/// One generator window: a run of consecutive antennas sharing a state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StateWindow {
    pub start: usize,
    pub len: usize,
    pub state: bool,
}

/// Per-antenna binary states plus the window partition and the per-window
/// large-scale draws.
///
/// Windows partition `0..M` contiguously and record the generator
/// segmentation, not maximal runs: adjacent windows may share a state when
/// an anchor reset happens to redraw the same value.
#[derive(Debug, Clone)]
pub struct LinkStateVector {
    pub states: Vec<bool>,
    pub windows: Vec<StateWindow>,
    /// Linear power multiplier per window, strictly positive.
    pub shadowing: Vec<f64>,
    /// Rician K-factor per window; `Some` exactly for LoS windows.
    pub kappa: Vec<Option<f64>>,
    pub kind: StateKind,
}

impl LinkStateVector {
    /// Number of links M.
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Window index of every antenna, expanded from the partition.
    pub fn window_ids(&self) -> Vec<usize> {
        let mut ids = vec![0usize; self.len()];
        for (w, window) in self.windows.iter().enumerate() {
            for id in &mut ids[window.start..window.start + window.len] {
                *id = w;
            }
        }
        ids
    }

    /// Writes one CSV row per antenna: index, state, window_id, shadowing,
    /// kappa (empty for NLoS windows).
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        let ids = self.window_ids();
        writeln!(out, "index,state,window_id,shadowing,kappa").map_err(|e| Error::io(path, e))?;
        for (m, (&state, &w)) in self.states.iter().zip(ids.iter()).enumerate() {
            let kappa = match self.kappa[w] {
                Some(k) => k.to_string(),
                None => String::new(),
            };
            writeln!(
                out,
                "{},{},{},{},{}",
                m, state as u8, w, self.shadowing[w], kappa
            )
            .map_err(|e| Error::io(path, e))?;
        }
        Ok(())
    }
}

/// 3GPP UMi LoS probability as a function of the 2-D distance:
/// `min(d1/d, 1) * (1 - exp(-d/d2)) + exp(-d/d2)`.
///
/// For `d2d <= d1_bar` the min term saturates and the expression collapses
/// to exactly 1.
pub fn los_probability(d2d: f64, d1_bar: f64, d2_bar: f64) -> Result<f64> {
    Error::require_nonnegative(d2d, "d2d")?;
    Error::require_positive(d1_bar, "d1_bar")?;
    Error::require_positive(d2_bar, "d2_bar")?;
    if d2d <= d1_bar {
        return Ok(1.0);
    }
    let decay = (-d2d / d2_bar).exp();
    Ok((d1_bar / d2d) * (1.0 - decay) + decay)
}

/// Probability for two service antennas separated by `delta` meters to
/// share the same NLoS/LoS state: `exp(-delta / d_cor)`.
///
/// For ULA indices l, m at half-wavelength spacing use
/// `delta = lambda * |l - m| / 2`.
pub fn pair_same_state_probability(delta: f64, d_cor: f64) -> Result<f64> {
    Error::require_nonnegative(delta, "delta")?;
    Error::require_positive(d_cor, "d_cor")?;
    Ok((-delta / d_cor).exp())
}

/// LoS probability of an antenna at separation `delta` from an anchor whose
/// own LoS probability is `p`: `(2p - 1) exp(-delta/d_cor) + 1 - p`.
///
/// Algebraically identical to `p * P + (1 - p) * (1 - P)` with `P` the
/// pair-same-state probability.
pub fn conditional_los_probability(p: f64, delta: f64, d_cor: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("p must be in [0, 1], got {p}")));
    }
    let same = pair_same_state_probability(delta, d_cor)?;
    // Fused multiply-add keeps the cancellation for p < 0.5 inside one
    // rounding so both algebraic forms of the law stay within a few ulp.
    Ok((2.0 * p - 1.0).mul_add(same, 1.0 - p))
}

/// PMF of the NLoS/LoS window length (in antennas at half-wavelength
/// spacing) induced by the anchor process.
pub fn window_length_pmf(len: usize, lambda: f64, d_cor: f64) -> Result<f64> {
    if len < 1 {
        return Err(Error::invalid("window length must be >= 1"));
    }
    Error::require_positive(lambda, "lambda")?;
    Error::require_positive(d_cor, "d_cor")?;
    let l = len as f64;
    let a = (-lambda * (l * l - l) / (4.0 * d_cor)).exp();
    let b = (-lambda * (l * l + l) / (4.0 * d_cor)).exp();
    Ok(a - b)
}

/// CDF of the window length: the partial sums of [`window_length_pmf`]
/// telescope to `1 - exp(-lambda L (L + 1) / (4 d_cor))`.
pub fn window_length_cdf(len: usize, lambda: f64, d_cor: f64) -> Result<f64> {
    if len < 1 {
        return Err(Error::invalid("window length must be >= 1"));
    }
    Error::require_positive(lambda, "lambda")?;
    Error::require_positive(d_cor, "d_cor")?;
    let l = len as f64;
    Ok(1.0 - (-lambda * l * (l + 1.0) / (4.0 * d_cor)).exp())
}

// One step of the anchor walk: does the candidate at separation `delta`
// match the anchor state?
fn candidate_matches<R: Rng + ?Sized>(rng: &mut R, delta: f64, d_cor: f64) -> bool {
    rng.gen_bool((-delta / d_cor).exp())
}

/// Generates the correlated state vector for one user over a ULA.
///
/// The per-antenna LoS probability is the 3GPP curve at the antenna's own
/// 2-D distance from `user`. When the element spacing is not lambda/2 the
/// window lengths are drawn in meters instead (`(L - 1) * lambda / 2`) and
/// mapped onto the actual element positions.
pub fn generate_states<R: Rng + ?Sized>(
    geometry: &ArrayGeometry,
    user: Point3,
    params: &ScenarioParams,
    rng: &mut R,
) -> Result<LinkStateVector> {
    let p_los = per_antenna_p_los(geometry, user, params)?;
    generate_states_with_p(geometry, params, &p_los, rng)
}

/// As [`generate_states`] but with an explicit per-antenna LoS probability,
/// used by the model presets (e.g. forcing all-NLoS or all-LoS).
pub fn generate_states_with_p<R: Rng + ?Sized>(
    geometry: &ArrayGeometry,
    params: &ScenarioParams,
    p_los: &[f64],
    rng: &mut R,
) -> Result<LinkStateVector> {
    if geometry.layout != ArrayLayout::Ula {
        return Err(Error::invalid(
            "generate_states expects a ULA; use generate_states_ura for URA geometry",
        ));
    }
    generate_row_states(geometry, params, p_los, rng)
}

// State generation over a single row of antennas. Shared by the ULA path
// and the lowest-row pass of the URA extension.
fn generate_row_states<R: Rng + ?Sized>(
    geometry: &ArrayGeometry,
    params: &ScenarioParams,
    p_los: &[f64],
    rng: &mut R,
) -> Result<LinkStateVector> {
    let m_count = geometry.len();
    if m_count == 0 {
        return Err(Error::invalid("geometry has no elements"));
    }
    if p_los.len() != m_count {
        return Err(Error::invalid(format!(
            "need one LoS probability per antenna: got {} for M = {}",
            p_los.len(),
            m_count
        )));
    }
    for &p in p_los {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::invalid(format!(
                "LoS probability {p} outside [0, 1]"
            )));
        }
    }
    params.validate()?;

    let half_wl = params.half_wavelength();
    let index_mode = (geometry.spacing - half_wl).abs() <= 1e-9 * half_wl;

    let (states, windows) = if index_mode {
        anchor_walk(m_count, params, p_los, rng)
    } else {
        metric_windows(geometry, params, p_los, rng)
    };

    let (shadowing, kappa) = draw_window_scales(&windows, params, rng);
    Ok(LinkStateVector {
        states,
        windows,
        shadowing,
        kappa,
        kind: StateKind::NlosLos,
    })
}

// The pseudo-random anchor walk at half-wavelength spacing. The match
// probability is measured anchor-to-current, exp(-lambda (m - l) / (2 d_cor)).
fn anchor_walk<R: Rng + ?Sized>(
    m_count: usize,
    params: &ScenarioParams,
    p_los: &[f64],
    rng: &mut R,
) -> (Vec<bool>, Vec<StateWindow>) {
    let mut states = Vec::with_capacity(m_count);
    let mut windows = Vec::new();

    let mut anchor = 0usize;
    let mut anchor_state = rng.gen_bool(p_los[0]);
    states.push(anchor_state);

    for (m, &p) in p_los.iter().enumerate().skip(1) {
        let delta = params.lambda * (m - anchor) as f64 / 2.0;
        if candidate_matches(rng, delta, params.d_cor) {
            states.push(anchor_state);
        } else {
            // Mismatch: close the window and regenerate independently.
            windows.push(StateWindow {
                start: anchor,
                len: m - anchor,
                state: anchor_state,
            });
            anchor = m;
            anchor_state = rng.gen_bool(p);
            states.push(anchor_state);
        }
    }
    windows.push(StateWindow {
        start: anchor,
        len: m_count - anchor,
        state: anchor_state,
    });
    (states, windows)
}

// Non-half-wavelength spacing: window lengths are drawn from the analytic
// length law, converted to meters as (L - 1) * lambda / 2, and every antenna
// whose position falls inside the metric window inherits its state. Stream
// order is one (state, length) pair per window.
fn metric_windows<R: Rng + ?Sized>(
    geometry: &ArrayGeometry,
    params: &ScenarioParams,
    p_los: &[f64],
    rng: &mut R,
) -> (Vec<bool>, Vec<StateWindow>) {
    let m_count = geometry.len();
    let origin = geometry.element_positions[0];
    let offsets: Vec<f64> = geometry
        .element_positions
        .iter()
        .map(|&e| crate::scenario::distance_3d(origin, e))
        .collect();

    let mut states = Vec::with_capacity(m_count);
    let mut windows = Vec::new();
    let mut start = 0usize;
    while start < m_count {
        let state = rng.gen_bool(p_los[start]);
        let len_antennas = sample_window_length(params.lambda, params.d_cor, rng);
        let len_meters = (len_antennas - 1) as f64 * params.half_wavelength();
        let mut end = start + 1;
        while end < m_count && offsets[end] - offsets[start] <= len_meters {
            end += 1;
        }
        for _ in start..end {
            states.push(state);
        }
        windows.push(StateWindow {
            start,
            len: end - start,
            state,
        });
        start = end;
    }
    (states, windows)
}

// Inverse-CDF draw of the window length law.
fn sample_window_length<R: Rng + ?Sized>(lambda: f64, d_cor: f64, rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    // Smallest integer L >= 1 with 1 - exp(-lambda L(L+1) / (4 d_cor)) >= u.
    let t = -4.0 * d_cor * (1.0 - u).ln() / lambda;
    let l = ((-1.0 + (1.0 + 4.0 * t).sqrt()) / 2.0).ceil();
    (l as usize).max(1)
}

// Per-window large-scale draws, in window order: shadowing first, then the
// K-factors of the LoS windows.
fn draw_window_scales<R: Rng + ?Sized>(
    windows: &[StateWindow],
    params: &ScenarioParams,
    rng: &mut R,
) -> (Vec<f64>, Vec<Option<f64>>) {
    let shadowing: Vec<f64> = windows
        .iter()
        .map(|w| {
            let sigma = if w.state {
                params.sigma_los
            } else {
                params.sigma_nlos
            };
            let z: f64 = rng.sample(StandardNormal);
            (sigma * z).exp()
        })
        .collect();
    let kappa: Vec<Option<f64>> = windows
        .iter()
        .map(|w| {
            w.state.then(|| {
                let z: f64 = rng.sample(StandardNormal);
                (params.mu_kappa + params.sigma_kappa * z).exp()
            })
        })
        .collect();
    (shadowing, kappa)
}

fn per_antenna_p_los(
    geometry: &ArrayGeometry,
    user: Point3,
    params: &ScenarioParams,
) -> Result<Vec<f64>> {
    geometry
        .element_positions
        .iter()
        .map(|&e| los_probability(distance_2d(user, e), params.d1_bar, params.d2_bar))
        .collect()
}

/// URA extension: the anchor walk runs on the lowest row; within a column
/// visibility is monotone upward. A LoS element makes every element above
/// it LoS; above an NLoS element the state is redrawn from the element's
/// own Bernoulli law.
pub fn generate_states_ura<R: Rng + ?Sized>(
    geometry: &ArrayGeometry,
    user: Point3,
    params: &ScenarioParams,
    rng: &mut R,
) -> Result<LinkStateVector> {
    let p_los = per_antenna_p_los(geometry, user, params)?;
    generate_states_ura_with_p(geometry, params, &p_los, rng)
}

/// As [`generate_states_ura`] with explicit per-antenna LoS probabilities.
pub fn generate_states_ura_with_p<R: Rng + ?Sized>(
    geometry: &ArrayGeometry,
    params: &ScenarioParams,
    p_los: &[f64],
    rng: &mut R,
) -> Result<LinkStateVector> {
    let (rows, cols) = match geometry.layout {
        ArrayLayout::Ura { rows, cols } => (rows, cols),
        ArrayLayout::Ula => {
            return Err(Error::invalid(
                "generate_states_ura expects URA geometry; use generate_states for a ULA",
            ))
        }
    };
    if p_los.len() != rows * cols {
        return Err(Error::invalid("need one LoS probability per URA element"));
    }

    // Lowest row behaves exactly like a ULA of the same spacing.
    let bottom = ArrayGeometry {
        layout: ArrayLayout::Ula,
        spacing: geometry.spacing,
        element_positions: geometry.element_positions[..cols].to_vec(),
    };
    let base = generate_row_states(&bottom, params, &p_los[..cols], rng)?;
    if rows == 1 {
        return Ok(base);
    }

    let mut states = vec![false; rows * cols];
    states[..cols].copy_from_slice(&base.states);
    // Upward pass, column by column: LoS propagates, NLoS is redrawn.
    for c in 0..cols {
        for r in 1..rows {
            let idx = r * cols + c;
            states[idx] = if states[(r - 1) * cols + c] {
                true
            } else {
                rng.gen_bool(p_los[idx])
            };
        }
    }

    // Windows: the generator partition on the lowest row, then maximal
    // constant-state runs on each upper row, each with fresh per-window
    // draws.
    let mut windows = base.windows.clone();
    for r in 1..rows {
        let row_start = r * cols;
        let mut start = row_start;
        for i in row_start + 1..row_start + cols {
            if states[i] != states[start] {
                windows.push(StateWindow {
                    start,
                    len: i - start,
                    state: states[start],
                });
                start = i;
            }
        }
        windows.push(StateWindow {
            start,
            len: row_start + cols - start,
            state: states[start],
        });
    }

    let upper = &windows[base.windows.len()..];
    let (upper_shadowing, upper_kappa) = draw_window_scales(upper, params, rng);
    let mut shadowing = base.shadowing;
    shadowing.extend(upper_shadowing);
    let mut kappa = base.kappa;
    kappa.extend(upper_kappa);

    Ok(LinkStateVector {
        states,
        windows,
        shadowing,
        kappa,
        kind: StateKind::NlosLos,
    })
}

/// Single visibility region on a ULA: a region of length
/// `L ~ LogNormal(mu_len, sigma_len)` (rounded to whole antennas and
/// clamped to `[1, M]`) is placed uniformly at random; antennas inside
/// carry full gain, antennas outside carry none.
pub fn generate_states_model5<R: Rng + ?Sized>(
    m_count: usize,
    mu_len: f64,
    sigma_len: f64,
    rng: &mut R,
) -> Result<LinkStateVector> {
    if m_count < 1 {
        return Err(Error::invalid("antenna count M must be >= 1"));
    }
    Error::require_nonnegative(sigma_len, "sigma_len")?;
    let z: f64 = rng.sample(StandardNormal);
    let raw = (mu_len + sigma_len * z).exp();
    let len = (raw.round() as usize).clamp(1, m_count);
    let start = rng.gen_range(0..=m_count - len);

    let mut states = vec![false; m_count];
    states[start..start + len]
        .iter_mut()
        .for_each(|s| *s = true);

    let mut windows = Vec::with_capacity(3);
    if start > 0 {
        windows.push(StateWindow {
            start: 0,
            len: start,
            state: false,
        });
    }
    windows.push(StateWindow {
        start,
        len,
        state: true,
    });
    if start + len < m_count {
        windows.push(StateWindow {
            start: start + len,
            len: m_count - start - len,
            state: false,
        });
    }

    let shadowing = vec![1.0; windows.len()];
    let kappa = vec![None; windows.len()];
    Ok(LinkStateVector {
        states,
        windows,
        shadowing,
        kappa,
        kind: StateKind::Visibility { mu_len, sigma_len },
    })
}
