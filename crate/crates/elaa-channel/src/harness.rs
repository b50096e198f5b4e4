//! Monte-Carlo experiment driver.
//!
//! A run is fully determined by its [`SimulationConfig`]: per-trial random
//! streams are derived from the master seed and the trial index through the
//! ChaCha stream counter (stream 0 is reserved for the fixed-layout user
//! placement, trial i uses stream i + 1), so trials can execute on any
//! number of workers without changing any output byte.
//!
//! Within a trial the stream is consumed in a fixed order: user placement
//! (unless the layout is fixed), then one state vector per user (a single
//! shared vector in the high-density regime), then the small-scale matrix
//! draws.

use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fading::channel_matrix;
use crate::los_state::{
    generate_states, generate_states_model5, generate_states_with_p, LinkStateVector, StateKind,
};
use crate::metrics::{
    capacity, empirical_cdf, frobenius_norm, rss_per_link, to_db, CdfSummary, RSS_FLOOR_DB,
};
use crate::normalization::{normalization_constant, normalize, NormalizationConstant};
use crate::scenario::{
    build_ula, place_users, ArrayGeometry, DensityMode, ModelOverrides, Point3, ScenarioParams,
    UserLayout,
};

/// The five channel-model presets of the capacity study.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PresetId {
    /// Full mixed NLoS/LoS non-stationary model.
    I,
    /// i.i.d. Rayleigh reference (all-NLoS, unit distance, unit gain,
    /// no shadowing).
    II,
    /// Non-stationary Rayleigh (all-NLoS, spherical distances, no
    /// shadowing).
    III,
    /// Non-stationary Rician (all-LoS, no shadowing).
    IV,
    /// Single log-normal visibility region, no shadowing.
    V,
}

impl FromStr for PresetId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "I" | "1" => Ok(PresetId::I),
            "II" | "2" => Ok(PresetId::II),
            "III" | "3" => Ok(PresetId::III),
            "IV" | "4" => Ok(PresetId::IV),
            "V" | "5" => Ok(PresetId::V),
            other => Err(Error::invalid(format!(
                "unknown model preset `{other}` (expected I..V)"
            ))),
        }
    }
}

impl fmt::Display for PresetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            PresetId::I => "I",
            PresetId::II => "II",
            PresetId::III => "III",
            PresetId::IV => "IV",
            PresetId::V => "V",
        };
        f.write_str(s)
    }
}

/// Parameter overrides a preset applies on top of the base scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelPreset {
    pub id: PresetId,
    /// Constant LoS probability replacing the 3GPP curve.
    pub p_los_override: Option<f64>,
    /// Force every link distance to 1 m (kills the spherical wavefront).
    pub unit_distance: bool,
    pub alpha_override: Option<f64>,
    pub zero_nlos_shadowing: bool,
    pub zero_los_shadowing: bool,
    /// `(mu, sigma)` of the log-normal visibility-region length, in
    /// antennas.
    pub visibility: Option<(f64, f64)>,
}

/// Builds the override set for a preset.
pub fn model_preset(id: PresetId) -> ModelPreset {
    let base = ModelPreset {
        id,
        p_los_override: None,
        unit_distance: false,
        alpha_override: None,
        zero_nlos_shadowing: false,
        zero_los_shadowing: false,
        visibility: None,
    };
    match id {
        PresetId::I => base,
        PresetId::II => ModelPreset {
            p_los_override: Some(0.0),
            unit_distance: true,
            alpha_override: Some(1.0),
            zero_nlos_shadowing: true,
            ..base
        },
        PresetId::III => ModelPreset {
            p_los_override: Some(0.0),
            zero_nlos_shadowing: true,
            ..base
        },
        PresetId::IV => ModelPreset {
            p_los_override: Some(1.0),
            zero_los_shadowing: true,
            ..base
        },
        PresetId::V => ModelPreset {
            visibility: Some((4f64.ln(), 0.2f64.ln().abs())),
            zero_nlos_shadowing: true,
            zero_los_shadowing: true,
            ..base
        },
    }
}

impl ModelPreset {
    /// Base parameters with the global shadowing toggle and the preset's
    /// overrides applied.
    pub fn effective_params(&self, base: &ScenarioParams, shadowing: bool) -> ScenarioParams {
        let mut p = base.clone();
        if !shadowing {
            p.sigma_los = 0.0;
            p.sigma_nlos = 0.0;
        }
        if self.zero_los_shadowing {
            p.sigma_los = 0.0;
        }
        if self.zero_nlos_shadowing {
            p.sigma_nlos = 0.0;
        }
        if let Some(alpha) = self.alpha_override {
            p.alpha = alpha;
        }
        p
    }

    /// Link-level switches consumed by the matrix builder and the
    /// normalization.
    pub fn overrides(&self) -> ModelOverrides {
        ModelOverrides {
            p_los: self.p_los_override,
            unit_distance: self.unit_distance,
        }
    }
}

/// Complete description of one Monte-Carlo run.
#[derive(Debug, Clone)]
pub struct SimulationConfig {
    pub preset: PresetId,
    pub trials: usize,
    pub seed: u64,
    /// Number of service antennas M.
    pub antennas: usize,
    /// Number of users K.
    pub users: usize,
    /// Antennas per user N; K * N transmit antennas in total.
    pub antennas_per_user: usize,
    pub density: DensityMode,
    pub snr_db: f64,
    /// Global shadowing toggle; `false` zeroes both log-normal spreads.
    pub shadowing: bool,
    /// Distance from the array to the user line, meters.
    pub user_distance: f64,
    /// Draw the user positions once and reuse them for every trial.
    pub fixed_layout: bool,
    /// Worker threads for the trial loop; `None` uses the rayon default.
    pub threads: Option<usize>,
    /// Where to write the CSV outputs; `None` keeps the run in memory.
    pub output_dir: Option<PathBuf>,
    pub params: ScenarioParams,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            preset: PresetId::I,
            trials: 1000,
            seed: 1,
            antennas: 200,
            users: 5,
            antennas_per_user: 4,
            density: DensityMode::High,
            snr_db: 10.0,
            shadowing: true,
            user_distance: 30.0,
            fixed_layout: false,
            threads: None,
            output_dir: None,
            params: ScenarioParams::default(),
        }
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(Error::invalid("trials must be >= 1"));
        }
        if self.antennas < 1 {
            return Err(Error::invalid("antennas must be >= 1"));
        }
        if self.users < 1 || self.antennas_per_user < 1 {
            return Err(Error::invalid("users and antennas_per_user must be >= 1"));
        }
        if !self.snr_db.is_finite() {
            return Err(Error::invalid("snr_db must be finite"));
        }
        Error::require_positive(self.user_distance, "user_distance")?;
        self.params.validate()
    }
}

/// Observables of a single trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialStatistics {
    /// Frobenius norm of the normalized matrix.
    pub frobenius_norm: f64,
    /// Equal-power capacity of the normalized matrix, bits/s/Hz.
    pub capacity_bits: f64,
    /// Per-user, per-service-antenna RSS of the raw matrix in dB
    /// (transmit-power normalized), K x M.
    pub rss_db: Vec<Vec<f64>>,
}

/// Aggregated outcome of a Monte-Carlo run.
#[derive(Debug, Clone)]
pub struct MonteCarloResults {
    /// Per-trial Frobenius norms, in trial order.
    pub norms: Vec<f64>,
    /// Per-trial capacities, in trial order.
    pub capacities: Vec<f64>,
    pub norm_cdf: CdfSummary,
    pub capacity_cdf: CdfSummary,
    /// RSS grid of trial 0 (users x antennas, dB).
    pub rss_grid_db: Vec<Vec<f64>>,
    /// State vectors of trial 0, one per user.
    pub first_trial_states: Vec<LinkStateVector>,
}

const LAYOUT_STREAM: u64 = 0;

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

struct TrialSetup {
    geometry: ArrayGeometry,
    layout: UserLayout,
    params: ScenarioParams,
    overrides: ModelOverrides,
    preset: ModelPreset,
    fixed_positions: Option<Vec<Point3>>,
    cached_constant: Option<NormalizationConstant>,
}

fn build_setup(cfg: &SimulationConfig) -> Result<TrialSetup> {
    cfg.validate()?;
    let preset = model_preset(cfg.preset);
    let params = preset.effective_params(&cfg.params, cfg.shadowing);
    params.validate()?;
    let geometry = build_ula(
        cfg.antennas,
        params.half_wavelength(),
        [0.0, 0.0, 0.0],
        params.antenna_height,
    )?;
    let layout = UserLayout::new(
        cfg.users,
        cfg.antennas_per_user,
        cfg.density,
        [
            geometry.aperture() / 2.0,
            cfg.user_distance,
            params.user_height,
        ],
    );
    let overrides = preset.overrides();

    // With a fixed layout the positions, and therefore the analytic
    // constant, are drawn once and shared by every trial.
    let fixed_positions = if cfg.fixed_layout {
        let mut rng = stream_rng(cfg.seed, LAYOUT_STREAM);
        Some(place_users(&layout, &mut rng)?)
    } else {
        None
    };
    let cached_constant = match &fixed_positions {
        Some(positions) => {
            let kind = match preset.visibility {
                Some((mu_len, sigma_len)) => StateKind::Visibility { mu_len, sigma_len },
                None => StateKind::NlosLos,
            };
            Some(normalization_constant(
                &geometry, &layout, positions, &params, overrides, &kind,
            )?)
        }
        None => None,
    };

    Ok(TrialSetup {
        geometry,
        layout,
        params,
        overrides,
        preset,
        fixed_positions,
        cached_constant,
    })
}

fn draw_states(
    setup: &TrialSetup,
    positions: &[Point3],
    rng: &mut ChaCha8Rng,
) -> Result<Vec<LinkStateVector>> {
    let m_count = setup.geometry.len();
    let users = setup.layout.users;
    let one = |rng: &mut ChaCha8Rng, user: Point3| -> Result<LinkStateVector> {
        if let Some((mu_len, sigma_len)) = setup.preset.visibility {
            return generate_states_model5(m_count, mu_len, sigma_len, rng);
        }
        match setup.overrides.p_los {
            Some(p) => {
                generate_states_with_p(&setup.geometry, &setup.params, &vec![p; m_count], rng)
            }
            None => generate_states(&setup.geometry, user, &setup.params, rng),
        }
    };
    match setup.layout.density {
        // High density: one state vector shared by every user, generated
        // from the first user's position.
        DensityMode::High => {
            let shared = one(rng, positions[0])?;
            Ok(vec![shared; users])
        }
        DensityMode::Low => positions.iter().map(|&u| one(rng, u)).collect(),
    }
}

struct TrialOutput {
    stats: TrialStatistics,
    states: Vec<LinkStateVector>,
}

fn run_trial_inner(setup: &TrialSetup, cfg: &SimulationConfig, index: u64) -> Result<TrialOutput> {
    let mut rng = stream_rng(cfg.seed, index + 1);
    let positions = match &setup.fixed_positions {
        Some(p) => p.clone(),
        None => place_users(&setup.layout, &mut rng)?,
    };
    let states = draw_states(setup, &positions, &mut rng)?;
    let realization = channel_matrix(
        &setup.geometry,
        &setup.layout,
        &positions,
        &states,
        &setup.params,
        setup.overrides,
        &mut rng,
    )?;
    let constant = setup
        .cached_constant
        .as_ref()
        .unwrap_or(&realization.normalization);
    let h_bar = normalize(&realization.matrix, constant)?;

    let n_per_user = setup.layout.antennas_per_user;
    let rss_db = (0..setup.layout.users)
        .map(|k| {
            rss_per_link(realization.matrix.columns(k * n_per_user, n_per_user))
                .into_iter()
                .map(|v| to_db(v, RSS_FLOOR_DB))
                .collect()
        })
        .collect();

    Ok(TrialOutput {
        stats: TrialStatistics {
            frobenius_norm: frobenius_norm(&h_bar),
            capacity_bits: capacity(&h_bar, cfg.snr_db, setup.layout.total_antennas())?,
            rss_db,
        },
        states,
    })
}

/// Runs a single trial. The result is fully determined by
/// `(config.seed, trial_index)`.
pub fn run_trial(config: &SimulationConfig, trial_index: u64) -> Result<TrialStatistics> {
    let setup = build_setup(config)?;
    run_trial_inner(&setup, config, trial_index).map(|out| out.stats)
}

/// Runs the whole experiment, aggregates the CDFs and, when an output
/// directory is configured, writes the CSV outputs and a metadata file.
pub fn run_monte_carlo(config: &SimulationConfig) -> Result<MonteCarloResults> {
    let setup = build_setup(config)?;

    let run_all = || -> Result<Vec<(f64, f64, Option<TrialOutput>)>> {
        (0..config.trials as u64)
            .into_par_iter()
            .map(|i| {
                let out = run_trial_inner(&setup, config, i)?;
                let norm = out.stats.frobenius_norm;
                let cap = out.stats.capacity_bits;
                Ok((norm, cap, (i == 0).then_some(out)))
            })
            .collect()
    };
    let rows = match config.threads {
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::invalid(format!("cannot build worker pool: {e}")))?
            .install(run_all),
        None => run_all(),
    }?;

    let norms: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let capacities: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let first = rows
        .into_iter()
        .find_map(|r| r.2)
        .expect("trial 0 always produces output");

    let results = MonteCarloResults {
        norm_cdf: empirical_cdf(&norms)?,
        capacity_cdf: empirical_cdf(&capacities)?,
        norms,
        capacities,
        rss_grid_db: first.stats.rss_db,
        first_trial_states: first.states,
    };

    if let Some(dir) = &config.output_dir {
        write_outputs(dir, config, &results)?;
    }
    Ok(results)
}

/// Writes the CSV outputs and the metadata sidecar into `dir`.
pub fn write_outputs(
    dir: &Path,
    config: &SimulationConfig,
    results: &MonteCarloResults,
) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    results.norm_cdf.write_csv(&dir.join("norm_cdf.csv"))?;
    results
        .capacity_cdf
        .write_csv(&dir.join("capacity_cdf.csv"))?;

    let rss_path = dir.join("rss_grid.csv");
    let mut rss_out = String::new();
    for row in &results.rss_grid_db {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        rss_out.push_str(&line.join(","));
        rss_out.push('\n');
    }
    fs::write(&rss_path, rss_out).map_err(|e| Error::io(&rss_path, e))?;

    for (k, states) in results.first_trial_states.iter().enumerate() {
        states.write_csv(&dir.join(format!("link_states_user_{k}.csv")))?;
    }

    write_metadata(&dir.join("metadata.txt"), config)
}

// The metadata file echoes the full configuration as a loadable config
// file; run provenance goes into comment lines.
fn write_metadata(path: &Path, config: &SimulationConfig) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = std::io::BufWriter::new(file);
    let p = &config.params;
    let mut text = String::new();
    text.push_str(&format!(
        "# {} v{}\n",
        env!("CARGO_PKG_NAME"),
        env!("CARGO_PKG_VERSION")
    ));
    text.push_str(
        "# snr definition: total transmit power over noise power with the normalized channel;\n\
         # capacity = log2 det(I + (snr / n_tx) H^H H), equal power allocation.\n",
    );
    text.push_str(&format!("preset = {}\n", config.preset));
    text.push_str(&format!("trials = {}\n", config.trials));
    text.push_str(&format!("seed = {}\n", config.seed));
    text.push_str(&format!("antennas = {}\n", config.antennas));
    text.push_str(&format!("users = {}\n", config.users));
    text.push_str(&format!(
        "antennas_per_user = {}\n",
        config.antennas_per_user
    ));
    let density = match config.density {
        DensityMode::High => "high",
        DensityMode::Low => "low",
    };
    text.push_str(&format!("density = {density}\n"));
    text.push_str(&format!("snr_db = {}\n", config.snr_db));
    text.push_str(&format!("shadowing = {}\n", config.shadowing));
    text.push_str(&format!("user_distance = {}\n", config.user_distance));
    text.push_str(&format!("fixed_layout = {}\n", config.fixed_layout));
    if let Some(t) = config.threads {
        text.push_str(&format!("threads = {t}\n"));
    }
    text.push_str(&format!("alpha = {}\n", p.alpha));
    text.push_str(&format!("rho = {}\n", p.rho));
    text.push_str(&format!("beta = {}\n", p.beta));
    text.push_str(&format!("q = {}\n", p.q));
    text.push_str(&format!("mu_kappa = {}\n", p.mu_kappa));
    text.push_str(&format!("sigma_kappa = {}\n", p.sigma_kappa));
    text.push_str(&format!("sigma_los = {}\n", p.sigma_los));
    text.push_str(&format!("sigma_nlos = {}\n", p.sigma_nlos));
    text.push_str(&format!("d1_bar = {}\n", p.d1_bar));
    text.push_str(&format!("d2_bar = {}\n", p.d2_bar));
    text.push_str(&format!("d_cor = {}\n", p.d_cor));
    text.push_str(&format!("lambda = {}\n", p.lambda));
    text.push_str(&format!("antenna_height = {}\n", p.antenna_height));
    text.push_str(&format!("user_height = {}\n", p.user_height));
    out.write_all(text.as_bytes())
        .map_err(|e| Error::io(path, e))
}
