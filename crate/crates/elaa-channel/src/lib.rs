//! Spatially non-stationary channel simulator for extremely-large-aperture
//! massive MIMO.
//!
//! An array tens of meters long puts its users in the near field: link
//! distance, NLoS/LoS condition and shadowing all change along the array,
//! so the classical i.i.d. fading ensembles stop being representative. This
//! crate generates channel matrices where
//!
//! * every link distance is evaluated per element (spherical wavefront),
//! * the binary NLoS/LoS state of each link follows a correlated Bernoulli
//!   process whose pair correlation decays exponentially with antenna
//!   separation, partitioning the array into constant-state windows,
//! * each window carries its own log-normal shadowing and, when LoS, its
//!   own log-normal Rician K-factor,
//!
//! and runs seeded Monte-Carlo experiments producing Frobenius-norm and
//! capacity CDFs for five channel-model presets (the mixed model, i.i.d.
//! and non-stationary Rayleigh, non-stationary Rician, and a single
//! log-normal visibility region).
//!
//! # Quick start
//!
//! ```
//! use elaa_channel::prelude::*;
//!
//! let config = SimulationConfig {
//!     trials: 50,
//!     antennas: 64,
//!     ..SimulationConfig::default()
//! };
//! let results = run_monte_carlo(&config).unwrap();
//! assert_eq!(results.norms.len(), 50);
//! assert!(results.norm_cdf.percentile(0.5) > 0.0);
//! ```
//!
//! The runnable examples under `examples/` walk through each capability:
//! per-link state and RSS generation, the window-length law, norm and
//! capacity CDFs across presets, channel hardening, and the rectangular
//! array extension. The `elaa-sim` binary drives the same experiments from
//! a flat `key = value` config file.

pub mod config;
pub mod error;
pub mod fading;
pub mod harness;
pub mod los_state;
pub mod metrics;
pub mod normalization;
pub mod scenario;

pub use error::{Error, Result};

/// The common public surface in one import.
pub mod prelude {
    pub use crate::config::{load_config, parse_config};
    pub use crate::error::{Error, Result};
    pub use crate::fading::{
        channel_matrix, complex_gaussian, los_coefficient, mixed_coefficient, nlos_coefficient,
        sample_kappa, sample_mixed_link_power, sample_shadowing, write_matrix_csv,
        ChannelRealization, LinkCoefficient,
    };
    pub use crate::harness::{
        model_preset, run_monte_carlo, run_trial, ModelPreset, MonteCarloResults, PresetId,
        SimulationConfig, TrialStatistics,
    };
    pub use crate::los_state::{
        conditional_los_probability, generate_states, generate_states_model5, generate_states_ura,
        generate_states_ura_with_p, generate_states_with_p, los_probability,
        pair_same_state_probability, window_length_cdf, window_length_pmf, LinkStateVector,
        StateKind, StateWindow,
    };
    pub use crate::metrics::{
        capacity, empirical_cdf, frobenius_norm, rss_per_link, to_db, CdfSummary, RSS_FLOOR_DB,
    };
    pub use crate::normalization::{
        expected_frobenius_sq, expected_link_power, normalization_constant, normalize,
        visibility_coverage_probability, NormalizationConstant,
    };
    pub use crate::scenario::{
        build_ula, build_ura, distance_2d, distance_3d, place_users, ArrayGeometry, ArrayLayout,
        DensityMode, ModelOverrides, Point3, ScenarioParams, UserLayout, SPEED_OF_LIGHT,
    };
}
