//! Flat `key = value` config files.
//!
//! One key per [`crate::scenario::ScenarioParams`] /
//! [`crate::harness::SimulationConfig`] field, all optional with UMi
//! defaults; `#` starts a comment. Unknown keys are rejected. Distances are
//! in meters; the carrier can be given either as `lambda` (meters) or as
//! `frequency` (Hz), not both.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::harness::SimulationConfig;
use crate::scenario::{DensityMode, SPEED_OF_LIGHT};

/// Reads and parses a config file.
pub fn load_config(path: &Path) -> Result<SimulationConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text)
}

/// Parses config text on top of the defaults.
pub fn parse_config(text: &str) -> Result<SimulationConfig> {
    let mut cfg = SimulationConfig::default();
    let mut lambda_line = None;
    let mut frequency_line = None;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Config {
                line: line_no,
                message: format!("expected `key = value`, got `{line}`"),
            });
        };
        let key = key.trim();
        let value = value.trim();
        match key {
            "preset" => cfg.preset = parse_with(value, key, line_no)?,
            "trials" => cfg.trials = parse_with(value, key, line_no)?,
            "seed" => cfg.seed = parse_with(value, key, line_no)?,
            "antennas" => cfg.antennas = parse_with(value, key, line_no)?,
            "users" => cfg.users = parse_with(value, key, line_no)?,
            "antennas_per_user" => cfg.antennas_per_user = parse_with(value, key, line_no)?,
            "density" => cfg.density = parse_density(value, line_no)?,
            "snr_db" => cfg.snr_db = parse_with(value, key, line_no)?,
            "shadowing" => cfg.shadowing = parse_bool(value, line_no)?,
            "user_distance" => cfg.user_distance = parse_with(value, key, line_no)?,
            "fixed_layout" => cfg.fixed_layout = parse_bool(value, line_no)?,
            "threads" => cfg.threads = Some(parse_with(value, key, line_no)?),
            "output_dir" => cfg.output_dir = Some(PathBuf::from(value)),
            "alpha" => cfg.params.alpha = parse_with(value, key, line_no)?,
            "rho" => cfg.params.rho = parse_with(value, key, line_no)?,
            "beta" => cfg.params.beta = parse_with(value, key, line_no)?,
            "q" => cfg.params.q = parse_with(value, key, line_no)?,
            "mu_kappa" => cfg.params.mu_kappa = parse_with(value, key, line_no)?,
            "sigma_kappa" => cfg.params.sigma_kappa = parse_with(value, key, line_no)?,
            "sigma_los" => cfg.params.sigma_los = parse_with(value, key, line_no)?,
            "sigma_nlos" => cfg.params.sigma_nlos = parse_with(value, key, line_no)?,
            "d1_bar" => cfg.params.d1_bar = parse_with(value, key, line_no)?,
            "d2_bar" => cfg.params.d2_bar = parse_with(value, key, line_no)?,
            "d_cor" => cfg.params.d_cor = parse_with(value, key, line_no)?,
            "lambda" => {
                cfg.params.lambda = parse_with(value, key, line_no)?;
                lambda_line = Some(line_no);
            }
            "frequency" => {
                let f: f64 = parse_with(value, key, line_no)?;
                if f.is_nan() || f <= 0.0 {
                    return Err(Error::Config {
                        line: line_no,
                        message: format!("frequency must be > 0 Hz, got {f}"),
                    });
                }
                cfg.params.lambda = SPEED_OF_LIGHT / f;
                frequency_line = Some(line_no);
            }
            "antenna_height" => cfg.params.antenna_height = parse_with(value, key, line_no)?,
            "user_height" => cfg.params.user_height = parse_with(value, key, line_no)?,
            unknown => {
                return Err(Error::Config {
                    line: line_no,
                    message: format!("unknown key `{unknown}`"),
                })
            }
        }
    }

    if let (Some(_), Some(line)) = (lambda_line, frequency_line) {
        return Err(Error::Config {
            line,
            message: "set either `lambda` or `frequency`, not both".into(),
        });
    }
    cfg.validate()?;
    Ok(cfg)
}

fn parse_with<T: FromStr>(value: &str, key: &str, line: usize) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e| Error::Config {
        line,
        message: format!("bad value `{value}` for `{key}`: {e}"),
    })
}

fn parse_bool(value: &str, line: usize) -> Result<bool> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "on" | "yes" | "1" => Ok(true),
        "false" | "off" | "no" | "0" => Ok(false),
        other => Err(Error::Config {
            line,
            message: format!("bad boolean `{other}` (use on/off, true/false, yes/no, 1/0)"),
        }),
    }
}

fn parse_density(value: &str, line: usize) -> Result<DensityMode> {
    match value.to_ascii_lowercase().as_str() {
        "high" => Ok(DensityMode::High),
        "low" => Ok(DensityMode::Low),
        other => Err(Error::Config {
            line,
            message: format!("bad density `{other}` (use high or low)"),
        }),
    }
}
