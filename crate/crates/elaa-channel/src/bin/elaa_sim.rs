//! Command-line front end: loads an optional config file, applies flag
//! overrides, runs the Monte-Carlo experiment and writes the CSV outputs.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use elaa_channel::config::load_config;
use elaa_channel::harness::{run_monte_carlo, PresetId, SimulationConfig};
use elaa_channel::scenario::DensityMode;

#[derive(Parser, Debug)]
#[command(
    name = "elaa-sim",
    version,
    about = "Monte-Carlo simulator for spatially non-stationary ELAA massive-MIMO channels"
)]
struct Cli {
    /// Flat key = value config file; flags below override its values.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Channel model preset: I, II, III, IV or V.
    #[arg(long)]
    preset: Option<String>,

    /// Number of Monte-Carlo trials.
    #[arg(long)]
    trials: Option<usize>,

    /// Master seed; together with the trial index it determines every draw.
    #[arg(long)]
    seed: Option<u64>,

    /// Number of service antennas M.
    #[arg(long)]
    antennas: Option<usize>,

    /// User density regime: high (1 m line) or low (20 m line).
    #[arg(long)]
    density: Option<String>,

    /// Shadowing toggle: on/off.
    #[arg(long)]
    shadowing: Option<String>,

    /// Average SNR in dB for the capacity metric.
    #[arg(long)]
    snr_db: Option<f64>,

    /// Directory for the CSV outputs and the metadata file.
    #[arg(long)]
    output_dir: Option<PathBuf>,

    /// Worker thread count (default: all cores). Results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
}

fn build_config(cli: &Cli) -> elaa_channel::Result<SimulationConfig> {
    let mut cfg = match &cli.config {
        Some(path) => load_config(path)?,
        None => SimulationConfig::default(),
    };
    if let Some(preset) = &cli.preset {
        cfg.preset = preset.parse::<PresetId>()?;
    }
    if let Some(trials) = cli.trials {
        cfg.trials = trials;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(antennas) = cli.antennas {
        cfg.antennas = antennas;
    }
    if let Some(density) = &cli.density {
        cfg.density = match density.to_ascii_lowercase().as_str() {
            "high" => DensityMode::High,
            "low" => DensityMode::Low,
            other => {
                return Err(elaa_channel::Error::invalid(format!(
                    "bad density `{other}` (use high or low)"
                )))
            }
        };
    }
    if let Some(shadowing) = &cli.shadowing {
        cfg.shadowing = match shadowing.to_ascii_lowercase().as_str() {
            "true" | "on" | "yes" | "1" => true,
            "false" | "off" | "no" | "0" => false,
            other => {
                return Err(elaa_channel::Error::invalid(format!(
                    "bad shadowing toggle `{other}` (use on or off)"
                )))
            }
        };
    }
    if let Some(snr_db) = cli.snr_db {
        cfg.snr_db = snr_db;
    }
    if let Some(dir) = &cli.output_dir {
        cfg.output_dir = Some(dir.clone());
    }
    if let Some(threads) = cli.threads {
        cfg.threads = Some(threads);
    }
    if cfg.output_dir.is_none() {
        cfg.output_dir = Some(PathBuf::from("out"));
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match build_config(&cli) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("elaa-sim: {e}");
            return ExitCode::FAILURE;
        }
    };
    match run_monte_carlo(&cfg) {
        Ok(results) => {
            println!(
                "model {} | {} trials | M = {}, K = {}, N = {} | seed {}",
                cfg.preset, cfg.trials, cfg.antennas, cfg.users, cfg.antennas_per_user, cfg.seed
            );
            println!(
                "frobenius norm   p10 {:.4}  median {:.4}  p90 {:.4}",
                results.norm_cdf.percentile(0.10),
                results.norm_cdf.percentile(0.50),
                results.norm_cdf.percentile(0.90),
            );
            println!(
                "capacity b/s/Hz  p10 {:.3}  median {:.3}  p90 {:.3}",
                results.capacity_cdf.percentile(0.10),
                results.capacity_cdf.percentile(0.50),
                results.capacity_cdf.percentile(0.90),
            );
            if let Some(dir) = &cfg.output_dir {
                println!("outputs written to {}", dir.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("elaa-sim: {e}");
            ExitCode::FAILURE
        }
    }
}
