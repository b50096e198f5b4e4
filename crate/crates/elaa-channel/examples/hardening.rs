//! Channel hardening versus array size.
//!
//! For the classical i.i.d. ensemble the coefficient of variation of
//! ||H_bar||^2 shrinks as 1/sqrt(MN); the same happens for the
//! distance-driven non-stationary ensembles. The mixed NLoS/LoS model
//! keeps a large floor because whole windows of the array flip state and
//! shadowing together, no matter how many antennas they contain.

use elaa_channel::prelude::*;

fn coefficient_of_variation(cfg: &SimulationConfig) -> Result<f64> {
    let out = run_monte_carlo(cfg)?;
    let sq: Vec<f64> = out.norms.iter().map(|n| n * n).collect();
    let mean = sq.iter().sum::<f64>() / sq.len() as f64;
    let var = sq.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / sq.len() as f64;
    Ok(var.sqrt() / mean)
}

fn main() -> Result<()> {
    let sizes = [64usize, 256, 1024];
    let models = [
        ("I + shadowing", PresetId::I, true),
        ("I", PresetId::I, false),
        ("II (i.i.d.)", PresetId::II, false),
        ("III", PresetId::III, false),
        ("IV", PresetId::IV, false),
    ];

    println!("coefficient of variation of ||H_bar||^2, K = 5, N = 4, 1500 trials\n");
    print!("{:<16}", "model \\ M");
    for m in sizes {
        print!("{m:>10}");
    }
    println!();

    for (name, preset, shadowing) in models {
        print!("{name:<16}");
        for m in sizes {
            let cfg = SimulationConfig {
                preset,
                shadowing,
                antennas: m,
                trials: 1500,
                seed: 17,
                ..SimulationConfig::default()
            };
            print!("{:>10.4}", coefficient_of_variation(&cfg)?);
        }
        println!();
    }

    println!("\n1/sqrt(MN) reference:");
    print!("{:<16}", "");
    for m in sizes {
        print!("{:>10.4}", 1.0 / ((m * 20) as f64).sqrt());
    }
    println!();
    Ok(())
}
