//! Window-length statistics of the correlated state generator.
//!
//! Runs the anchor walk over a long array and compares the empirical
//! window-length histogram against the analytic law
//! `f(L) = exp(-lambda (L^2 - L) / (4 d_cor)) - exp(-lambda (L^2 + L) / (4 d_cor))`.
//! The correlation distance is scaled down to 5 m so windows stay short
//! enough to collect tens of thousands of samples.

use elaa_channel::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<()> {
    let params = ScenarioParams {
        lambda: 0.0857,
        d_cor: 5.0,
        ..Default::default()
    };

    let m_count = 100_000;
    let geometry = build_ula(m_count, params.half_wavelength(), [0.0; 3], 10.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let states = generate_states(&geometry, [0.0, 30.0, 1.5], &params, &mut rng)?;

    // Drop the final window: it is truncated by the array end.
    let lens: Vec<usize> = states.windows[..states.windows.len() - 1]
        .iter()
        .map(|w| w.len)
        .collect();
    let n = lens.len();
    let max_len = *lens.iter().max().unwrap();
    let mut histogram = vec![0usize; max_len + 1];
    for &len in &lens {
        histogram[len] += 1;
    }

    println!(
        "lambda = {} m, d_cor = {} m, {} windows collected\n",
        params.lambda, params.d_cor, n
    );
    println!("length   observed   analytic");
    let mut tv = 0.0;
    for (l, &count) in histogram.iter().enumerate().skip(1) {
        let analytic = window_length_pmf(l, params.lambda, params.d_cor)?;
        let observed = count as f64 / n as f64;
        tv += (observed - analytic).abs();
        if l <= 30 {
            let bar = "#".repeat((observed * 400.0).round() as usize);
            println!("{l:>6}   {observed:>8.5}   {analytic:>8.5}  {bar}");
        }
    }
    tv += 1.0 - window_length_cdf(max_len, params.lambda, params.d_cor)?;
    tv /= 2.0;

    let mean = lens.iter().sum::<usize>() as f64 / n as f64;
    println!("\nmean window length {mean:.2} antennas");
    println!("total-variation distance between histogram and analytic law: {tv:.4}");
    Ok(())
}
