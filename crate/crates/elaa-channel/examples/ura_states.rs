//! Correlated states on a rectangular array.
//!
//! The anchor walk runs along the lowest row; within each column
//! visibility is monotone upward: a LoS element makes everything above it
//! LoS, while above an NLoS element the state is redrawn from the
//! element's own LoS probability. The map shows NLoS gaps narrowing with
//! height.

use elaa_channel::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<()> {
    // Short correlation distance so several windows fit the bottom row.
    let params = ScenarioParams {
        d_cor: 2.0,
        ..Default::default()
    };

    let (rows, cols) = (16, 120);
    let geometry = build_ura(
        rows,
        cols,
        params.half_wavelength(),
        [0.0; 3],
        params.antenna_height,
    )?;
    let user = [
        (cols as f64 - 1.0) * params.half_wavelength() / 2.0,
        40.0,
        params.user_height,
    ];

    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let states = generate_states_ura(&geometry, user, &params, &mut rng)?;

    println!(
        "{rows} x {cols} URA, user at 40 m broadside ('#' = LoS, '.' = NLoS), top row first:\n"
    );
    for r in (0..rows).rev() {
        let line: String = (0..cols)
            .map(|c| {
                if states.states[r * cols + c] {
                    '#'
                } else {
                    '.'
                }
            })
            .collect();
        println!("  {line}");
    }

    let bottom_los = states.states[..cols].iter().filter(|&&s| s).count();
    let total_los = states.states.iter().filter(|&&s| s).count();
    println!(
        "\nbottom row: {bottom_los}/{cols} LoS; whole array: {total_los}/{} LoS; {} windows",
        rows * cols,
        states.windows.len(),
    );
    Ok(())
}
