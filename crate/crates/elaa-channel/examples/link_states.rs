//! Per-link NLoS/LoS states and received signal strength along a large ULA.
//!
//! Four users stand at different distances from a 2000-element
//! half-wavelength array (85.6 m aperture). Each user gets a correlated
//! state vector: nearby users see mostly LoS links, distant users mostly
//! NLoS, and users in between see a mix that changes window by window
//! along the array. The RSS profile shows the signal power concentrating
//! on the LoS windows, with deep-faded NLoS windows acting as invisible
//! regions.
//!
//! Writes one CSV per user (antenna index, state, window, shadowing,
//! K-factor) and an RSS grid to `out/link_states/`.

use std::path::Path;

use elaa_channel::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<()> {
    let params = ScenarioParams::default();
    let m_count = 2000;
    let geometry = build_ula(
        m_count,
        params.half_wavelength(),
        [0.0; 3],
        params.antenna_height,
    )?;
    let center_x = geometry.aperture() / 2.0;

    // Users at increasing distance from the array face.
    let users = [
        ("user 0 (12 m)", [center_x, 12.0, params.user_height]),
        ("user 1 (30 m)", [center_x - 10.0, 30.0, params.user_height]),
        ("user 2 (60 m)", [center_x + 15.0, 60.0, params.user_height]),
        ("user 3 (150 m)", [center_x, 150.0, params.user_height]),
    ];

    let out_dir = Path::new("out/link_states");
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;

    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let layout = UserLayout::new(
        1,
        1,
        DensityMode::High,
        [center_x, 30.0, params.user_height],
    );
    let mut rss_rows: Vec<Vec<f64>> = Vec::new();

    println!(
        "NLoS/LoS state maps ({} antennas, '#' = LoS, '.' = NLoS):\n",
        m_count
    );
    for (i, (label, position)) in users.iter().enumerate() {
        let states = generate_states(&geometry, *position, &params, &mut rng)?;

        // One realization of the channel towards this user.
        let realization = channel_matrix(
            &geometry,
            &layout,
            &[*position],
            std::slice::from_ref(&states),
            &params,
            ModelOverrides::default(),
            &mut rng,
        )?;
        let rss: Vec<f64> = rss_per_link(realization.matrix.columns(0, 1))
            .into_iter()
            .map(|v| to_db(v, RSS_FLOOR_DB))
            .collect();

        // Downsampled ASCII strip of the state vector.
        let strip: String = (0..80)
            .map(|c| {
                if states.states[c * m_count / 80] {
                    '#'
                } else {
                    '.'
                }
            })
            .collect();
        let los_count = states.states.iter().filter(|&&s| s).count();
        println!("{label:>15}  {strip}");
        println!(
            "{:>15}  {} windows, {:.1}% LoS, RSS median {:.1} dB (min {:.1}, max {:.1})\n",
            "",
            states.windows.len(),
            100.0 * los_count as f64 / m_count as f64,
            median(&rss),
            rss.iter().cloned().fold(f64::INFINITY, f64::min),
            rss.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        );

        states.write_csv(&out_dir.join(format!("link_states_user_{i}.csv")))?;
        rss_rows.push(rss);
    }

    let rss_path = out_dir.join("rss_grid.csv");
    let mut text = String::new();
    for row in &rss_rows {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        text.push_str(&cells.join(","));
        text.push('\n');
    }
    std::fs::write(&rss_path, text).map_err(|e| Error::io(&rss_path, e))?;

    println!(
        "per-antenna CSVs and the RSS grid written to {}",
        out_dir.display()
    );
    Ok(())
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v[v.len() / 2]
}
