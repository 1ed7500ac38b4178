//! Angle-FFT localization of two targets, per chirp.
//!
//! ```text
//! cargo run --release --example beamform_oracle -- [snr_db]
//! ```

use rdbev::baselines::{beamform_oracle, DEFAULT_ANGLE_FFT_SIZE};
use rdbev::radar::{simulate_rd, PropagationParams};
use rdbev::{Chirp, RadarConfig, Scatterer, Scene};

fn main() -> rdbev::Result<()> {
    let snr_db = std::env::args()
        .nth(1)
        .map_or(f64::INFINITY, |s| s.parse().expect("snr in dB"));
    let radar = RadarConfig {
        snr_db,
        ..RadarConfig::default()
    };
    let targets = [(12.0, -18.0), (25.0, 9.0)];
    let scene = Scene::new(targets.iter().map(|&(r, az)| Scatterer::polar(r, az)).collect());
    let frame = simulate_rd(
        &scene,
        &radar,
        &PropagationParams {
            seed: 1,
            ..PropagationParams::default()
        },
    )?;

    for chirp in [Chirp::A, Chirp::B] {
        let ra = beamform_oracle(&frame, &radar, chirp, DEFAULT_ANGLE_FFT_SIZE)?;
        println!("chirp {chirp:?}:");
        for &(r, az) in &targets {
            let rb = (r / radar.range_resolution).round() as usize;
            let row = ra.row(rb);
            let k = (0..row.len()).max_by(|&a, &b| row[a].total_cmp(&row[b])).unwrap();
            let est = ra.angle_bin_u(k).asin().to_degrees();
            println!(
                "  target {r:>4} m {az:>+6.1} deg: range bin {rb}, angle bin {k} (expected {}), estimate {est:+.1} deg, level {:.3e}",
                ra.u_to_bin(az.to_radians().sin()),
                row[k]
            );
        }
        let (pr, pk) = ra.peak();
        println!("  global peak at range bin {pr}, angle bin {pk}");
    }
    Ok(())
}
