//! Simulates the RD tensor for one moving target and reports where its energy
//! lands for each chirp.
//!
//! ```text
//! cargo run --release --example simulate_rd -- [range_m] [azimuth_deg] [radial_speed]
//! ```

use rdbev::radar::{noise_sigma, simulate_rd, PropagationParams};
use rdbev::{RadarConfig, Scatterer, Scene};

fn main() -> rdbev::Result<()> {
    let mut args = std::env::args().skip(1).map(|s| s.parse::<f64>().expect("number"));
    let range = args.next().unwrap_or(20.0);
    let azimuth = args.next().unwrap_or(10.0);
    let speed = args.next().unwrap_or(5.0);

    let a = azimuth.to_radians();
    let target = Scatterer {
        vx: speed * a.cos(),
        vy: speed * a.sin(),
        ..Scatterer::polar(range, azimuth)
    };
    let radar = RadarConfig::default();
    let prop = PropagationParams::default();
    let frame = simulate_rd(&Scene::new(vec![target]), &radar, &prop)?;
    let s = frame.shape();
    println!(
        "tensor [{} chirps][{} rx][{} range][{} doppler], noise sigma {:.3e}",
        s.chirps,
        s.rx,
        s.range,
        s.doppler,
        noise_sigma(&radar, &prop)
    );
    println!(
        "expected range bin {:.2}, doppler bin {:.2}",
        range / radar.range_resolution,
        s.doppler as f64 / 2.0 + speed / radar.doppler_resolution()
    );

    let expected = (
        (range / radar.range_resolution).round() as usize,
        (s.doppler as f64 / 2.0 + speed / radar.doppler_resolution()).round() as usize,
    );
    let power = |c: usize, r: usize, d: usize| -> f64 { (0..s.rx).map(|j| frame.get(c, j, r, d).norm_sqr()).sum() };
    for c in 0..s.chirps {
        println!(
            "chirp {c}: power at the expected cell {:.3e}",
            power(c, expected.0, expected.1)
        );
        let (mut best, mut at) = (0.0, (0, 0));
        for r in 0..s.range {
            for d in 0..s.doppler {
                let p = power(c, r, d);
                if p > best {
                    best = p;
                    at = (r, d);
                }
            }
        }
        let phases: Vec<String> = (0..s.rx)
            .map(|j| format!("{:+.2}", frame.get(c, j, at.0, at.1).arg()))
            .collect();
        println!(
            "chirp {c}: strongest cell {best:.3e} at range bin {}, doppler bin {}; rx phases [{}]",
            at.0,
            at.1,
            phases.join(" ")
        );
    }
    Ok(())
}
