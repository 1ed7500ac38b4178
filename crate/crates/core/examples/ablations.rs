//! Applies every input ablation to one frame and shows what survives:
//! per-chirp energy, Doppler and range spread, and the oracle's peak.
//!
//! ```text
//! cargo run --release --example ablations -- [frame_id]
//! ```

use rdbev::baselines::{beamform_oracle, DEFAULT_ANGLE_FFT_SIZE};
use rdbev::pipeline::{generate_frame, AblationTransform, GenerateConfig};
use rdbev::radar::normalize_rd;
use rdbev::{Chirp, RdFrame};

fn spread(frame: &RdFrame<f32>, along_range: bool) -> f64 {
    // largest spread of |x| along one axis over all other indices
    let s = frame.shape();
    let mut worst = 0.0f64;
    for c in 0..s.chirps {
        for j in 0..s.rx {
            let (outer, inner) = if along_range {
                (s.doppler, s.range)
            } else {
                (s.range, s.doppler)
            };
            for o in 0..outer {
                let vals = (0..inner).map(|i| {
                    let (r, d) = if along_range { (i, o) } else { (o, i) };
                    frame.get(c, j, r, d).norm() as f64
                });
                let (lo, hi) = vals.fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(v), hi.max(v)));
                worst = worst.max(hi - lo);
            }
        }
    }
    worst
}

fn main() -> rdbev::Result<()> {
    let id: u64 = std::env::args().nth(1).map_or(0, |s| s.parse().expect("frame id"));
    let cfg = GenerateConfig::default();
    let record = generate_frame(&cfg, id)?;
    let radar = cfg.radar();
    println!(
        "{:<17} {:>11} {:>11} {:>13} {:>11}  oracle peak (chirp A)",
        "transform", "energy A", "energy B", "doppler var", "range var"
    );
    for t in AblationTransform::ALL {
        let f = normalize_rd(&t.apply(&record.rd));
        let energy = |c: usize| f.chirp_slice(c).iter().map(|z| z.norm_sqr() as f64).sum::<f64>();
        let peak = match beamform_oracle(&f, &radar, Chirp::A, DEFAULT_ANGLE_FFT_SIZE) {
            Ok(ra) => format!("{:?} ({} tied)", ra.peak(), ra.tied_peaks().len()),
            Err(e) => format!("- ({e})"),
        };
        println!(
            "{:<17} {:>11.1} {:>11.1} {:>13.3e} {:>11.3e}  {peak}",
            t.name(),
            energy(0),
            energy(1),
            spread(&f, false),
            spread(&f, true)
        );
    }
    Ok(())
}
