//! Scores the three baselines on freshly simulated frames, in memory.
//!
//! ```text
//! cargo run --release --example baselines_eval -- [frames] [snr_db] [generate.toml]
//! ```

use rayon::prelude::*;

use rdbev::baselines::BaselineMethod;
use rdbev::metrics::Evaluator;
use rdbev::pipeline::{generate_frame, predict, GenerateConfig};
use rdbev::Chirp;

fn main() -> rdbev::Result<()> {
    let mut args = std::env::args().skip(1);
    let frames: u64 = args.next().map_or(200, |s| s.parse().expect("frame count"));
    let snr_db: f64 = args.next().map_or(20.0, |s| s.parse().expect("snr in dB"));
    let base = match args.next() {
        Some(path) => GenerateConfig::read(std::path::Path::new(&path))?,
        None => GenerateConfig::default(),
    };
    let cfg = GenerateConfig { frames, snr_db, ..base };
    let radar = cfg.radar();
    let methods = [
        BaselineMethod::Prior,
        BaselineMethod::RangeEnergy,
        BaselineMethod::Beamform,
    ];

    let records: Vec<_> = (0..frames)
        .into_par_iter()
        .map(|id| generate_frame(&cfg, id))
        .collect::<rdbev::Result<_>>()?;
    let (occ, sup) = records.iter().fold((0, 0), |(o, s), r| {
        (o + r.label.occupancy().and(&r.sup).unwrap().count(), s + r.sup.count())
    });
    let pos_frac = occ as f64 / sup as f64;
    println!("{frames} frames at {snr_db} dB, pos_frac {pos_frac:.4}");

    for method in methods {
        let mut ev = Evaluator::new();
        for r in &records {
            let pred = predict(method, r, &radar, cfg.radar_offset(), pos_frac, Chirp::A)?;
            ev.add_frame(&pred, &r.label, &r.sup, &r.unknown(), &r.hfov, cfg.radar_offset())?;
        }
        let rep = ev.report()?;
        println!(
            "{:<13} AP {:.4}  IoU {:.4}  UHR {:.4}  tau {:.4}",
            method.name(),
            rep.ap,
            rep.iou_occupied,
            rep.uhr,
            rep.threshold
        );
        for b in &rep.bands {
            let ap = b.ap.map_or("-".into(), |v| format!("{v:.4}"));
            println!("    {:<18} AP {ap:>6}  pos_frac {:.4}", b.name, b.pos_frac);
        }
    }
    Ok(())
}
