//! Generates a small dataset directory, reads it back and checks every frame
//! against a fresh in-memory simulation.
//!
//! ```text
//! cargo run --release --example dataset_roundtrip -- [out_dir] [frames]
//! ```

use std::path::PathBuf;

use rdbev::dataset::{Dataset, Split};
use rdbev::pipeline::{generate_dataset, generate_frame, GenerateConfig};

fn main() -> rdbev::Result<()> {
    let mut args = std::env::args().skip(1);
    let out = args
        .next()
        .map_or_else(|| std::env::temp_dir().join("rdbev_roundtrip"), PathBuf::from);
    let frames: u64 = args.next().map_or(20, |s| s.parse().expect("frame count"));
    let cfg = GenerateConfig {
        frames,
        frames_per_sequence: 5,
        store_points: true,
        ..GenerateConfig::default()
    };
    let summary = generate_dataset(&cfg, &out)?;
    println!(
        "{} frames in {} sequences -> {} (config {})",
        summary.frames,
        summary.sequences,
        out.display(),
        summary.config_digest
    );

    let dataset = Dataset::open(&out)?;
    for split in [Split::Train, Split::Val] {
        let ids = dataset.manifest.ids(split);
        println!("{:>5}: {:?}", split.name(), ids);
    }
    let mut bytes = 0;
    for entry in &dataset.manifest.entries {
        let stored = dataset.load(entry)?;
        let fresh = generate_frame(&cfg, entry.frame_id)?;
        assert!(
            stored == fresh,
            "frame {} differs from a fresh simulation",
            entry.frame_id
        );
        bytes += std::fs::metadata(dataset.path_of(entry)).map(|m| m.len()).unwrap_or(0);
    }
    println!(
        "all {} frames match a fresh simulation ({:.1} MB on disk), pos_frac {:.4}",
        dataset.manifest.entries.len(),
        bytes as f64 / 1e6,
        summary.pos_frac()
    );
    Ok(())
}
