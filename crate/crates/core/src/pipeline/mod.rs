//! End-to-end runs: dataset generation, baselines, ablations and evaluation.
//!
//! Every run is deterministic given its configuration and seed. Frames are
//! processed in parallel on a rayon pool whose size can be pinned with the
//! `RDBEV_WORKERS` environment variable; per-frame seeds derive from
//! `(seed, frame_id)` and output files are named by frame id, so worker count
//! and scheduling never change the bytes written.

mod config;
mod generate;
mod runs;

pub use config::GenerateConfig;
pub use generate::{
    generate_dataset, generate_frame, lidar_for_frame, sample_sequence, scene_for_frame, GenerateSummary,
};
pub use runs::{predict, run_ablation, run_baseline, run_evaluate, train_pos_frac, AblationTransform, BaselineOptions};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const WORKERS_ENV: &str = "RDBEV_WORKERS";

/// Runs `f` on a pool sized by `RDBEV_WORKERS` when set, else rayon's default.
pub fn with_workers<T: Send>(f: impl FnOnce() -> T + Send) -> Result<T> {
    let Ok(v) = std::env::var(WORKERS_ENV) else {
        return Ok(f());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Config(format!("{WORKERS_ENV} must be a positive integer, got `{v}`")))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {n} workers: {e}")))?;
    Ok(pool.install(f))
}

/// Short hex digest of a run's canonical description.
pub fn run_digest(text: &str) -> String {
    hex::encode(&Sha256::digest(text.as_bytes())[..8])
}
