//! Desk-scale toolkit for learning BEV occupancy from pre-beamforming radar.
//!
//! The crate covers the full data path around an RD-to-BEV network:
//!
//! - [`radar`]: forward model producing per-antenna complex range-Doppler
//!   tensors under an A/B chirp scheme (single-TX vs. all-TX), plus the
//!   normalization and ablation transforms applied to network inputs.
//! - [`lidar`]: occlusion-aware 2.5D LiDAR point clouds from the same scenes.
//! - [`supervision`]: ground removal, BEV occupancy, ray-cast observability and
//!   the supervised / unknown masks.
//! - [`baselines`]: constant prior, range-energy projection and an angle-FFT
//!   beamforming oracle.
//! - [`metrics`]: pooled AP, F1-optimal global threshold, occupied IoU,
//!   unknown-region hallucination rate, band-wise reports and a masked focal
//!   loss.
//! - [`container`] / [`dataset`]: the single-file frame container and the
//!   dataset manifest with sequence-level splits.
//! - [`pipeline`]: the `generate` / `baseline` / `ablate` / `evaluate` runs
//!   behind the `rdbev` binary.
//!
//! Runnable examples (`cargo run --release --example <name>`):
//!
//! - `simulate_rd`: one moving target through the forward model, per chirp.
//! - `lidar_supervision`: supervision masks for a small scene as ASCII.
//! - `beamform_oracle`: angle-FFT localization of two targets.
//! - `ablations`: what each input transform keeps of a generated frame.
//! - `baselines_eval`: the three baselines scored on in-memory frames.
//! - `dataset_roundtrip`: dataset directory written, reloaded and checked.
//! - `focal_loss`: masked focal loss and gradient next to BCE.
//!
//! Grid convention: row index follows forward `x`, column index follows
//! lateral `y`, and every cell is half-open `[lo, lo + res)` on both axes.

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod config;
pub mod container;
pub mod dataset;
pub mod error;
pub mod grid;
pub mod lidar;
pub mod metrics;
pub mod pipeline;
pub mod radar;
pub mod rd;
pub mod scene;
pub mod supervision;

pub use config::RadarConfig;
pub use error::{Error, Result};
pub use grid::{hfov_mask, world_to_cell, BevGridSpec, BevLabel, BevMask, PredictionMap};
pub use rd::{Chirp, RdFrame};
pub use scene::{Point3, PointCloud, Scatterer, Scene};
