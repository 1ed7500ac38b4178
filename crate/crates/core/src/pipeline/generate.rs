use std::f64::consts::PI;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::GenerateConfig;
use crate::container::{write_frame, FrameRecord};
use crate::dataset::{frame_file_name, split_sequences, Manifest, ManifestEntry, Split};
use crate::error::{Error, Result};
use crate::grid::hfov_mask;
use crate::lidar::simulate_lidar;
use crate::radar::{frame_seed, simulate_rd};
use crate::scene::{Point3, PointCloud, Scatterer, Scene};
use crate::supervision::supervise_cloud;

// independent RNG streams per purpose
const SCENE_STREAM: u64 = 0x5343_454e_4500_0001;
const LIDAR_STREAM: u64 = 0x4c49_4441_5200_0002;

/// Clearance kept between any scatterer edge and either sensor origin.
const ORIGIN_CLEARANCE: f64 = 1.0;
const PLACEMENT_ATTEMPTS: usize = 200;

/// Distance from `p` to the segment `a -> b`.
fn segment_distance(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 {
        (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (a.0 + t * dx - p.0).hypot(a.1 + t * dy - p.1)
}

/// Initial scene of a sequence.
///
/// Centers are uniform in area over the HFOV sector between `min_range` and
/// `max_range` of the radar; discs do not overlap. Moving scatterers get a
/// uniform heading and a speed uniform in `[0, max_speed]`, and fall back to
/// static when their path over the sequence would come near a sensor origin.
pub fn sample_sequence(cfg: &GenerateConfig, sequence_id: u64) -> Scene {
    let mut rng = ChaCha8Rng::seed_from_u64(frame_seed(cfg.seed ^ SCENE_STREAM, sequence_id));
    let radar = cfg.radar();
    let (ox, oy) = cfg.radar_offset();
    let half_fov = radar.half_fov_rad();
    let duration = cfg.frame_interval * (cfg.frames_per_sequence.saturating_sub(1)) as f64;
    let count = rng.random_range(cfg.min_scatterers..=cfg.max_scatterers);
    let mut scatterers: Vec<Scatterer> = Vec::with_capacity(count);
    for _ in 0..count {
        for _ in 0..PLACEMENT_ATTEMPTS {
            let r2 = rng.random_range(cfg.min_range.powi(2)..=cfg.max_range.powi(2));
            let az = rng.random_range(-half_fov..=half_fov);
            let radius = rng.random_range(cfg.min_radius..=cfg.max_radius);
            let (x, y) = (ox + r2.sqrt() * az.cos(), oy + r2.sqrt() * az.sin());
            if scatterers.iter().any(|s| (s.x - x).hypot(s.y - y) < s.radius + radius) {
                continue;
            }
            let (mut vx, mut vy) = (0.0, 0.0);
            if rng.random::<f64>() >= cfg.static_fraction {
                let speed = rng.random_range(0.0..=cfg.max_speed);
                let heading = rng.random_range(0.0..2.0 * PI);
                let end = (
                    x + speed * heading.cos() * duration,
                    y + speed * heading.sin() * duration,
                );
                let clear = [(0.0, 0.0), (ox, oy)]
                    .iter()
                    .all(|&o| segment_distance(o, (x, y), end) >= radius + ORIGIN_CLEARANCE);
                if clear {
                    (vx, vy) = (speed * heading.cos(), speed * heading.sin());
                }
            }
            if (x - ox).hypot(y - oy) < radius + ORIGIN_CLEARANCE || x.hypot(y) < radius + ORIGIN_CLEARANCE {
                continue;
            }
            scatterers.push(Scatterer {
                x,
                y,
                height: rng.random_range(cfg.min_height..=cfg.max_height),
                radius,
                reflectivity: rng.random_range(cfg.min_reflectivity..=cfg.max_reflectivity),
                vx,
                vy,
            });
            break;
        }
    }
    Scene {
        scatterers,
        ground_extent: cfg.lidar_max_range,
        radar_origin_offset: cfg.radar_offset(),
    }
}

/// `(sequence_id, scene)` of a frame: its sequence's initial scene advanced
/// by `velocity * t` for the frame's time within the sequence.
pub fn scene_for_frame(cfg: &GenerateConfig, frame_id: u64) -> (u64, Scene) {
    let sequence_id = frame_id / cfg.frames_per_sequence;
    let t = (frame_id % cfg.frames_per_sequence) as f64 * cfg.frame_interval;
    let mut scene = sample_sequence(cfg, sequence_id);
    for s in &mut scene.scatterers {
        s.x += s.vx * t;
        s.y += s.vy * t;
    }
    (sequence_id, scene)
}

/// Full LiDAR cloud (ground included) of a frame, before f32 storage.
pub fn lidar_for_frame(cfg: &GenerateConfig, frame_id: u64) -> Result<PointCloud> {
    let (_, scene) = scene_for_frame(cfg, frame_id);
    simulate_lidar(&scene, &cfg.lidar(frame_seed(cfg.seed ^ LIDAR_STREAM, frame_id)))
}

/// Simulates radar, LiDAR and supervision for one frame.
pub fn generate_frame(cfg: &GenerateConfig, frame_id: u64) -> Result<FrameRecord> {
    let (sequence_id, scene) = scene_for_frame(cfg, frame_id);
    let radar = cfg.radar();
    let grid = cfg.grid();
    let rd = simulate_rd(&scene, &radar, &cfg.propagation(frame_seed(cfg.seed, frame_id)))?.to_f32();
    let cloud = simulate_lidar(&scene, &cfg.lidar(frame_seed(cfg.seed ^ LIDAR_STREAM, frame_id)))?;
    let hfov = hfov_mask(&grid, cfg.radar_offset(), radar.hfov_deg, radar.max_range);
    let sup = supervise_cloud(&cloud, &grid, &hfov, cfg.ground_threshold, cfg.azimuth_res)?;
    let points = cfg.store_points.then(|| PointCloud {
        // stored as f32; keep the in-memory record identical to what is read back
        points: cloud
            .points
            .iter()
            .map(|p| Point3 {
                x: p.x as f32 as f64,
                y: p.y as f32 as f64,
                z: p.z as f32 as f64,
            })
            .collect(),
        ground: cloud.ground.clone(),
    });
    Ok(FrameRecord {
        frame_id,
        sequence_id,
        rd,
        label: sup.label,
        hfov,
        sup: sup.sup,
        prediction: None,
        points,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerateSummary {
    pub frames: u64,
    pub sequences: u64,
    pub train_frames: usize,
    pub val_frames: usize,
    pub supervised_cells: u64,
    pub occupied_cells: u64,
    pub config_digest: String,
}

impl GenerateSummary {
    /// Occupied fraction of supervised cells over the whole dataset.
    pub fn pos_frac(&self) -> f64 {
        if self.supervised_cells == 0 {
            0.0
        } else {
            self.occupied_cells as f64 / self.supervised_cells as f64
        }
    }
}

pub(crate) const GENERATE_CONFIG_FILE: &str = "generate.toml";

/// Writes a complete dataset directory: frame files, the effective config
/// and a manifest with sequence-level splits.
pub fn generate_dataset(cfg: &GenerateConfig, out: &Path) -> Result<GenerateSummary> {
    cfg.validate()?;
    let frames_dir = out.join("frames");
    std::fs::create_dir_all(&frames_dir).map_err(|e| Error::io(&frames_dir, e))?;
    let cfg_path = out.join(GENERATE_CONFIG_FILE);
    std::fs::write(&cfg_path, cfg.to_text()).map_err(|e| Error::io(&cfg_path, e))?;

    let ids: Vec<(u64, u64)> = (0..cfg.frames).map(|f| (f, f / cfg.frames_per_sequence)).collect();
    let train: Vec<u64> = if ids.is_empty() {
        Vec::new()
    } else {
        split_sequences(&ids, cfg.split_ratio, cfg.seed)?.0
    };

    let counts: Vec<(u64, u64)> = super::with_workers(|| {
        ids.par_iter()
            .map(|&(frame_id, _)| {
                let record = generate_frame(cfg, frame_id)?;
                write_frame(&record, &out.join(frame_file_name(frame_id)))?;
                let occupied = record.label.occupancy().and(&record.sup)?.count() as u64;
                Ok((record.sup.count() as u64, occupied))
            })
            .collect::<Result<Vec<_>>>()
    })??;

    let radar = cfg.radar();
    let grid = cfg.grid();
    let mut manifest = Manifest::default();
    let meta = [
        ("config_digest", cfg.digest()),
        ("radar_digest", radar.digest()),
        ("grid", format!("{} {} {}", grid.resolution, grid.height, grid.width)),
        (
            "radar_offset",
            format!("{:?} {:?}", cfg.radar_offset_x, cfg.radar_offset_y),
        ),
        ("seed", cfg.seed.to_string()),
        ("split_ratio", cfg.split_ratio.to_string()),
    ];
    manifest.meta.extend(meta.into_iter().map(|(k, v)| (k.to_string(), v)));
    manifest.entries = ids
        .iter()
        .map(|&(frame_id, sequence_id)| ManifestEntry {
            frame_id,
            sequence_id,
            split: if train.binary_search(&frame_id).is_ok() {
                Split::Train
            } else {
                Split::Val
            },
            file: frame_file_name(frame_id),
        })
        .collect();
    manifest.write(out)?;

    Ok(GenerateSummary {
        frames: cfg.frames,
        sequences: cfg.frames.div_ceil(cfg.frames_per_sequence),
        train_frames: train.len(),
        val_frames: ids.len() - train.len(),
        supervised_cells: counts.iter().map(|c| c.0).sum(),
        occupied_cells: counts.iter().map(|c| c.1).sum(),
        config_digest: cfg.digest(),
    })
}
