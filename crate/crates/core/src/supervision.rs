//! BEV occupancy labels and the visibility-aware supervision mask.
//!
//! `M_sup = M_HFOV & observable`; cells inside the HFOV that LiDAR did not
//! observe form `M_unknown` and are excluded from supervision but kept for
//! hallucination analysis.

use crate::error::Result;
use crate::grid::{world_to_cell, BevGridSpec, BevLabel, BevMask};
use crate::scene::PointCloud;

/// Default ray-casting azimuth bin width (degrees).
pub const DEFAULT_AZIMUTH_RES_DEG: f64 = 0.05;

/// Keeps points strictly above `z_min`, regardless of their ground flag.
pub fn remove_ground(pc: &PointCloud, z_min: f64) -> PointCloud {
    let mut out = PointCloud::default();
    for (p, g) in pc.iter() {
        if p.z > z_min {
            out.push(*p, g);
        }
    }
    out
}

pub fn occupancy_from_points(pc_nonground: &PointCloud, grid: &BevGridSpec) -> BevMask {
    let mut mask = BevMask::new(*grid);
    for p in &pc_nonground.points {
        if let Some((i, j)) = world_to_cell(p.x, p.y, grid) {
            mask.set(i, j, true);
        }
    }
    mask
}

/// One azimuth bin's free/occluded extent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RaySegment {
    pub bin: usize,
    /// Central ray azimuth (rad).
    pub azimuth: f64,
    pub endpoint: f64,
    /// True when the endpoint comes from a non-ground return.
    pub occluded: bool,
}

/// Azimuth bins partition [-180, 180) degrees with centers at `k * res`.
#[derive(Debug, Clone, Copy)]
struct AzimuthBins {
    res_deg: f64,
    count: usize,
}

impl AzimuthBins {
    fn new(res_deg: f64) -> Self {
        Self {
            res_deg,
            count: (360.0 / res_deg).round() as usize,
        }
    }

    fn bin_of(&self, x: f64, y: f64) -> usize {
        let az = y.atan2(x).to_degrees();
        let k = ((az + 180.0 + self.res_deg / 2.0) / self.res_deg).floor() as i64;
        k.rem_euclid(self.count as i64) as usize
    }

    fn center(&self, bin: usize) -> f64 {
        (-180.0 + bin as f64 * self.res_deg).to_radians()
    }
}

/// Per-bin endpoints: the nearest non-ground return, else the farthest return
/// of any kind. Bins without returns are omitted.
pub fn ray_segments(pc_all: &PointCloud, pc_nonground: &PointCloud, azimuth_res_deg: f64) -> Vec<RaySegment> {
    let bins = AzimuthBins::new(azimuth_res_deg);
    let mut nearest_obstacle = vec![f64::INFINITY; bins.count];
    let mut farthest_any = vec![f64::NEG_INFINITY; bins.count];
    for p in &pc_nonground.points {
        let b = bins.bin_of(p.x, p.y);
        nearest_obstacle[b] = nearest_obstacle[b].min(p.x.hypot(p.y));
    }
    for p in &pc_all.points {
        let b = bins.bin_of(p.x, p.y);
        farthest_any[b] = farthest_any[b].max(p.x.hypot(p.y));
    }
    (0..bins.count)
        .filter_map(|b| {
            let (endpoint, occluded) = if nearest_obstacle[b].is_finite() {
                (nearest_obstacle[b], true)
            } else if farthest_any[b].is_finite() {
                (farthest_any[b], false)
            } else {
                return None;
            };
            Some(RaySegment {
                bin: b,
                azimuth: bins.center(b),
                endpoint,
                occluded,
            })
        })
        .collect()
}

/// Parameter interval where the ray `t * (ux, uy)` lies inside the grid
/// rectangle, intersected with `[0, t_max]`.
fn clip_to_grid(ux: f64, uy: f64, t_max: f64, grid: &BevGridSpec) -> Option<(f64, f64)> {
    let mut lo = 0.0f64;
    let mut hi = t_max;
    for (u, min, max) in [(ux, grid.x_min, grid.x_max), (uy, grid.y_min, grid.y_max)] {
        if u.abs() < 1e-15 {
            if !(0.0 >= min && 0.0 <= max) {
                return None;
            }
        } else {
            let (a, b) = ((min / u), (max / u));
            lo = lo.max(a.min(b));
            hi = hi.min(a.max(b));
        }
    }
    (lo <= hi).then_some((lo, hi))
}

/// Pulls the grid exit sample back inside the half-open extent.
pub const EXIT_NUDGE: f64 = 1e-9;

/// Marks the cells a segment's central ray visits, sampled every `res / 2`
/// from 0 to the endpoint inclusive, plus the point where the ray leaves the
/// grid when that comes first (partial edge cells can be thinner than a step).
pub fn mark_segment(mask: &mut BevMask, seg: &RaySegment) {
    let grid = *mask.grid();
    let step = grid.resolution / 2.0;
    let (uy, ux) = seg.azimuth.sin_cos();
    let mut visit = |s: f64| {
        if let Some((i, j)) = world_to_cell(s * ux, s * uy, &grid) {
            mask.set(i, j, true);
        }
    };
    let Some((lo, hi)) = clip_to_grid(ux, uy, seg.endpoint, &grid) else {
        return;
    };
    // Same sample positions as an unclipped march from 0.
    let mut n = (lo / step).floor().max(0.0) as u64;
    loop {
        let s = n as f64 * step;
        if s >= seg.endpoint || s > hi + step {
            break;
        }
        visit(s);
        n += 1;
    }
    if hi < seg.endpoint {
        visit(hi - EXIT_NUDGE);
    }
    visit(seg.endpoint);
}

pub fn observability_mask(
    pc_all: &PointCloud,
    pc_nonground: &PointCloud,
    grid: &BevGridSpec,
    azimuth_res_deg: f64,
) -> BevMask {
    let mut mask = BevMask::new(*grid);
    for seg in ray_segments(pc_all, pc_nonground, azimuth_res_deg) {
        mark_segment(&mut mask, &seg);
    }
    mask
}

#[derive(Debug, Clone, PartialEq)]
pub struct Supervision {
    pub label: BevLabel,
    /// `M_HFOV & observable`.
    pub sup: BevMask,
    /// `M_HFOV & !observable`.
    pub unknown: BevMask,
}

pub fn build_supervision(occupancy: &BevMask, observable: BevMask, hfov: &BevMask) -> Result<Supervision> {
    hfov.grid().ensure_same(observable.grid(), "hfov vs observability")?;
    let sup = hfov.and(&observable)?;
    let unknown = hfov.and_not(&observable)?;
    let label = BevLabel::new(occupancy, observable)?;
    Ok(Supervision { label, sup, unknown })
}

/// Ground removal, occupancy, observability and masks in one pass.
pub fn supervise_cloud(
    pc: &PointCloud,
    grid: &BevGridSpec,
    hfov: &BevMask,
    ground_threshold: f64,
    azimuth_res_deg: f64,
) -> Result<Supervision> {
    let nonground = remove_ground(pc, ground_threshold);
    let occupancy = occupancy_from_points(&nonground, grid);
    let observable = observability_mask(pc, &nonground, grid, azimuth_res_deg);
    build_supervision(&occupancy, observable, hfov)
}
