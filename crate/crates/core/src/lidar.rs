//! 2.5D LiDAR simulation with hard occlusion.
//!
//! Rays are cast in the BEV plane from the LiDAR origin. The first scatterer
//! footprint a ray enters yields `returns_per_hit` obstacle points at the
//! entry point with heights above the ground threshold; ground points
//! (`z = 0`) are laid along the ray up to the hit or `max_range`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scene::{Point3, PointCloud, Scene};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LidarConfig {
    pub azimuth_step_deg: f64,
    pub max_range: f64,
    pub ground_point_spacing: f64,
    pub returns_per_hit: usize,
    /// Obstacle returns are drawn strictly above this height.
    pub ground_threshold: f64,
    pub seed: u64,
}

impl Default for LidarConfig {
    fn default() -> Self {
        Self {
            azimuth_step_deg: 0.2,
            max_range: 80.0,
            ground_point_spacing: 1.0,
            returns_per_hit: 3,
            ground_threshold: 0.3,
            seed: 0,
        }
    }
}

impl LidarConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.azimuth_step_deg > 0.0) || !(self.max_range > 0.0) || !(self.ground_point_spacing > 0.0) {
            return Err(Error::Config(
                "lidar azimuth step, max range and ground spacing must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn num_rays(&self) -> usize {
        (360.0 / self.azimuth_step_deg).round() as usize
    }

    /// Azimuth (rad) of ray `k`; rays start at -180 degrees.
    pub fn ray_azimuth(&self, k: usize) -> f64 {
        (-180.0 + k as f64 * self.azimuth_step_deg).to_radians()
    }
}

/// Entry distance of the ray `t * (ux, uy)`, `t >= 0`, into a disc.
pub fn ray_disc_entry(ux: f64, uy: f64, cx: f64, cy: f64, radius: f64) -> Option<f64> {
    let along = cx * ux + cy * uy;
    let perp_sq = cx * cx + cy * cy - along * along;
    let r_sq = radius * radius;
    if perp_sq > r_sq {
        return None;
    }
    let half_chord = (r_sq - perp_sq).max(0.0).sqrt();
    if along + half_chord < 0.0 {
        return None;
    }
    Some((along - half_chord).max(0.0))
}

/// First scatterer hit along unit direction `(ux, uy)`: `(index, distance)`.
pub fn first_hit(scene: &Scene, ux: f64, uy: f64) -> Option<(usize, f64)> {
    scene
        .scatterers
        .iter()
        .enumerate()
        .filter_map(|(k, s)| ray_disc_entry(ux, uy, s.x, s.y, s.radius).map(|t| (k, t)))
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
}

pub fn simulate_lidar(scene: &Scene, cfg: &LidarConfig) -> Result<PointCloud> {
    cfg.validate()?;
    scene.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut cloud = PointCloud::default();
    for k in 0..cfg.num_rays() {
        let az = cfg.ray_azimuth(k);
        let (uy, ux) = az.sin_cos();
        let hit = first_hit(scene, ux, uy).filter(|&(_, t)| t <= cfg.max_range);
        let ground_end = hit.map_or(cfg.max_range, |(_, t)| t);
        let mut n = 1usize;
        loop {
            let s = n as f64 * cfg.ground_point_spacing;
            if s > ground_end {
                break;
            }
            cloud.push(
                Point3 {
                    x: s * ux,
                    y: s * uy,
                    z: 0.0,
                },
                true,
            );
            n += 1;
        }
        if let Some((idx, t)) = hit {
            let top = scene.scatterers[idx].height.max(cfg.ground_threshold + 0.05);
            for _ in 0..cfg.returns_per_hit {
                let u: f64 = rng.random_range(f64::EPSILON..1.0);
                let z = cfg.ground_threshold + (top - cfg.ground_threshold) * u;
                cloud.push(
                    Point3 {
                        x: t * ux,
                        y: t * uy,
                        z,
                    },
                    false,
                );
            }
        }
    }
    Ok(cloud)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::Scatterer;

    fn disc(x: f64, y: f64, r: f64) -> Scatterer {
        Scatterer {
            radius: r,
            ..Scatterer::at(x, y)
        }
    }

    #[test]
    fn empty_scene_ground_only() {
        let cfg = LidarConfig::default();
        let pc = simulate_lidar(&Scene::default(), &cfg).unwrap();
        assert_eq!(cfg.num_rays(), 1800);
        assert_eq!(pc.len(), 1800 * 80);
        assert!(pc.ground.iter().all(|&g| g));
        let max = pc.points.iter().map(|p| p.x.hypot(p.y)).fold(0.0, f64::max);
        assert!((max - 80.0).abs() < 1e-9);
    }

    #[test]
    fn nearer_disc_occludes() {
        let cfg = LidarConfig::default();
        let scene = Scene::new(vec![disc(10.0, 0.0, 0.5), disc(20.0, 0.0, 0.5)]);
        let pc = simulate_lidar(&scene, &cfg).unwrap();
        let obstacles: Vec<&Point3> = pc.iter().filter(|(_, g)| !g).map(|(p, _)| p).collect();
        assert!(!obstacles.is_empty());
        assert!(obstacles.iter().all(|p| p.x < 10.6));
        // boresight ray: ground stops at the disc front
        let boresight: Vec<&Point3> = pc.points.iter().filter(|p| p.y.abs() < 1e-9 && p.x > 0.0).collect();
        assert!(boresight.iter().all(|p| p.x <= 9.5 + 1e-9));
    }

    #[test]
    fn angular_span_matches_geometry() {
        let cfg = LidarConfig::default();
        let pc = simulate_lidar(&Scene::new(vec![disc(10.0, 0.0, 0.5)]), &cfg).unwrap();
        let mut rays: Vec<i64> = pc
            .iter()
            .filter(|(_, g)| !g)
            .map(|(p, _)| (p.y.atan2(p.x).to_degrees() / 0.2).round() as i64)
            .collect();
        rays.dedup();
        let expected = 2.0 * (0.05f64).asin().to_degrees() / 0.2;
        assert!((expected - 28.66).abs() < 0.01);
        assert!((rays.len() as f64 - expected).abs() <= 1.0, "{} rays", rays.len());
    }

    #[test]
    fn obstacle_heights_above_threshold() {
        let cfg = LidarConfig::default();
        let mut low = disc(8.0, 3.0, 1.0);
        low.height = 0.2;
        let scene = Scene::new(vec![disc(10.0, 0.0, 1.0), low]);
        let pc = simulate_lidar(&scene, &cfg).unwrap();
        for (p, g) in pc.iter() {
            if g {
                assert_eq!(p.z, 0.0);
            } else {
                assert!(p.z > 0.3);
            }
        }
    }

    #[test]
    fn entry_inside_disc_is_zero() {
        assert_eq!(ray_disc_entry(1.0, 0.0, 0.2, 0.0, 1.0), Some(0.0));
        assert_eq!(ray_disc_entry(1.0, 0.0, -5.0, 0.0, 1.0), None);
        assert_eq!(ray_disc_entry(1.0, 0.0, 5.0, 2.0, 1.0), None);
        assert!((ray_disc_entry(1.0, 0.0, 5.0, 0.0, 1.0).unwrap() - 4.0).abs() < 1e-12);
    }
}
