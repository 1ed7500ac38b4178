use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::RadarConfig;
use crate::error::{Error, Result};
use crate::grid::BevGridSpec;
use crate::lidar::LidarConfig;
use crate::radar::PropagationParams;

/// Dataset generation settings, read from `key = value` lines.
///
/// Unknown keys are rejected; omitted keys keep their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerateConfig {
    pub frames: u64,
    pub seed: u64,
    /// BEV cell size (m): 0.5, 0.4 or 0.35.
    pub resolution: f64,
    pub snr_db: f64,
    pub split_ratio: f64,
    pub frames_per_sequence: u64,
    /// Time between consecutive frames of a sequence (s).
    pub frame_interval: f64,

    pub min_scatterers: usize,
    pub max_scatterers: usize,
    /// Placement band (m from the radar), uniform in area inside the HFOV.
    pub min_range: f64,
    pub max_range: f64,
    pub min_radius: f64,
    pub max_radius: f64,
    pub min_height: f64,
    pub max_height: f64,
    pub min_reflectivity: f64,
    pub max_reflectivity: f64,
    pub max_speed: f64,
    pub static_fraction: f64,

    pub amplitude_exponent: f64,
    pub psf_halfwidth_bins: usize,
    pub lidar_azimuth_step: f64,
    pub lidar_max_range: f64,
    pub ground_threshold: f64,
    pub azimuth_res: f64,
    pub radar_offset_x: f64,
    pub radar_offset_y: f64,
    /// Keep the LiDAR point cloud in each frame file.
    pub store_points: bool,
}

impl Default for GenerateConfig {
    fn default() -> Self {
        Self {
            frames: 0,
            seed: 0,
            resolution: 0.5,
            snr_db: 20.0,
            split_ratio: 0.7,
            frames_per_sequence: 10,
            frame_interval: 0.1,
            min_scatterers: 30,
            max_scatterers: 50,
            min_range: 3.0,
            max_range: 60.0,
            min_radius: 0.5,
            max_radius: 3.0,
            min_height: 0.5,
            max_height: 2.5,
            min_reflectivity: 0.5,
            max_reflectivity: 2.0,
            max_speed: 15.0,
            static_fraction: 0.3,
            amplitude_exponent: 2.0,
            psf_halfwidth_bins: 1,
            lidar_azimuth_step: 0.2,
            lidar_max_range: 80.0,
            ground_threshold: 0.3,
            azimuth_res: 0.05,
            radar_offset_x: 0.0,
            radar_offset_y: 0.0,
            store_points: false,
        }
    }
}

fn ordered(name: &str, lo: f64, hi: f64) -> Result<()> {
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(Error::Config(format!("{name}: need min <= max, got {lo} and {hi}")));
    }
    Ok(())
}

impl GenerateConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Canonical `key = value` form; parses back to an equal config.
    pub fn to_text(&self) -> String {
        toml::to_string(self).expect("flat config serializes")
    }

    pub fn digest(&self) -> String {
        super::run_digest(&self.to_text())
    }

    pub fn validate(&self) -> Result<()> {
        if ![0.5, 0.4, 0.35].contains(&self.resolution) {
            return Err(Error::Config(format!(
                "resolution must be 0.5, 0.4 or 0.35, got {}",
                self.resolution
            )));
        }
        if !(0.0..=1.0).contains(&self.split_ratio) {
            return Err(Error::Config(format!(
                "split_ratio {} outside [0, 1]",
                self.split_ratio
            )));
        }
        if self.frames_per_sequence == 0 {
            return Err(Error::Config("frames_per_sequence must be positive".into()));
        }
        if !(self.frame_interval >= 0.0) {
            return Err(Error::Config("frame_interval must be >= 0".into()));
        }
        if self.min_scatterers > self.max_scatterers {
            return Err(Error::Config("min_scatterers exceeds max_scatterers".into()));
        }
        ordered("range", self.min_range, self.max_range)?;
        ordered("radius", self.min_radius, self.max_radius)?;
        ordered("height", self.min_height, self.max_height)?;
        ordered("reflectivity", self.min_reflectivity, self.max_reflectivity)?;
        if self.min_range <= 0.0 || self.min_radius <= 0.0 || self.min_reflectivity <= 0.0 {
            return Err(Error::Config(
                "range, radius and reflectivity lower bounds must be positive".into(),
            ));
        }
        if !(self.max_speed >= 0.0) || !(0.0..=1.0).contains(&self.static_fraction) {
            return Err(Error::Config(
                "need max_speed >= 0 and static_fraction in [0, 1]".into(),
            ));
        }
        if !(self.azimuth_res > 0.0) {
            return Err(Error::Config("azimuth_res must be positive".into()));
        }
        if self.snr_db.is_nan() {
            return Err(Error::Config("snr_db is NaN".into()));
        }
        self.radar().validate()?;
        self.propagation(0).validate()?;
        self.lidar(0).validate()?;
        BevGridSpec::new(self.resolution).map(|_| ())
    }

    pub fn radar(&self) -> RadarConfig {
        RadarConfig {
            snr_db: self.snr_db,
            ..RadarConfig::default()
        }
    }

    pub fn grid(&self) -> BevGridSpec {
        BevGridSpec::new(self.resolution).expect("validated resolution")
    }

    pub fn radar_offset(&self) -> (f64, f64) {
        (self.radar_offset_x, self.radar_offset_y)
    }

    pub fn propagation(&self, seed: u64) -> PropagationParams {
        PropagationParams {
            amplitude_exponent: self.amplitude_exponent,
            psf_halfwidth_bins: self.psf_halfwidth_bins,
            seed,
        }
    }

    pub fn lidar(&self, seed: u64) -> LidarConfig {
        LidarConfig {
            azimuth_step_deg: self.lidar_azimuth_step,
            max_range: self.lidar_max_range,
            ground_threshold: self.ground_threshold,
            seed,
            ..LidarConfig::default()
        }
    }
}
