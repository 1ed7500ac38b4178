//! Simulation ground truth: scatterer scenes and point clouds.
//!
//! Scene text format, one scatterer per line (blank lines and `#` comments
//! are ignored):
//!
//! ```text
//! # x y height radius reflectivity vx vy
//! 12.5 -3.0 1.6 0.9 1.0 4.0 0.0
//! ```

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scatterer {
    /// Footprint center in the LiDAR frame (m).
    pub x: f64,
    pub y: f64,
    pub height: f64,
    /// Footprint disc radius (m).
    pub radius: f64,
    /// Dimensionless amplitude.
    pub reflectivity: f64,
    /// Velocity (m/s).
    pub vx: f64,
    pub vy: f64,
}

impl Scatterer {
    pub fn at(x: f64, y: f64) -> Self {
        Self {
            x,
            y,
            height: 1.5,
            radius: 0.5,
            reflectivity: 1.0,
            vx: 0.0,
            vy: 0.0,
        }
    }

    /// Scatterer at polar position `(range, azimuth_deg)` from the origin.
    pub fn polar(range: f64, azimuth_deg: f64) -> Self {
        let a = azimuth_deg.to_radians();
        Self::at(range * a.cos(), range * a.sin())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub scatterers: Vec<Scatterer>,
    /// Lateral/forward extent of the ground plane (m).
    pub ground_extent: f64,
    /// Radar origin relative to the LiDAR origin (m).
    pub radar_origin_offset: (f64, f64),
}

impl Default for Scene {
    fn default() -> Self {
        Self {
            scatterers: Vec::new(),
            ground_extent: 80.0,
            radar_origin_offset: (0.0, 0.0),
        }
    }
}

impl Scene {
    pub fn new(scatterers: Vec<Scatterer>) -> Self {
        Self {
            scatterers,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (k, s) in self.scatterers.iter().enumerate() {
            let finite = [s.x, s.y, s.height, s.radius, s.reflectivity, s.vx, s.vy]
                .iter()
                .all(|v| v.is_finite());
            if !finite {
                return Err(Error::Invalid(format!("scatterer {k} has non-finite fields")));
            }
            if !(s.radius > 0.0) {
                return Err(Error::Invalid(format!("scatterer {k} radius {} must be > 0", s.radius)));
            }
            if !(s.reflectivity > 0.0) {
                return Err(Error::Invalid(format!(
                    "scatterer {k} reflectivity {} must be > 0",
                    s.reflectivity
                )));
            }
        }
        Ok(())
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut scatterers = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let vals: std::result::Result<Vec<f64>, _> = line.split_whitespace().map(str::parse).collect();
            let vals = vals.map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                line: n + 1,
                msg: format!("bad number: {e}"),
            })?;
            let &[x, y, height, radius, reflectivity, vx, vy] = vals.as_slice() else {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: n + 1,
                    msg: format!(
                        "expected 7 fields `x y height radius reflectivity vx vy`, got {}",
                        vals.len()
                    ),
                });
            };
            scatterers.push(Scatterer {
                x,
                y,
                height,
                radius,
                reflectivity,
                vx,
                vy,
            });
        }
        let scene = Scene::new(scatterers);
        scene.validate()?;
        Ok(scene)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("# x y height radius reflectivity vx vy\n");
        for s in &self.scatterers {
            let _ = writeln!(
                out,
                "{} {} {} {} {} {} {}",
                s.x, s.y, s.height, s.radius, s.reflectivity, s.vx, s.vy
            );
        }
        out
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// LiDAR returns with a per-point ground flag set by the simulator.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PointCloud {
    pub points: Vec<Point3>,
    pub ground: Vec<bool>,
}

impl PointCloud {
    pub fn push(&mut self, p: Point3, ground: bool) {
        self.points.push(p);
        self.ground.push(ground);
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Point3, bool)> {
        self.points.iter().zip(self.ground.iter().copied())
    }

    pub fn validate(&self) -> Result<()> {
        if self.points.len() != self.ground.len() {
            return Err(Error::Invalid("point/ground-flag count mismatch".into()));
        }
        if self
            .points
            .iter()
            .any(|p| !(p.x.is_finite() && p.y.is_finite() && p.z.is_finite()))
        {
            return Err(Error::Invalid("point cloud has non-finite coordinates".into()));
        }
        Ok(())
    }
}
