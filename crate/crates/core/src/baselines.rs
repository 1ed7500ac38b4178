//! Reference predictors: constant prior, range-energy projection and an
//! angle-FFT beamforming oracle.
//!
//! The oracle beamforms each chirp over its `num_rx` channels only. Under
//! simultaneous multi-TX transmission the TX contributions cannot be
//! separated, so the 48-element virtual aperture is not available to it.

use num_complex::Complex64;
use num_traits::Float;
use rustfft::FftPlanner;

use crate::config::RadarConfig;
use crate::error::{Error, Result};
use crate::grid::{hfov_mask, polar_from, BevGridSpec, PredictionMap};
use crate::rd::{Chirp, RdFrame};

pub const DEFAULT_ANGLE_FFT_SIZE: usize = 64;

/// Baseline methods exposed on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineMethod {
    Prior,
    RangeEnergy,
    Beamform,
}

impl BaselineMethod {
    pub fn name(self) -> &'static str {
        match self {
            BaselineMethod::Prior => "prior",
            BaselineMethod::RangeEnergy => "range_energy",
            BaselineMethod::Beamform => "beamform",
        }
    }
}

impl std::str::FromStr for BaselineMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "prior" => Ok(Self::Prior),
            "range_energy" | "range-energy" => Ok(Self::RangeEnergy),
            "beamform" => Ok(Self::Beamform),
            _ => Err(Error::Invalid(format!(
                "unknown baseline method `{s}` (expected prior, range_energy or beamform)"
            ))),
        }
    }
}

/// Constant occupancy probability `pos_frac` everywhere.
pub fn random_prior(pos_frac: f64, grid: &BevGridSpec) -> Result<PredictionMap> {
    if !(0.0..=1.0).contains(&pos_frac) {
        return Err(Error::Invalid(format!("pos_frac {pos_frac} outside [0, 1]")));
    }
    PredictionMap::constant(*grid, pos_frac as f32)
}

/// Mean RD magnitude per range bin over chirps, antennas and Doppler bins.
pub fn range_energy_profile<T: Float>(frame: &RdFrame<T>) -> Vec<f64> {
    let s = frame.shape();
    let n = (s.chirps * s.rx * s.doppler) as f64;
    let mut e = vec![0.0; s.range];
    for c in 0..s.chirps {
        for j in 0..s.rx {
            for (r, acc) in e.iter_mut().enumerate() {
                *acc += frame
                    .doppler_row(c, j, r)
                    .iter()
                    .map(|z| z.norm().to_f64().unwrap_or(0.0))
                    .sum::<f64>();
            }
        }
    }
    e.iter().map(|v| v / n).collect()
}

fn nearest_range_bin(dist: f64, radar: &RadarConfig) -> Option<usize> {
    let b = (dist / radar.range_resolution).round() as usize;
    (b < radar.num_range_bins).then_some(b)
}

/// Max-normalized range energy profile painted onto in-HFOV cells by their
/// radial distance from the radar; azimuth plays no role.
pub fn range_energy_projection<T: Float>(
    frame: &RdFrame<T>,
    grid: &BevGridSpec,
    radar: &RadarConfig,
    radar_offset: (f64, f64),
) -> Result<PredictionMap> {
    let e = range_energy_profile(frame);
    let max = e.iter().copied().fold(0.0, f64::max);
    let hfov = hfov_mask(grid, radar_offset, radar.hfov_deg, radar.max_range);
    let mut probs = vec![0.0f32; grid.num_cells()];
    if max > 0.0 {
        for (i, j, k) in grid.cells() {
            if !hfov.bits()[k] {
                continue;
            }
            let (cx, cy) = grid.cell_center(i, j);
            let (dist, _) = polar_from(radar_offset, cx, cy);
            if let Some(b) = nearest_range_bin(dist, radar) {
                probs[k] = (e[b] / max).clamp(0.0, 1.0) as f32;
            }
        }
    }
    PredictionMap::new(*grid, probs)
}

/// Beamformed magnitude over `(range bin, angle bin)`, angle bins uniform in
/// `u = sin(theta)` over `[-1, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeAzimuthMap {
    pub range_bins: usize,
    pub angle_bins: usize,
    /// Row-major `[range][angle]`.
    pub values: Vec<f64>,
}

impl RangeAzimuthMap {
    pub fn get(&self, r: usize, k: usize) -> f64 {
        self.values[r * self.angle_bins + k]
    }

    pub fn angle_bin_u(&self, k: usize) -> f64 {
        -1.0 + 2.0 * k as f64 / self.angle_bins as f64
    }

    /// Nearest angle bin for `u = sin(theta)`.
    pub fn u_to_bin(&self, u: f64) -> usize {
        let k = ((u + 1.0) * self.angle_bins as f64 / 2.0).round() as i64;
        k.rem_euclid(self.angle_bins as i64) as usize
    }

    /// Global maximum `(range_bin, angle_bin)`; ties go to the lowest range
    /// bin, then the lowest angle bin.
    pub fn peak(&self) -> (usize, usize) {
        let mut best = 0;
        for (k, &v) in self.values.iter().enumerate() {
            if v > self.values[best] {
                best = k;
            }
        }
        (best / self.angle_bins, best % self.angle_bins)
    }

    /// Every cell attaining the global maximum.
    pub fn tied_peaks(&self) -> Vec<(usize, usize)> {
        let max = self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        self.values
            .iter()
            .enumerate()
            .filter(|(_, &v)| v == max)
            .map(|(k, _)| (k / self.angle_bins, k % self.angle_bins))
            .collect()
    }

    /// Azimuth profile at one range bin.
    pub fn row(&self, r: usize) -> &[f64] {
        &self.values[r * self.angle_bins..(r + 1) * self.angle_bins]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }
}

/// Zero-padded spatial FFT over the RX channels of one chirp, per range and
/// Doppler bin; the magnitude is max-reduced over Doppler.
pub fn beamform_oracle<T: Float>(
    frame: &RdFrame<T>,
    radar: &RadarConfig,
    chirp: Chirp,
    fft_size: usize,
) -> Result<RangeAzimuthMap> {
    let s = frame.shape();
    let c = chirp.index();
    if c >= s.chirps {
        return Err(Error::Invalid(format!("frame has no chirp {c}")));
    }
    if fft_size < s.rx {
        return Err(Error::Invalid(format!(
            "angle FFT size {fft_size} smaller than RX count {}",
            s.rx
        )));
    }
    if radar.num_rx != s.rx {
        return Err(Error::Invalid("radar config and frame disagree on RX count".into()));
    }
    if frame.chirp_slice(c).iter().all(|z| z.re.is_zero() && z.im.is_zero()) {
        return Err(Error::EmptyChirp(c));
    }
    let fft = FftPlanner::<f64>::new().plan_fft_forward(fft_size);
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    let mut buf = vec![Complex64::new(0.0, 0.0); fft_size];
    let mut values = vec![0.0f64; s.range * fft_size];
    let half = fft_size / 2;
    for r in 0..s.range {
        let row = &mut values[r * fft_size..(r + 1) * fft_size];
        for d in 0..s.doppler {
            buf.fill(Complex64::new(0.0, 0.0));
            for (j, slot) in buf.iter_mut().take(s.rx).enumerate() {
                let z = frame.get(c, j, r, d);
                *slot = Complex64::new(z.re.to_f64().unwrap_or(0.0), z.im.to_f64().unwrap_or(0.0));
            }
            fft.process_with_scratch(&mut buf, &mut scratch);
            for (m, z) in buf.iter().enumerate() {
                // bin m sits at u = 2m/N; shift so index k sits at u = -1 + 2k/N
                let k = (m + half) % fft_size;
                row[k] = row[k].max(z.norm());
            }
        }
    }
    Ok(RangeAzimuthMap {
        range_bins: s.range,
        angle_bins: fft_size,
        values,
    })
}

/// Samples the RA map at each in-HFOV cell's nearest `(range, angle)` bin,
/// normalized by the map maximum.
pub fn project_ra_to_bev(
    ra: &RangeAzimuthMap,
    grid: &BevGridSpec,
    radar: &RadarConfig,
    radar_offset: (f64, f64),
) -> Result<PredictionMap> {
    let hfov = hfov_mask(grid, radar_offset, radar.hfov_deg, radar.max_range);
    let max = ra.max();
    let mut probs = vec![0.0f32; grid.num_cells()];
    if max > 0.0 {
        for (i, j, k) in grid.cells() {
            if !hfov.bits()[k] {
                continue;
            }
            let (cx, cy) = grid.cell_center(i, j);
            let (dist, az) = polar_from(radar_offset, cx, cy);
            if let Some(r) = nearest_range_bin(dist, radar).filter(|&r| r < ra.range_bins) {
                probs[k] = (ra.get(r, ra.u_to_bin(az.sin())) / max).clamp(0.0, 1.0) as f32;
            }
        }
    }
    PredictionMap::new(*grid, probs)
}

/// Beamform one chirp and project onto the grid.
pub fn beamform_projection<T: Float>(
    frame: &RdFrame<T>,
    grid: &BevGridSpec,
    radar: &RadarConfig,
    radar_offset: (f64, f64),
    chirp: Chirp,
) -> Result<PredictionMap> {
    let ra = beamform_oracle(frame, radar, chirp, DEFAULT_ANGLE_FFT_SIZE)?;
    project_ra_to_bev(&ra, grid, radar, radar_offset)
}
