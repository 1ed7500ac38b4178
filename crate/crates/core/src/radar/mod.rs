//! Forward model from scatterer scenes to per-antenna RD tensors.
//!
//! Each scatterer is a point target at its footprint center. For chirp `c`
//! and receive antenna `j` it contributes
//!
//! ```text
//! a_cj = (reflectivity / r^p) * sum_{k in TX(c)} e^{i k0 x_tx,k sin(theta)} * e^{i k0 x_rx,j sin(theta)}
//! ```
//!
//! with `k0 = 2 pi / lambda`, spread over a separable Hann point-spread kernel
//! around the fractional range bin `r / dr` and Doppler bin
//! `D/2 + v_r / dv`. All TX of a chirp transmit coherently with zero relative
//! phase, so chirp B carries the TX array factor on top of the RX steering
//! vector while keeping `num_rx` channels.

mod transforms;

pub use transforms::{collapse_dim, normalize_rd, select_chirps, ChirpSelection, CollapseDim, NORM_EPS};

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::config::RadarConfig;
use crate::error::{Error, Result};
use crate::rd::{RdFrame, RdShape};
use crate::scene::Scene;

/// Reference range at which `snr_db` is calibrated.
pub const NOISE_REFERENCE_RANGE: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationParams {
    /// Exponent `p` of the `reflectivity / r^p` amplitude law.
    pub amplitude_exponent: f64,
    /// Kernel spans `2 * hw + 1` bins in range and in Doppler; 0 injects into
    /// the nearest bin only.
    pub psf_halfwidth_bins: usize,
    /// Noise RNG seed; see [`frame_seed`].
    pub seed: u64,
}

impl Default for PropagationParams {
    fn default() -> Self {
        Self {
            amplitude_exponent: 2.0,
            psf_halfwidth_bins: 1,
            seed: 0,
        }
    }
}

impl PropagationParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude_exponent >= 0.0) {
            return Err(Error::Config(format!(
                "amplitude exponent {} must be >= 0",
                self.amplitude_exponent
            )));
        }
        Ok(())
    }
}

/// Order-independent per-frame seed.
pub fn frame_seed(seed: u64, frame_id: u64) -> u64 {
    // splitmix64 finalizer over the pair
    let mut z = seed
        ^ frame_id
            .wrapping_mul(0x9E37_79B9_7F4A_7C15)
            .wrapping_add(0xD1B5_4A32_D192_ED03);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Separable kernel taps `(bin, weight)` around fractional bin `center`.
///
/// Weights follow `cos^2(pi * (b - center) / (2 (hw + 1)))`, which equals 1 at
/// the center and vanishes `hw + 1` bins away.
pub fn psf_taps(center: f64, halfwidth: usize) -> Vec<(i64, f64)> {
    let nearest = center.round() as i64;
    if halfwidth == 0 {
        return vec![(nearest, 1.0)];
    }
    let hw = halfwidth as i64;
    let span = 2.0 * (halfwidth as f64 + 1.0);
    (nearest - hw..=nearest + hw)
        .map(|b| {
            let w = (PI * (b as f64 - center) / span).cos();
            (b, w * w)
        })
        .collect()
}

/// Geometry of one scatterer as seen by the radar.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetGeometry {
    pub range: f64,
    /// Azimuth from boresight (rad), positive toward +y.
    pub azimuth: f64,
    /// Radial velocity (m/s), positive when receding.
    pub radial_velocity: f64,
    pub range_bin: f64,
    pub doppler_bin: f64,
}

pub fn target_geometry(
    radar_origin: (f64, f64),
    x: f64,
    y: f64,
    vx: f64,
    vy: f64,
    radar: &RadarConfig,
) -> TargetGeometry {
    let dx = x - radar_origin.0;
    let dy = y - radar_origin.1;
    let range = dx.hypot(dy);
    let radial_velocity = if range > 0.0 { (vx * dx + vy * dy) / range } else { 0.0 };
    TargetGeometry {
        range,
        azimuth: dy.atan2(dx),
        radial_velocity,
        range_bin: range / radar.range_resolution,
        doppler_bin: radar.num_doppler_bins as f64 / 2.0 + radial_velocity / radar.doppler_resolution(),
    }
}

/// Complex per-RX amplitude of a unit-amplitude target at `azimuth` on the
/// given chirp, before range attenuation.
pub fn chirp_steering(radar: &RadarConfig, chirp: usize, azimuth: f64) -> Vec<Complex64> {
    let k0 = 2.0 * PI / radar.wavelength();
    let s = azimuth.sin();
    let tx: Complex64 = radar.chirp_tx_sets[chirp]
        .iter()
        .map(|&k| Complex64::from_polar(1.0, k0 * radar.tx_positions[k] * s))
        .sum();
    radar
        .rx_positions
        .iter()
        .map(|&x| tx * Complex64::from_polar(1.0, k0 * x * s))
        .collect()
}

/// Per-component standard deviation of the complex noise.
pub fn noise_sigma(radar: &RadarConfig, prop: &PropagationParams) -> f64 {
    if !radar.snr_db.is_finite() {
        return 0.0;
    }
    let reference = 1.0 / NOISE_REFERENCE_RANGE.powf(prop.amplitude_exponent);
    let power = reference * reference / 10f64.powf(radar.snr_db / 10.0);
    (power / 2.0).sqrt()
}

/// Simulates one frame at double precision.
///
/// Targets outside the HFOV or beyond the last range bin contribute nothing.
/// Noise is circular complex Gaussian, calibrated so that a unit-reflectivity
/// boresight target at 10 m reaches `radar.snr_db` per RX on chirp A.
pub fn simulate_rd(scene: &Scene, radar: &RadarConfig, prop: &PropagationParams) -> Result<RdFrame<f64>> {
    radar.validate()?;
    prop.validate()?;
    scene.validate()?;
    let shape = RdShape::of(radar);
    let mut frame = RdFrame::<f64>::zeros(shape, radar.digest());
    let half_fov = radar.half_fov_rad();
    let extent = radar.range_extent();
    let d_bins = shape.doppler as i64;

    for (index, s) in scene.scatterers.iter().enumerate() {
        let g = target_geometry(scene.radar_origin_offset, s.x, s.y, s.vx, s.vy, radar);
        if g.range == 0.0 {
            return Err(Error::ZeroRange { index });
        }
        if g.azimuth.abs() > half_fov || g.range >= extent {
            continue;
        }
        let amplitude = s.reflectivity / g.range.powf(prop.amplitude_exponent);
        let range_taps = psf_taps(g.range_bin, prop.psf_halfwidth_bins);
        let doppler_taps = psf_taps(g.doppler_bin, prop.psf_halfwidth_bins);
        for c in 0..shape.chirps {
            let steering = chirp_steering(radar, c, g.azimuth);
            for (j, sv) in steering.iter().enumerate() {
                let a = sv * amplitude;
                for &(rb, wr) in &range_taps {
                    if rb < 0 || rb >= shape.range as i64 {
                        continue;
                    }
                    for &(db, wd) in &doppler_taps {
                        let d = db.rem_euclid(d_bins) as usize;
                        *frame.at_mut(c, j, rb as usize, d) += a * (wr * wd);
                    }
                }
            }
        }
    }

    let sigma = noise_sigma(radar, prop);
    if sigma > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(prop.seed);
        for z in frame.data_mut() {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            *z += Complex64::new(re * sigma, im * sigma);
        }
    }
    Ok(frame)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::Scatterer;

    fn quiet() -> RadarConfig {
        RadarConfig {
            snr_db: f64::INFINITY,
            ..RadarConfig::default()
        }
    }

    fn nearest() -> PropagationParams {
        PropagationParams {
            psf_halfwidth_bins: 0,
            ..PropagationParams::default()
        }
    }

    fn nonzero_cells(frame: &RdFrame<f64>, c: usize, j: usize) -> Vec<(usize, usize)> {
        let s = frame.shape();
        let mut out = Vec::new();
        for r in 0..s.range {
            for d in 0..s.doppler {
                if frame.get(c, j, r, d).norm() > 0.0 {
                    out.push((r, d));
                }
            }
        }
        out
    }

    #[test]
    fn boresight_static_target() {
        let radar = quiet();
        let frame = simulate_rd(&Scene::new(vec![Scatterer::at(10.0, 0.0)]), &radar, &nearest()).unwrap();
        for c in 0..2 {
            for j in 0..8 {
                assert_eq!(nonzero_cells(&frame, c, j), vec![(30, 64)]);
            }
        }
        let a0 = frame.get(0, 0, 30, 64);
        assert!((a0.re - 0.01).abs() < 1e-15 && a0.im.abs() < 1e-15);
        for j in 0..8 {
            let a = frame.get(0, j, 30, 64);
            let b = frame.get(1, j, 30, 64);
            assert!((a - a0).norm() < 1e-15);
            assert!((b - a0 * 6.0).norm() < 1e-14);
        }
    }

    #[test]
    fn inter_rx_phase_step_at_10_degrees() {
        let radar = quiet();
        let scene = Scene::new(vec![Scatterer::polar(20.0, 10.0)]);
        let frame = simulate_rd(&scene, &radar, &nearest()).unwrap();
        let g = target_geometry(
            (0.0, 0.0),
            scene.scatterers[0].x,
            scene.scatterers[0].y,
            0.0,
            0.0,
            &radar,
        );
        let r = g.range_bin.round() as usize;
        let expected = PI * 10f64.to_radians().sin();
        // the commonly quoted 0.5454 is truncated, not rounded
        assert!((expected - 0.5454).abs() < 2e-4);
        for j in 0..7 {
            let step = (frame.get(0, j + 1, r, 64) / frame.get(0, j, r, 64)).arg();
            assert!((step - expected).abs() < 1e-9, "rx {j}: {step}");
        }
    }

    #[test]
    fn receding_target_doppler_bin() {
        let radar = quiet();
        let mut s = Scatterer::at(20.0, 0.0);
        s.vx = 5.0;
        let g = target_geometry((0.0, 0.0), s.x, s.y, s.vx, s.vy, &radar);
        assert!((g.doppler_bin - 76.8).abs() < 1e-12);
        let frame = simulate_rd(&Scene::new(vec![s]), &radar, &PropagationParams::default()).unwrap();
        let taps: Vec<usize> = nonzero_cells(&frame, 0, 0).iter().map(|&(_, d)| d).collect();
        assert!(taps.contains(&76) && taps.contains(&77));
        let w76 = frame.get(0, 0, 61, 76).norm();
        let w77 = frame.get(0, 0, 61, 77).norm();
        assert!(w77 > w76, "kernel peak sits at 76.8");
    }

    #[test]
    fn doppler_wraps() {
        let radar = quiet();
        let mut s = Scatterer::at(20.0, 0.0);
        s.vx = -25.0; // bin 0 exactly
        let frame = simulate_rd(&Scene::new(vec![s]), &radar, &PropagationParams::default()).unwrap();
        let ds: Vec<usize> = nonzero_cells(&frame, 0, 0).iter().map(|&(_, d)| d).collect();
        assert!(ds.contains(&127) && ds.contains(&0) && ds.contains(&1));
    }

    #[test]
    fn zero_range_is_rejected() {
        let err = simulate_rd(&Scene::new(vec![Scatterer::at(0.0, 0.0)]), &quiet(), &nearest()).unwrap_err();
        assert!(matches!(err, Error::ZeroRange { index: 0 }));
    }

    #[test]
    fn outside_hfov_or_range_is_silent() {
        let radar = quiet();
        let scene = Scene::new(vec![Scatterer::polar(20.0, 40.0), Scatterer::polar(70.0, 0.0)]);
        let frame = simulate_rd(&scene, &radar, &nearest()).unwrap();
        assert!(frame.data().iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn noise_calibration() {
        let radar = RadarConfig {
            snr_db: 20.0,
            ..RadarConfig::default()
        };
        let prop = PropagationParams {
            seed: 3,
            ..PropagationParams::default()
        };
        let frame = simulate_rd(&Scene::default(), &radar, &prop).unwrap();
        let mean_power = frame.data().iter().map(|z| z.norm_sqr()).sum::<f64>() / frame.data().len() as f64;
        // 1e-4 / 100
        assert!((mean_power / 1e-6 - 1.0).abs() < 0.01, "{mean_power}");
    }

    #[test]
    fn noise_is_seeded() {
        let radar = RadarConfig::default();
        let p = |seed| PropagationParams {
            seed,
            ..PropagationParams::default()
        };
        let scene = Scene::new(vec![Scatterer::at(15.0, 2.0)]);
        let a = simulate_rd(&scene, &radar, &p(1)).unwrap();
        let b = simulate_rd(&scene, &radar, &p(1)).unwrap();
        let c = simulate_rd(&scene, &radar, &p(2)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(frame_seed(1, 2), frame_seed(2, 1));
    }

    #[test]
    fn psf_taps_shape() {
        let taps = psf_taps(30.0, 1);
        assert_eq!(taps.iter().map(|t| t.0).collect::<Vec<_>>(), vec![29, 30, 31]);
        assert!((taps[1].1 - 1.0).abs() < 1e-15);
        assert!((taps[0].1 - 0.5).abs() < 1e-15);
        assert_eq!(psf_taps(76.8, 0), vec![(77, 1.0)]);
    }
}
