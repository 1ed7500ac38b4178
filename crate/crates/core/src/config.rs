//! Radar sensor description.

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Sensor and waveform parameters of a 6-TX x 8-RX mid-range automotive radar
/// running an A/B chirp sequence.
///
/// Antenna positions lie on the lateral array axis. With the default layout
/// the RX elements are spaced at half a wavelength and the TX elements at
/// `num_rx` half-wavelengths, so TX/RX position sums fill a 48-element
/// virtual uniform linear array.
#[derive(Debug, Clone, PartialEq)]
pub struct RadarConfig {
    /// Carrier frequency (Hz).
    pub carrier_freq: f64,
    pub num_tx: usize,
    pub num_rx: usize,
    /// TX element positions along the array axis (m).
    pub tx_positions: Vec<f64>,
    /// RX element positions along the array axis (m).
    pub rx_positions: Vec<f64>,
    /// Full horizontal field of view (degrees).
    pub hfov_deg: f64,
    pub num_range_bins: usize,
    /// Range bin width (m).
    pub range_resolution: f64,
    pub num_doppler_bins: usize,
    /// Maximum unambiguous radial speed (m/s); Doppler spans `[-v, v)`.
    pub max_unambiguous_speed: f64,
    /// Active TX indices per chirp type. Index 0 is chirp A, index 1 chirp B.
    pub chirp_tx_sets: Vec<Vec<usize>>,
    /// Instrumented range of the operating mode (m).
    pub max_range: f64,
    /// SNR of a unit-reflectivity boresight target at 10 m on chirp A.
    /// `f64::INFINITY` disables noise.
    pub snr_db: f64,
}

impl Default for RadarConfig {
    fn default() -> Self {
        Self::with_layout(76.5e9, 6, 8)
    }
}

impl RadarConfig {
    /// Default waveform with a filled virtual ULA for the given antenna counts.
    pub fn with_layout(carrier_freq: f64, num_tx: usize, num_rx: usize) -> Self {
        let half_lambda = SPEED_OF_LIGHT / carrier_freq / 2.0;
        Self {
            carrier_freq,
            num_tx,
            num_rx,
            tx_positions: (0..num_tx).map(|k| k as f64 * num_rx as f64 * half_lambda).collect(),
            rx_positions: (0..num_rx).map(|j| j as f64 * half_lambda).collect(),
            hfov_deg: 64.0,
            num_range_bins: 200,
            range_resolution: 0.33,
            num_doppler_bins: 128,
            max_unambiguous_speed: 25.0,
            chirp_tx_sets: vec![vec![0], (0..num_tx).collect()],
            max_range: 65.0,
            snr_db: 20.0,
        }
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_freq
    }

    pub fn num_chirps(&self) -> usize {
        self.chirp_tx_sets.len()
    }

    /// Doppler bin width in m/s.
    pub fn doppler_resolution(&self) -> f64 {
        2.0 * self.max_unambiguous_speed / self.num_doppler_bins as f64
    }

    /// Far edge of the last range bin (m).
    pub fn range_extent(&self) -> f64 {
        self.num_range_bins as f64 * self.range_resolution
    }

    pub fn half_fov_rad(&self) -> f64 {
        (self.hfov_deg / 2.0).to_radians()
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.num_range_bins == 0 || self.num_doppler_bins == 0 || self.num_rx == 0 {
            return fail("range bins, Doppler bins and RX count must be positive".into());
        }
        if self.num_tx == 0 {
            return fail("TX count must be positive".into());
        }
        if !(self.carrier_freq > 0.0) {
            return fail(format!("carrier frequency {} must be positive", self.carrier_freq));
        }
        if !(self.hfov_deg > 0.0 && self.hfov_deg < 180.0) {
            return fail(format!("hfov {} deg outside (0, 180)", self.hfov_deg));
        }
        if !(self.range_resolution > 0.0) || !(self.max_unambiguous_speed > 0.0) {
            return fail("range resolution and unambiguous speed must be positive".into());
        }
        if !(self.max_range > 0.0) {
            return fail("max range must be positive".into());
        }
        if self.snr_db.is_nan() {
            return fail("snr_db is NaN".into());
        }
        if self.tx_positions.len() != self.num_tx || self.rx_positions.len() != self.num_rx {
            return fail("antenna position counts do not match num_tx / num_rx".into());
        }
        let half_lambda = self.wavelength() / 2.0;
        let tol = 1e-9 * half_lambda.max(1.0);
        for w in self.rx_positions.windows(2) {
            if ((w[1] - w[0]) - half_lambda).abs() > tol {
                return fail("RX spacing must be lambda/2".into());
            }
        }
        let tx_step = self.num_rx as f64 * half_lambda;
        for w in self.tx_positions.windows(2) {
            if ((w[1] - w[0]) - tx_step).abs() > tol {
                return fail("TX spacing must be num_rx * lambda/2".into());
            }
        }
        if self.chirp_tx_sets.is_empty() {
            return fail("at least one chirp type is required".into());
        }
        for (c, set) in self.chirp_tx_sets.iter().enumerate() {
            if set.is_empty() {
                return fail(format!("chirp {c} has no active TX"));
            }
            if let Some(&bad) = set.iter().find(|&&k| k >= self.num_tx) {
                return fail(format!("chirp {c} references TX {bad} of {}", self.num_tx));
            }
        }
        Ok(())
    }

    /// Canonical text form; the digest is computed over it.
    pub fn canonical_text(&self) -> String {
        let sets: Vec<String> = self
            .chirp_tx_sets
            .iter()
            .map(|s| s.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(","))
            .collect();
        let fmt_list = |v: &[f64]| v.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(",");
        format!(
            "carrier_freq={:e};num_tx={};num_rx={};tx={};rx={};hfov={:e};R={};dr={:e};D={};vmax={:e};chirps={};max_range={:e};snr_db={:e}",
            self.carrier_freq,
            self.num_tx,
            self.num_rx,
            fmt_list(&self.tx_positions),
            fmt_list(&self.rx_positions),
            self.hfov_deg,
            self.num_range_bins,
            self.range_resolution,
            self.num_doppler_bins,
            self.max_unambiguous_speed,
            sets.join("|"),
            self.max_range,
            self.snr_db,
        )
    }

    /// Short hex digest identifying this configuration.
    pub fn digest(&self) -> String {
        let hash = Sha256::digest(self.canonical_text().as_bytes());
        hex::encode(&hash[..8])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid() {
        let cfg = RadarConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.num_chirps(), 2);
        assert_eq!(cfg.chirp_tx_sets[0], vec![0]);
        assert_eq!(cfg.chirp_tx_sets[1], vec![0, 1, 2, 3, 4, 5]);
        assert!((cfg.doppler_resolution() - 0.390625).abs() < 1e-15);
    }

    #[test]
    fn virtual_array_is_filled() {
        let cfg = RadarConfig::default();
        let half = cfg.wavelength() / 2.0;
        let mut virt: Vec<f64> = cfg
            .tx_positions
            .iter()
            .flat_map(|t| cfg.rx_positions.iter().map(move |r| (t + r) / half))
            .collect();
        virt.sort_by(f64::total_cmp);
        assert_eq!(virt.len(), 48);
        for (n, v) in virt.iter().enumerate() {
            assert!((v - n as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_bad_chirp_sets() {
        let mut cfg = RadarConfig::default();
        cfg.chirp_tx_sets[1] = vec![];
        assert!(cfg.validate().is_err());
        cfg.chirp_tx_sets[1] = vec![6];
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn rejects_bad_hfov() {
        for hfov_deg in [180.0, 0.0] {
            let cfg = RadarConfig {
                hfov_deg,
                ..RadarConfig::default()
            };
            assert!(cfg.validate().is_err());
        }
    }

    #[test]
    fn digest_tracks_fields() {
        let a = RadarConfig::default();
        let mut b = a.clone();
        assert_eq!(a.digest(), b.digest());
        b.snr_db = 15.0;
        assert_ne!(a.digest(), b.digest());
    }
}
