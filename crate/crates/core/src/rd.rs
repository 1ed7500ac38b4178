//! Complex per-chirp, per-RX range-Doppler tensors.

use num_complex::Complex;
use num_traits::Float;

use crate::config::RadarConfig;
use crate::error::{Error, Result};

/// Chirp type of the A/B waveform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Chirp {
    /// Single active TX.
    A,
    /// All TX active.
    B,
}

impl Chirp {
    pub fn index(self) -> usize {
        match self {
            Chirp::A => 0,
            Chirp::B => 1,
        }
    }
}

impl std::str::FromStr for Chirp {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "a" => Ok(Chirp::A),
            "b" => Ok(Chirp::B),
            _ => Err(Error::Invalid(format!("unknown chirp `{s}` (expected a or b)"))),
        }
    }
}

/// Tensor dimensions `(chirps, rx, range, doppler)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RdShape {
    pub chirps: usize,
    pub rx: usize,
    pub range: usize,
    pub doppler: usize,
}

impl RdShape {
    pub fn of(cfg: &RadarConfig) -> Self {
        Self {
            chirps: cfg.num_chirps(),
            rx: cfg.num_rx,
            range: cfg.num_range_bins,
            doppler: cfg.num_doppler_bins,
        }
    }

    pub fn len(&self) -> usize {
        self.chirps * self.rx * self.range * self.doppler
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Flat index of `[c][j][r][d]`.
    pub fn index(&self, c: usize, j: usize, r: usize, d: usize) -> usize {
        ((c * self.rx + j) * self.range + r) * self.doppler + d
    }
}

/// Complex tensor `X[c][j][r][d]`; Doppler is stored zero-centered (zero
/// radial velocity at bin `D/2`).
///
/// `T = f32` is the stored precision; the simulator accumulates in `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct RdFrame<T = f32> {
    shape: RdShape,
    data: Vec<Complex<T>>,
    config_digest: String,
}

impl<T: Float> RdFrame<T> {
    pub fn zeros(shape: RdShape, config_digest: impl Into<String>) -> Self {
        Self {
            shape,
            data: vec![Complex::new(T::zero(), T::zero()); shape.len()],
            config_digest: config_digest.into(),
        }
    }

    pub fn from_data(shape: RdShape, data: Vec<Complex<T>>, config_digest: impl Into<String>) -> Result<Self> {
        if data.len() != shape.len() {
            return Err(Error::Invalid(format!(
                "RD data has {} values, shape {:?} needs {}",
                data.len(),
                shape,
                shape.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Invalid("RD data contains non-finite values".into()));
        }
        Ok(Self {
            shape,
            data,
            config_digest: config_digest.into(),
        })
    }

    pub fn shape(&self) -> RdShape {
        self.shape
    }

    pub fn data(&self) -> &[Complex<T>] {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.data
    }

    pub fn config_digest(&self) -> &str {
        &self.config_digest
    }

    pub fn get(&self, c: usize, j: usize, r: usize, d: usize) -> Complex<T> {
        self.data[self.shape.index(c, j, r, d)]
    }

    pub(crate) fn at_mut(&mut self, c: usize, j: usize, r: usize, d: usize) -> &mut Complex<T> {
        let k = self.shape.index(c, j, r, d);
        &mut self.data[k]
    }

    /// Contiguous `[j][r][d]` block of one chirp.
    pub fn chirp_slice(&self, c: usize) -> &[Complex<T>] {
        let n = self.shape.rx * self.shape.range * self.shape.doppler;
        &self.data[c * n..(c + 1) * n]
    }

    /// Contiguous Doppler row `[d]` of one `(c, j, r)`.
    pub fn doppler_row(&self, c: usize, j: usize, r: usize) -> &[Complex<T>] {
        let start = self.shape.index(c, j, r, 0);
        &self.data[start..start + self.shape.doppler]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub(crate) fn map_data(&self, data: Vec<Complex<T>>) -> Self {
        debug_assert_eq!(data.len(), self.data.len());
        Self {
            shape: self.shape,
            data,
            config_digest: self.config_digest.clone(),
        }
    }
}

impl RdFrame<f64> {
    /// Rounds to stored precision.
    pub fn to_f32(&self) -> RdFrame<f32> {
        RdFrame {
            shape: self.shape,
            data: self
                .data
                .iter()
                .map(|z| Complex::new(z.re as f32, z.im as f32))
                .collect(),
            config_digest: self.config_digest.clone(),
        }
    }
}

impl RdFrame<f32> {
    pub fn to_f64(&self) -> RdFrame<f64> {
        RdFrame {
            shape: self.shape,
            data: self
                .data
                .iter()
                .map(|z| Complex::new(z.re as f64, z.im as f64))
                .collect(),
            config_digest: self.config_digest.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_is_chirp_rx_range_doppler() {
        let shape = RdShape {
            chirps: 2,
            rx: 3,
            range: 4,
            doppler: 5,
        };
        assert_eq!(shape.index(0, 0, 0, 1), 1);
        assert_eq!(shape.index(0, 0, 1, 0), 5);
        assert_eq!(shape.index(0, 1, 0, 0), 20);
        assert_eq!(shape.index(1, 0, 0, 0), 60);
        assert_eq!(shape.index(1, 2, 3, 4), shape.len() - 1);
    }

    #[test]
    fn rejects_non_finite() {
        let shape = RdShape {
            chirps: 1,
            rx: 1,
            range: 1,
            doppler: 2,
        };
        let data = vec![Complex::new(0.0f32, 0.0), Complex::new(f32::NAN, 0.0)];
        assert!(RdFrame::from_data(shape, data, "x").is_err());
        assert!(RdFrame::<f32>::from_data(shape, vec![], "x").is_err());
    }

    #[test]
    fn chirp_parse() {
        assert_eq!("A".parse::<Chirp>().unwrap(), Chirp::A);
        assert_eq!("b".parse::<Chirp>().unwrap(), Chirp::B);
        assert!("c".parse::<Chirp>().is_err());
    }
}
