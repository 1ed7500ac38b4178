//! Input preprocessing and ablation transforms on RD tensors.

use num_complex::Complex;
use num_traits::Float;

use crate::error::{Error, Result};
use crate::rd::RdFrame;

/// Power floor added before the per-cell square root.
pub const NORM_EPS: f64 = 1e-20;

/// Divides every RX value of each `(chirp, range, doppler)` cell by
/// `sqrt(mean_j |x_j|^2 + eps)`.
pub fn normalize_rd<T: Float>(frame: &RdFrame<T>) -> RdFrame<T> {
    let s = frame.shape();
    let eps = T::from(NORM_EPS).expect("eps representable");
    let rx = T::from(s.rx).expect("rx count representable");
    let mut out = frame.data().to_vec();
    for c in 0..s.chirps {
        for r in 0..s.range {
            for d in 0..s.doppler {
                let power = (0..s.rx).fold(T::zero(), |acc, j| acc + frame.get(c, j, r, d).norm_sqr());
                let scale = (power / rx + eps).sqrt();
                for j in 0..s.rx {
                    out[s.index(c, j, r, d)] = frame.get(c, j, r, d) / scale;
                }
            }
        }
    }
    frame.map_data(out)
}

/// Which chirp slices are kept; the others are zeroed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChirpSelection {
    AOnly,
    BOnly,
    Both,
}

impl ChirpSelection {
    fn keeps(self, chirp: usize) -> bool {
        match self {
            ChirpSelection::AOnly => chirp == 0,
            ChirpSelection::BOnly => chirp == 1,
            ChirpSelection::Both => true,
        }
    }
}

impl std::str::FromStr for ChirpSelection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "a_only" => Ok(Self::AOnly),
            "b_only" => Ok(Self::BOnly),
            "ab" | "both" => Ok(Self::Both),
            _ => Err(Error::Invalid(format!("unknown chirp selection `{s}`"))),
        }
    }
}

pub fn select_chirps<T: Float>(frame: &RdFrame<T>, mode: ChirpSelection) -> RdFrame<T> {
    let s = frame.shape();
    let block = s.rx * s.range * s.doppler;
    let zero = Complex::new(T::zero(), T::zero());
    let out = frame
        .data()
        .iter()
        .enumerate()
        .map(|(k, &z)| if mode.keeps(k / block) { z } else { zero })
        .collect();
    frame.map_data(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CollapseDim {
    Doppler,
    Range,
}

/// Replaces every value by the complex mean along `dim`, broadcast back to
/// the full shape.
pub fn collapse_dim<T: Float>(frame: &RdFrame<T>, dim: CollapseDim) -> RdFrame<T> {
    let s = frame.shape();
    let mut out = frame.data().to_vec();
    let zero = Complex::new(T::zero(), T::zero());
    for c in 0..s.chirps {
        for j in 0..s.rx {
            match dim {
                CollapseDim::Doppler => {
                    let n = T::from(s.doppler).expect("representable");
                    for r in 0..s.range {
                        let mean = frame.doppler_row(c, j, r).iter().fold(zero, |a, &z| a + z) / n;
                        for d in 0..s.doppler {
                            out[s.index(c, j, r, d)] = mean;
                        }
                    }
                }
                CollapseDim::Range => {
                    let n = T::from(s.range).expect("representable");
                    for d in 0..s.doppler {
                        let mean = (0..s.range).fold(zero, |a, r| a + frame.get(c, j, r, d)) / n;
                        for r in 0..s.range {
                            out[s.index(c, j, r, d)] = mean;
                        }
                    }
                }
            }
        }
    }
    frame.map_data(out)
}
