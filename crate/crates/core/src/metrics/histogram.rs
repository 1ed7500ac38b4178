use crate::error::{Error, Result};

/// Mergeable fixed-bin score histogram for approximate AP over streams that
/// are too large to pool. Each bin acts as one tie group.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreHistogram {
    pos: Vec<u64>,
    neg: Vec<u64>,
}

impl ScoreHistogram {
    pub const MIN_BINS: usize = 2048;

    pub fn new(bins: usize) -> Result<Self> {
        if bins < Self::MIN_BINS {
            return Err(Error::Config(format!(
                "histogram needs at least {} bins, got {bins}",
                Self::MIN_BINS
            )));
        }
        Ok(Self {
            pos: vec![0; bins],
            neg: vec![0; bins],
        })
    }

    fn bin(&self, score: f64) -> usize {
        let n = self.pos.len();
        ((score.clamp(0.0, 1.0) * n as f64) as usize).min(n - 1)
    }

    /// Scores are clamped to [0, 1].
    pub fn add(&mut self, score: f64, positive: bool) {
        let b = self.bin(score);
        if positive {
            self.pos[b] += 1;
        } else {
            self.neg[b] += 1;
        }
    }

    pub fn merge(&mut self, other: &ScoreHistogram) -> Result<()> {
        if other.pos.len() != self.pos.len() {
            return Err(Error::Invalid("histogram bin counts differ".into()));
        }
        for (a, b) in self.pos.iter_mut().zip(&other.pos) {
            *a += b;
        }
        for (a, b) in self.neg.iter_mut().zip(&other.neg) {
            *a += b;
        }
        Ok(())
    }

    pub fn average_precision(&self) -> Result<f64> {
        let positives: u64 = self.pos.iter().sum();
        if positives == 0 {
            return Err(Error::UndefinedAp);
        }
        let (mut tp, mut fp, mut ap) = (0u64, 0u64, 0.0);
        for b in (0..self.pos.len()).rev() {
            tp += self.pos[b];
            fp += self.neg[b];
            if self.pos[b] > 0 {
                ap += self.pos[b] as f64 * tp as f64 / (tp + fp) as f64;
            }
        }
        Ok(ap / positives as f64)
    }
}
