//! Masked binary focal loss on occupancy logits.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FocalLossParams {
    /// Focusing exponent, >= 0.
    pub gamma: f64,
    /// Positive-class weight in [0, 1].
    pub alpha: f64,
}

impl Default for FocalLossParams {
    fn default() -> Self {
        Self {
            gamma: 2.0,
            alpha: 0.25,
        }
    }
}

impl FocalLossParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma >= 0.0) || !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::Config(format!(
                "focal loss needs gamma >= 0 and alpha in [0, 1], got gamma {} alpha {}",
                self.gamma, self.alpha
            )));
        }
        Ok(())
    }
}

/// `ln(1 + e^x)` without overflow.
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn check(logits: &[f64], labels: &[bool], mask: &[bool], params: &FocalLossParams) -> Result<usize> {
    params.validate()?;
    if logits.len() != labels.len() || logits.len() != mask.len() {
        return Err(Error::Invalid("logits, labels and mask differ in length".into()));
    }
    let n = mask.iter().filter(|&&m| m).count();
    if n == 0 {
        return Err(Error::Invalid("focal loss mask is empty".into()));
    }
    Ok(n)
}

/// Mean over masked cells of `-alpha_t (1 - p_t)^gamma ln(p_t)`.
/// Cells outside the mask are never read.
pub fn masked_focal_loss(logits: &[f64], labels: &[bool], mask: &[bool], params: &FocalLossParams) -> Result<f64> {
    let n = check(logits, labels, mask, params)?;
    let mut total = 0.0;
    for ((&x, &y), _) in logits.iter().zip(labels).zip(mask).filter(|(_, &m)| m) {
        // signed logit: p_t = sigmoid(z)
        let z = if y { x } else { -x };
        let alpha_t = if y { params.alpha } else { 1.0 - params.alpha };
        let one_minus_pt = sigmoid(-z);
        let log_pt = -softplus(-z);
        total += -alpha_t * one_minus_pt.powf(params.gamma) * log_pt;
    }
    Ok(total / n as f64)
}

/// Gradient of [`masked_focal_loss`] with respect to each logit; exactly zero
/// outside the mask.
pub fn masked_focal_loss_grad(
    logits: &[f64],
    labels: &[bool],
    mask: &[bool],
    params: &FocalLossParams,
) -> Result<Vec<f64>> {
    let n = check(logits, labels, mask, params)? as f64;
    let g = params.gamma;
    Ok(logits
        .iter()
        .zip(labels)
        .zip(mask)
        .map(|((&x, &y), &m)| {
            if !m {
                return 0.0;
            }
            let z = if y { x } else { -x };
            let alpha_t = if y { params.alpha } else { 1.0 - params.alpha };
            let q = sigmoid(-z); // 1 - p_t
            let p = sigmoid(z);
            let log_pt = -softplus(-z);
            // d/dz [-(q^g) ln p] = g q^g p ln p - q^(g+1)
            let focus = if g == 0.0 { 0.0 } else { g * q.powf(g) * p * log_pt };
            let dz = alpha_t * (focus - q.powf(g + 1.0));
            let sign = if y { 1.0 } else { -1.0 };
            sign * dz / n
        })
        .collect())
}
