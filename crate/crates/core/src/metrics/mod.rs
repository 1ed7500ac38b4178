//! Pixel-wise occupancy metrics over pooled masked cells.
//!
//! Scores are ranked descending with ties grouped: all cells sharing a score
//! enter the ranking together. A cell is predicted occupied when
//! `score >= threshold`, and thresholds are always drawn from observed scores.

mod focal;
mod histogram;
mod report;

pub use focal::{masked_focal_loss, masked_focal_loss_grad, FocalLossParams};
pub use histogram::ScoreHistogram;
pub use report::{
    AzimuthBand, BandMetrics, EvalReport, Evaluator, RangeBand, AZIMUTH_BANDS, POOLING_NOTE, RANGE_BANDS,
};

use crate::error::{Error, Result};
use crate::grid::{BevLabel, BevMask, PredictionMap};

/// One point of a precision-recall curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrPoint {
    pub threshold: f64,
    pub precision: f64,
    pub recall: f64,
}

/// Cumulative `(threshold, tp, fp)` after each distinct score, descending.
fn ranked_groups(scores: &[f64], labels: &[bool]) -> Vec<(f64, u64, u64)> {
    assert_eq!(scores.len(), labels.len(), "scores and labels differ in length");
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_unstable_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut out: Vec<(f64, u64, u64)> = Vec::new();
    let (mut tp, mut fp) = (0u64, 0u64);
    for (n, &k) in order.iter().enumerate() {
        if labels[k] {
            tp += 1;
        } else {
            fp += 1;
        }
        let last_of_group = order.get(n + 1).is_none_or(|&next| scores[next] != scores[k]);
        if last_of_group {
            out.push((scores[k], tp, fp));
        }
    }
    out
}

/// Area under the precision-recall curve by step integration.
pub fn average_precision(scores: &[f64], labels: &[bool]) -> Result<f64> {
    let positives = labels.iter().filter(|&&l| l).count() as u64;
    if positives == 0 {
        return Err(Error::UndefinedAp);
    }
    let mut ap = 0.0;
    let mut prev_tp = 0u64;
    for (_, tp, fp) in ranked_groups(scores, labels) {
        if tp > prev_tp {
            ap += (tp - prev_tp) as f64 * tp as f64 / (tp + fp) as f64;
            prev_tp = tp;
        }
    }
    Ok(ap / positives as f64)
}

/// Precision/recall at every distinct observed threshold, descending.
pub fn pr_curve(scores: &[f64], labels: &[bool]) -> Result<Vec<PrPoint>> {
    let positives = labels.iter().filter(|&&l| l).count() as u64;
    if positives == 0 {
        return Err(Error::UndefinedAp);
    }
    Ok(ranked_groups(scores, labels)
        .into_iter()
        .map(|(threshold, tp, fp)| PrPoint {
            threshold,
            precision: tp as f64 / (tp + fp) as f64,
            recall: tp as f64 / positives as f64,
        })
        .collect())
}

/// Observed score maximizing F1; ties go to the larger threshold.
pub fn select_global_threshold(scores: &[f64], labels: &[bool]) -> Result<f64> {
    let positives = labels.iter().filter(|&&l| l).count() as u128;
    if positives == 0 {
        return Err(Error::UndefinedAp);
    }
    // F1 = 2 tp / (tp + fp + P); compared exactly by cross-multiplication.
    let mut best: Option<(f64, u128, u128)> = None;
    for (threshold, tp, fp) in ranked_groups(scores, labels) {
        let (tp, den) = (tp as u128, (tp + fp) as u128 + positives);
        match best {
            Some((_, btp, bden)) if tp * bden <= btp * den => {}
            _ => best = Some((threshold, tp, den)),
        }
    }
    Ok(best.expect("non-empty when positives exist").0)
}

pub fn f1_at(scores: &[f64], labels: &[bool], threshold: f64) -> f64 {
    let (mut tp, mut fp, mut fneg) = (0u64, 0u64, 0u64);
    for (&s, &l) in scores.iter().zip(labels) {
        match (s >= threshold, l) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fneg += 1,
            _ => {}
        }
    }
    if tp == 0 {
        0.0
    } else {
        2.0 * tp as f64 / (2 * tp + fp + fneg) as f64
    }
}

/// `|pred & gt & mask| / |(pred | gt) & mask|`; an empty union scores 1.
pub fn iou_occupied(pred: &[bool], gt: &[bool], mask: &[bool]) -> f64 {
    let (mut inter, mut union) = (0u64, 0u64);
    for ((&p, &g), &m) in pred.iter().zip(gt).zip(mask) {
        if m {
            inter += (p && g) as u64;
            union += (p || g) as u64;
        }
    }
    if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    }
}

/// Fraction of predicted-occupied HFOV cells that fall in the unknown region;
/// 0 when nothing inside the HFOV is predicted occupied.
pub fn uhr(pred: &[bool], unknown: &[bool], hfov: &[bool]) -> f64 {
    let (mut hallucinated, mut claimed) = (0u64, 0u64);
    for ((&p, &u), &h) in pred.iter().zip(unknown).zip(hfov) {
        if p && h {
            claimed += 1;
            hallucinated += u as u64;
        }
    }
    if claimed == 0 {
        0.0
    } else {
        hallucinated as f64 / claimed as f64
    }
}

pub fn binarize(scores: &[f64], threshold: f64) -> Vec<bool> {
    scores.iter().map(|&s| s >= threshold).collect()
}

/// Masked scores and labels of one map, in cell order.
pub fn masked_cells(pred: &PredictionMap, label: &BevLabel, mask: &BevMask) -> Result<(Vec<f64>, Vec<bool>)> {
    pred.grid().ensure_same(label.grid(), "prediction vs label")?;
    pred.grid().ensure_same(mask.grid(), "prediction vs mask")?;
    let occ = label.occupancy().bits();
    let mut scores = Vec::new();
    let mut labels = Vec::new();
    for (k, &m) in mask.bits().iter().enumerate() {
        if m {
            scores.push(pred.probs()[k] as f64);
            labels.push(occ[k]);
        }
    }
    Ok((scores, labels))
}

/// AP of a single map over `mask`.
pub fn average_precision_map(pred: &PredictionMap, label: &BevLabel, mask: &BevMask) -> Result<f64> {
    let (s, l) = masked_cells(pred, label, mask)?;
    average_precision(&s, &l)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ap_examples() {
        let labels = [true, false, true, false];
        let ap = average_precision(&[0.9, 0.8, 0.4, 0.1], &labels).unwrap();
        assert!((ap - (1.0 + 2.0 / 3.0) / 2.0).abs() < 1e-15);
        assert_eq!(average_precision(&[0.9, 0.2, 0.8, 0.1], &labels).unwrap(), 1.0);
        let constant = average_precision(&[0.3; 4], &[true, false, false, false]).unwrap();
        assert_eq!(constant, 0.25);
        assert!(matches!(
            average_precision(&[0.3, 0.2], &[false, false]),
            Err(Error::UndefinedAp)
        ));
        assert!(matches!(average_precision(&[], &[]), Err(Error::UndefinedAp)));
    }

    #[test]
    fn ties_enter_together() {
        // a positive tied with a negative at the top rank gets precision 1/2
        let ap = average_precision(&[0.9, 0.9, 0.1], &[true, false, true]).unwrap();
        assert!((ap - (0.5 + 2.0 / 3.0) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn threshold_examples() {
        let labels = [true, false, true, false];
        assert_eq!(select_global_threshold(&[0.9, 0.8, 0.4, 0.1], &labels).unwrap(), 0.4);
        assert_eq!(select_global_threshold(&[0.9, 0.2, 0.8, 0.1], &labels).unwrap(), 0.8);
        assert_eq!(
            select_global_threshold(&[0.3; 5], &[true, false, false, false, false]).unwrap(),
            0.3
        );
        assert!((f1_at(&[0.9, 0.8, 0.4, 0.1], &labels, 0.9) - 2.0 / 3.0).abs() < 1e-15);
        assert!((f1_at(&[0.9, 0.8, 0.4, 0.1], &labels, 0.4) - 0.8).abs() < 1e-15);
    }

    #[test]
    fn iou_examples() {
        let m = [true; 6];
        let gt = [true, true, false, false, false, false];
        assert_eq!(iou_occupied(&gt, &gt, &m), 1.0);
        assert_eq!(iou_occupied(&[false, false, true, true, false, false], &gt, &m), 0.0);
        assert_eq!(iou_occupied(&[true, true, true, true, false, false], &gt, &m), 0.5);
        assert_eq!(iou_occupied(&[false; 6], &[false; 6], &m), 1.0);
        // cells outside the mask are ignored
        assert_eq!(
            iou_occupied(
                &[true, true, true, false, false, false],
                &gt,
                &[true, true, false, true, true, true]
            ),
            1.0
        );
    }

    #[test]
    fn uhr_examples() {
        let hfov = [true, true, true, false];
        let unknown = [false, true, true, false];
        assert_eq!(uhr(&[true, false, false, true], &unknown, &hfov), 0.0);
        assert_eq!(uhr(&[false, true, true, false], &unknown, &hfov), 1.0);
        assert_eq!(uhr(&[true, true, false, false], &unknown, &hfov), 0.5);
        assert_eq!(uhr(&[false, false, false, true], &unknown, &hfov), 0.0);
    }

    #[test]
    fn pr_curve_endpoints() {
        let curve = pr_curve(&[0.9, 0.8, 0.4, 0.1], &[true, false, true, false]).unwrap();
        assert_eq!(curve.len(), 4);
        assert_eq!(curve[0].precision, 1.0);
        assert_eq!(curve[3].recall, 1.0);
        assert_eq!(curve[3].precision, 0.5);
    }

    fn instance() -> impl Strategy<Value = (Vec<f64>, Vec<bool>)> {
        (2usize..64)
            .prop_flat_map(|n| {
                (
                    prop::collection::vec(0u8..12, n),
                    prop::collection::vec(any::<bool>(), n),
                )
            })
            .prop_filter("needs a positive", |(_, l)| l.iter().any(|&b| b))
            .prop_map(|(s, l)| (s.into_iter().map(|v| v as f64 / 11.0).collect(), l))
    }

    proptest! {
        #[test]
        fn ap_invariant_under_monotone_transforms((scores, labels) in instance()) {
            let ap = average_precision(&scores, &labels).unwrap();
            let sq: Vec<f64> = scores.iter().map(|s| s * s).collect();
            let ex: Vec<f64> = scores.iter().map(|s| s.exp()).collect();
            prop_assert!((average_precision(&sq, &labels).unwrap() - ap).abs() < 1e-12);
            prop_assert!((average_precision(&ex, &labels).unwrap() - ap).abs() < 1e-12);
        }

        #[test]
        fn threshold_is_f1_optimal((scores, labels) in instance()) {
            let tau = select_global_threshold(&scores, &labels).unwrap();
            let best = f1_at(&scores, &labels, tau);
            for &s in &scores {
                prop_assert!(best >= f1_at(&scores, &labels, s));
            }
        }

        #[test]
        fn ap_is_permutation_invariant((scores, labels) in instance(), seed in any::<u64>()) {
            let n = scores.len();
            let mut idx: Vec<usize> = (0..n).collect();
            idx.sort_by_key(|&k| (k as u64).wrapping_mul(seed | 1).rotate_left(17));
            let s2: Vec<f64> = idx.iter().map(|&k| scores[k]).collect();
            let l2: Vec<bool> = idx.iter().map(|&k| labels[k]).collect();
            prop_assert_eq!(average_precision(&scores, &labels).unwrap(), average_precision(&s2, &l2).unwrap());
        }
    }
}
