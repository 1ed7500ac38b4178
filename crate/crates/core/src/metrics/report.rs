//! Pooled evaluation over a frame set with range/azimuth band breakdown.

use std::fmt::Write as _;
use std::path::Path;

use super::{average_precision, binarize, iou_occupied, pr_curve, select_global_threshold, uhr, PrPoint};
use crate::error::{Error, Result};
use crate::grid::{polar_from, BevLabel, BevMask, PredictionMap};

pub const POOLING_NOTE: &str = "metrics pool all masked cells across frames (no per-frame averaging)";

/// Upper bound is exclusive except for the last band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangeBand {
    pub name: &'static str,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AzimuthBand {
    pub name: &'static str,
    pub lo_deg: f64,
    pub hi_deg: f64,
}

pub const RANGE_BANDS: [RangeBand; 3] = [
    RangeBand {
        name: "range_0_20",
        lo: 0.0,
        hi: 20.0,
    },
    RangeBand {
        name: "range_20_40",
        lo: 20.0,
        hi: 40.0,
    },
    RangeBand {
        name: "range_40_60",
        lo: 40.0,
        hi: 60.0,
    },
];

/// Bands on absolute azimuth.
pub const AZIMUTH_BANDS: [AzimuthBand; 2] = [
    AzimuthBand {
        name: "azimuth_center_0_15",
        lo_deg: 0.0,
        hi_deg: 15.0,
    },
    AzimuthBand {
        name: "azimuth_edges_15_32",
        lo_deg: 15.0,
        hi_deg: 32.0,
    },
];

const NO_BAND: u8 = 3;

fn in_band(v: f64, lo: f64, hi: f64, last: bool) -> bool {
    v >= lo && (v < hi || (last && v <= hi))
}

fn range_band_of(r: f64) -> u8 {
    let n = RANGE_BANDS.len();
    RANGE_BANDS
        .iter()
        .position(|b| in_band(r, b.lo, b.hi, b == &RANGE_BANDS[n - 1]))
        .map_or(NO_BAND, |k| k as u8)
}

fn azimuth_band_of(abs_deg: f64) -> u8 {
    let n = AZIMUTH_BANDS.len();
    AZIMUTH_BANDS
        .iter()
        .position(|b| in_band(abs_deg, b.lo_deg, b.hi_deg, b == &AZIMUTH_BANDS[n - 1]))
        .map_or(NO_BAND, |k| k as u8)
}

const OCCUPIED: u8 = 1;
const SUPERVISED: u8 = 2;
const UNKNOWN: u8 = 4;

/// One in-HFOV cell of one frame.
#[derive(Debug, Clone, Copy, PartialEq)]
struct CellRecord {
    score: f32,
    flags: u8,
    range_band: u8,
    azimuth_band: u8,
}

impl CellRecord {
    fn has(&self, flag: u8) -> bool {
        self.flags & flag != 0
    }
}

/// Accumulates in-HFOV cells across frames. Merging is order-independent.
#[derive(Debug, Clone, Default)]
pub struct Evaluator {
    cells: Vec<CellRecord>,
    frames: usize,
}

impl Evaluator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn add_frame(
        &mut self,
        pred: &PredictionMap,
        label: &BevLabel,
        sup: &BevMask,
        unknown: &BevMask,
        hfov: &BevMask,
        radar_offset: (f64, f64),
    ) -> Result<()> {
        let grid = *pred.grid();
        for (what, g) in [
            ("label", label.grid()),
            ("supervision mask", sup.grid()),
            ("unknown mask", unknown.grid()),
            ("hfov mask", hfov.grid()),
        ] {
            grid.ensure_same(g, what)?;
        }
        if !sup.is_subset_of(hfov) || !unknown.is_subset_of(hfov) {
            return Err(Error::Invalid(
                "supervised and unknown masks must lie inside the HFOV".into(),
            ));
        }
        let occ = label.occupancy().bits();
        for (i, j, k) in grid.cells() {
            if !hfov.bits()[k] {
                continue;
            }
            let (cx, cy) = grid.cell_center(i, j);
            let (r, az) = polar_from(radar_offset, cx, cy);
            let mut flags = 0;
            if occ[k] {
                flags |= OCCUPIED;
            }
            if sup.bits()[k] {
                flags |= SUPERVISED;
            }
            if unknown.bits()[k] {
                flags |= UNKNOWN;
            }
            self.cells.push(CellRecord {
                score: pred.probs()[k],
                flags,
                range_band: range_band_of(r),
                azimuth_band: azimuth_band_of(az.to_degrees().abs()),
            });
        }
        self.frames += 1;
        Ok(())
    }

    pub fn merge(&mut self, other: Evaluator) {
        self.cells.extend(other.cells);
        self.frames += other.frames;
    }

    fn supervised(&self, keep: impl Fn(&CellRecord) -> bool) -> (Vec<f64>, Vec<bool>) {
        self.cells
            .iter()
            .filter(|c| c.has(SUPERVISED) && keep(c))
            .map(|c| (c.score as f64, c.has(OCCUPIED)))
            .unzip()
    }

    /// Pooled supervised scores and labels.
    pub fn supervised_cells(&self) -> (Vec<f64>, Vec<bool>) {
        self.supervised(|_| true)
    }

    /// Occupied fraction of the pooled supervised region.
    pub fn pos_frac(&self) -> f64 {
        let (_, labels) = self.supervised_cells();
        if labels.is_empty() {
            0.0
        } else {
            labels.iter().filter(|&&l| l).count() as f64 / labels.len() as f64
        }
    }

    /// Report with the F1-optimal threshold selected on this same set.
    pub fn report(&self) -> Result<EvalReport> {
        let (scores, labels) = self.supervised_cells();
        let tau = select_global_threshold(&scores, &labels)?;
        self.report_at(tau)
    }

    /// Report binarizing at a fixed global threshold.
    pub fn report_at(&self, threshold: f64) -> Result<EvalReport> {
        let (scores, labels) = self.supervised_cells();
        let ap = average_precision(&scores, &labels)?;
        let pred = binarize(&scores, threshold);
        let iou = iou_occupied(&pred, &labels, &vec![true; labels.len()]);

        let hfov_pred: Vec<bool> = self.cells.iter().map(|c| c.score as f64 >= threshold).collect();
        let unknown: Vec<bool> = self.cells.iter().map(|c| c.has(UNKNOWN)).collect();
        let uhr = uhr(&hfov_pred, &unknown, &vec![true; self.cells.len()]);

        let mut bands = Vec::new();
        let mut pr_curves = vec![("overall".to_string(), pr_curve(&scores, &labels)?)];
        let range = RANGE_BANDS.iter().enumerate().map(|(k, b)| (b.name, k as u8, true));
        let azimuth = AZIMUTH_BANDS.iter().enumerate().map(|(k, b)| (b.name, k as u8, false));
        for (name, idx, is_range) in range.chain(azimuth) {
            let (s, l) = self.supervised(|c| {
                if is_range {
                    c.range_band == idx
                } else {
                    c.azimuth_band == idx
                }
            });
            let positives = l.iter().filter(|&&v| v).count();
            let band_ap = if positives > 0 {
                Some(average_precision(&s, &l)?)
            } else {
                None
            };
            if positives > 0 {
                pr_curves.push((name.to_string(), pr_curve(&s, &l)?));
            }
            bands.push(BandMetrics {
                name: name.to_string(),
                cells: l.len(),
                positives,
                pos_frac: if l.is_empty() {
                    0.0
                } else {
                    positives as f64 / l.len() as f64
                },
                ap: band_ap,
                iou: iou_occupied(&binarize(&s, threshold), &l, &vec![true; l.len()]),
            });
        }
        let positives = labels.iter().filter(|&&l| l).count();
        Ok(EvalReport {
            frames: self.frames,
            supervised_cells: labels.len(),
            positives,
            pos_frac: positives as f64 / labels.len() as f64,
            ap,
            iou_occupied: iou,
            uhr,
            threshold,
            bands,
            pr_curves,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandMetrics {
    pub name: String,
    pub cells: usize,
    pub positives: usize,
    pub pos_frac: f64,
    /// Absent when the band holds no positive cell.
    pub ap: Option<f64>,
    pub iou: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub frames: usize,
    pub supervised_cells: usize,
    pub positives: usize,
    pub pos_frac: f64,
    pub ap: f64,
    pub iou_occupied: f64,
    pub uhr: f64,
    /// Global F1-optimal threshold applied to every band.
    pub threshold: f64,
    pub bands: Vec<BandMetrics>,
    /// `(band name, curve)`; bands without positives have no curve.
    pub pr_curves: Vec<(String, Vec<PrPoint>)>,
}

/// PR rows kept per CSV.
const MAX_PR_ROWS: usize = 1000;

impl EvalReport {
    pub fn band(&self, name: &str) -> Option<&BandMetrics> {
        self.bands.iter().find(|b| b.name == name)
    }

    pub fn to_text(&self, method: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# occupancy evaluation: {method}");
        let _ = writeln!(out, "# {POOLING_NOTE}");
        let _ = writeln!(out, "frames            {}", self.frames);
        let _ = writeln!(out, "supervised cells  {}", self.supervised_cells);
        let _ = writeln!(out, "pos_frac          {:.4}", self.pos_frac);
        let _ = writeln!(out, "AP                {:.4}", self.ap);
        let _ = writeln!(out, "IoU (occupied)    {:.4}", self.iou_occupied);
        let _ = writeln!(out, "UHR               {:.4}", self.uhr);
        let _ = writeln!(out, "threshold         {:.6}", self.threshold);
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "{:<22} {:>8} {:>8} {:>9} {:>9}",
            "band", "AP", "IoU", "pos_frac", "cells"
        );
        for b in &self.bands {
            let ap = b.ap.map_or("-".to_string(), |v| format!("{v:.4}"));
            let _ = writeln!(
                out,
                "{:<22} {:>8} {:>8.4} {:>9.4} {:>9}",
                b.name, ap, b.iou, b.pos_frac, b.cells
            );
        }
        out
    }

    /// Flat `key = value` lines.
    pub fn to_summary(&self, method: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "method = {method}");
        let _ = writeln!(out, "pooling = cells");
        let _ = writeln!(out, "frames = {}", self.frames);
        let _ = writeln!(out, "supervised_cells = {}", self.supervised_cells);
        let _ = writeln!(out, "positives = {}", self.positives);
        let _ = writeln!(out, "pos_frac = {:.17e}", self.pos_frac);
        let _ = writeln!(out, "ap = {:.17e}", self.ap);
        let _ = writeln!(out, "iou = {:.17e}", self.iou_occupied);
        let _ = writeln!(out, "uhr = {:.17e}", self.uhr);
        let _ = writeln!(out, "threshold = {:.17e}", self.threshold);
        for b in &self.bands {
            match b.ap {
                Some(ap) => {
                    let _ = writeln!(out, "{}.ap = {:.17e}", b.name, ap);
                }
                None => {
                    let _ = writeln!(out, "{}.ap = absent", b.name);
                }
            }
            let _ = writeln!(out, "{}.iou = {:.17e}", b.name, b.iou);
            let _ = writeln!(out, "{}.pos_frac = {:.17e}", b.name, b.pos_frac);
            let _ = writeln!(out, "{}.cells = {}", b.name, b.cells);
        }
        out
    }

    /// `threshold,precision,recall` rows, thinned to at most 1000.
    pub fn pr_csv(curve: &[PrPoint]) -> String {
        let mut out = String::from("threshold,precision,recall\n");
        let stride = curve.len().div_ceil(MAX_PR_ROWS).max(1);
        for (k, p) in curve.iter().enumerate() {
            if k % stride == 0 || k + 1 == curve.len() {
                let _ = writeln!(out, "{},{},{}", p.threshold, p.precision, p.recall);
            }
        }
        out
    }

    /// Writes `report.txt`, `summary.txt` and `pr_<band>.csv` into `dir`.
    pub fn write_to(&self, dir: &Path, method: &str) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let put = |name: &str, body: String| {
            let p = dir.join(name);
            std::fs::write(&p, body).map_err(|e| Error::io(p, e))
        };
        put("report.txt", self.to_text(method))?;
        put("summary.txt", self.to_summary(method))?;
        for (band, curve) in &self.pr_curves {
            put(&format!("pr_{band}.csv"), Self::pr_csv(curve))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{hfov_mask, world_to_cell, BevGridSpec};

    #[test]
    fn band_lookup() {
        assert_eq!(range_band_of(0.0), 0);
        assert_eq!(range_band_of(19.999), 0);
        assert_eq!(range_band_of(20.0), 1);
        assert_eq!(range_band_of(60.0), 2);
        assert_eq!(range_band_of(60.01), NO_BAND);
        assert_eq!(azimuth_band_of(14.99), 0);
        assert_eq!(azimuth_band_of(15.0), 1);
        assert_eq!(azimuth_band_of(32.0), 1);
        assert_eq!(azimuth_band_of(32.5), NO_BAND);
    }

    fn far_only_frame() -> (PredictionMap, BevLabel, BevMask, BevMask, BevMask) {
        let g = BevGridSpec::default();
        let hfov = hfov_mask(&g, (0.0, 0.0), 64.0, 65.0);
        let observable = hfov.clone();
        let mut occ = BevMask::new(g);
        let (i, j) = world_to_cell(45.2, 3.1, &g).unwrap();
        occ.set(i, j, true);
        let label = BevLabel::new(&occ, observable.clone()).unwrap();
        let sup = hfov.and(&observable).unwrap();
        let unknown = hfov.and_not(&observable).unwrap();
        let mut probs = vec![0.1f32; g.num_cells()];
        probs[g.index(i, j)] = 0.9;
        (PredictionMap::new(g, probs).unwrap(), label, sup, unknown, hfov)
    }

    #[test]
    fn far_targets_leave_near_bands_empty() {
        let (p, l, s, u, h) = far_only_frame();
        let mut ev = Evaluator::new();
        ev.add_frame(&p, &l, &s, &u, &h, (0.0, 0.0)).unwrap();
        let rep = ev.report().unwrap();
        assert_eq!(rep.ap, 1.0);
        assert_eq!(rep.iou_occupied, 1.0);
        assert_eq!(rep.uhr, 0.0);
        let near = rep.band("range_0_20").unwrap();
        assert_eq!(near.pos_frac, 0.0);
        assert_eq!(near.ap, None);
        assert_eq!(rep.band("range_40_60").unwrap().ap, Some(1.0));
        assert!(rep.to_summary("t").contains("range_0_20.ap = absent"));
    }

    #[test]
    fn bands_partition_supervised_region() {
        let (p, l, s, u, h) = far_only_frame();
        let mut ev = Evaluator::new();
        ev.add_frame(&p, &l, &s, &u, &h, (0.0, 0.0)).unwrap();
        let rep = ev.report().unwrap();
        let g = *p.grid();
        let within_60 = g
            .cells()
            .filter(|&(i, j, k)| {
                let (x, y) = g.cell_center(i, j);
                s.bits()[k] && x.hypot(y) <= 60.0
            })
            .count();
        let range_total: usize = rep.bands[..3].iter().map(|b| b.cells).sum();
        let az_total: usize = rep.bands[3..].iter().map(|b| b.cells).sum();
        assert_eq!(range_total, within_60);
        assert_eq!(az_total, s.count());
    }

    #[test]
    fn merge_is_order_independent() {
        let (p, l, s, u, h) = far_only_frame();
        let mut a = Evaluator::new();
        a.add_frame(&p, &l, &s, &u, &h, (0.0, 0.0)).unwrap();
        let q = PredictionMap::constant(*p.grid(), 0.5).unwrap();
        let mut b = Evaluator::new();
        b.add_frame(&q, &l, &s, &u, &h, (0.0, 0.0)).unwrap();
        let mut ab = a.clone();
        ab.merge(b.clone());
        let mut ba = b;
        ba.merge(a);
        assert_eq!(ab.report().unwrap(), ba.report().unwrap());
        assert_eq!(ab.frames(), 2);
    }

    #[test]
    fn pr_csv_is_thinned() {
        let curve: Vec<PrPoint> = (0..2500)
            .map(|k| PrPoint {
                threshold: 1.0 - k as f64 / 2500.0,
                precision: 0.5,
                recall: k as f64 / 2499.0,
            })
            .collect();
        let csv = EvalReport::pr_csv(&curve);
        let rows = csv.lines().count() - 1;
        assert!(rows <= MAX_PR_ROWS + 1);
        assert!(csv.trim_end().ends_with(",0.5,1"));
    }
}
