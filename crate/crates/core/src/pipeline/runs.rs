use std::path::Path;

use num_traits::Float;
use rayon::prelude::*;

use super::config::GenerateConfig;
use super::generate::GENERATE_CONFIG_FILE;
use crate::baselines::{beamform_projection, random_prior, range_energy_projection, BaselineMethod};
use crate::config::RadarConfig;
use crate::container::{write_frame, write_prediction, FrameRecord, PredictionRecord};
use crate::dataset::{check_ids, prediction_file_name, Dataset, Manifest, PredictionIndex, Split};
use crate::error::{Error, Result};
use crate::grid::PredictionMap;
use crate::metrics::{EvalReport, Evaluator};
use crate::radar::{collapse_dim, select_chirps, ChirpSelection, CollapseDim};
use crate::rd::{Chirp, RdFrame};

fn dataset_config(dir: &Path) -> Result<GenerateConfig> {
    GenerateConfig::read(&dir.join(GENERATE_CONFIG_FILE))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BaselineOptions {
    pub method: BaselineMethod,
    /// Frames to predict.
    pub split: Split,
    /// Chirp beamformed by the oracle.
    pub chirp: Chirp,
}

impl BaselineOptions {
    pub fn new(method: BaselineMethod) -> Self {
        Self {
            method,
            split: Split::Val,
            chirp: Chirp::A,
        }
    }
}

/// Occupied fraction of supervised cells over the train split.
pub fn train_pos_frac(dataset: &Dataset) -> Result<f64> {
    let entries: Vec<_> = dataset.manifest.split(Split::Train).collect();
    let counts = super::with_workers(|| {
        entries
            .par_iter()
            .map(|e| {
                let r = dataset.load(e)?;
                Ok((r.label.occupancy().and(&r.sup)?.count() as u64, r.sup.count() as u64))
            })
            .collect::<Result<Vec<(u64, u64)>>>()
    })??;
    let (occ, sup) = counts.iter().fold((0, 0), |a, c| (a.0 + c.0, a.1 + c.1));
    if sup == 0 {
        return Err(Error::Invalid("train split has no supervised cells".into()));
    }
    Ok(occ as f64 / sup as f64)
}

/// One baseline prediction for a frame. `pos_frac` is used by the prior only.
pub fn predict(
    method: BaselineMethod,
    record: &FrameRecord,
    radar: &RadarConfig,
    radar_offset: (f64, f64),
    pos_frac: f64,
    chirp: Chirp,
) -> Result<PredictionMap> {
    let grid = record.grid();
    match method {
        BaselineMethod::Prior => random_prior(pos_frac, grid),
        BaselineMethod::RangeEnergy => range_energy_projection(&record.rd, grid, radar, radar_offset),
        BaselineMethod::Beamform => beamform_projection(&record.rd, grid, radar, radar_offset, chirp),
    }
}

/// Writes one prediction file per frame of `opts.split` plus an index.
pub fn run_baseline(dataset_dir: &Path, opts: &BaselineOptions, out: &Path) -> Result<PredictionIndex> {
    let dataset = Dataset::open(dataset_dir)?;
    let cfg = dataset_config(dataset_dir)?;
    let radar = cfg.radar();
    let pos_frac = match opts.method {
        BaselineMethod::Prior => train_pos_frac(&dataset)?,
        _ => 0.0,
    };
    ensure_dir(out)?;
    let entries: Vec<_> = dataset.manifest.split(opts.split).collect();
    let written = super::with_workers(|| {
        entries
            .par_iter()
            .map(|e| {
                let record = dataset.load(e)?;
                let map = predict(opts.method, &record, &radar, cfg.radar_offset(), pos_frac, opts.chirp)?;
                let file = prediction_file_name(e.frame_id);
                let pred = PredictionRecord {
                    frame_id: e.frame_id,
                    method: opts.method.name().to_string(),
                    map,
                };
                write_prediction(&pred, &out.join(&file))?;
                Ok((e.frame_id, file))
            })
            .collect::<Result<Vec<_>>>()
    })??;

    let mut index = PredictionIndex::default();
    index.meta.insert("method".into(), opts.method.name().into());
    index.meta.insert("split".into(), opts.split.name().into());
    index.meta.insert("dataset_config_digest".into(), cfg.digest());
    if opts.method == BaselineMethod::Prior {
        index.meta.insert("train_pos_frac".into(), format!("{pos_frac:?}"));
    }
    if opts.method == BaselineMethod::Beamform {
        index.meta.insert("chirp".into(), format!("{:?}", opts.chirp));
    }
    index.files.extend(written);
    index.write(out)?;
    Ok(index)
}

/// Input-side ablation applied to every frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AblationTransform {
    Identity,
    AOnly,
    BOnly,
    CollapseDoppler,
    CollapseRange,
}

impl AblationTransform {
    pub const ALL: [AblationTransform; 5] = [
        AblationTransform::Identity,
        AblationTransform::AOnly,
        AblationTransform::BOnly,
        AblationTransform::CollapseDoppler,
        AblationTransform::CollapseRange,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AblationTransform::Identity => "ab",
            AblationTransform::AOnly => "a_only",
            AblationTransform::BOnly => "b_only",
            AblationTransform::CollapseDoppler => "collapse_doppler",
            AblationTransform::CollapseRange => "collapse_range",
        }
    }

    pub fn apply<T: Float>(self, frame: &RdFrame<T>) -> RdFrame<T> {
        match self {
            AblationTransform::Identity => frame.clone(),
            AblationTransform::AOnly => select_chirps(frame, ChirpSelection::AOnly),
            AblationTransform::BOnly => select_chirps(frame, ChirpSelection::BOnly),
            AblationTransform::CollapseDoppler => collapse_dim(frame, CollapseDim::Doppler),
            AblationTransform::CollapseRange => collapse_dim(frame, CollapseDim::Range),
        }
    }
}

impl std::str::FromStr for AblationTransform {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase().replace('-', "_");
        Self::ALL.into_iter().find(|t| t.name() == key).ok_or_else(|| {
            Error::Invalid(format!(
                "unknown ablation `{s}` (expected ab, a_only, b_only, collapse_doppler or collapse_range)"
            ))
        })
    }
}

/// Copies a dataset with every RD tensor transformed; labels, masks and
/// splits are unchanged.
pub fn run_ablation(dataset_dir: &Path, transform: AblationTransform, out: &Path) -> Result<Manifest> {
    let dataset = Dataset::open(dataset_dir)?;
    let cfg = dataset_config(dataset_dir)?;
    ensure_dir(&out.join("frames"))?;
    let cfg_path = out.join(GENERATE_CONFIG_FILE);
    std::fs::write(&cfg_path, cfg.to_text()).map_err(|e| Error::io(&cfg_path, e))?;
    super::with_workers(|| {
        dataset
            .manifest
            .entries
            .par_iter()
            .map(|e| {
                let mut record = dataset.load(e)?;
                record.rd = transform.apply(&record.rd);
                write_frame(&record, &out.join(&e.file))
            })
            .collect::<Result<()>>()
    })??;
    let mut manifest = dataset.manifest.clone();
    manifest.meta.insert("ablation".into(), transform.name().into());
    manifest.write(out)?;
    Ok(manifest)
}

/// Evaluates a prediction directory against the frames of `split`.
///
/// The global threshold is selected on the evaluated frames themselves.
/// Writes `report.txt`, `summary.txt` and per-band PR curves to `out`.
pub fn run_evaluate(
    dataset_dir: &Path,
    predictions_dir: &Path,
    out: &Path,
    split: Split,
) -> Result<(String, EvalReport)> {
    let dataset = Dataset::open(dataset_dir)?;
    let cfg = dataset_config(dataset_dir)?;
    let index = PredictionIndex::read(predictions_dir)?;
    let method = index.meta.get("method").cloned().unwrap_or_else(|| "unknown".into());
    let entries: Vec<_> = dataset.manifest.split(split).collect();
    let expected: Vec<u64> = entries.iter().map(|e| e.frame_id).collect();
    let found: Vec<u64> = index.files.keys().copied().collect();
    check_ids(&expected, &found)?;

    let partials = super::with_workers(|| {
        entries
            .par_iter()
            .map(|e| {
                let record = dataset.load(e)?;
                let pred = index.load(predictions_dir, e.frame_id)?;
                let mut ev = Evaluator::new();
                ev.add_frame(
                    &pred.map,
                    &record.label,
                    &record.sup,
                    &record.unknown(),
                    &record.hfov,
                    cfg.radar_offset(),
                )?;
                Ok(ev)
            })
            .collect::<Result<Vec<_>>>()
    })??;
    let mut ev = Evaluator::new();
    for p in partials {
        ev.merge(p);
    }
    let report = ev.report()?;
    ensure_dir(out)?;
    report.write_to(out, &method)?;
    Ok((method, report))
}
