//! Dataset directories and sequence-level splits.
//!
//! A dataset directory holds `manifest.txt` plus one container file per
//! frame. The manifest is `key = value` metadata followed by one line per
//! frame: `frame <frame_id> <sequence_id> <train|val> <relative path>`.
//! A prediction directory has the same layout with `prediction <frame_id>
//! <relative path>` lines.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::container::{read_frame, read_prediction, FrameRecord, PredictionRecord};
use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.txt";
const MANIFEST_MAGIC: &str = "RDBEV-MANIFEST 1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Split {
    Train,
    Val,
}

impl Split {
    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
        }
    }
}

impl std::str::FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "val" => Ok(Split::Val),
            _ => Err(Error::Invalid(format!("unknown split `{s}`"))),
        }
    }
}

/// Assigns whole sequences to train/val.
///
/// Sequences are visited largest first (equal sizes in seed-shuffled order)
/// and added to train while that moves the train frame count closer to
/// `ratio * total`. Both splits always receive at least one sequence.
/// Returns sorted `(train ids, val ids)`.
pub fn split_sequences(frames: &[(u64, u64)], ratio: f64, seed: u64) -> Result<(Vec<u64>, Vec<u64>)> {
    if !(0.0..=1.0).contains(&ratio) {
        return Err(Error::Config(format!("split ratio {ratio} outside [0, 1]")));
    }
    let mut seqs: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
    for &(frame_id, seq) in frames {
        seqs.entry(seq).or_default().push(frame_id);
    }
    if seqs.len() < 2 {
        return Err(Error::TooFewSequences(seqs.len()));
    }
    let mut order: Vec<(u64, usize)> = seqs.iter().map(|(&s, f)| (s, f.len())).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    // stable: shuffled order survives among equal sizes
    order.sort_by_key(|e| std::cmp::Reverse(e.1));

    let target = ratio * frames.len() as f64;
    let mut taken = 0.0;
    let mut train: Vec<u64> = Vec::new();
    let mut val: Vec<u64> = Vec::new();
    for &(seq, n) in &order {
        if taken + n as f64 / 2.0 < target {
            taken += n as f64;
            train.push(seq);
        } else {
            val.push(seq);
        }
    }
    // order is size-descending, so the last entry of either side is its smallest
    if val.is_empty() {
        val.push(train.pop().expect("at least two sequences"));
    } else if train.is_empty() {
        train.push(val.pop().expect("at least two sequences"));
    }
    let collect = |ids: &[u64]| {
        let mut out: Vec<u64> = ids.iter().flat_map(|s| seqs[s].iter().copied()).collect();
        out.sort_unstable();
        out
    };
    Ok((collect(&train), collect(&val)))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub frame_id: u64,
    pub sequence_id: u64,
    pub split: Split,
    pub file: String,
}

/// Frame listing of a dataset directory.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Manifest {
    pub meta: BTreeMap<String, String>,
    pub entries: Vec<ManifestEntry>,
}

pub fn frame_file_name(frame_id: u64) -> String {
    format!("frames/frame_{frame_id:08}.rdbev")
}

pub fn prediction_file_name(frame_id: u64) -> String {
    format!("pred_{frame_id:08}.rdbev")
}

fn parse_meta_line(line: &str, meta: &mut BTreeMap<String, String>) -> bool {
    match line.split_once(" = ") {
        Some((k, v)) => {
            meta.insert(k.trim().to_string(), v.trim().to_string());
            true
        }
        None => false,
    }
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn parse_id(s: &str, path: &Path, line: usize) -> Result<u64> {
    s.parse().map_err(|_| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: format!("bad id `{s}`"),
    })
}

impl Manifest {
    pub fn to_text(&self) -> String {
        let mut out = format!("{MANIFEST_MAGIC}\n");
        for (k, v) in &self.meta {
            let _ = writeln!(out, "{k} = {v}");
        }
        let mut entries: Vec<&ManifestEntry> = self.entries.iter().collect();
        entries.sort_by_key(|e| e.frame_id);
        for e in entries {
            let _ = writeln!(
                out,
                "frame {} {} {} {}",
                e.frame_id,
                e.sequence_id,
                e.split.name(),
                e.file
            );
        }
        out
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        if lines.next().map(|(_, l)| l.trim()) != Some(MANIFEST_MAGIC) {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: 1,
                msg: format!("expected `{MANIFEST_MAGIC}`"),
            });
        }
        let mut m = Manifest::default();
        for (n, line) in lines {
            let line_no = n + 1;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(rest) = line.strip_prefix("frame ") {
                let f: Vec<&str> = rest.splitn(4, ' ').collect();
                let [id, seq, split, file] = f.as_slice() else {
                    return Err(Error::Parse {
                        path: path.to_path_buf(),
                        line: line_no,
                        msg: "expected `frame <id> <sequence> <split> <file>`".into(),
                    });
                };
                m.entries.push(ManifestEntry {
                    frame_id: parse_id(id, path, line_no)?,
                    sequence_id: parse_id(seq, path, line_no)?,
                    split: split.parse()?,
                    file: file.to_string(),
                });
            } else if !parse_meta_line(line, &mut m.meta) {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: line_no,
                    msg: format!("unrecognized line `{line}`"),
                });
            }
        }
        let mut seen = BTreeSet::new();
        for e in &m.entries {
            if !seen.insert(e.frame_id) {
                return Err(Error::Invalid(format!(
                    "frame {} listed twice in {}",
                    e.frame_id,
                    path.display()
                )));
            }
        }
        Ok(m)
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        Self::parse(&read_text(&path)?, &path)
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let path = dir.join(MANIFEST_FILE);
        std::fs::write(&path, self.to_text()).map_err(|e| Error::io(&path, e))
    }

    pub fn split(&self, split: Split) -> impl Iterator<Item = &ManifestEntry> {
        self.entries.iter().filter(move |e| e.split == split)
    }

    pub fn ids(&self, split: Split) -> Vec<u64> {
        self.split(split).map(|e| e.frame_id).collect()
    }
}

/// A dataset directory with its manifest loaded.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub dir: PathBuf,
    pub manifest: Manifest,
}

impl Dataset {
    pub fn open(dir: &Path) -> Result<Self> {
        Ok(Self {
            dir: dir.to_path_buf(),
            manifest: Manifest::read(dir)?,
        })
    }

    pub fn path_of(&self, entry: &ManifestEntry) -> PathBuf {
        self.dir.join(&entry.file)
    }

    /// Reads a frame and checks it against its manifest entry.
    pub fn load(&self, entry: &ManifestEntry) -> Result<FrameRecord> {
        let r = read_frame(&self.path_of(entry))?;
        if r.frame_id != entry.frame_id || r.sequence_id != entry.sequence_id {
            return Err(Error::Invalid(format!(
                "{} holds frame {} of sequence {}, manifest says frame {} of sequence {}",
                entry.file, r.frame_id, r.sequence_id, entry.frame_id, entry.sequence_id
            )));
        }
        Ok(r)
    }
}

/// Prediction maps of one method, keyed by frame id.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PredictionIndex {
    pub meta: BTreeMap<String, String>,
    pub files: BTreeMap<u64, String>,
}

const PREDICTION_MAGIC: &str = "RDBEV-PREDICTIONS 1";

impl PredictionIndex {
    pub fn to_text(&self) -> String {
        let mut out = format!("{PREDICTION_MAGIC}\n");
        for (k, v) in &self.meta {
            let _ = writeln!(out, "{k} = {v}");
        }
        for (id, file) in &self.files {
            let _ = writeln!(out, "prediction {id} {file}");
        }
        out
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        let text = read_text(&path)?;
        let mut lines = text.lines().enumerate();
        if lines.next().map(|(_, l)| l.trim()) != Some(PREDICTION_MAGIC) {
            return Err(Error::Parse {
                path,
                line: 1,
                msg: format!("expected `{PREDICTION_MAGIC}`"),
            });
        }
        let mut idx = PredictionIndex::default();
        for (n, line) in lines {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(rest) = line.strip_prefix("prediction ") {
                let Some((id, file)) = rest.split_once(' ') else {
                    return Err(Error::Parse {
                        path,
                        line: n + 1,
                        msg: "expected `prediction <id> <file>`".into(),
                    });
                };
                let id = parse_id(id, &path, n + 1)?;
                if idx.files.insert(id, file.to_string()).is_some() {
                    return Err(Error::Invalid(format!("prediction for frame {id} listed twice")));
                }
            } else if !parse_meta_line(line, &mut idx.meta) {
                return Err(Error::Parse {
                    path,
                    line: n + 1,
                    msg: format!("unrecognized line `{line}`"),
                });
            }
        }
        Ok(idx)
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let path = dir.join(MANIFEST_FILE);
        std::fs::write(&path, self.to_text()).map_err(|e| Error::io(&path, e))
    }

    pub fn load(&self, dir: &Path, frame_id: u64) -> Result<PredictionRecord> {
        let file = self
            .files
            .get(&frame_id)
            .ok_or_else(|| Error::Invalid(format!("no prediction for frame {frame_id}")))?;
        let r = read_prediction(&dir.join(file))?;
        if r.frame_id != frame_id {
            return Err(Error::Invalid(format!(
                "{file} holds frame {}, expected {frame_id}",
                r.frame_id
            )));
        }
        Ok(r)
    }
}

/// Lists ids present on only one side; `Ok` when the sets match.
pub fn check_ids(expected: &[u64], found: &[u64]) -> Result<()> {
    let e: BTreeSet<u64> = expected.iter().copied().collect();
    let f: BTreeSet<u64> = found.iter().copied().collect();
    if e == f {
        return Ok(());
    }
    Err(Error::IdMismatch {
        missing: e.difference(&f).copied().collect(),
        extra: f.difference(&e).copied().collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frames(sizes: &[usize]) -> Vec<(u64, u64)> {
        let mut id = 0;
        let mut out = Vec::new();
        for (s, &n) in sizes.iter().enumerate() {
            for _ in 0..n {
                out.push((id, s as u64));
                id += 1;
            }
        }
        out
    }

    fn seqs_of(ids: &[u64], all: &[(u64, u64)]) -> BTreeSet<u64> {
        all.iter().filter(|(f, _)| ids.contains(f)).map(|&(_, s)| s).collect()
    }

    #[test]
    fn equal_sequences_split_seven_three() {
        let all = frames(&[10; 10]);
        for seed in 0..20 {
            let (train, val) = split_sequences(&all, 0.7, seed).unwrap();
            assert_eq!(seqs_of(&train, &all).len(), 7);
            assert_eq!(seqs_of(&val, &all).len(), 3);
            assert!(seqs_of(&train, &all).is_disjoint(&seqs_of(&val, &all)));
        }
        assert_eq!(
            split_sequences(&all, 0.7, 3).unwrap(),
            split_sequences(&all, 0.7, 3).unwrap()
        );
        assert_ne!(
            split_sequences(&all, 0.7, 3).unwrap(),
            split_sequences(&all, 0.7, 4).unwrap()
        );
    }

    #[test]
    fn uneven_sequences_and_extremes() {
        let all = frames(&[40, 25, 20, 10, 5]);
        let (train, val) = split_sequences(&all, 0.7, 0).unwrap();
        assert_eq!(train.len() + val.len(), 100);
        assert_eq!(train.len(), 70);
        let (train, val) = split_sequences(&all, 1.0, 0).unwrap();
        assert!(!train.is_empty() && !val.is_empty());
        let (train, val) = split_sequences(&all, 0.0, 0).unwrap();
        assert!(!train.is_empty() && !val.is_empty());
        assert!(matches!(
            split_sequences(&frames(&[5]), 0.7, 0),
            Err(Error::TooFewSequences(1))
        ));
        assert!(matches!(split_sequences(&[], 0.7, 0), Err(Error::TooFewSequences(0))));
    }

    #[test]
    fn manifest_round_trip() {
        let mut m = Manifest::default();
        m.meta.insert("seed".into(), "7".into());
        for id in [3u64, 1, 2] {
            m.entries.push(ManifestEntry {
                frame_id: id,
                sequence_id: id / 2,
                split: if id == 2 { Split::Val } else { Split::Train },
                file: frame_file_name(id),
            });
        }
        let text = m.to_text();
        let back = Manifest::parse(&text, Path::new("m")).unwrap();
        assert_eq!(back.to_text(), text);
        assert_eq!(back.ids(Split::Val), vec![2]);
        let dup = text.clone() + "frame 1 0 train x\n";
        assert!(Manifest::parse(&dup, Path::new("m")).is_err());
    }

    #[test]
    fn id_check_lists_both_sides() {
        assert!(check_ids(&[1, 2, 3], &[3, 2, 1]).is_ok());
        match check_ids(&[1, 2, 3], &[2, 3, 4, 5]) {
            Err(Error::IdMismatch { missing, extra }) => {
                assert_eq!(missing, vec![1]);
                assert_eq!(extra, vec![4, 5]);
            }
            other => panic!("{other:?}"),
        }
    }
}
