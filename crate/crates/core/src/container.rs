//! Single-file frame container.
//!
//! A file is a UTF-8 text header followed by a binary payload:
//!
//! ```text
//! RDBEV-CONTAINER 1
//! kind = frame
//! frame_id = 17
//! ...
//! array rd f32 2,8,200,128,2 0 3276800
//! array occupancy bits 120,152 3276800 2280
//! end
//! <payload>
//! ```
//!
//! Each `array` line gives name, dtype, comma-separated shape, byte offset
//! from the start of the payload and byte length. `f32` arrays are
//! little-endian IEEE-754 in row-major order (complex values interleaved
//! `re, im` along the last axis). `bits` arrays are packed LSB-first, row-major,
//! and padded with zero bits to a whole byte. Arrays are contiguous in
//! header order and the payload ends exactly after the last one.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex32;

use crate::error::{Error, Result};
use crate::grid::{BevGridSpec, BevLabel, BevMask, PredictionMap};
use crate::rd::{RdFrame, RdShape};
use crate::scene::{Point3, PointCloud};

pub const MAGIC: &str = "RDBEV-CONTAINER";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ContainerError {
    #[error("malformed header: {0}")]
    Malformed(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("truncated payload: need {needed} bytes, have {available}")]
    Truncated { needed: usize, available: usize },
}

type CResult<T> = std::result::Result<T, ContainerError>;

fn malformed<T>(msg: impl Into<String>) -> CResult<T> {
    Err(ContainerError::Malformed(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DType {
    F32,
    Bits,
}

impl DType {
    fn name(self) -> &'static str {
        match self {
            DType::F32 => "f32",
            DType::Bits => "bits",
        }
    }

    fn byte_len(self, elements: usize) -> usize {
        match self {
            DType::F32 => elements * 4,
            DType::Bits => elements.div_ceil(8),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ArrayData {
    F32(Vec<f32>),
    Bits(Vec<bool>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Array {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: ArrayData,
}

impl Array {
    pub fn f32(name: &str, shape: Vec<usize>, data: Vec<f32>) -> Self {
        Self {
            name: name.into(),
            shape,
            data: ArrayData::F32(data),
        }
    }

    pub fn bits(name: &str, shape: Vec<usize>, data: Vec<bool>) -> Self {
        Self {
            name: name.into(),
            shape,
            data: ArrayData::Bits(data),
        }
    }

    fn dtype(&self) -> DType {
        match self.data {
            ArrayData::F32(_) => DType::F32,
            ArrayData::Bits(_) => DType::Bits,
        }
    }

    fn elements(&self) -> usize {
        self.shape.iter().product()
    }

    fn encode(&self, out: &mut Vec<u8>) {
        match &self.data {
            ArrayData::F32(v) => {
                for x in v {
                    out.extend_from_slice(&x.to_le_bytes());
                }
            }
            ArrayData::Bits(v) => {
                for chunk in v.chunks(8) {
                    let byte = chunk
                        .iter()
                        .enumerate()
                        .fold(0u8, |b, (k, &bit)| b | ((bit as u8) << k));
                    out.push(byte);
                }
            }
        }
    }
}

/// Ordered metadata plus named arrays.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Container {
    pub meta: BTreeMap<String, String>,
    pub arrays: Vec<Array>,
}

impl Container {
    pub fn array(&self, name: &str) -> Option<&Array> {
        self.arrays.iter().find(|a| a.name == name)
    }

    pub fn meta(&self, key: &str) -> CResult<&str> {
        self.meta
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| ContainerError::Malformed(format!("missing `{key}`")))
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut header = format!("{MAGIC} {FORMAT_VERSION}\n");
        for (k, v) in &self.meta {
            let _ = writeln!(header, "{k} = {v}");
        }
        let mut offset = 0;
        for a in &self.arrays {
            let len = a.dtype().byte_len(a.elements());
            let dims: Vec<String> = a.shape.iter().map(usize::to_string).collect();
            let _ = writeln!(
                header,
                "array {} {} {} {offset} {len}",
                a.name,
                a.dtype().name(),
                dims.join(",")
            );
            offset += len;
        }
        header.push_str("end\n");
        let mut out = header.into_bytes();
        out.reserve(offset);
        for a in &self.arrays {
            a.encode(&mut out);
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> CResult<Self> {
        const END: &[u8] = b"\nend\n";
        let Some(pos) = bytes.windows(END.len()).position(|w| w == END) else {
            return malformed("no `end` line");
        };
        let header = std::str::from_utf8(&bytes[..pos + 1])
            .map_err(|_| ContainerError::Malformed("header is not UTF-8".into()))?;
        let payload = &bytes[pos + END.len()..];
        let mut lines = header.lines();
        match lines.next().map(|l| l.split_whitespace().collect::<Vec<_>>()) {
            Some(v) if v.len() == 2 && v[0] == MAGIC => {
                if v[1] != FORMAT_VERSION.to_string() {
                    return malformed(format!("unsupported format version {}", v[1]));
                }
            }
            _ => return malformed("missing magic line"),
        }
        let mut meta = BTreeMap::new();
        let mut specs = Vec::new();
        for line in lines {
            if let Some(rest) = line.strip_prefix("array ") {
                let f: Vec<&str> = rest.split_whitespace().collect();
                let [name, dtype, dims, offset, len] = f.as_slice() else {
                    return malformed(format!("bad array line `{line}`"));
                };
                let dtype = match *dtype {
                    "f32" => DType::F32,
                    "bits" => DType::Bits,
                    other => return malformed(format!("unknown dtype `{other}`")),
                };
                let shape: std::result::Result<Vec<usize>, _> = dims.split(',').map(str::parse).collect();
                let shape = shape.map_err(|_| ContainerError::Malformed(format!("bad shape `{dims}`")))?;
                let offset: usize = offset
                    .parse()
                    .map_err(|_| ContainerError::Malformed(format!("bad offset `{offset}`")))?;
                let len: usize = len
                    .parse()
                    .map_err(|_| ContainerError::Malformed(format!("bad length `{len}`")))?;
                specs.push((name.to_string(), dtype, shape, offset, len));
            } else if let Some((k, v)) = line.split_once(" = ") {
                meta.insert(k.trim().to_string(), v.trim().to_string());
            } else if !line.trim().is_empty() {
                return malformed(format!("unrecognized header line `{line}`"));
            }
        }
        let mut expected_offset = 0;
        for (name, dtype, shape, offset, len) in &specs {
            let want = dtype.byte_len(shape.iter().product());
            if *len != want {
                return Err(ContainerError::ShapeMismatch(format!(
                    "array `{name}` shape {shape:?} needs {want} bytes, header declares {len}"
                )));
            }
            if *offset != expected_offset {
                return malformed(format!("array `{name}` offset {offset}, expected {expected_offset}"));
            }
            expected_offset += len;
        }
        if payload.len() < expected_offset {
            return Err(ContainerError::Truncated {
                needed: expected_offset,
                available: payload.len(),
            });
        }
        if payload.len() > expected_offset {
            return malformed(format!(
                "{} trailing bytes after last array",
                payload.len() - expected_offset
            ));
        }
        let arrays = specs
            .into_iter()
            .map(|(name, dtype, shape, offset, len)| {
                let raw = &payload[offset..offset + len];
                let n: usize = shape.iter().product();
                let data = match dtype {
                    DType::F32 => ArrayData::F32(
                        raw.chunks_exact(4)
                            .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
                            .collect(),
                    ),
                    DType::Bits => ArrayData::Bits((0..n).map(|k| raw[k / 8] >> (k % 8) & 1 == 1).collect()),
                };
                Array { name, shape, data }
            })
            .collect();
        Ok(Container { meta, arrays })
    }
}

fn grid_text(g: &BevGridSpec) -> String {
    format!(
        "{:?} {:?} {:?} {:?} {:?} {} {}",
        g.resolution, g.x_min, g.x_max, g.y_min, g.y_max, g.height, g.width
    )
}

fn parse_grid(text: &str) -> CResult<BevGridSpec> {
    let f: Vec<&str> = text.split_whitespace().collect();
    if f.len() != 7 {
        return malformed(format!("bad grid `{text}`"));
    }
    let num = |s: &str| {
        s.parse::<f64>()
            .map_err(|_| ContainerError::Malformed(format!("bad grid value `{s}`")))
    };
    let cells = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| ContainerError::Malformed(format!("bad grid size `{s}`")))
    };
    let g = BevGridSpec::with_extent(num(f[0])?, (num(f[1])?, num(f[2])?), (num(f[3])?, num(f[4])?))
        .map_err(|e| ContainerError::Malformed(e.to_string()))?;
    if (g.height, g.width) != (cells(f[5])?, cells(f[6])?) {
        return Err(ContainerError::ShapeMismatch(format!(
            "grid declares {}x{} cells, extent implies {}x{}",
            f[5], f[6], g.height, g.width
        )));
    }
    Ok(g)
}

fn parse_u64(c: &Container, key: &str) -> CResult<u64> {
    let v = c.meta(key)?;
    v.parse()
        .map_err(|_| ContainerError::Malformed(format!("bad `{key}` value `{v}`")))
}

fn take_f32<'a>(c: &'a Container, name: &str, shape: &[usize]) -> CResult<&'a [f32]> {
    let a = c
        .array(name)
        .ok_or_else(|| ContainerError::Malformed(format!("missing array `{name}`")))?;
    if a.shape != shape {
        return Err(ContainerError::ShapeMismatch(format!(
            "array `{name}` has shape {:?}, expected {shape:?}",
            a.shape
        )));
    }
    match &a.data {
        ArrayData::F32(v) => Ok(v),
        ArrayData::Bits(_) => malformed(format!("array `{name}` must be f32")),
    }
}

fn take_bits(c: &Container, name: &str, shape: &[usize]) -> CResult<Vec<bool>> {
    let a = c
        .array(name)
        .ok_or_else(|| ContainerError::Malformed(format!("missing array `{name}`")))?;
    if a.shape != shape {
        return Err(ContainerError::ShapeMismatch(format!(
            "array `{name}` has shape {:?}, expected {shape:?}",
            a.shape
        )));
    }
    match &a.data {
        ArrayData::Bits(v) => Ok(v.clone()),
        ArrayData::F32(_) => malformed(format!("array `{name}` must be bits")),
    }
}

fn mask(grid: BevGridSpec, bits: Vec<bool>) -> CResult<BevMask> {
    BevMask::from_bits(grid, bits).map_err(|e| ContainerError::ShapeMismatch(e.to_string()))
}

/// One dataset frame: radar input, labels, masks and optional extras.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameRecord {
    pub frame_id: u64,
    pub sequence_id: u64,
    pub rd: RdFrame<f32>,
    pub label: BevLabel,
    pub hfov: BevMask,
    /// `hfov & observable`.
    pub sup: BevMask,
    /// `(method, map)`.
    pub prediction: Option<(String, PredictionMap)>,
    /// Stored at f32 precision.
    pub points: Option<PointCloud>,
}

impl FrameRecord {
    pub fn grid(&self) -> &BevGridSpec {
        self.label.grid()
    }

    /// `hfov & !observable`.
    pub fn unknown(&self) -> BevMask {
        self.hfov.and_not(self.label.observable()).expect("record grids agree")
    }

    pub fn validate(&self) -> Result<()> {
        let g = self.grid();
        g.ensure_same(self.hfov.grid(), "hfov")?;
        g.ensure_same(self.sup.grid(), "sup")?;
        if let Some((_, p)) = &self.prediction {
            g.ensure_same(p.grid(), "prediction")?;
        }
        if self.sup != self.hfov.and(self.label.observable())? {
            return Err(Error::Invalid(format!(
                "frame {}: sup != hfov & observable",
                self.frame_id
            )));
        }
        if !self.label.occupancy().is_subset_of(self.label.observable()) {
            return Err(Error::Invalid(format!(
                "frame {}: occupied cell not observable",
                self.frame_id
            )));
        }
        if !self.rd.is_finite() {
            return Err(Error::Invalid(format!("frame {}: non-finite RD values", self.frame_id)));
        }
        if let Some(pc) = &self.points {
            pc.validate()?;
        }
        Ok(())
    }

    pub fn to_container(&self) -> Container {
        let g = self.grid();
        let s = self.rd.shape();
        let hw = vec![g.height, g.width];
        let mut meta = BTreeMap::new();
        meta.insert("kind".into(), "frame".into());
        meta.insert("frame_id".into(), self.frame_id.to_string());
        meta.insert("sequence_id".into(), self.sequence_id.to_string());
        meta.insert("grid".into(), grid_text(g));
        meta.insert("radar_digest".into(), self.rd.config_digest().to_string());
        meta.insert(
            "rd_dims".into(),
            format!("{} {} {} {}", s.chirps, s.rx, s.range, s.doppler),
        );
        let rd: Vec<f32> = self.rd.data().iter().flat_map(|z| [z.re, z.im]).collect();
        let mut arrays = vec![
            Array::f32("rd", vec![s.chirps, s.rx, s.range, s.doppler, 2], rd),
            Array::bits("occupancy", hw.clone(), self.label.occupancy().bits().to_vec()),
            Array::bits("observable", hw.clone(), self.label.observable().bits().to_vec()),
            Array::bits("hfov", hw.clone(), self.hfov.bits().to_vec()),
            Array::bits("sup", hw.clone(), self.sup.bits().to_vec()),
        ];
        if let Some((method, p)) = &self.prediction {
            meta.insert("prediction_method".into(), method.clone());
            arrays.push(Array::f32("prediction", hw, p.probs().to_vec()));
        }
        if let Some(pc) = &self.points {
            let xyz = pc
                .points
                .iter()
                .flat_map(|p| [p.x as f32, p.y as f32, p.z as f32])
                .collect();
            arrays.push(Array::f32("points", vec![pc.len(), 3], xyz));
            arrays.push(Array::bits("ground", vec![pc.len()], pc.ground.clone()));
        }
        Container { meta, arrays }
    }

    pub fn from_container(c: &Container) -> CResult<Self> {
        if c.meta("kind")? != "frame" {
            return malformed(format!("expected kind `frame`, found `{}`", c.meta("kind")?));
        }
        let grid = parse_grid(c.meta("grid")?)?;
        let dims: std::result::Result<Vec<usize>, _> = c.meta("rd_dims")?.split_whitespace().map(str::parse).collect();
        let dims = dims.map_err(|_| ContainerError::Malformed("bad `rd_dims`".into()))?;
        let [chirps, rx, range, doppler] = dims.as_slice() else {
            return malformed("`rd_dims` needs 4 values");
        };
        let shape = RdShape {
            chirps: *chirps,
            rx: *rx,
            range: *range,
            doppler: *doppler,
        };
        let raw = take_f32(c, "rd", &[shape.chirps, shape.rx, shape.range, shape.doppler, 2])?;
        let data = raw.chunks_exact(2).map(|p| Complex32::new(p[0], p[1])).collect();
        let rd = RdFrame::from_data(shape, data, c.meta("radar_digest")?)
            .map_err(|e| ContainerError::Malformed(e.to_string()))?;
        let hw = [grid.height, grid.width];
        let occupancy = mask(grid, take_bits(c, "occupancy", &hw)?)?;
        let observable = mask(grid, take_bits(c, "observable", &hw)?)?;
        let label =
            BevLabel::from_parts(occupancy, observable).map_err(|e| ContainerError::Malformed(e.to_string()))?;
        let hfov = mask(grid, take_bits(c, "hfov", &hw)?)?;
        let sup = mask(grid, take_bits(c, "sup", &hw)?)?;
        let prediction = match c.array("prediction") {
            Some(_) => {
                let probs = take_f32(c, "prediction", &hw)?.to_vec();
                let map = PredictionMap::new(grid, probs).map_err(|e| ContainerError::Malformed(e.to_string()))?;
                Some((c.meta("prediction_method")?.to_string(), map))
            }
            None => None,
        };
        let points = match c.array("points") {
            Some(a) => {
                let n = a.shape.first().copied().unwrap_or(0);
                let xyz = take_f32(c, "points", &[n, 3])?;
                let ground = take_bits(c, "ground", &[n])?;
                Some(PointCloud {
                    points: xyz
                        .chunks_exact(3)
                        .map(|p| Point3 {
                            x: p[0] as f64,
                            y: p[1] as f64,
                            z: p[2] as f64,
                        })
                        .collect(),
                    ground,
                })
            }
            None => None,
        };
        Ok(FrameRecord {
            frame_id: parse_u64(c, "frame_id")?,
            sequence_id: parse_u64(c, "sequence_id")?,
            rd,
            label,
            hfov,
            sup,
            prediction,
            points,
        })
    }
}

/// A prediction map for one frame, stored on its own.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionRecord {
    pub frame_id: u64,
    pub method: String,
    pub map: PredictionMap,
}

impl PredictionRecord {
    pub fn to_container(&self) -> Container {
        let g = self.map.grid();
        let mut meta = BTreeMap::new();
        meta.insert("kind".into(), "prediction".into());
        meta.insert("frame_id".into(), self.frame_id.to_string());
        meta.insert("grid".into(), grid_text(g));
        meta.insert("prediction_method".into(), self.method.clone());
        Container {
            meta,
            arrays: vec![Array::f32(
                "prediction",
                vec![g.height, g.width],
                self.map.probs().to_vec(),
            )],
        }
    }

    pub fn from_container(c: &Container) -> CResult<Self> {
        if c.meta("kind")? != "prediction" {
            return malformed(format!("expected kind `prediction`, found `{}`", c.meta("kind")?));
        }
        let grid = parse_grid(c.meta("grid")?)?;
        let probs = take_f32(c, "prediction", &[grid.height, grid.width])?.to_vec();
        Ok(Self {
            frame_id: parse_u64(c, "frame_id")?,
            method: c.meta("prediction_method")?.to_string(),
            map: PredictionMap::new(grid, probs).map_err(|e| ContainerError::Malformed(e.to_string()))?,
        })
    }
}

fn read_container(path: &Path) -> Result<Container> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Container::from_bytes(&bytes).map_err(|source| Error::Container {
        path: path.to_path_buf(),
        source,
    })
}

fn write_container(c: &Container, path: &Path) -> Result<()> {
    std::fs::write(path, c.to_bytes()).map_err(|e| Error::io(path, e))
}

pub fn write_frame(record: &FrameRecord, path: &Path) -> Result<()> {
    record.validate()?;
    write_container(&record.to_container(), path)
}

pub fn read_frame(path: &Path) -> Result<FrameRecord> {
    let c = read_container(path)?;
    let record = FrameRecord::from_container(&c).map_err(|source| Error::Container {
        path: path.to_path_buf(),
        source,
    })?;
    record.validate()?;
    Ok(record)
}

pub fn write_prediction(record: &PredictionRecord, path: &Path) -> Result<()> {
    write_container(&record.to_container(), path)
}

pub fn read_prediction(path: &Path) -> Result<PredictionRecord> {
    let c = read_container(path)?;
    PredictionRecord::from_container(&c).map_err(|source| Error::Container {
        path: path.to_path_buf(),
        source,
    })
}
