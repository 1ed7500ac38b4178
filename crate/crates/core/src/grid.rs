//! BEV grid geometry, boolean masks, labels and prediction maps.
//!
//! Cells are indexed `(i, j)` with `i` along forward `x` (rows) and `j` along
//! lateral `y` (columns), stored row-major. Cell `(i, j)` covers the
//! half-open square `[x_min + i*res, x_min + (i+1)*res) x [y_min + j*res, ...)`.

use crate::error::{Error, Result};

/// Discretized BEV plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BevGridSpec {
    pub resolution: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub height: usize,
    pub width: usize,
}

impl Default for BevGridSpec {
    fn default() -> Self {
        Self::new(0.5).expect("default grid is valid")
    }
}

impl BevGridSpec {
    /// Grid over x in [0, 60] m, y in [-38, 38] m at the given cell size.
    pub fn new(resolution: f64) -> Result<Self> {
        Self::with_extent(resolution, (0.0, 60.0), (-38.0, 38.0))
    }

    /// When the extent is not a whole multiple of `resolution`, the last
    /// row/column is partial: cells keep their full size but only points
    /// inside the extent map to them.
    pub fn with_extent(resolution: f64, x: (f64, f64), y: (f64, f64)) -> Result<Self> {
        if !(resolution > 0.0) || !resolution.is_finite() {
            return Err(Error::Config(format!("grid resolution {resolution} must be positive")));
        }
        if !(x.1 > x.0) || !(y.1 > y.0) {
            return Err(Error::Config("grid extents must be non-empty".into()));
        }
        let cells = |lo: f64, hi: f64| ((hi - lo) / resolution - 1e-9).ceil() as usize;
        Ok(Self {
            resolution,
            x_min: x.0,
            x_max: x.1,
            y_min: y.0,
            y_max: y.1,
            height: cells(x.0, x.1),
            width: cells(y.0, y.1),
        })
    }

    pub fn num_cells(&self) -> usize {
        self.height * self.width
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.width + j
    }

    pub fn cell_center(&self, i: usize, j: usize) -> (f64, f64) {
        (
            self.x_min + (i as f64 + 0.5) * self.resolution,
            self.y_min + (j as f64 + 0.5) * self.resolution,
        )
    }

    /// Iterator over `(i, j, flat_index)` in storage order.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        (0..self.height).flat_map(move |i| (0..self.width).map(move |j| (i, j, i * self.width + j)))
    }

    pub(crate) fn ensure_same(&self, other: &BevGridSpec, what: &str) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "{what}: {}x{} @ {} vs {}x{} @ {}",
                self.height, self.width, self.resolution, other.height, other.width, other.resolution
            )))
        }
    }
}

/// Cell containing `(x, y)`, or `None` outside the grid extent.
pub fn world_to_cell(x: f64, y: f64, grid: &BevGridSpec) -> Option<(usize, usize)> {
    if !(x >= grid.x_min && x < grid.x_max && y >= grid.y_min && y < grid.y_max) {
        return None;
    }
    let i = ((x - grid.x_min) / grid.resolution).floor() as usize;
    let j = ((y - grid.y_min) / grid.resolution).floor() as usize;
    // Guards against round-up at the last partial cell.
    Some((i.min(grid.height - 1), j.min(grid.width - 1)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BevMask {
    grid: BevGridSpec,
    bits: Vec<bool>,
}

impl BevMask {
    pub fn new(grid: BevGridSpec) -> Self {
        Self {
            grid,
            bits: vec![false; grid.num_cells()],
        }
    }

    pub fn filled(grid: BevGridSpec, value: bool) -> Self {
        Self {
            grid,
            bits: vec![value; grid.num_cells()],
        }
    }

    pub fn from_bits(grid: BevGridSpec, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != grid.num_cells() {
            return Err(Error::GridMismatch(format!(
                "mask has {} cells, grid has {}",
                bits.len(),
                grid.num_cells()
            )));
        }
        Ok(Self { grid, bits })
    }

    pub fn grid(&self) -> &BevGridSpec {
        &self.grid
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.bits[self.grid.index(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        let k = self.grid.index(i, j);
        self.bits[k] = value;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn and(&self, other: &BevMask) -> Result<BevMask> {
        self.zip(other, |a, b| a && b)
    }

    pub fn or(&self, other: &BevMask) -> Result<BevMask> {
        self.zip(other, |a, b| a || b)
    }

    pub fn and_not(&self, other: &BevMask) -> Result<BevMask> {
        self.zip(other, |a, b| a && !b)
    }

    pub fn not(&self) -> BevMask {
        BevMask {
            grid: self.grid,
            bits: self.bits.iter().map(|b| !b).collect(),
        }
    }

    /// True when every set bit of `self` is set in `other`.
    pub fn is_subset_of(&self, other: &BevMask) -> bool {
        self.grid == other.grid && self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }

    /// True when no bit is set in both masks.
    pub fn is_disjoint(&self, other: &BevMask) -> bool {
        self.grid == other.grid && self.bits.iter().zip(&other.bits).all(|(&a, &b)| !(a && b))
    }

    fn zip(&self, other: &BevMask, f: impl Fn(bool, bool) -> bool) -> Result<BevMask> {
        self.grid.ensure_same(&other.grid, "mask combination")?;
        Ok(BevMask {
            grid: self.grid,
            bits: self.bits.iter().zip(&other.bits).map(|(&a, &b)| f(a, b)).collect(),
        })
    }
}

/// Occupied/free/unknown labels: a cell is unknown iff it is not observable.
#[derive(Debug, Clone, PartialEq)]
pub struct BevLabel {
    occupancy: BevMask,
    observable: BevMask,
}

impl BevLabel {
    /// Occupancy is restricted to observable cells.
    pub fn new(occupancy: &BevMask, observable: BevMask) -> Result<Self> {
        let occupancy = occupancy.and(&observable)?;
        Ok(Self { occupancy, observable })
    }

    /// Rejects labels with occupied cells that are not observable.
    pub fn from_parts(occupancy: BevMask, observable: BevMask) -> Result<Self> {
        occupancy.grid.ensure_same(&observable.grid, "label")?;
        if !occupancy.is_subset_of(&observable) {
            return Err(Error::Invalid("occupied cell outside the observable mask".into()));
        }
        Ok(Self { occupancy, observable })
    }

    pub fn occupancy(&self) -> &BevMask {
        &self.occupancy
    }

    pub fn observable(&self) -> &BevMask {
        &self.observable
    }

    pub fn grid(&self) -> &BevGridSpec {
        &self.occupancy.grid
    }
}

/// Per-cell occupancy probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionMap {
    grid: BevGridSpec,
    probs: Vec<f32>,
}

impl PredictionMap {
    pub fn new(grid: BevGridSpec, probs: Vec<f32>) -> Result<Self> {
        if probs.len() != grid.num_cells() {
            return Err(Error::GridMismatch(format!(
                "prediction has {} cells, grid has {}",
                probs.len(),
                grid.num_cells()
            )));
        }
        if let Some(p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::Invalid(format!("probability {p} outside [0, 1]")));
        }
        Ok(Self { grid, probs })
    }

    pub fn constant(grid: BevGridSpec, value: f32) -> Result<Self> {
        Self::new(grid, vec![value; grid.num_cells()])
    }

    pub fn grid(&self) -> &BevGridSpec {
        &self.grid
    }

    pub fn probs(&self) -> &[f32] {
        &self.probs
    }

    pub fn get(&self, i: usize, j: usize) -> f32 {
        self.probs[self.grid.index(i, j)]
    }
}

/// Range and azimuth (radians, from +x boresight) of a BEV point seen from
/// the radar origin.
pub fn polar_from(origin: (f64, f64), x: f64, y: f64) -> (f64, f64) {
    let dx = x - origin.0;
    let dy = y - origin.1;
    (dx.hypot(dy), dy.atan2(dx))
}

/// Cells whose center lies within `hfov_deg / 2` of boresight and within
/// `max_range` of the radar origin.
pub fn hfov_mask(grid: &BevGridSpec, radar_offset: (f64, f64), hfov_deg: f64, max_range: f64) -> BevMask {
    let half = (hfov_deg / 2.0).to_radians();
    let mut mask = BevMask::new(*grid);
    for (i, j, k) in grid.cells() {
        let (cx, cy) = grid.cell_center(i, j);
        let (r, az) = polar_from(radar_offset, cx, cy);
        mask.bits[k] = az.abs() <= half && r <= max_range;
    }
    mask
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_shape() {
        let g = BevGridSpec::default();
        assert_eq!((g.height, g.width), (120, 152));
        assert_eq!(g.num_cells(), 18_240);
        let g4 = BevGridSpec::new(0.4).unwrap();
        assert_eq!((g4.height, g4.width), (150, 190));
        let g35 = BevGridSpec::new(0.35).unwrap();
        assert_eq!((g35.height, g35.width), (172, 218));
    }

    #[test]
    fn world_to_cell_examples() {
        let g = BevGridSpec::default();
        assert_eq!(world_to_cell(0.1, 0.1, &g), Some((0, 76)));
        assert_eq!(world_to_cell(60.0, 0.0, &g), None);
        assert_eq!(world_to_cell(29.9, -37.9, &g), Some((59, 0)));
        assert_eq!(world_to_cell(-0.01, 0.0, &g), None);
        assert_eq!(world_to_cell(0.0, 38.0, &g), None);
        assert_eq!(world_to_cell(0.0, -38.0, &g), Some((0, 0)));
        assert_eq!(world_to_cell(f64::NAN, 0.0, &g), None);
    }

    #[test]
    fn partial_last_cell_is_reachable() {
        let g = BevGridSpec::new(0.35).unwrap();
        assert_eq!(world_to_cell(59.99, 37.99, &g), Some((171, 217)));
    }

    #[test]
    fn cell_center_round_trips() {
        let g = BevGridSpec::default();
        for (i, j, _) in g.cells() {
            let (x, y) = g.cell_center(i, j);
            assert_eq!(world_to_cell(x, y, &g), Some((i, j)));
        }
    }

    #[test]
    fn hfov_examples() {
        let g = BevGridSpec::default();
        let m = hfov_mask(&g, (0.0, 0.0), 64.0, 65.0);
        let (i, j) = world_to_cell(10.1, 0.1, &g).unwrap();
        assert!(m.get(i, j));
        // 40 degrees off boresight at 20 m
        let (x, y) = (20.0 * 40f64.to_radians().cos(), 20.0 * 40f64.to_radians().sin());
        let (i, j) = world_to_cell(x, y, &g).unwrap();
        assert!(!m.get(i, j));
    }

    #[test]
    fn hfov_cell_count_matches_exhaustive_scan() {
        // Frozen from an independent scan using the tangent form
        // |y| <= x tan(32 deg), x^2 + y^2 <= 65^2 over all 18,240 centers.
        let g = BevGridSpec::default();
        let m = hfov_mask(&g, (0.0, 0.0), 64.0, 65.0);
        assert_eq!(m.count(), HFOV_CELLS_05);
    }

    const HFOV_CELLS_05: usize = 8768;

    #[test]
    fn mask_algebra() {
        let g = BevGridSpec::default();
        let a = hfov_mask(&g, (0.0, 0.0), 64.0, 65.0);
        let b = hfov_mask(&g, (0.0, 0.0), 30.0, 40.0);
        assert!(b.is_subset_of(&a));
        let both = a.and(&b).unwrap();
        assert_eq!(both, b);
        let rest = a.and_not(&b).unwrap();
        assert!(rest.is_disjoint(&b));
        assert_eq!(rest.or(&b).unwrap(), a);
        assert_eq!(a.not().count() + a.count(), g.num_cells());
    }

    #[test]
    fn label_restricts_occupancy() {
        let g = BevGridSpec::default();
        let mut occ = BevMask::new(g);
        occ.set(3, 4, true);
        occ.set(5, 6, true);
        let mut obs = BevMask::new(g);
        obs.set(3, 4, true);
        let label = BevLabel::new(&occ, obs.clone()).unwrap();
        assert!(label.occupancy().get(3, 4));
        assert!(!label.occupancy().get(5, 6));
        assert!(BevLabel::from_parts(occ, obs).is_err());
    }

    #[test]
    fn prediction_rejects_out_of_range() {
        let g = BevGridSpec::default();
        assert!(PredictionMap::constant(g, 1.5).is_err());
        assert!(PredictionMap::constant(g, f32::NAN).is_err());
        assert!(PredictionMap::new(g, vec![0.0; 3]).is_err());
    }
}
