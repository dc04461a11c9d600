//! Uniform lattices over a centered box, cell masks and grid functions.
//!
//! Cells are indexed with the first axis varying fastest:
//! `index = c0 + resolution * c1`. Cell `c` along an axis has center
//! `-half_width + h * (c + 0.5)`.

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};

/// A point of the ambient space. Unused coordinates are zero in 1D.
pub type Point = [f64; 2];

/// Integer lattice displacement, in cells.
pub type Shift = [i64; 2];

/// Largest cell count a [`Grid`] may have.
pub const GRID_CELL_LIMIT: usize = 16_384;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridSpec", into = "GridSpec")]
pub struct Grid {
    dim: usize,
    half_width: f64,
    resolution: usize,
}

/// Wire form of a grid: `{dim, half_width, resolution}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub dim: usize,
    pub half_width: f64,
    pub resolution: usize,
}

impl TryFrom<GridSpec> for Grid {
    type Error = Error;

    fn try_from(spec: GridSpec) -> Result<Self> {
        Grid::new(spec.dim, spec.half_width, spec.resolution)
    }
}

impl From<Grid> for GridSpec {
    fn from(g: Grid) -> Self {
        GridSpec {
            dim: g.dim,
            half_width: g.half_width,
            resolution: g.resolution,
        }
    }
}

impl Grid {
    pub fn new(dim: usize, half_width: f64, resolution: usize) -> Result<Self> {
        if !(dim == 1 || dim == 2) {
            return Err(param("dim", format!("must be 1 or 2, got {dim}")));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(param(
                "half_width",
                format!("must be positive and finite, got {half_width}"),
            ));
        }
        if resolution < 2 {
            return Err(param(
                "resolution",
                format!("must be at least 2, got {resolution}"),
            ));
        }
        let cells = resolution
            .checked_pow(dim as u32)
            .filter(|&m| m <= GRID_CELL_LIMIT);
        if cells.is_none() {
            return Err(param(
                "resolution",
                format!("resolution^dim must not exceed {GRID_CELL_LIMIT}"),
            ));
        }
        Ok(Grid {
            dim,
            half_width,
            resolution,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    /// Cell width.
    pub fn h(&self) -> f64 {
        2.0 * self.half_width / self.resolution as f64
    }

    /// Cell measure `h^dim`.
    pub fn cell_volume(&self) -> f64 {
        self.h().powi(self.dim as i32)
    }

    pub fn cell_count(&self) -> usize {
        self.resolution.pow(self.dim as u32)
    }

    pub fn coords(&self, index: usize) -> [usize; 2] {
        if self.dim == 1 {
            [index, 0]
        } else {
            [index % self.resolution, index / self.resolution]
        }
    }

    pub fn index(&self, coords: [usize; 2]) -> usize {
        if self.dim == 1 {
            coords[0]
        } else {
            coords[0] + self.resolution * coords[1]
        }
    }

    /// Center coordinate of cell number `c` along one axis.
    pub fn axis_center(&self, c: usize) -> f64 {
        -self.half_width + self.h() * (c as f64 + 0.5)
    }

    pub fn center(&self, index: usize) -> Point {
        let c = self.coords(index);
        if self.dim == 1 {
            [self.axis_center(c[0]), 0.0]
        } else {
            [self.axis_center(c[0]), self.axis_center(c[1])]
        }
    }

    pub fn centers(&self) -> Vec<Point> {
        (0..self.cell_count()).map(|i| self.center(i)).collect()
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        dist(&self.center(i), &self.center(j))
    }

    /// Index of the cell reached from `index` by a lattice shift, if inside.
    pub fn shifted_index(&self, index: usize, shift: Shift) -> Option<usize> {
        let c = self.coords(index);
        let mut out = [0usize; 2];
        for axis in 0..self.dim {
            let v = c[axis] as i64 + shift[axis];
            if v < 0 || v >= self.resolution as i64 {
                return None;
            }
            out[axis] = v as usize;
        }
        Some(self.index(out))
    }

    /// Face neighbours of a cell.
    pub fn neighbors(&self, index: usize) -> impl Iterator<Item = usize> + '_ {
        let dirs: &[Shift] = if self.dim == 1 {
            &[[-1, 0], [1, 0]]
        } else {
            &[[-1, 0], [1, 0], [0, -1], [0, 1]]
        };
        dirs.iter()
            .filter_map(move |&d| self.shifted_index(index, d))
    }

    /// Cell whose closed box contains `p`, clamped to the grid.
    pub fn locate(&self, p: &Point) -> usize {
        let h = self.h();
        let mut c = [0usize; 2];
        for axis in 0..self.dim {
            let t = ((p[axis] + self.half_width) / h).floor();
            c[axis] = t.clamp(0.0, (self.resolution - 1) as f64) as usize;
        }
        self.index(c)
    }
}

pub fn dist(a: &Point, b: &Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// A set of cells of a grid: the discrete stand-in for a quasi-open set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "MaskWire", into = "MaskWire")]
pub struct DomainMask {
    grid: GridKey,
    cells: Vec<bool>,
}

// Grids compare by bit pattern inside masks so that masks can be `Eq`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct GridKey(usize, u64, usize);

impl From<Grid> for GridKey {
    fn from(g: Grid) -> Self {
        GridKey(g.dim, g.half_width.to_bits(), g.resolution)
    }
}

impl GridKey {
    fn grid(self) -> Grid {
        Grid {
            dim: self.0,
            half_width: f64::from_bits(self.1),
            resolution: self.2,
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MaskWire {
    grid: Grid,
    cells: String,
}

impl TryFrom<MaskWire> for DomainMask {
    type Error = Error;

    fn try_from(w: MaskWire) -> Result<Self> {
        DomainMask::from_rle(w.grid, &w.cells)
    }
}

impl From<DomainMask> for MaskWire {
    fn from(m: DomainMask) -> Self {
        MaskWire {
            cells: m.to_rle(),
            grid: m.grid(),
        }
    }
}

impl DomainMask {
    pub fn new(grid: Grid, cells: Vec<bool>) -> Result<Self> {
        if cells.len() != grid.cell_count() {
            return Err(Error::Structure(format!(
                "mask has {} cells, grid has {}",
                cells.len(),
                grid.cell_count()
            )));
        }
        Ok(DomainMask {
            grid: grid.into(),
            cells,
        })
    }

    pub fn empty(grid: Grid) -> Self {
        DomainMask {
            grid: grid.into(),
            cells: vec![false; grid.cell_count()],
        }
    }

    pub fn full(grid: Grid) -> Self {
        DomainMask {
            grid: grid.into(),
            cells: vec![true; grid.cell_count()],
        }
    }

    pub fn from_indices(grid: Grid, indices: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut m = Self::empty(grid);
        for i in indices {
            if i >= m.cells.len() {
                return Err(Error::Structure(format!("cell {i} outside grid")));
            }
            m.cells[i] = true;
        }
        Ok(m)
    }

    /// Cells whose centers satisfy a predicate.
    pub fn from_predicate(grid: Grid, pred: impl Fn(&Point) -> bool) -> Self {
        let cells = (0..grid.cell_count()).map(|i| pred(&grid.center(i))).collect();
        DomainMask {
            grid: grid.into(),
            cells,
        }
    }

    pub fn grid(&self) -> Grid {
        self.grid.grid()
    }

    pub fn cells(&self) -> &[bool] {
        &self.cells
    }

    pub fn contains(&self, i: usize) -> bool {
        self.cells[i]
    }

    pub fn set(&mut self, i: usize, value: bool) {
        self.cells[i] = value;
    }

    pub fn count(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.cells.iter().any(|&c| c)
    }

    /// `h^dim` times the number of cells.
    pub fn volume(&self) -> f64 {
        self.count() as f64 * self.grid().cell_volume()
    }

    pub fn active_indices(&self) -> Vec<usize> {
        self.cells
            .iter()
            .enumerate()
            .filter_map(|(i, &c)| c.then_some(i))
            .collect()
    }

    fn check_same_grid(&self, other: &DomainMask) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::Structure("masks live on different grids".into()));
        }
        Ok(())
    }

    pub fn is_subset_of(&self, other: &DomainMask) -> Result<bool> {
        self.check_same_grid(other)?;
        Ok(self
            .cells
            .iter()
            .zip(&other.cells)
            .all(|(&a, &b)| !a || b))
    }

    pub fn union(&self, other: &DomainMask) -> Result<DomainMask> {
        self.check_same_grid(other)?;
        let cells = self.cells.iter().zip(&other.cells).map(|(&a, &b)| a || b).collect();
        Ok(DomainMask {
            grid: self.grid,
            cells,
        })
    }

    pub fn intersection(&self, other: &DomainMask) -> Result<DomainMask> {
        self.check_same_grid(other)?;
        let cells = self.cells.iter().zip(&other.cells).map(|(&a, &b)| a && b).collect();
        Ok(DomainMask {
            grid: self.grid,
            cells,
        })
    }

    /// Translate by a lattice shift; `None` if any cell would leave the box.
    pub fn shifted(&self, shift: Shift) -> Option<DomainMask> {
        let grid = self.grid();
        let mut out = DomainMask::empty(grid);
        for i in self.active_indices() {
            out.cells[grid.shifted_index(i, shift)?] = true;
        }
        Some(out)
    }

    /// Run-length encoding: comma-separated run lengths that alternate
    /// between unset and set cells, starting with an (possibly zero) unset run.
    pub fn to_rle(&self) -> String {
        let mut runs = Vec::new();
        let mut current = false;
        let mut len = 0usize;
        for &c in &self.cells {
            if c == current {
                len += 1;
            } else {
                runs.push(len.to_string());
                current = c;
                len = 1;
            }
        }
        runs.push(len.to_string());
        runs.join(",")
    }

    pub fn from_rle(grid: Grid, rle: &str) -> Result<Self> {
        let mut cells = Vec::with_capacity(grid.cell_count());
        let mut value = false;
        for tok in rle.split(',') {
            let n: usize = tok
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad run length `{tok}`")))?;
            cells.extend(std::iter::repeat_n(value, n));
            value = !value;
        }
        DomainMask::new(grid, cells)
    }
}

/// Real values on the cells of a grid, implicitly zero outside the box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FunctionWire", into = "FunctionWire")]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct FunctionWire {
    grid: Grid,
    values: Vec<f64>,
}

impl TryFrom<FunctionWire> for GridFunction {
    type Error = Error;

    fn try_from(w: FunctionWire) -> Result<Self> {
        GridFunction::new(w.grid, w.values)
    }
}

impl From<GridFunction> for FunctionWire {
    fn from(f: GridFunction) -> Self {
        FunctionWire {
            grid: f.grid,
            values: f.values,
        }
    }
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.cell_count() {
            return Err(Error::Structure(format!(
                "function has {} values, grid has {} cells",
                values.len(),
                grid.cell_count()
            )));
        }
        Ok(GridFunction { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        GridFunction {
            grid,
            values: vec![0.0; grid.cell_count()],
        }
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        GridFunction {
            grid,
            values: vec![c; grid.cell_count()],
        }
    }

    /// Sample `f` at cell centers.
    pub fn from_fn(grid: Grid, f: impl Fn(&Point) -> f64) -> Self {
        let values = (0..grid.cell_count()).map(|i| f(&grid.center(i))).collect();
        GridFunction { grid, values }
    }

    pub fn indicator(mask: &DomainMask) -> Self {
        let values = mask.cells().iter().map(|&c| if c { 1.0 } else { 0.0 }).collect();
        GridFunction {
            grid: mask.grid(),
            values,
        }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub(crate) fn check_grid(&self, grid: &Grid) -> Result<()> {
        if &self.grid != grid {
            return Err(Error::Structure("function lives on a different grid".into()));
        }
        Ok(())
    }

    /// Weighted inner product `h^dim * sum(u_i v_i)`.
    pub fn inner(&self, other: &GridFunction) -> Result<f64> {
        other.check_grid(&self.grid)?;
        let s: f64 = self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum();
        Ok(s * self.grid.cell_volume())
    }

    /// `∫ |u|²`.
    pub fn mass(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>() * self.grid.cell_volume()
    }

    pub fn l2_norm(&self) -> f64 {
        self.mass().sqrt()
    }

    /// `∫ u`.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_volume()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn scaled(&self, c: f64) -> GridFunction {
        GridFunction {
            grid: self.grid,
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    pub fn sub(&self, other: &GridFunction) -> Result<GridFunction> {
        other.check_grid(&self.grid)?;
        Ok(GridFunction {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn add(&self, other: &GridFunction) -> Result<GridFunction> {
        other.check_grid(&self.grid)?;
        Ok(GridFunction {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
        })
    }

    /// `‖u - v‖_{L²}`.
    pub fn l2_distance(&self, other: &GridFunction) -> Result<f64> {
        Ok(self.sub(other)?.l2_norm())
    }

    /// Cells where the function is nonzero.
    pub fn support(&self) -> DomainMask {
        DomainMask {
            grid: self.grid.into(),
            cells: self.values.iter().map(|&v| v != 0.0).collect(),
        }
    }

    /// Translate by a lattice shift; values pushed out of the box are dropped.
    pub fn shifted(&self, shift: Shift) -> GridFunction {
        let mut out = GridFunction::zeros(self.grid);
        for (i, &v) in self.values.iter().enumerate() {
            if let Some(j) = self.grid.shifted_index(i, shift) {
                out.values[j] = v;
            }
        }
        out
    }

    /// Embed into a larger (or finer) aligned grid as a piecewise constant.
    ///
    /// Every cell of `target` must lie inside exactly one cell of the source
    /// grid or outside the source box entirely; the source cell width must be
    /// an integer multiple of the target's and the box edges must sit on the
    /// target lattice.
    pub fn embed_into(&self, target: Grid) -> Result<GridFunction> {
        let src = self.grid;
        if src.dim != target.dim {
            return Err(Error::Structure("cannot embed across dimensions".into()));
        }
        let ht = target.h();
        let ratio = src.h() / ht;
        let offset = (target.half_width - src.half_width) / ht;
        let aligned = |x: f64| (x - x.round()).abs() < 1e-9 * x.abs().max(1.0);
        if ratio < 1.0 - 1e-12 || !aligned(ratio) || !aligned(offset) || offset < -1e-9 {
            return Err(Error::Structure(format!(
                "grids are not aligned (cell ratio {ratio}, edge offset {offset} cells)"
            )));
        }
        let ratio = ratio.round() as usize;
        let offset = offset.round() as usize;
        let mut out = GridFunction::zeros(target);
        for t in 0..target.cell_count() {
            let c = target.coords(t);
            let mut sc = [0usize; 2];
            let mut inside = true;
            for axis in 0..target.dim {
                if c[axis] < offset {
                    inside = false;
                    break;
                }
                let k = (c[axis] - offset) / ratio;
                if k >= src.resolution {
                    inside = false;
                    break;
                }
                sc[axis] = k;
            }
            if inside {
                out.values[t] = self.values[src.index(sc)];
            }
        }
        Ok(out)
    }
}
