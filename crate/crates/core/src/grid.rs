//! Uniform grids on the n-torus, grid subsets and discrete measures.
//!
//! Points are stored in row-major order: the flat index of the multi-index
//! `(p_0, ..., p_{n-1})` is `((p_0 * m + p_1) * m + ...)`. Angles are kept
//! in grid units throughout and converted to radians only at I/O boundaries.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported number of grid points, `m^n`.
pub const MAX_POINTS: usize = 1 << 24;

/// Uniform discretization of `[0, 2pi)^n` with `m` points per axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorusGrid {
    n: usize,
    m: usize,
}

impl TorusGrid {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        if !(1..=3).contains(&n) {
            return Err(Error::InvalidGrid(format!("dimension n = {n} must be 1, 2 or 3")));
        }
        if m < 8 || !m.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "resolution m = {m} must be a power of two >= 8"
            )));
        }
        let total = m.checked_pow(n as u32).unwrap_or(usize::MAX);
        if total > MAX_POINTS {
            return Err(Error::ResourceGuard(format!(
                "m^n = {m}^{n} exceeds the limit of {MAX_POINTS} grid points"
            )));
        }
        Ok(Self { n, m })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Total number of grid points, `m^n`.
    pub fn len(&self) -> usize {
        self.m.pow(self.n as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn flatten(&self, index: &[usize]) -> usize {
        debug_assert_eq!(index.len(), self.n);
        index.iter().fold(0, |acc, &p| acc * self.m + (p % self.m))
    }

    pub fn unflatten(&self, mut flat: usize) -> Vec<usize> {
        let mut out = vec![0; self.n];
        for slot in out.iter_mut().rev() {
            *slot = flat % self.m;
            flat /= self.m;
        }
        out
    }

    /// Angle in radians of grid index `p` along any axis.
    pub fn angle(&self, p: usize) -> f64 {
        TAU * p as f64 / self.m as f64
    }

    /// Angles in radians of the point with the given flat index.
    pub fn point(&self, flat: usize) -> Vec<f64> {
        self.unflatten(flat).into_iter().map(|p| self.angle(p)).collect()
    }

    /// Cyclic distance between two indices on one axis, in grid cells.
    pub fn cyclic_distance(&self, a: usize, b: usize) -> usize {
        let d = (a + self.m - b % self.m) % self.m;
        d.min(self.m - d)
    }

    /// Sup-metric cyclic distance between two flat indices.
    pub fn sup_distance(&self, a: usize, b: usize) -> usize {
        let (ia, ib) = (self.unflatten(a), self.unflatten(b));
        ia.iter()
            .zip(&ib)
            .map(|(&x, &y)| self.cyclic_distance(x, y))
            .max()
            .unwrap_or(0)
    }

    pub(crate) fn check_same(&self, other: &TorusGrid) -> Result<()> {
        if self != other {
            return Err(Error::InvalidGrid(format!(
                "grid mismatch: (n={}, m={}) vs (n={}, m={})",
                self.n, self.m, other.n, other.m
            )));
        }
        Ok(())
    }
}

/// A subset of grid points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridSet {
    grid: TorusGrid,
    mask: Vec<bool>,
}

impl GridSet {
    pub fn from_mask(grid: TorusGrid, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != grid.len() {
            return Err(Error::SetSpec(format!(
                "mask length {} does not match grid size {}",
                mask.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, mask })
    }

    pub fn empty(grid: TorusGrid) -> Self {
        Self {
            grid,
            mask: vec![false; grid.len()],
        }
    }

    pub fn full(grid: TorusGrid) -> Self {
        Self {
            grid,
            mask: vec![true; grid.len()],
        }
    }

    /// Single grid point given by its multi-index.
    pub fn point(grid: TorusGrid, index: &[usize]) -> Result<Self> {
        if index.len() != grid.n() {
            return Err(Error::SetSpec(format!(
                "point has {} coordinates, grid has dimension {}",
                index.len(),
                grid.n()
            )));
        }
        let mut set = Self::empty(grid);
        set.mask[grid.flatten(index)] = true;
        Ok(set)
    }

    /// Cylinder set `{p : p_dim in [start, start + len) mod m}`.
    pub fn cylinder(grid: TorusGrid, dim: usize, start: usize, len: usize) -> Result<Self> {
        if dim >= grid.n() {
            return Err(Error::SetSpec(format!(
                "axis {dim} out of range for dimension {}",
                grid.n()
            )));
        }
        let m = grid.m();
        let mut line = vec![false; m];
        for k in 0..len.min(m) {
            line[(start + k) % m] = true;
        }
        Ok(Self::from_axis_line(grid, dim, &line))
    }

    /// Cylinder over an arbitrary subset of one axis.
    pub fn from_axis_line(grid: TorusGrid, dim: usize, line: &[bool]) -> Self {
        let mask = (0..grid.len())
            .map(|flat| line[grid.unflatten(flat)[dim]])
            .collect();
        Self { grid, mask }
    }

    /// Cartesian product of one-dimensional sets sharing the same resolution.
    pub fn product(factors: &[GridSet]) -> Result<Self> {
        let first = factors
            .first()
            .ok_or_else(|| Error::SetSpec("product needs at least one factor".into()))?;
        let m = first.grid.m();
        if factors.iter().any(|f| f.grid.n() != 1 || f.grid.m() != m) {
            return Err(Error::SetSpec(
                "product factors must be one-dimensional sets on the same resolution".into(),
            ));
        }
        let grid = TorusGrid::new(factors.len(), m)?;
        let mask = (0..grid.len())
            .map(|flat| {
                grid.unflatten(flat)
                    .iter()
                    .zip(factors)
                    .all(|(&p, f)| f.mask[p])
            })
            .collect();
        Ok(Self { grid, mask })
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn contains(&self, flat: usize) -> bool {
        self.mask[flat]
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.mask.iter().any(|&b| b)
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.mask
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
    }

    pub fn union(&self, other: &GridSet) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        let mask = self.mask.iter().zip(&other.mask).map(|(a, b)| *a || *b).collect();
        Ok(Self { grid: self.grid, mask })
    }

    pub fn intersection(&self, other: &GridSet) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        let mask = self.mask.iter().zip(&other.mask).map(|(a, b)| *a && *b).collect();
        Ok(Self { grid: self.grid, mask })
    }

    pub fn is_subset_of(&self, other: &GridSet) -> bool {
        self.grid == other.grid && self.mask.iter().zip(&other.mask).all(|(a, b)| !*a || *b)
    }

    /// Cyclic translation by `shift` grid cells along each axis.
    pub fn translate(&self, shift: &[usize]) -> Self {
        let g = self.grid;
        let mut mask = vec![false; g.len()];
        for flat in self.indices() {
            let moved: Vec<usize> = g
                .unflatten(flat)
                .iter()
                .zip(shift)
                .map(|(&p, &s)| (p + s) % g.m())
                .collect();
            mask[g.flatten(&moved)] = true;
        }
        Self { grid: g, mask }
    }

    /// Closed dilation by `radius` cells in the cyclic sup-metric.
    ///
    /// Sup-metric balls are products of intervals, so the dilation is applied
    /// one axis at a time.
    pub fn dilate(&self, radius: usize) -> Self {
        let g = self.grid;
        let m = g.m();
        let mut mask = self.mask.clone();
        if radius == 0 {
            return Self { grid: g, mask };
        }
        for axis in 0..g.n() {
            let stride = m.pow((g.n() - 1 - axis) as u32);
            let mut next = vec![false; mask.len()];
            let mut line = vec![false; m];
            for base in 0..g.len() {
                // visit each line once, from its first element
                if !(base / stride).is_multiple_of(m) {
                    continue;
                }
                for (k, slot) in line.iter_mut().enumerate() {
                    *slot = mask[base + k * stride];
                }
                let dilated = dilate_line(&line, radius);
                for (k, &v) in dilated.iter().enumerate() {
                    next[base + k * stride] = v;
                }
            }
            mask = next;
        }
        Self { grid: g, mask }
    }
}

fn dilate_line(line: &[bool], radius: usize) -> Vec<bool> {
    let m = line.len();
    if 2 * radius + 1 >= m {
        let any = line.iter().any(|&b| b);
        return vec![any; m];
    }
    let mut out = vec![false; m];
    for (p, &on) in line.iter().enumerate() {
        if on {
            for k in 0..=2 * radius {
                out[(p + m + k - radius) % m] = true;
            }
        }
    }
    out
}

/// Nonnegative weights on grid points. A weight is the measure of the cell
/// around its point, so the normalized counting measure is folded in.
#[derive(Debug, Clone, PartialEq)]
pub struct GridMeasure {
    grid: TorusGrid,
    weights: Vec<f64>,
}

impl GridMeasure {
    pub fn new(grid: TorusGrid, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != grid.len() {
            return Err(Error::InvalidParameter {
                name: "weights",
                reason: format!("length {} does not match grid size {}", weights.len(), grid.len()),
            });
        }
        if let Some(bad) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::InvalidParameter {
                name: "weights",
                reason: format!("weights must be finite and nonnegative, found {bad}"),
            });
        }
        Ok(Self { grid, weights })
    }

    pub fn zero(grid: TorusGrid) -> Self {
        Self {
            grid,
            weights: vec![0.0; grid.len()],
        }
    }

    /// Uniform measure of total `mass` on the points of `set`.
    pub fn uniform_on(set: &GridSet, mass: f64) -> Self {
        let count = set.count().max(1) as f64;
        let weights = set
            .mask()
            .iter()
            .map(|&b| if b { mass / count } else { 0.0 })
            .collect();
        Self {
            grid: set.grid(),
            weights,
        }
    }

    pub(crate) fn from_raw(grid: TorusGrid, weights: Vec<f64>) -> Self {
        Self { grid, weights }
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Points carrying positive weight.
    pub fn support(&self) -> GridSet {
        GridSet {
            grid: self.grid,
            mask: self.weights.iter().map(|&w| w > 0.0).collect(),
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            grid: self.grid,
            weights: self.weights.iter().map(|w| w * factor).collect(),
        }
    }

    pub fn add(&self, other: &GridMeasure) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        Ok(Self {
            grid: self.grid,
            weights: self.weights.iter().zip(&other.weights).map(|(a, b)| a + b).collect(),
        })
    }
}
