//! JSON set specifications, snapped to the grid by outer cover.
//!
//! ```json
//! {"n": 2, "m": 256, "set": {"type": "product", "factors": [
//!     {"type": "arc", "dim": 0, "start": 0.0, "end": 1.5707963267948966},
//!     {"type": "arc", "dim": 1, "start": 0.0, "end": 3.141592653589793}]}}
//! ```
//!
//! Arcs are half-open `[start, end)` in radians; `end < start` wraps through
//! zero. An arc with dimension `dim` is the cylinder over that axis, so a
//! product of arcs on distinct axes is a box.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridSet, TorusGrid};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetFile {
    pub n: usize,
    pub m: usize,
    pub set: SetSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum SetSpec {
    Full,
    Arc {
        dim: usize,
        start: f64,
        end: f64,
    },
    Product {
        factors: Vec<SetSpec>,
    },
    Union {
        parts: Vec<SetSpec>,
    },
    /// Symmetric Cantor set on `[0, 2pi)`: at level `l` every interval keeps
    /// two end pieces of relative length `ratios[l]`.
    Cantor {
        dim: usize,
        levels: usize,
        ratios: Vec<f64>,
    },
}

impl SetFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::SetSpec(format!("set: {e}")))
    }

    pub fn grid(&self) -> Result<TorusGrid> {
        TorusGrid::new(self.n, self.m)
    }

    pub fn build(&self) -> Result<GridSet> {
        self.set.build(self.grid()?)
    }
}

/// Fractional grid coordinate of an angle, snapped to an integer when within
/// rounding distance so that angles like `pi` land exactly on grid points.
fn grid_coordinate(angle: f64, m: usize) -> f64 {
    let x = angle / TAU * m as f64;
    let r = x.round();
    if (x - r).abs() < 1e-9 * m as f64 {
        r
    } else {
        x
    }
}

/// Outer cover of `[start, end)` by grid cells: indices `floor(start)` up to
/// `ceil(end)` (exclusive), modulo `m`.
pub fn arc_line(m: usize, start: f64, end: f64) -> Vec<bool> {
    let mut line = vec![false; m];
    let lo = grid_coordinate(start, m);
    let mut hi = grid_coordinate(end, m);
    if hi < lo {
        hi += m as f64;
    }
    let first = lo.floor() as i64;
    let last = hi.ceil() as i64;
    let count = (last - first).clamp(0, m as i64);
    for k in 0..count {
        line[(first + k).rem_euclid(m as i64) as usize] = true;
    }
    line
}

/// Intervals (in radians) of the Cantor construction.
pub fn cantor_intervals(levels: usize, ratios: &[f64]) -> Vec<(f64, f64)> {
    let mut intervals = vec![(0.0, TAU)];
    for &r in ratios.iter().take(levels) {
        intervals = intervals
            .iter()
            .flat_map(|&(a, b)| {
                let piece = r * (b - a);
                [(a, a + piece), (b - piece, b)]
            })
            .collect();
    }
    intervals
}

impl SetSpec {
    pub fn build(&self, grid: TorusGrid) -> Result<GridSet> {
        self.build_at(grid, "set")
    }

    fn build_at(&self, grid: TorusGrid, path: &str) -> Result<GridSet> {
        let check_dim = |dim: usize| -> Result<()> {
            if dim >= grid.n() {
                return Err(Error::SetSpec(format!(
                    "{path}.dim: axis {dim} out of range for n = {}",
                    grid.n()
                )));
            }
            Ok(())
        };
        match self {
            SetSpec::Full => Ok(GridSet::full(grid)),
            SetSpec::Arc { dim, start, end } => {
                check_dim(*dim)?;
                for (name, v) in [("start", start), ("end", end)] {
                    if !v.is_finite() {
                        return Err(Error::SetSpec(format!("{path}.{name}: angle must be finite")));
                    }
                }
                if end - start >= TAU {
                    return Ok(GridSet::full(grid));
                }
                let line = arc_line(grid.m(), *start, *end);
                Ok(GridSet::from_axis_line(grid, *dim, &line))
            }
            SetSpec::Product { factors } => {
                if factors.is_empty() {
                    return Err(Error::SetSpec(format!("{path}.factors: must not be empty")));
                }
                let mut acc = GridSet::full(grid);
                for (i, f) in factors.iter().enumerate() {
                    acc = acc.intersection(&f.build_at(grid, &format!("{path}.factors[{i}]"))?)?;
                }
                Ok(acc)
            }
            SetSpec::Union { parts } => {
                if parts.is_empty() {
                    return Err(Error::SetSpec(format!("{path}.parts: must not be empty")));
                }
                let mut acc = GridSet::empty(grid);
                for (i, p) in parts.iter().enumerate() {
                    acc = acc.union(&p.build_at(grid, &format!("{path}.parts[{i}]"))?)?;
                }
                Ok(acc)
            }
            SetSpec::Cantor { dim, levels, ratios } => {
                check_dim(*dim)?;
                if ratios.len() < *levels {
                    return Err(Error::SetSpec(format!(
                        "{path}.ratios: {} ratios given for {levels} levels",
                        ratios.len()
                    )));
                }
                if let Some(r) = ratios.iter().find(|r| !(**r > 0.0 && **r < 0.5)) {
                    return Err(Error::SetSpec(format!("{path}.ratios: {r} must lie in (0, 0.5)")));
                }
                let mut line = vec![false; grid.m()];
                for (a, b) in cantor_intervals(*levels, ratios) {
                    for (slot, on) in line.iter_mut().zip(arc_line(grid.m(), a, b)) {
                        *slot |= on;
                    }
                }
                Ok(GridSet::from_axis_line(grid, *dim, &line))
            }
        }
    }
}
