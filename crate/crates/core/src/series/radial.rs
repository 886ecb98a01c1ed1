use serde::{Deserialize, Serialize};

use super::eval::{contract_matrices, derivative_weights};
use super::CoeffArray;
use crate::error::{invalid, Result};
use crate::quadrature::gauss_legendre_on;

pub const MAX_DEPTH: usize = 12;

/// Gauss-Legendre nodes per dyadic interval and axis.
pub const NODES_PER_INTERVAL: usize = 16;

/// Largest increment ratio accepted as geometric decay.
const GEOMETRIC_RATIO: f64 = 0.9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialLevel {
    pub delta: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialVariationResult {
    pub theta: Vec<f64>,
    /// `int_{[0, 1 - delta]^n} ||d_r f_r(theta)|| dr` for `delta = 2^-k`.
    pub levels: Vec<RadialLevel>,
    /// Geometric-tail estimate of the full integral; `None` stands for `+inf`
    /// (increments do not decay geometrically).
    pub extrapolated: Option<f64>,
    pub monotone: bool,
}

impl RadialVariationResult {
    pub fn extrapolated_value(&self) -> f64 {
        self.extrapolated.unwrap_or(f64::INFINITY)
    }

    pub fn increments(&self) -> Vec<f64> {
        let mut prev = 0.0;
        self.levels
            .iter()
            .map(|l| {
                let d = l.value - prev;
                prev = l.value;
                d
            })
            .collect()
    }
}

/// Radial variation truncated at `1 - 2^-k`, `k = 1..=depth`.
///
/// `[0, 1 - 2^-depth]` is split into the dyadic intervals
/// `I_i = [1 - 2^{1-i}, 1 - 2^{-i}]`, each carrying a 16-point rule. The
/// derivative at every tensor node comes from one matrix contraction per axis;
/// level `k` sums the boxes `I_{i_1} x ... x I_{i_n}` with `max i_j <= k`, so
/// levels are nondecreasing by construction. When the last three increment
/// ratios lie in `[0, 0.9]`, the remaining tail is summed as a geometric
/// series with the last ratio.
pub fn radial_variation(f: &CoeffArray, theta: &[f64], depth: usize) -> Result<RadialVariationResult> {
    f.check_point("theta", theta)?;
    if depth == 0 || depth > MAX_DEPTH {
        return Err(invalid("depth", format!("{depth} must lie in 1..={MAX_DEPTH}")));
    }
    let q = NODES_PER_INTERVAL;
    let mut nodes = Vec::with_capacity(depth * q);
    let mut weights = Vec::with_capacity(depth * q);
    for i in 1..=depth {
        let a = 1.0 - 0.5f64.powi(i as i32 - 1);
        let b = 1.0 - 0.5f64.powi(i as i32);
        let (x, w) = gauss_legendre_on(q, a, b);
        nodes.extend(x);
        weights.extend(w);
    }
    let mats: Vec<_> = f
        .shape()
        .iter()
        .zip(theta)
        .map(|(&len, &t)| nodes.iter().map(|&r| derivative_weights(len, r, t)).collect::<Vec<_>>())
        .collect();
    let values = contract_matrices(f, &mats);
    let n = f.n();
    let per_axis = nodes.len();
    let count = per_axis.pow(n as u32);
    let d = f.d();

    // integrate each box: level(p) = max interval index over the axes
    let mut box_sums = vec![0.0f64; depth];
    let mut idx = vec![0usize; n];
    for flat in 0..count {
        let mut rem = flat;
        for slot in idx.iter_mut().rev() {
            *slot = rem % per_axis;
            rem /= per_axis;
        }
        let norm = (0..d).map(|c| values[c * count + flat].norm_sqr()).sum::<f64>().sqrt();
        let w: f64 = idx.iter().map(|&p| weights[p]).product();
        let level = idx.iter().map(|&p| p / q).max().unwrap_or(0);
        box_sums[level] += w * norm;
    }
    let mut levels = Vec::with_capacity(depth);
    let mut acc = 0.0;
    for (k, s) in box_sums.iter().enumerate() {
        acc += s;
        levels.push(RadialLevel {
            delta: 0.5f64.powi(k as i32 + 1),
            value: acc,
        });
    }
    let monotone = levels.windows(2).all(|w| w[1].value >= w[0].value);
    let extrapolated = extrapolate(&box_sums, acc);
    Ok(RadialVariationResult {
        theta: theta.to_vec(),
        levels,
        extrapolated,
        monotone,
    })
}

fn extrapolate(increments: &[f64], total: f64) -> Option<f64> {
    let k = increments.len();
    if k < 4 {
        return None;
    }
    let tail = &increments[k - 4..];
    if tail.iter().all(|&x| x == 0.0) {
        return Some(total);
    }
    let mut ratio = 0.0;
    for w in tail.windows(2) {
        if w[0] <= 0.0 {
            return None;
        }
        ratio = w[1] / w[0];
        if !(0.0..=GEOMETRIC_RATIO).contains(&ratio) {
            return None;
        }
    }
    Some(total + increments[k - 1] * ratio / (1.0 - ratio))
}
