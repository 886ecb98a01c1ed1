//! Divergent functions built from equilibrium measures, and the failure of
//! localization for multiple Poisson integrals.
//!
//! Given sets `F_1 ⊇ F_2 ⊇ ...` around a target `E` with summable
//! `C(F_j)^{1/2}`, each equilibrium measure `mu_j` produces
//! `f_j(z) = int prod_k (C + log 1/(1 - z_k e^{-i psi_k})) dmu_j(psi)`, whose
//! real part is comparable to `H mu_j ~ 1` near `F_j`. Summing the `f_j` gives
//! a function of finite Dirichlet norm whose radial limits blow up on `E`.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::capacity::{equilibrium_with, HOperator};
use crate::error::{invalid, Error, Result};
use crate::fft::NdFft;
use crate::grid::{GridMeasure, GridSet, TorusGrid};
use crate::kernels::h_value;
use crate::quadrature;
use crate::series::{abel_mean, CoeffArray};

pub const MAX_CHAIN: usize = 8;
pub const DEFAULT_C_CONST: f64 = 10.0;

/// Decreasing dilations of a target set with their capacities.
#[derive(Debug, Clone, PartialEq)]
pub struct NestedCompacts {
    pub target: GridSet,
    pub radii: Vec<usize>,
    pub sets: Vec<GridSet>,
    pub capacities: Vec<f64>,
    /// Equilibrium measures of the `sets`, in order.
    pub measures: Vec<GridMeasure>,
    pub sqrt_cap_sum: f64,
    /// The budget could not be met even by the undilated target.
    pub shortfall: bool,
    /// Containment chain and nonincreasing capacities were checked.
    pub verified: bool,
}

struct Solver<'a> {
    op: HOperator,
    target: &'a GridSet,
    tol: f64,
    max_iter: usize,
    cache: BTreeMap<usize, (f64, GridMeasure)>,
}

impl Solver<'_> {
    fn capacity(&mut self, radius: usize) -> Result<(f64, GridMeasure)> {
        if let Some(hit) = self.cache.get(&radius) {
            return Ok(hit.clone());
        }
        let set = self.target.dilate(radius);
        let r = equilibrium_with(&self.op, &set, self.tol, self.max_iter)?;
        let out = (r.capacity, r.measure);
        self.cache.insert(radius, out.clone());
        Ok(out)
    }
}

fn check_target(target: &GridSet) -> Result<()> {
    if target.is_empty() {
        return Err(Error::Precondition("target set is empty".into()));
    }
    Ok(())
}

/// `F_j` = sup-metric dilation of `E` by the largest radius (found by
/// bisection, at most the previous radius) with `C(F_j)^{1/2} <= budget 2^-j`.
///
/// When even `E` itself exceeds the budget at some `j`, the chain built so far
/// is returned with `shortfall` set: on a grid every nonempty set has positive
/// capacity, so deep levels of a small budget are unattainable.
pub fn nested_compacts(target: &GridSet, levels: usize, budget: f64, tol: f64, max_iter: usize) -> Result<NestedCompacts> {
    check_target(target)?;
    if levels == 0 || levels > MAX_CHAIN {
        return Err(invalid("J", format!("{levels} must lie in 1..={MAX_CHAIN}")));
    }
    if !(budget > 0.0 && budget.is_finite()) {
        return Err(invalid("budget", format!("{budget} must be positive")));
    }
    let grid = target.grid();
    let mut solver = Solver {
        op: HOperator::new(grid)?,
        target,
        tol,
        max_iter,
        cache: BTreeMap::new(),
    };
    let mut hi = grid.m() / 2;
    let mut radii = Vec::new();
    let mut shortfall = false;
    for j in 1..=levels {
        let cap_limit = (budget * 0.5f64.powi(j as i32)).powi(2);
        if solver.capacity(0)?.0 > cap_limit {
            shortfall = true;
            break;
        }
        // largest feasible radius in [0, hi]; capacity is monotone in the radius
        let (mut lo, mut up) = (0usize, hi);
        while lo < up {
            let mid = (lo + up).div_ceil(2);
            if solver.capacity(mid)?.0 <= cap_limit {
                lo = mid;
            } else {
                up = mid - 1;
            }
        }
        radii.push(lo);
        hi = lo;
    }
    assemble(target, radii, &mut solver, shortfall)
}

/// Chain with explicitly given nonincreasing radii.
pub fn nested_from_radii(target: &GridSet, radii: &[usize], tol: f64, max_iter: usize) -> Result<NestedCompacts> {
    check_target(target)?;
    if radii.is_empty() || radii.len() > MAX_CHAIN {
        return Err(invalid("radii", format!("need 1..={MAX_CHAIN} radii")));
    }
    if radii.windows(2).any(|w| w[1] > w[0]) {
        return Err(invalid("radii", "radii must be nonincreasing"));
    }
    let mut solver = Solver {
        op: HOperator::new(target.grid())?,
        target,
        tol,
        max_iter,
        cache: BTreeMap::new(),
    };
    assemble(target, radii.to_vec(), &mut solver, false)
}

fn assemble(target: &GridSet, radii: Vec<usize>, solver: &mut Solver, shortfall: bool) -> Result<NestedCompacts> {
    let mut sets = Vec::new();
    let mut capacities = Vec::new();
    let mut measures = Vec::new();
    for &r in &radii {
        let (cap, mu) = solver.capacity(r)?;
        sets.push(target.dilate(r));
        capacities.push(cap);
        measures.push(mu);
    }
    let nested = sets.windows(2).all(|w| w[1].is_subset_of(&w[0])) && sets.iter().all(|s| target.is_subset_of(s));
    let slack = solver.tol * capacities.first().copied().unwrap_or(0.0);
    let monotone = capacities.windows(2).all(|w| w[1] <= w[0] + slack);
    Ok(NestedCompacts {
        target: target.clone(),
        radii,
        sqrt_cap_sum: capacities.iter().map(|c| c.sqrt()).sum(),
        sets,
        capacities,
        measures,
        shortfall,
        verified: nested && monotone,
    })
}

/// One factor `C + log 1/(1 - w)` of the kernel product.
pub fn log_factor(c_const: f64, w: Complex64) -> Complex64 {
    c_const - (Complex64::new(1.0, 0.0) - w).ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecompReport {
    pub c_low: f64,
    pub c_high: f64,
    pub accepted: bool,
}

/// Range of `Re G(psi) / H(psi)`, `G = prod_j (C + log 1/(1 - e^{-i psi_j}))`,
/// over grid points with no coordinate on the singular cell.
pub fn verify_recomp(c_const: f64, grid: TorusGrid) -> Result<RecompReport> {
    if !(c_const > 0.0 && c_const.is_finite()) {
        return Err(invalid("C_const", format!("{c_const} must be positive")));
    }
    let m = grid.m();
    let factor: Vec<Complex64> = (0..m)
        .map(|p| log_factor(c_const, Complex64::from_polar(1.0, -grid.angle(p))))
        .collect();
    let h: Vec<f64> = (0..m).map(|p| h_value(grid.angle(p))).collect();
    let mut c_low = f64::INFINITY;
    let mut c_high = f64::NEG_INFINITY;
    for flat in 0..grid.len() {
        let idx = grid.unflatten(flat);
        if idx.contains(&0) {
            continue;
        }
        let g: Complex64 = idx.iter().map(|&p| factor[p]).product();
        let hh: f64 = idx.iter().map(|&p| h[p]).product();
        let ratio = g.re / hh;
        c_low = c_low.min(ratio);
        c_high = c_high.max(ratio);
    }
    Ok(RecompReport {
        c_low,
        c_high,
        accepted: c_low > 0.0,
    })
}

/// Coefficients of `sum_j f_j` together with the measures that define them.
#[derive(Debug, Clone, PartialEq)]
pub struct LogKernelFunction {
    pub coeffs: CoeffArray,
    pub source_measures: Vec<GridMeasure>,
    pub c_const: f64,
    pub capacities: Vec<f64>,
    /// `||f_j||_D^2` for each component.
    pub component_norms_sq: Vec<f64>,
}

/// Sidecar written next to the coefficient file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstructionSidecar {
    #[serde(rename = "J")]
    pub levels: usize,
    #[serde(rename = "C_const")]
    pub c_const: f64,
    pub capacities: Vec<f64>,
    pub sqrt_cap_sum: f64,
}

impl LogKernelFunction {
    pub fn sidecar(&self) -> ConstructionSidecar {
        ConstructionSidecar {
            levels: self.source_measures.len(),
            c_const: self.c_const,
            capacities: self.capacities.clone(),
            sqrt_cap_sum: self.capacities.iter().map(|c| c.sqrt()).sum(),
        }
    }

    /// Coefficients rebuilt from the stored measures.
    pub fn recompute(&self) -> Result<CoeffArray> {
        let mut out: Option<CoeffArray> = None;
        for mu in &self.source_measures {
            let f = component_coeffs(mu, self.c_const, self.coeffs.shape())?;
            out = Some(match out {
                None => f,
                Some(acc) => acc.add(&f)?,
            });
        }
        out.ok_or_else(|| Error::Precondition("no source measures".into()))
    }

    /// Coefficients of `f_j` alone (zero-based `j`).
    pub fn component(&self, j: usize) -> Result<CoeffArray> {
        let mu = self
            .source_measures
            .get(j)
            .ok_or_else(|| invalid("j", format!("component {j} out of range")))?;
        component_coeffs(mu, self.c_const, self.coeffs.shape())
    }

    /// `||f_j||_D^2 / C(F_j)` for each component.
    pub fn norm_ratios(&self) -> Vec<f64> {
        self.component_norms_sq
            .iter()
            .zip(&self.capacities)
            .map(|(n, c)| n / c)
            .collect()
    }
}

/// `a_alpha = prod_k g(alpha_k) mu^(alpha)` with `g(0) = C`, `g(k) = 1/k` and
/// `mu^(alpha) = sum_p w_p e^{-i (alpha, theta_p)}`, periodic in `alpha` with
/// period `m`.
pub fn component_coeffs(mu: &GridMeasure, c_const: f64, shape: &[usize]) -> Result<CoeffArray> {
    let grid = mu.grid();
    if shape.len() != grid.n() {
        return Err(invalid("shape", format!("expected {} axes, found {}", grid.n(), shape.len())));
    }
    let mut spectrum: Vec<Complex64> = mu.weights().iter().map(|&w| Complex64::new(w, 0.0)).collect();
    NdFft::new(grid.n(), grid.m()).forward(&mut spectrum);
    let m = grid.m();
    let g = |k: usize| if k == 0 { c_const } else { 1.0 / k as f64 };
    let mut wrapped = vec![0; grid.n()];
    CoeffArray::from_fn(shape.to_vec(), 1, |alpha, _| {
        for (slot, &a) in wrapped.iter_mut().zip(alpha) {
            *slot = a % m;
        }
        let mult: f64 = alpha.iter().map(|&a| g(a)).product();
        spectrum[grid.flatten(&wrapped)] * mult
    })
}

/// `f = sum_j f_j` over the chain, truncated to `shape`.
pub fn divergent_function(chain: &NestedCompacts, c_const: f64, shape: &[usize]) -> Result<LogKernelFunction> {
    if chain.shortfall {
        return Err(Error::Precondition(
            "nested chain fell short of the capacity budget; the target has positive capacity".into(),
        ));
    }
    if chain.measures.is_empty() {
        return Err(Error::Precondition("nested chain is empty".into()));
    }
    let recomp = verify_recomp(c_const, chain.target.grid())?;
    if !recomp.accepted {
        return Err(Error::Precondition(format!(
            "C_const = {c_const} rejected: Re G / H reaches {} <= 0",
            recomp.c_low
        )));
    }
    let mut total: Option<CoeffArray> = None;
    let mut component_norms_sq = Vec::new();
    for mu in &chain.measures {
        let f = component_coeffs(mu, c_const, shape)?;
        component_norms_sq.push(f.dirichlet_norm_sq());
        total = Some(match total {
            None => f,
            Some(acc) => acc.add(&f)?,
        });
    }
    Ok(LogKernelFunction {
        coeffs: total.expect("chain is nonempty"),
        source_measures: chain.measures.clone(),
        c_const,
        capacities: chain.capacities.clone(),
        component_norms_sq,
    })
}

/// Abel means along the diagonal `z = (t e^{i theta_1}, ..., t e^{i theta_n})`.
pub fn radial_trace(f: &CoeffArray, theta: &[f64], radii: &[f64]) -> Result<Vec<Vec<Complex64>>> {
    radii
        .iter()
        .map(|&t| abel_mean(f, &vec![t; f.n()], theta))
        .collect()
}

/// Half-width of the excluded neighbourhood of `theta_1 = 0`.
pub const LOCALIZATION_EPS: f64 = 0.3;
/// Width of the cosine taper of the bump.
pub const TAPER: f64 = 0.1;
/// Number of stored terms of the second factor.
pub const SECOND_FACTOR_TERMS: usize = 1 << 17;
/// Exponent of the logarithm in the second factor's coefficients.
pub const SECOND_FACTOR_LOG_POWER: f64 = 0.6;
pub const LOCALIZATION_GAP: f64 = 0.1;
pub const APPROACH_RADII: [f64; 3] = [0.9, 0.99, 0.999];

/// Flat-top bump: 1 on `[pi/2 + TAPER, 3pi/2 - TAPER]`, cosine tapers to 0 at
/// `pi/2` and `3pi/2`, and 0 elsewhere on `[0, 2pi)`.
pub fn bump(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    let (a, b) = (PI / 2.0, 3.0 * PI / 2.0);
    if t <= a || t >= b {
        0.0
    } else if t < a + TAPER {
        0.5 * (1.0 - (PI * (t - a) / TAPER).cos())
    } else if t > b - TAPER {
        0.5 * (1.0 - (PI * (b - t) / TAPER).cos())
    } else {
        1.0
    }
}

/// `a_k = 1 / ((k + 2) log^{0.6}(k + 2))`: Dirichlet norm finite, and
/// `sum a_k` diverges, so the Abel means at `theta = 0` grow without bound.
pub fn second_factor_coeff(k: usize) -> f64 {
    let x = (k + 2) as f64;
    1.0 / (x * x.ln().powf(SECOND_FACTOR_LOG_POWER))
}

/// Poisson integral `(1/2pi) int bump(t) P_r(-t) dt` at angle 0.
pub fn bump_poisson(r: f64) -> f64 {
    let kernel = |t: f64| bump(t) * (1.0 - r * r) / (1.0 - 2.0 * r * t.cos() + r * r);
    let (a, b) = (PI / 2.0, 3.0 * PI / 2.0);
    let pieces = [(a, a + TAPER), (a + TAPER, b - TAPER), (b - TAPER, b)];
    pieces
        .iter()
        .map(|&(lo, hi)| quadrature::integrate(kernel, lo, hi, 32, 8))
        .sum::<f64>()
        / TAU
}

/// Same quantity from the discrete Fourier coefficients of `m` samples.
pub fn bump_poisson_spectral(r: f64, m: usize) -> f64 {
    let samples: Vec<f64> = (0..m).map(|p| bump(TAU * p as f64 / m as f64)).collect();
    let spec = crate::fft::dft_real(&samples);
    let mut acc = spec[0].re;
    for k in 1..m / 2 {
        // real samples: c_{-k} = conj(c_k)
        acc += 2.0 * spec[k].re * r.powi(k as i32);
    }
    acc / m as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalizationReport {
    pub m: usize,
    pub epsilon: f64,
    /// Every sample of `f` on the `m x m` grid with `|theta_1| <= epsilon` is 0.
    pub vanishes_near_zero: bool,
    pub radii: Vec<f64>,
    /// Poisson integral of the bump at angle 0, by quadrature.
    pub bump_trace: Vec<f64>,
    /// The same from the sampled Fourier coefficients.
    pub bump_trace_spectral: Vec<f64>,
    /// Abel means of the second factor at angle 0.
    pub series_trace: Vec<f64>,
    /// `trace[i][j] = P[f](r_i, r_j; 0)`.
    pub trace: Vec<Vec<f64>>,
    pub oscillation: f64,
    pub gap: f64,
    pub fails_to_localize: bool,
}

/// `f(theta) = bump(theta_1) g(theta_2)` vanishes near `theta_1 = 0`, yet its
/// bi-Poisson integral at the origin direction oscillates as `r -> (1, 1)`
/// because the second factor's Abel means blow up while the first decays.
pub fn localization_demo(m: usize) -> Result<LocalizationReport> {
    if m < 8 || !m.is_power_of_two() {
        return Err(invalid("m", format!("{m} must be a power of two >= 8")));
    }
    let vanishes_near_zero = (0..m).all(|p| {
        let t = TAU * p as f64 / m as f64;
        let near = t.min(TAU - t) <= LOCALIZATION_EPS;
        !near || bump(t) == 0.0
    });
    let radii = APPROACH_RADII.to_vec();
    let bump_trace: Vec<f64> = radii.iter().map(|&r| bump_poisson(r)).collect();
    let bump_trace_spectral: Vec<f64> = radii.iter().map(|&r| bump_poisson_spectral(r, m)).collect();
    let series = CoeffArray::from_fn(vec![SECOND_FACTOR_TERMS], 1, |a, _| Complex64::new(second_factor_coeff(a[0]), 0.0))?;
    let series_trace: Vec<f64> = radii
        .iter()
        .map(|&r| abel_mean(&series, &[r], &[0.0]).map(|v| v[0].re))
        .collect::<Result<_>>()?;
    let trace: Vec<Vec<f64>> = bump_trace
        .iter()
        .map(|p1| series_trace.iter().map(|p2| p1 * p2).collect())
        .collect();
    let flat = trace.iter().flatten();
    let hi = flat.clone().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = flat.cloned().fold(f64::INFINITY, f64::min);
    let oscillation = hi - lo;
    Ok(LocalizationReport {
        m,
        epsilon: LOCALIZATION_EPS,
        vanishes_near_zero,
        radii,
        bump_trace,
        bump_trace_spectral,
        series_trace,
        trace,
        oscillation,
        gap: LOCALIZATION_GAP,
        fails_to_localize: vanishes_near_zero && oscillation >= LOCALIZATION_GAP,
    })
}
