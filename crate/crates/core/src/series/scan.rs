use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{vec_norm, CoeffArray};
use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Converged,
    Diverged,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Converged => "converged",
            Verdict::Diverged => "diverged",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

/// Every rectangular partial sum `S_N f(theta)`, `N <= N_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummationScan {
    pub theta: Vec<f64>,
    pub n_max: Vec<usize>,
    /// `max_{N <= N_max} ||S_N f(theta)||`.
    pub sup_norm: f64,
    pub final_value: Vec<Complex64>,
    /// Diameter of `{S_N : ceil(0.9 N_max) <= N <= N_max}`.
    pub oscillation_tail: f64,
    /// Maxima over the three outermost dyadic shells, outermost first.
    pub shell_maxima: Vec<f64>,
    pub tol: f64,
    /// `10 ||f||_D`: the sup norm must exceed this for a divergence verdict.
    pub blowup_threshold: f64,
    pub verdict: Verdict,
}

/// Partial sums `S_N` for all `N <= n_max`, row-major in `N` with the `d`
/// components innermost: phase-weighted coefficients followed by an inclusive
/// prefix sum along every axis.
pub fn partial_sum_table(f: &CoeffArray, theta: &[f64], n_max: &[usize]) -> Result<Vec<Complex64>> {
    f.check_index("N_max", n_max)?;
    f.check_point("theta", theta)?;
    let d = f.d();
    let dims: Vec<usize> = n_max.iter().map(|&k| k + 1).collect();
    let total: usize = dims.iter().product();
    let phase: Vec<Vec<Complex64>> = dims
        .iter()
        .zip(theta)
        .map(|(&len, &t)| (0..len).map(|k| Complex64::from_polar(1.0, k as f64 * t)).collect())
        .collect();
    let mut table = vec![Complex64::default(); total * d];
    let mut alpha = vec![0usize; dims.len()];
    for flat in 0..total {
        let mut rem = flat;
        for (slot, &len) in alpha.iter_mut().zip(&dims).rev() {
            *slot = rem % len;
            rem /= len;
        }
        let w: Complex64 = alpha.iter().enumerate().map(|(j, &k)| phase[j][k]).product();
        let src = f.get(&alpha);
        for c in 0..d {
            table[flat * d + c] = w * src[c];
        }
    }
    for axis in 0..dims.len() {
        let inner: usize = dims[axis + 1..].iter().product::<usize>() * d;
        let len = dims[axis];
        table.par_chunks_mut(len * inner).for_each(|block| {
            for k in 1..len {
                let (done, rest) = block.split_at_mut(k * inner);
                let prev = &done[(k - 1) * inner..];
                for (x, p) in rest[..inner].iter_mut().zip(prev) {
                    *x += p;
                }
            }
        });
    }
    Ok(table)
}

/// Scan all rectangles `N <= n_max` at `theta`.
///
/// Verdicts: `converged` when the tail oscillation is below `tol`; `diverged`
/// when the sup norm exceeds `10 ||f||_D` and the shell maxima strictly grow
/// outward across the three outermost dyadic shells; otherwise
/// `inconclusive`. Shell `t` holds the rectangles `N <= floor(N_max / 2^t)`
/// that are not `<= floor(N_max / 2^{t+1})`.
pub fn pringsheim_scan(f: &CoeffArray, theta: &[f64], n_max: &[usize], tol: f64) -> Result<SummationScan> {
    if !(tol > 0.0) {
        return Err(invalid("tol", format!("{tol} must be positive")));
    }
    let table = partial_sum_table(f, theta, n_max)?;
    let d = f.d();
    let dims: Vec<usize> = n_max.iter().map(|&k| k + 1).collect();
    let total: usize = dims.iter().product();
    let norms: Vec<f64> = table.chunks(d).map(vec_norm).collect();
    let sup_norm = norms.iter().cloned().fold(0.0, f64::max);
    let final_value = table[(total - 1) * d..].to_vec();

    let decile: Vec<usize> = n_max.iter().map(|&k| (9 * k).div_ceil(10)).collect();
    let mut tail_points: Vec<&[Complex64]> = Vec::new();
    let mut shell_maxima = vec![0.0f64; 3];
    let mut idx = vec![0usize; dims.len()];
    for flat in 0..total {
        let mut rem = flat;
        for (slot, &len) in idx.iter_mut().zip(&dims).rev() {
            *slot = rem % len;
            rem /= len;
        }
        if idx.iter().zip(&decile).all(|(&k, &lo)| k >= lo) {
            tail_points.push(&table[flat * d..(flat + 1) * d]);
        }
        let inside = |t: u32| idx.iter().zip(n_max).all(|(&k, &nm)| k <= nm >> t);
        if let Some(t) = (0..3u32).find(|&t| inside(t) && !inside(t + 1)) {
            let m = &mut shell_maxima[t as usize];
            *m = m.max(norms[flat]);
        }
    }
    let oscillation_tail = diameter(&tail_points);
    let blowup_threshold = 10.0 * f.dirichlet_norm();
    let growing = shell_maxima[2] < shell_maxima[1] && shell_maxima[1] < shell_maxima[0];
    let verdict = if oscillation_tail < tol {
        Verdict::Converged
    } else if sup_norm > blowup_threshold && growing {
        Verdict::Diverged
    } else {
        Verdict::Inconclusive
    };
    Ok(SummationScan {
        theta: theta.to_vec(),
        n_max: n_max.to_vec(),
        sup_norm,
        final_value,
        oscillation_tail,
        shell_maxima,
        tol,
        blowup_threshold,
        verdict,
    })
}

/// Exact diameter of a point set in `C^d`. For `d = 1` the farthest pair lies
/// on the convex hull.
fn diameter(points: &[&[Complex64]]) -> f64 {
    if points.len() < 2 {
        return 0.0;
    }
    if points[0].len() == 1 {
        let hull = convex_hull(points.iter().map(|p| (p[0].re, p[0].im)).collect());
        let mut best: f64 = 0.0;
        for (i, a) in hull.iter().enumerate() {
            for b in &hull[i + 1..] {
                best = best.max((a.0 - b.0).hypot(a.1 - b.1));
            }
        }
        return best;
    }
    (0..points.len())
        .into_par_iter()
        .map(|i| {
            points[i + 1..]
                .iter()
                .map(|q| {
                    points[i]
                        .iter()
                        .zip(q.iter())
                        .map(|(a, b)| (a - b).norm_sqr())
                        .sum::<f64>()
                })
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max)
        .sqrt()
}

/// Monotone chain; collinear points are dropped.
fn convex_hull(mut pts: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0);
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &(f64, f64)>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

/// Abel mean written through partial sums.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartsSum {
    pub value: Vec<Complex64>,
    /// Bound on the omitted terms, `sup_N ||S_N|| (1 - prod_j (1 - r_j^{M_j + 1}))`.
    pub tail_bound: f64,
    pub sup_partial: f64,
}

/// `prod_j (1 - r_j) sum_{N <= M} r^N S_N f(theta)`.
///
/// Partial sums saturate at the last stored index, so along an axis with
/// `M_j = shape_j - 1` the geometric tail `sum_{N_j >= M_j} r^{N_j}` is folded
/// into the last weight exactly; other axes contribute to `tail_bound`.
pub fn abel_by_parts(f: &CoeffArray, r: &[f64], theta: &[f64], m: &[usize]) -> Result<PartsSum> {
    f.check_point("r", r)?;
    if let Some(bad) = r.iter().find(|v| !(**v >= 0.0 && **v < 1.0)) {
        return Err(invalid("r", format!("radius {bad} must lie in [0, 1)")));
    }
    f.check_index("M", m)?;
    let last: Vec<usize> = f.shape().iter().map(|&s| s - 1).collect();
    let table = partial_sum_table(f, theta, &last)?;
    let d = f.d();
    let sup_partial = table.chunks(d).map(vec_norm).fold(0.0, f64::max);
    let weights: Vec<Vec<f64>> = (0..f.n())
        .map(|j| {
            (0..=m[j])
                .map(|k| {
                    let rk = r[j].powi(k as i32);
                    if k == last[j] {
                        rk
                    } else {
                        (1.0 - r[j]) * rk
                    }
                })
                .collect()
        })
        .collect();
    let mut value = vec![Complex64::default(); d];
    let mut idx = vec![0usize; f.n()];
    for flat in 0..f.num_indices() {
        let mut rem = flat;
        for (slot, &len) in idx.iter_mut().zip(f.shape()).rev() {
            *slot = rem % len;
            rem /= len;
        }
        if idx.iter().zip(m).any(|(&k, &mj)| k > mj) {
            continue;
        }
        let w: f64 = idx.iter().enumerate().map(|(j, &k)| weights[j][k]).product();
        for c in 0..d {
            value[c] += w * table[flat * d + c];
        }
    }
    let kept: f64 = (0..f.n())
        .map(|j| if m[j] == last[j] { 1.0 } else { 1.0 - r[j].powi(m[j] as i32 + 1) })
        .product();
    Ok(PartsSum {
        value,
        tail_bound: sup_partial * (1.0 - kept),
        sup_partial,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::{abel_mean, rect_partial_sum};

    fn sample(shape: Vec<usize>, d: usize) -> CoeffArray {
        CoeffArray::from_fn(shape, d, |al, c| {
            let s: usize = al.iter().enumerate().map(|(j, &a)| (j + 3) * a).sum::<usize>() + 5 * c;
            let decay: f64 = al.iter().map(|&a| (a + 1) as f64).product();
            Complex64::new((s as f64 * 0.7).sin(), (s as f64 * 0.3).cos()) / decay
        })
        .unwrap()
    }

    #[test]
    fn table_matches_direct_partial_sums() {
        let f = sample(vec![6, 5, 4], 2);
        let theta = [0.4, 1.7, -0.6];
        let n_max = [5, 3, 2];
        let table = partial_sum_table(&f, &theta, &n_max).unwrap();
        for flat in 0..6 * 4 * 3 {
            let n = [flat / 12, (flat / 3) % 4, flat % 3];
            let want = rect_partial_sum(&f, &n, &theta).unwrap();
            for c in 0..2 {
                assert!((table[flat * 2 + c] - want[c]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn polynomial_scan_converges_exactly() {
        let f = sample(vec![9, 9], 1);
        let mut padded = CoeffArray::zeros(vec![40, 40], 1).unwrap();
        for i in 0..9 {
            for j in 0..9 {
                padded.set(&[i, j], f.get(&[i, j]));
            }
        }
        let s = pringsheim_scan(&padded, &[0.3, 2.1], &[39, 39], 1e-12).unwrap();
        assert_eq!(s.verdict, Verdict::Converged);
        assert_eq!(s.oscillation_tail, 0.0);
        assert!(s.sup_norm >= vec_norm(&s.final_value));
    }

    #[test]
    fn diameter_matches_brute_force() {
        let pts: Vec<Vec<Complex64>> = (0..200)
            .map(|i| vec![Complex64::new((i as f64 * 1.3).sin() * (i % 7) as f64, (i as f64 * 0.37).cos())])
            .collect();
        let refs: Vec<&[Complex64]> = pts.iter().map(|v| v.as_slice()).collect();
        let mut brute: f64 = 0.0;
        for a in &pts {
            for b in &pts {
                brute = brute.max((a[0] - b[0]).norm());
            }
        }
        assert!((diameter(&refs) - brute).abs() < 1e-12);
    }

    #[test]
    fn parts_form_reproduces_abel_mean() {
        let f = sample(vec![30, 50], 1);
        let r = [0.9, 0.99];
        let theta = [0.8, -2.0];
        let direct = abel_mean(&f, &r, &theta).unwrap()[0];
        let full = abel_by_parts(&f, &r, &theta, &[29, 49]).unwrap();
        assert_eq!(full.tail_bound, 0.0);
        assert!((full.value[0] - direct).norm() < 1e-12);
        let cut = abel_by_parts(&f, &r, &theta, &[20, 30]).unwrap();
        assert!(cut.tail_bound > 0.0);
        assert!((cut.value[0] - direct).norm() <= cut.tail_bound);
    }
}
