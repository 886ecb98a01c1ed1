use num_complex::Complex64;

use super::CoeffArray;
use crate::error::{invalid, Error, Result};

/// `sup |S_N f - P_{1-1/N} f| <= 2 ||f||_D` along one axis: Cauchy-Schwarz
/// against the Dirichlet weights bounds each of the head
/// `sum_{k<=N} (1 - r^k) a_k` and tail `sum_{k>N} r^k a_k` by `||f||_D`.
pub const FEJER_GAP_CONSTANT: f64 = 2.0;

/// `sum_alpha a_alpha prod_j w_j[alpha_j]`; weights shorter than the axis are
/// zero-extended. Contracts the leading axis repeatedly.
pub(crate) fn contract(f: &CoeffArray, weights: &[Vec<Complex64>]) -> Vec<Complex64> {
    debug_assert_eq!(weights.len(), f.n());
    let mut data = f.values().to_vec();
    for (axis, w) in weights.iter().enumerate() {
        let lead = f.shape()[axis];
        let rest = data.len() / lead;
        let mut next = vec![Complex64::default(); rest];
        for (k, &wk) in w.iter().enumerate().take(lead) {
            if wk == Complex64::default() {
                continue;
            }
            for (acc, &x) in next.iter_mut().zip(&data[k * rest..(k + 1) * rest]) {
                *acc += wk * x;
            }
        }
        data = next;
    }
    data
}

/// Evaluate `sum_alpha a_alpha prod_j M_j[p_j][alpha_j]` for every node tuple
/// `p`. Output layout: component `c` outermost, then `p` row-major.
pub(crate) fn contract_matrices(f: &CoeffArray, mats: &[Vec<Vec<Complex64>>]) -> Vec<Complex64> {
    let mut data = f.values().to_vec();
    for (axis, mat) in mats.iter().enumerate() {
        let lead = f.shape()[axis];
        let rest = data.len() / lead;
        let nodes = mat.len();
        // [lead, rest] -> [rest, nodes]
        let mut next = vec![Complex64::default(); rest * nodes];
        for (p, row) in mat.iter().enumerate() {
            for (k, &wk) in row.iter().enumerate().take(lead) {
                let src = &data[k * rest..(k + 1) * rest];
                for (r, &x) in src.iter().enumerate() {
                    next[r * nodes + p] += wk * x;
                }
            }
        }
        data = next;
    }
    data
}

fn phases(len: usize, theta: f64) -> Vec<Complex64> {
    (0..len).map(|k| Complex64::from_polar(1.0, k as f64 * theta)).collect()
}

/// `S_N f(theta) = sum_{alpha <= N} a_alpha e^{i(alpha, theta)}`.
pub fn rect_partial_sum(f: &CoeffArray, n_max: &[usize], theta: &[f64]) -> Result<Vec<Complex64>> {
    f.check_index("N", n_max)?;
    f.check_point("theta", theta)?;
    let w: Vec<Vec<Complex64>> = n_max.iter().zip(theta).map(|(&n, &t)| phases(n + 1, t)).collect();
    Ok(contract(f, &w))
}

fn check_radii(f: &CoeffArray, r: &[f64]) -> Result<()> {
    f.check_point("r", r)?;
    if let Some(bad) = r.iter().find(|v| !(**v >= 0.0 && **v < 1.0)) {
        return Err(invalid("r", format!("radius {bad} must lie in [0, 1)")));
    }
    Ok(())
}

/// `f_r(theta) = sum_alpha a_alpha r^alpha e^{i(alpha, theta)}`.
pub fn abel_mean(f: &CoeffArray, r: &[f64], theta: &[f64]) -> Result<Vec<Complex64>> {
    check_radii(f, r)?;
    f.check_point("theta", theta)?;
    let w: Vec<Vec<Complex64>> = f
        .shape()
        .iter()
        .zip(r.iter().zip(theta))
        .map(|(&len, (&rj, &tj))| (0..len).map(|k| Complex64::from_polar(rj.powi(k as i32), k as f64 * tj)).collect())
        .collect();
    Ok(contract(f, &w))
}

/// Size of the stored tail scale `max_j r_j^{N_j} * sum ||a_alpha||`, reported
/// when it exceeds `1e-12`: the Abel weights at the truncation edge are not
/// negligible, so the truncated array may misrepresent an untruncated series.
pub fn abel_truncation_bound(f: &CoeffArray, r: &[f64]) -> Result<Option<f64>> {
    check_radii(f, r)?;
    let edge = f
        .shape()
        .iter()
        .zip(r)
        .map(|(&len, &rj)| rj.powi((len - 1) as i32))
        .fold(0.0, f64::max);
    let bound = edge * f.l1_norm();
    Ok((bound > 1e-12).then_some(bound))
}

/// Average of `f` over the box `prod_j [theta_j - h_j, theta_j + h_j]`,
/// realized by the multipliers `sinc(alpha_j h_j)` with `sinc(0) = 1` exactly.
pub fn strong_diff_mean(f: &CoeffArray, h: &[f64], theta: &[f64]) -> Result<Vec<Complex64>> {
    f.check_point("h", h)?;
    f.check_point("theta", theta)?;
    if let Some(bad) = h.iter().find(|v| !(**v > 0.0 && **v < std::f64::consts::PI)) {
        return Err(invalid("h", format!("window {bad} must lie in (0, pi)")));
    }
    let w: Vec<Vec<Complex64>> = f
        .shape()
        .iter()
        .zip(h.iter().zip(theta))
        .map(|(&len, (&hj, &tj))| {
            (0..len)
                .map(|k| {
                    let x = k as f64 * hj;
                    let s = if k == 0 { 1.0 } else { x.sin() / x };
                    Complex64::from_polar(1.0, k as f64 * tj) * s
                })
                .collect()
        })
        .collect();
    Ok(contract(f, &w))
}

/// Weights `k r^{k-1} e^{ik theta}` of the radial derivative along one axis.
pub(crate) fn derivative_weights(len: usize, r: f64, theta: f64) -> Vec<Complex64> {
    (0..len)
        .map(|k| {
            if k == 0 {
                Complex64::default()
            } else {
                Complex64::from_polar(k as f64 * r.powi(k as i32 - 1), k as f64 * theta)
            }
        })
        .collect()
}

/// `d_{r_1} ... d_{r_n} f_r(theta)`.
pub fn radial_derivative(f: &CoeffArray, r: &[f64], theta: &[f64]) -> Result<Vec<Complex64>> {
    check_radii(f, r)?;
    f.check_point("theta", theta)?;
    let w: Vec<Vec<Complex64>> = f
        .shape()
        .iter()
        .zip(r.iter().zip(theta))
        .map(|(&len, (&rj, &tj))| derivative_weights(len, rj, tj))
        .collect();
    Ok(contract(f, &w))
}

/// `||S_N f - P_{1-1/N} f||` at `theta` along `axis`, with the coefficients of
/// the remaining axes (and the `d` components) treated as one vector in the
/// Dirichlet space of those axes.
pub fn fejer_gap(f: &CoeffArray, n: usize, theta: f64, axis: usize) -> Result<f64> {
    if axis >= f.n() {
        return Err(Error::OutOfRange {
            name: "axis",
            reason: format!("axis {axis} out of range for dimension {}", f.n()),
        });
    }
    if n == 0 {
        return Err(invalid("N", "must be a positive integer"));
    }
    let len = f.shape()[axis];
    if n >= len {
        return Err(Error::OutOfRange {
            name: "N",
            reason: format!("{n} exceeds the largest index {} on axis {axis}", len - 1),
        });
    }
    let r = 1.0 - 1.0 / n as f64;
    let w: Vec<Complex64> = (0..len)
        .map(|k| {
            let head = if k <= n { 1.0 } else { 0.0 };
            Complex64::from_polar(head - r.powi(k as i32), k as f64 * theta)
        })
        .collect();
    let d = f.d();
    let shape = f.shape();
    let inner: usize = shape[axis + 1..].iter().product();
    let outer: usize = shape[..axis].iter().product();
    let mut acc = vec![Complex64::default(); outer * inner * d];
    let values = f.values();
    for o in 0..outer {
        for (k, &wk) in w.iter().enumerate() {
            let src = &values[((o * len + k) * inner) * d..((o * len + k + 1) * inner) * d];
            let dst = &mut acc[o * inner * d..(o + 1) * inner * d];
            for (a, &x) in dst.iter_mut().zip(src) {
                *a += wk * x;
            }
        }
    }
    let complement: Vec<usize> = shape
        .iter()
        .enumerate()
        .filter_map(|(j, &s)| (j != axis).then_some(s))
        .collect();
    let mut norm_sq = 0.0;
    for (flat, chunk) in acc.chunks(d).enumerate() {
        let mut rem = flat;
        let mut weight = 1.0;
        for &s in complement.iter().rev() {
            weight *= (rem % s + 1) as f64;
            rem /= s;
        }
        norm_sq += weight * chunk.iter().map(|z| z.norm_sqr()).sum::<f64>();
    }
    Ok(norm_sq.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn naive(f: &CoeffArray, weight: impl Fn(usize, usize) -> Complex64) -> Vec<Complex64> {
        let mut out = vec![Complex64::default(); f.d()];
        for flat in 0..f.num_indices() {
            let alpha = f.unflatten(flat);
            let w: Complex64 = alpha.iter().enumerate().map(|(j, &k)| weight(j, k)).product();
            for (c, o) in out.iter_mut().enumerate() {
                *o += w * f.get(&alpha)[c];
            }
        }
        out
    }

    fn sample(shape: Vec<usize>, d: usize) -> CoeffArray {
        CoeffArray::from_fn(shape, d, |al, c| {
            let s: usize = al.iter().enumerate().map(|(j, &a)| (j + 2) * a).sum::<usize>() + 3 * c;
            Complex64::new((s as f64 * 0.7).sin(), (s as f64 * 0.3).cos())
        })
        .unwrap()
    }

    #[test]
    fn partial_sum_matches_direct_loop() {
        let f = sample(vec![5, 6, 3], 2);
        let theta = [0.3, -1.1, 2.0];
        let n = [3, 5, 1];
        let got = rect_partial_sum(&f, &n, &theta).unwrap();
        let want = naive(&f, |j, k| if k <= n[j] { Complex64::from_polar(1.0, k as f64 * theta[j]) } else { Complex64::default() });
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).norm() < 1e-12);
        }
        assert!(rect_partial_sum(&f, &[5, 0, 0], &theta).is_err());
    }

    #[test]
    fn trivial_cases() {
        let mut f = CoeffArray::zeros(vec![4, 4], 1).unwrap();
        f.set(&[0, 0], &[Complex64::new(2.5, -1.0)]);
        for n in [[0, 0], [3, 1], [2, 3]] {
            assert_eq!(rect_partial_sum(&f, &n, &[0.4, 1.3]).unwrap()[0], Complex64::new(2.5, -1.0));
        }
        assert_eq!(abel_mean(&f, &[0.0, 0.0], &[1.0, 2.0]).unwrap()[0], Complex64::new(2.5, -1.0));
        assert_eq!(strong_diff_mean(&f, &[0.5, 0.1], &[1.0, 2.0]).unwrap()[0], Complex64::new(2.5, -1.0));
        assert_eq!(fejer_gap(&f, 2, 0.7, 0).unwrap(), 0.0);

        let mut g = CoeffArray::zeros(vec![4, 4], 1).unwrap();
        g.set(&[1, 1], &[Complex64::new(1.0, 0.0)]);
        for k in 0..4 {
            assert_eq!(rect_partial_sum(&g, &[0, k], &[0.2, 0.9]).unwrap()[0], Complex64::default());
        }
        let r = [0.3, 0.8];
        let th = [0.2, 0.9];
        let d = radial_derivative(&g, &r, &th).unwrap()[0];
        assert!((d - Complex64::from_polar(1.0, 1.1)).norm() < 1e-15);
        // no coefficient beyond alpha_1 = 0 along axis 1: derivative vanishes
        assert_eq!(radial_derivative(&f, &r, &th).unwrap()[0], Complex64::default());
    }

    #[test]
    fn parameter_validation() {
        let f = sample(vec![4, 4], 1);
        assert!(abel_mean(&f, &[1.0, 0.5], &[0.0, 0.0]).is_err());
        assert!(abel_mean(&f, &[0.5], &[0.0, 0.0]).is_err());
        assert!(strong_diff_mean(&f, &[PI, 0.5], &[0.0, 0.0]).is_err());
        assert!(strong_diff_mean(&f, &[0.0, 0.5], &[0.0, 0.0]).is_err());
        assert!(fejer_gap(&f, 0, 0.0, 0).is_err());
        assert!(fejer_gap(&f, 4, 0.0, 0).is_err());
        assert!(fejer_gap(&f, 2, 0.0, 2).is_err());
    }

    #[test]
    fn radial_derivative_matches_mixed_difference() {
        let f = sample(vec![12, 9], 1);
        let r = [0.6, 0.45];
        let th = [0.4, 2.2];
        let e = 1e-4;
        let a = |x: f64, y: f64| abel_mean(&f, &[x, y], &th).unwrap()[0];
        let fd = (a(r[0] + e, r[1] + e) - a(r[0] + e, r[1] - e) - a(r[0] - e, r[1] + e) + a(r[0] - e, r[1] - e)) / (4.0 * e * e);
        let d = radial_derivative(&f, &r, &th).unwrap()[0];
        assert!((fd - d).norm() / d.norm() < 1e-5, "{fd} vs {d}");
    }

    #[test]
    fn fejer_gap_matches_direct_evaluation() {
        let f = sample(vec![40, 3], 2);
        let n = 10;
        let theta = 0.9;
        let r = 1.0 - 1.0 / n as f64;
        // direct: S_N - P_r along axis 0 for every (beta, c), then weighted norm
        let mut norm_sq = 0.0;
        for b in 0..3 {
            for c in 0..2 {
                let mut s = Complex64::default();
                for k in 0..40 {
                    let a = f.get(&[k, b])[c] * Complex64::from_polar(1.0, k as f64 * theta);
                    if k <= n {
                        s += a;
                    }
                    s -= a * r.powi(k as i32);
                }
                norm_sq += (b + 1) as f64 * s.norm_sqr();
            }
        }
        let got = fejer_gap(&f, n, theta, 0).unwrap();
        assert!((got - norm_sq.sqrt()).abs() < 1e-12);
        assert!(got <= FEJER_GAP_CONSTANT * f.dirichlet_norm());
    }

    #[test]
    fn fejer_gap_decreases_for_power_decay() {
        let f = CoeffArray::from_fn(vec![20_001], 1, |al, _| Complex64::new(1.0 / ((al[0] + 1) as f64).powf(1.1), 0.0)).unwrap();
        let gaps: Vec<f64> = [100, 1000, 10_000].iter().map(|&n| fejer_gap(&f, n, 0.5, 0).unwrap()).collect();
        assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "{gaps:?}");
    }

    #[test]
    fn matrices_agree_with_single_contractions() {
        let f = sample(vec![6, 5], 2);
        let pts = [0.1, 0.5, 0.9];
        let mats: Vec<Vec<Vec<Complex64>>> = (0..2)
            .map(|j| pts.iter().map(|&r| derivative_weights(f.shape()[j], r, 0.3 * j as f64)).collect())
            .collect();
        let all = contract_matrices(&f, &mats);
        for (p0, &r0) in pts.iter().enumerate() {
            for (p1, &r1) in pts.iter().enumerate() {
                let v = radial_derivative(&f, &[r0, r1], &[0.0, 0.3]).unwrap();
                for c in 0..2 {
                    let z = all[c * 9 + p0 * 3 + p1];
                    assert!((z - v[c]).norm() < 1e-12);
                }
            }
        }
    }
}
