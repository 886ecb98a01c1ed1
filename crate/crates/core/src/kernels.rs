//! One-dimensional kernels of the half-power / logarithmic pair on the circle.
//!
//! * `b(t) = 3 + sum_{k>=1} cos(k t) / sqrt(k)` (no closed form, sampled by
//!   truncation),
//! * `h = b * b = 9 + (1/2) log 1/|1 - e^{it}|` (closed form, singular at 0),
//! * `b~(t) = sum_k c_k cos(k t)` with `c_k = binom(k - 1/2, k)`, and
//!   `h~ = b~ * b~`.
//!
//! Tensor products of these tables give the n-dimensional kernels `B` and `H`
//! used by [`crate::capacity`].

use std::f64::consts::{LN_2, PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::fft::dft_real;
use crate::quadrature;

/// Minimum of `h` on the circle, attained at `t = pi`.
pub const H_MIN: f64 = 9.0 - 0.5 * LN_2;

/// `c_k = binom(k - 1/2, k)` by the recurrence `c_k = c_{k-1} (k - 1/2) / k`.
pub fn binom_coeff_c(k: u64) -> f64 {
    (1..=k).fold(1.0, |c, j| c * (j as f64 - 0.5) / j as f64)
}

/// `c_0, ..., c_{k_max}`.
pub fn binom_coeffs(k_max: usize) -> Vec<f64> {
    let mut c = Vec::with_capacity(k_max + 1);
    c.push(1.0);
    for k in 1..=k_max {
        let prev = c[k - 1];
        c.push(prev * (k as f64 - 0.5) / k as f64);
    }
    c
}

/// `log 1/|1 - e^{it}| = -log |2 sin(t/2)|`, singular at multiples of 2pi.
pub fn log_kernel(theta: f64) -> f64 {
    -(2.0 * (0.5 * theta).sin()).abs().ln()
}

/// `h(t) = 9 + (1/2) log 1/|1 - e^{it}|`.
pub fn h_value(theta: f64) -> f64 {
    9.0 + 0.5 * log_kernel(theta)
}

/// Diagonal value that makes the grid mean of the sampled kernel exactly 9.
///
/// `prod_{p=1}^{m-1} 2 sin(pi p / m) = m`, so the off-diagonal samples sum to
/// `9 (m - 1) - (1/2) log m`.
pub fn h_diag_mean_preserving(m: usize) -> f64 {
    9.0 + 0.5 * (m as f64).ln()
}

/// Average of `h` over the cell `[-pi/m, pi/m]` under normalized measure.
///
/// Split `-log(2 sin(t/2)) = -log t - log(sin(t/2) / (t/2))`; the first part
/// integrates in closed form and the second is smooth.
pub fn h_cell_average(m: usize) -> f64 {
    let a = PI / m as f64;
    let singular = a - a * a.ln();
    let smooth = quadrature::integrate(
        |t| {
            let half = 0.5 * t;
            -(half.sin() / half).ln()
        },
        0.0,
        a,
        16,
        1,
    );
    9.0 + 0.5 * (singular + smooth) / a
}

fn check_resolution(m: usize) -> Result<()> {
    if m < 8 || !m.is_power_of_two() {
        return Err(invalid("m", format!("resolution {m} must be a power of two >= 8")));
    }
    Ok(())
}

/// Samples of `h` on the grid `t_p = 2 pi p / m`, with a regularized diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelTable {
    m: usize,
    /// `h[0]` holds the diagonal value, `h[p]` for `p != 0` the point samples.
    h: Vec<f64>,
    h_diag: f64,
    #[serde(rename = "K", default, skip_serializing_if = "Option::is_none")]
    truncation: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    b: Option<Vec<f64>>,
}

/// Sample `h` at resolution `m`.
pub fn sample_h(m: usize) -> Result<KernelTable> {
    check_resolution(m)?;
    let h_diag = h_diag_mean_preserving(m);
    let mut h: Vec<f64> = (0..m).map(|p| h_value(TAU * p as f64 / m as f64)).collect();
    h[0] = h_diag;
    // cosine parity holds exactly in index space
    for p in 1..m / 2 {
        h[m - p] = h[p];
    }
    Ok(KernelTable {
        m,
        h,
        h_diag,
        truncation: None,
        b: None,
    })
}

impl KernelTable {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn h_diag(&self) -> f64 {
        self.h_diag
    }

    /// Full sample row, diagonal in slot 0.
    pub fn h(&self) -> &[f64] {
        &self.h
    }

    pub fn truncation(&self) -> Option<usize> {
        self.truncation
    }

    pub fn b(&self) -> Option<&[f64]> {
        self.b.as_deref()
    }

    /// Attach truncated `b` samples with `K` terms.
    pub fn with_b(mut self, truncation: usize) -> Result<Self> {
        self.b = Some(sample_b_truncated(self.m, truncation)?);
        self.truncation = Some(truncation);
        Ok(self)
    }

    /// Eigenvalues of the circulant matrix `[h(p - q)]`, i.e. the DFT of the row.
    pub fn eigenvalues(&self) -> Vec<f64> {
        dft_real(&self.h).into_iter().map(|z| z.re).collect()
    }
}

/// `b[p] = 3 + sum_{k=1}^{K} cos(2 pi k p / m) / sqrt(k)`.
pub fn sample_b_truncated(m: usize, truncation: usize) -> Result<Vec<f64>> {
    check_resolution(m)?;
    if truncation == 0 || truncation > m / 2 {
        return Err(invalid(
            "K",
            format!("truncation {truncation} must lie in [1, m/2 = {}] to avoid aliasing", m / 2),
        ));
    }
    let mut b: Vec<f64> = (0..m)
        .map(|p| {
            3.0 + (1..=truncation)
                .map(|k| cos_grid(k * p, m) / (k as f64).sqrt())
                .sum::<f64>()
        })
        .collect();
    for p in 1..m / 2 {
        b[m - p] = b[p];
    }
    Ok(b)
}

/// `cos(2 pi j / m)` with the argument reduced in integer arithmetic.
fn cos_grid(j: usize, m: usize) -> f64 {
    (TAU * (j % m) as f64 / m as f64).cos()
}

/// Truncated series for `b~` and `h~` with rigorous tail bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TildeKernelTable {
    pub m: usize,
    #[serde(rename = "K")]
    pub truncation: usize,
    pub c_coeffs: Vec<f64>,
    pub tilde_b_samples: Vec<f64>,
    pub tilde_h_samples: Vec<f64>,
    /// Bound on `|sum_{k>K} (c_k^2 / 2) cos(k t)|` over grid points `p != 0`.
    pub tail_bound: f64,
    /// Bound on `|sum_{k>K} c_k cos(k t)|` over grid points `p != 0`.
    pub b_tail_bound: f64,
    /// Certified lower bound for `h~` on the grid.
    pub lower_bound: f64,
    /// Certified lower bound for `b~` on the grid.
    pub b_lower_bound: f64,
}

/// Sample `b~` and `h~` with `K` terms.
///
/// Tails use summation by parts: for decreasing `a_k -> 0`,
/// `|sum_{k>K} a_k cos(k t)| <= a_{K+1} / |sin(t/2)|`. At `t = 0` every tail
/// term is positive, so the truncated value is already a lower bound there.
pub fn tilde_h_series(m: usize, truncation: usize) -> Result<TildeKernelTable> {
    check_resolution(m)?;
    if truncation < 16 {
        return Err(invalid("K", format!("truncation {truncation} must be >= 16")));
    }
    let c = binom_coeffs(truncation + 1);
    let tilde_b: Vec<f64> = (0..m)
        .map(|p| (0..=truncation).map(|k| c[k] * cos_grid(k * p, m)).sum())
        .collect();
    let tilde_h: Vec<f64> = (0..m)
        .map(|p| {
            c[0] * c[0]
                + (1..=truncation)
                    .map(|k| 0.5 * c[k] * c[k] * cos_grid(k * p, m))
                    .sum::<f64>()
        })
        .collect();
    let c_next = c[truncation + 1];
    let lower = |samples: &[f64], a_next: f64| -> (f64, f64) {
        let mut worst = samples[0];
        let mut max_tail: f64 = 0.0;
        for (p, &v) in samples.iter().enumerate().skip(1) {
            let tail = a_next / (PI * p as f64 / m as f64).sin().abs();
            max_tail = max_tail.max(tail);
            worst = worst.min(v - tail);
        }
        (max_tail, worst)
    };
    let (tail_bound, lower_bound) = lower(&tilde_h, 0.5 * c_next * c_next);
    let (b_tail_bound, b_lower_bound) = lower(&tilde_b, c_next);
    let mut c_coeffs = c;
    c_coeffs.truncate(truncation + 1);
    Ok(TildeKernelTable {
        m,
        truncation,
        c_coeffs,
        tilde_b_samples: tilde_b,
        tilde_h_samples: tilde_h,
        tail_bound,
        b_tail_bound,
        lower_bound,
        b_lower_bound,
    })
}

/// Outcome of comparing the discrete autoconvolution `b * b` with `h`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BConvReport {
    pub m: usize,
    #[serde(rename = "K")]
    pub truncation: usize,
    /// Max relative deviation over points at cyclic distance >= 4 from 0.
    pub max_deviation: f64,
    pub symmetric: bool,
    pub convolution: Vec<f64>,
    /// `|b*b - h| / h` at every grid point.
    pub relative_deviation: Vec<f64>,
}

/// Points within this cyclic distance of the singularity are excluded.
pub const SINGULAR_EXCLUSION: usize = 4;

impl BConvReport {
    /// Max deviation over points `p = stride * q` with `q` at cyclic distance
    /// `>= SINGULAR_EXCLUSION` on the coarse grid of size `m / stride`.
    pub fn max_deviation_on_coarse(&self, stride: usize) -> f64 {
        let coarse = self.m / stride;
        (0..coarse)
            .filter(|&q| q.min(coarse - q) >= SINGULAR_EXCLUSION)
            .map(|q| self.relative_deviation[q * stride])
            .fold(0.0, f64::max)
    }
}

/// Circular autoconvolution of truncated `b` under normalized counting measure,
/// compared with the closed form of `h`.
pub fn verify_b_conv_h(m: usize, truncation: usize) -> Result<BConvReport> {
    let b = sample_b_truncated(m, truncation)?;
    let table = sample_h(m)?;
    let spectrum = dft_real(&b);
    let mut sq: Vec<Complex64> = spectrum.iter().map(|z| z * z).collect();
    let mut planner = rustfft::FftPlanner::new();
    planner.plan_fft_inverse(m).process(&mut sq);
    let scale = 1.0 / (m as f64 * m as f64);
    let convolution: Vec<f64> = sq.iter().map(|z| z.re * scale).collect();
    let relative_deviation: Vec<f64> = convolution
        .iter()
        .zip(table.h())
        .map(|(c, h)| (c - h).abs() / h)
        .collect();
    let max_deviation = (0..m)
        .filter(|&p| p.min(m - p) >= SINGULAR_EXCLUSION)
        .map(|p| relative_deviation[p])
        .fold(0.0, f64::max);
    let symmetric = (1..m / 2).all(|p| {
        let (x, y) = (convolution[p], convolution[m - p]);
        (x - y).abs() <= 1e-12 * x.abs().max(1.0)
    });
    Ok(BConvReport {
        m,
        truncation,
        max_deviation,
        symmetric,
        convolution,
        relative_deviation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn c_small_values() {
        assert_eq!(binom_coeff_c(0), 1.0);
        assert_eq!(binom_coeff_c(1), 0.5);
        // direct binomial: (k - 1/2)(k - 3/2)...(1/2) / k!
        let direct = |k: u64| -> f64 {
            let num: f64 = (0..k).map(|j| k as f64 - 0.5 - j as f64).product();
            let den: f64 = (1..=k).map(|j| j as f64).product();
            num / den
        };
        for k in 0..20 {
            assert!((binom_coeff_c(k) - direct(k)).abs() < 1e-15);
        }
    }

    #[test]
    fn c_asymptotics() {
        let c = binom_coeffs(1_000_000);
        let mut prev = 0.0;
        for (k, &ck) in c.iter().enumerate().skip(1) {
            let ratio = ck * (PI * k as f64).sqrt();
            assert!(ratio < 1.0 && ratio > prev, "k={k}");
            if k >= 100 {
                assert!((ratio - 1.0).abs() <= 1.0 / k as f64);
            }
            prev = ratio;
        }
        let r = c[10_000] * (PI * 10_000.0).sqrt();
        assert!((r - (1.0 - 1.0 / 80_000.0)).abs() / r < 1e-4);
        assert!(c.windows(2).all(|w| w[1] < w[0] && w[1] > 0.0));
    }

    #[test]
    fn h_closed_form_examples() {
        let t = sample_h(8).unwrap();
        assert!((t.h()[4] - (9.0 - 0.5 * LN_2)).abs() < 1e-14);
        assert!((t.h()[4] - 8.65343).abs() < 1e-5);
        assert!((t.h()[2] - (9.0 - 0.5 * 2f64.sqrt().ln())).abs() < 1e-14);
        assert!((t.h()[2] - 8.82671).abs() < 1e-5);
    }

    #[test]
    fn h_grid_mean_is_nine() {
        for m in [8, 64, 512, 4096, 1 << 16] {
            let t = sample_h(m).unwrap();
            let mean = t.h().iter().sum::<f64>() / m as f64;
            assert!((mean - 9.0).abs() < 1e-6, "m={m}: {mean}");
        }
    }

    #[test]
    fn h_lower_bound_and_symmetry() {
        let t = sample_h(256).unwrap();
        for p in 1..256 {
            assert!(t.h()[p] >= H_MIN - 1e-15);
            assert_eq!(t.h()[p], t.h()[256 - p]);
            if p != 128 {
                assert!(t.h()[p] > H_MIN);
            }
        }
        assert!(t.h().iter().all(|&v| v >= 8.6));
    }

    #[test]
    fn cell_average_matches_graded_quadrature() {
        for m in [8, 64, 1024] {
            let a = PI / m as f64;
            // oracle: t = a u^2 removes the log singularity at 0
            let oracle = quadrature::integrate(|u| log_kernel(a * u * u) * 2.0 * a * u, 0.0, 1.0, 32, 64);
            let want = 9.0 + 0.5 * oracle / a;
            let got = h_cell_average(m);
            assert!((got - want).abs() / want < 1e-10, "m={m}: {got} vs {want}");
            // cell average and mean-preserving diagonal differ by (1 - log pi)/2
            let gap = got - h_diag_mean_preserving(m);
            assert!((gap - 0.5 * (1.0 - PI.ln())).abs() < a * a / 100.0);
        }
    }

    #[test]
    fn h_spectrum_positive() {
        for m in [64, 256, 1024] {
            let eig = sample_h(m).unwrap().eigenvalues();
            let min = eig.iter().cloned().fold(f64::INFINITY, f64::min);
            assert!(min > 0.0, "m={m}");
            assert!((eig[0] - 9.0 * m as f64).abs() < 1e-8 * m as f64);
        }
    }

    #[test]
    fn b_truncation_rules() {
        assert!(sample_b_truncated(16, 9).is_err());
        assert!(sample_b_truncated(16, 0).is_err());
        let k = 8;
        let b = sample_b_truncated(16, k).unwrap();
        let at_zero = 3.0 + (1..=k).map(|j| 1.0 / (j as f64).sqrt()).sum::<f64>();
        assert!((b[0] - at_zero).abs() < 1e-13);
        for p in 1..16 {
            assert_eq!(b[p], b[16 - p]);
        }
    }

    #[test]
    fn b_at_pi_approaches_alternating_sum() {
        // oracle: averaging consecutive partial sums of sum (-1)^k / sqrt(k)
        // (Euler transform of order 1, repeated) converges fast
        let mut partial = Vec::new();
        let mut s = 0.0;
        for k in 1..=4000 {
            s += if k % 2 == 0 { 1.0 } else { -1.0 } / (k as f64).sqrt();
            partial.push(s);
        }
        let mut seq = partial;
        for _ in 0..20 {
            seq = seq.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        }
        let limit = 3.0 + *seq.last().unwrap();
        let m = 8192;
        let b = sample_b_truncated(m, m / 2).unwrap();
        // the last term of an alternating sum bounds the truncation error
        assert!((b[m / 2] - limit).abs() < 1.0 / ((m / 2) as f64).sqrt());
        let coarse = sample_b_truncated(512, 256).unwrap();
        assert!((b[m / 2] - limit).abs() < (coarse[256] - limit).abs());
    }

    #[test]
    fn tilde_series_bounds() {
        let t = tilde_h_series(512, 64).unwrap();
        assert_eq!(t.c_coeffs[0], 1.0);
        assert!(t.c_coeffs.windows(2).all(|w| w[1] < w[0] && w[1] > 0.0));
        // constant term is c_0^2 = 1: grid mean of h~ samples
        let mean = t.tilde_h_samples.iter().sum::<f64>() / 512.0;
        assert!((mean - 1.0).abs() < 1e-12);
        assert!(t.lower_bound > 0.0, "lower bound {}", t.lower_bound);
        assert!(tilde_h_series(512, 15).is_err());
    }

    #[test]
    fn tilde_b_uniformly_positive() {
        for (m, k) in [(128, 64), (512, 256), (1024, 512)] {
            let t = tilde_h_series(m, k).unwrap();
            assert!(t.b_lower_bound > 0.0, "m={m}, K={k}: {}", t.b_lower_bound);
        }
    }

    #[test]
    fn tilde_h_shares_log_singularity_up_to_factor_pi() {
        let at_first_point = |m: usize| {
            let t = tilde_h_series(m, m / 2).unwrap();
            let h = h_value(TAU / m as f64);
            (t.tilde_h_samples[1], h)
        };
        let (th_a, h_a) = at_first_point(256);
        let (th_b, h_b) = at_first_point(4096);
        // both diverge as m grows
        assert!(th_b > th_a && h_b > h_a);
        // c_k^2 / 2 ~ 1/(2 pi k) against 1/(2k): the singular parts agree after
        // scaling h~ by pi
        assert!(((PI * th_b - h_b) - (PI * th_a - h_a)).abs() < 0.5);
    }

    #[test]
    fn b_conv_h_identity() {
        let r = verify_b_conv_h(1024, 512).unwrap();
        assert!(r.max_deviation <= 0.02, "{}", r.max_deviation);
        assert!(r.symmetric);
        let fine = verify_b_conv_h(2048, 1024).unwrap();
        assert!(fine.max_deviation_on_coarse(2) < r.max_deviation_on_coarse(1));
    }

    #[test]
    fn kernel_table_json_field_names() {
        let t = sample_h(8).unwrap().with_b(4).unwrap();
        let v = serde_json::to_value(&t).unwrap();
        for key in ["m", "h", "h_diag", "K"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        let back: KernelTable = serde_json::from_value(v).unwrap();
        assert_eq!(back, t);
    }
}
