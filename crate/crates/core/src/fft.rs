//! Separable n-dimensional FFT on `m^n` row-major arrays.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

/// Forward and inverse transforms along every axis of an `m^n` cube.
#[derive(Clone)]
pub struct NdFft {
    n: usize,
    m: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for NdFft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NdFft").field("n", &self.n).field("m", &self.m).finish()
    }
}

impl NdFft {
    pub fn new(n: usize, m: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            m,
            forward: planner.plan_fft_forward(m),
            inverse: planner.plan_fft_inverse(m),
        }
    }

    pub fn len(&self) -> usize {
        self.m.pow(self.n as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Unnormalized forward transform, `X[k] = sum_p x[p] e^{-2 pi i (k, p)/m}`.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.transform(data, &self.forward);
    }

    /// Inverse transform including the `1/m^n` factor.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.transform(data, &self.inverse);
        let scale = 1.0 / self.len() as f64;
        data.par_iter_mut().for_each(|z| *z *= scale);
    }

    fn transform(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        assert_eq!(data.len(), self.len());
        let m = self.m;
        for axis in 0..self.n {
            let stride = m.pow((self.n - 1 - axis) as u32);
            if stride == 1 {
                data.par_chunks_mut(m).for_each_init(
                    || vec![Complex64::default(); plan.get_inplace_scratch_len()],
                    |scratch, line| plan.process_with_scratch(line, scratch),
                );
            } else {
                data.par_chunks_mut(m * stride).for_each_init(
                    || {
                        (
                            vec![Complex64::default(); m],
                            vec![Complex64::default(); plan.get_inplace_scratch_len()],
                        )
                    },
                    |(line, scratch), block| {
                        for offset in 0..stride {
                            for k in 0..m {
                                line[k] = block[offset + k * stride];
                            }
                            plan.process_with_scratch(line, scratch);
                            for k in 0..m {
                                block[offset + k * stride] = line[k];
                            }
                        }
                    },
                );
            }
        }
    }
}

/// 1D unnormalized DFT of a real vector, returned as complex.
pub fn dft_real(values: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(buf.len()).process(&mut buf);
    buf
}
