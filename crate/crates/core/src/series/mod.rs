//! Truncated multiple Fourier series `f(z) = sum_alpha a_alpha z^alpha` with
//! coefficients in `C^d`, and the summation operators acting on them.

mod eval;
mod radial;
mod random;
mod scan;

pub use eval::{
    abel_mean, abel_truncation_bound, fejer_gap, radial_derivative, rect_partial_sum, strong_diff_mean,
    FEJER_GAP_CONSTANT,
};
pub use radial::{radial_variation, RadialLevel, RadialVariationResult, MAX_DEPTH, NODES_PER_INTERVAL};
pub use random::generate_random_coeffs;
pub use scan::{abel_by_parts, partial_sum_table, pringsheim_scan, PartsSum, SummationScan, Verdict};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported number of stored complex entries.
pub const MAX_ENTRIES: usize = 1 << 26;

/// Provenance of generated coefficient files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoeffMetadata {
    pub seed: u64,
    pub decay_exponent: f64,
    pub dirichlet_norm: f64,
}

/// Coefficients `a_alpha`, `alpha` in `prod_j [0, shape_j)`, row-major with the
/// `d` vector components innermost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CoeffFile", into = "CoeffFile")]
pub struct CoeffArray {
    shape: Vec<usize>,
    d: usize,
    values: Vec<Complex64>,
    metadata: Option<CoeffMetadata>,
}

/// On-disk layout: `{"n", "shape", "d", "values": [[re, im], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct CoeffFile {
    n: usize,
    shape: Vec<usize>,
    d: usize,
    values: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    metadata: Option<CoeffMetadata>,
}

impl TryFrom<CoeffFile> for CoeffArray {
    type Error = Error;

    fn try_from(file: CoeffFile) -> Result<Self> {
        if file.n != file.shape.len() {
            return Err(Error::Format(format!(
                "n = {} but shape has {} entries",
                file.n,
                file.shape.len()
            )));
        }
        let values = file.values.iter().map(|[re, im]| Complex64::new(*re, *im)).collect();
        let mut out = CoeffArray::new(file.shape, file.d, values)?;
        out.metadata = file.metadata;
        Ok(out)
    }
}

impl From<CoeffArray> for CoeffFile {
    fn from(a: CoeffArray) -> Self {
        CoeffFile {
            n: a.shape.len(),
            values: a.values.iter().map(|z| [z.re, z.im]).collect(),
            shape: a.shape,
            d: a.d,
            metadata: a.metadata,
        }
    }
}

impl CoeffArray {
    pub fn new(shape: Vec<usize>, d: usize, values: Vec<Complex64>) -> Result<Self> {
        if shape.is_empty() {
            return Err(Error::Format("shape must have at least one axis".into()));
        }
        if shape.contains(&0) {
            return Err(Error::Format(format!("shape {shape:?} has an empty axis")));
        }
        if d == 0 {
            return Err(Error::Format("coefficient dimension d must be >= 1".into()));
        }
        let total = shape
            .iter()
            .try_fold(d, |acc, &s| acc.checked_mul(s))
            .filter(|&t| t <= MAX_ENTRIES)
            .ok_or_else(|| Error::ResourceGuard(format!("shape {shape:?} x d = {d} exceeds {MAX_ENTRIES} entries")))?;
        if values.len() != total {
            return Err(Error::Format(format!(
                "expected {total} values for shape {shape:?} and d = {d}, found {}",
                values.len()
            )));
        }
        if values.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::Format("coefficients must be finite".into()));
        }
        Ok(Self {
            shape,
            d,
            values,
            metadata: None,
        })
    }

    pub fn zeros(shape: Vec<usize>, d: usize) -> Result<Self> {
        let total = shape.iter().product::<usize>() * d;
        Self::new(shape, d, vec![Complex64::default(); total])
    }

    /// Build from a function of the multi-index and vector component.
    pub fn from_fn(shape: Vec<usize>, d: usize, mut f: impl FnMut(&[usize], usize) -> Complex64) -> Result<Self> {
        let mut out = Self::zeros(shape, d)?;
        let mut alpha = vec![0; out.n()];
        for flat in 0..out.num_indices() {
            out.unflatten_into(flat, &mut alpha);
            for c in 0..d {
                out.values[flat * d + c] = f(&alpha, c);
            }
        }
        Ok(out)
    }

    pub fn n(&self) -> usize {
        self.shape.len()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn metadata(&self) -> Option<&CoeffMetadata> {
        self.metadata.as_ref()
    }

    pub fn with_metadata(mut self, metadata: CoeffMetadata) -> Self {
        self.metadata = Some(metadata);
        self
    }

    /// Number of multi-indices, `prod shape_j`.
    pub fn num_indices(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn flatten(&self, alpha: &[usize]) -> usize {
        alpha.iter().zip(&self.shape).fold(0, |acc, (&a, &s)| acc * s + a)
    }

    fn unflatten_into(&self, mut flat: usize, alpha: &mut [usize]) {
        for (slot, &s) in alpha.iter_mut().zip(&self.shape).rev() {
            *slot = flat % s;
            flat /= s;
        }
    }

    pub fn unflatten(&self, flat: usize) -> Vec<usize> {
        let mut alpha = vec![0; self.n()];
        self.unflatten_into(flat, &mut alpha);
        alpha
    }

    /// The vector `a_alpha`.
    pub fn get(&self, alpha: &[usize]) -> &[Complex64] {
        let i = self.flatten(alpha) * self.d;
        &self.values[i..i + self.d]
    }

    pub fn set(&mut self, alpha: &[usize], value: &[Complex64]) {
        let i = self.flatten(alpha) * self.d;
        self.values[i..i + self.d].copy_from_slice(value);
    }

    /// `sum_alpha prod_j (alpha_j + 1) ||a_alpha||^2`.
    pub fn dirichlet_norm_sq(&self) -> f64 {
        let mut alpha = vec![0; self.n()];
        (0..self.num_indices())
            .map(|flat| {
                self.unflatten_into(flat, &mut alpha);
                let weight: f64 = alpha.iter().map(|&a| (a + 1) as f64).product();
                let sq: f64 = self.values[flat * self.d..(flat + 1) * self.d].iter().map(|z| z.norm_sqr()).sum();
                weight * sq
            })
            .sum()
    }

    pub fn dirichlet_norm(&self) -> f64 {
        self.dirichlet_norm_sq().sqrt()
    }

    /// `sum_alpha ||a_alpha||`, a bound for `|f|` on the closed polydisc.
    pub fn l1_norm(&self) -> f64 {
        self.values
            .chunks(self.d)
            .map(|v| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
            .sum()
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            shape: self.shape.clone(),
            d: self.d,
            values: self.values.iter().map(|z| z * factor).collect(),
            metadata: None,
        }
    }

    pub fn add(&self, other: &CoeffArray) -> Result<Self> {
        if self.shape != other.shape || self.d != other.d {
            return Err(Error::Format(format!(
                "cannot add arrays of shape {:?}/d={} and {:?}/d={}",
                self.shape, self.d, other.shape, other.d
            )));
        }
        Ok(Self {
            shape: self.shape.clone(),
            d: self.d,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
            metadata: None,
        })
    }

    /// Reorder axes: axis `j` of the result is axis `perm[j]` of `self`.
    pub fn permute_axes(&self, perm: &[usize]) -> Result<Self> {
        let n = self.n();
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::Format(format!("{perm:?} is not a permutation of {n} axes")));
        }
        let shape: Vec<usize> = perm.iter().map(|&p| self.shape[p]).collect();
        let mut src = vec![0; n];
        Self::from_fn(shape, self.d, |alpha, c| {
            for (j, &p) in perm.iter().enumerate() {
                src[p] = alpha[j];
            }
            self.values[self.flatten(&src) * self.d + c]
        })
    }

    pub(crate) fn check_point(&self, name: &'static str, point: &[f64]) -> Result<()> {
        if point.len() != self.n() {
            return Err(Error::InvalidParameter {
                name,
                reason: format!("expected {} coordinates, found {}", self.n(), point.len()),
            });
        }
        if point.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter {
                name,
                reason: "coordinates must be finite".into(),
            });
        }
        Ok(())
    }

    pub(crate) fn check_index(&self, name: &'static str, index: &[usize]) -> Result<()> {
        if index.len() != self.n() {
            return Err(Error::OutOfRange {
                name,
                reason: format!("expected {} entries, found {}", self.n(), index.len()),
            });
        }
        if let Some((j, (&k, &s))) = index.iter().zip(&self.shape).enumerate().find(|(_, (&k, &s))| k >= s) {
            return Err(Error::OutOfRange {
                name,
                reason: format!("entry {j} is {k} but the array has indices 0..={} on that axis", s - 1),
            });
        }
        Ok(())
    }
}

/// Euclidean norm of a vector in `C^d`.
pub fn vec_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indexing_and_norms() {
        let a = CoeffArray::from_fn(vec![3, 4], 2, |al, c| Complex64::new((al[0] * 4 + al[1]) as f64, c as f64)).unwrap();
        assert_eq!(a.get(&[2, 3])[0], Complex64::new(11.0, 0.0));
        assert_eq!(a.get(&[2, 3])[1], Complex64::new(11.0, 1.0));
        assert_eq!(a.unflatten(a.flatten(&[1, 2])), vec![1, 2]);
        let mut direct = 0.0;
        for i in 0..3 {
            for j in 0..4 {
                let v = a.get(&[i, j]);
                direct += ((i + 1) * (j + 1)) as f64 * (v[0].norm_sqr() + v[1].norm_sqr());
            }
        }
        assert!((a.dirichlet_norm_sq() - direct).abs() < 1e-12);
    }

    #[test]
    fn json_round_trip_and_validation() {
        let a = CoeffArray::from_fn(vec![2, 3], 1, |al, _| Complex64::new(al[0] as f64, -(al[1] as f64))).unwrap();
        let text = serde_json::to_string(&a).unwrap();
        assert!(text.starts_with(r#"{"n":2,"shape":[2,3],"d":1,"values":[[0.0,-0.0]"#));
        let back: CoeffArray = serde_json::from_str(&text).unwrap();
        assert_eq!(back, a);
        let bad = r#"{"n":1,"shape":[3],"d":1,"values":[[1,0]]}"#;
        assert!(serde_json::from_str::<CoeffArray>(bad).is_err());
        let bad_n = r#"{"n":2,"shape":[1],"d":1,"values":[[1,0]]}"#;
        assert!(serde_json::from_str::<CoeffArray>(bad_n).is_err());
    }

    #[test]
    fn permutation_moves_coefficients() {
        let a = CoeffArray::from_fn(vec![2, 3, 4], 1, |al, _| Complex64::new((al[0] * 100 + al[1] * 10 + al[2]) as f64, 0.0)).unwrap();
        let p = a.permute_axes(&[2, 0, 1]).unwrap();
        assert_eq!(p.shape(), &[4, 2, 3]);
        assert_eq!(p.get(&[3, 1, 2])[0].re, 123.0);
        assert!(a.permute_axes(&[0, 0, 1]).is_err());
    }
}
