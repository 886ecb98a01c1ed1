use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{CoeffArray, CoeffMetadata};
use crate::error::{invalid, Result};

/// Coefficients with `||a_alpha|| = prod_j (alpha_j + 1)^{-decay}` and uniform
/// random phases; each of the `d` components carries `1/sqrt(d)` of the norm.
/// `decay <= 1.5` is rejected.
pub fn generate_random_coeffs(seed: u64, shape: &[usize], decay: f64, d: usize) -> Result<CoeffArray> {
    if !(decay > 1.5) {
        return Err(invalid(
            "decay_exponent",
            format!("{decay} must exceed 1.5 for the default profile to have a finite Dirichlet norm"),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = 1.0 / (d as f64).sqrt();
    let f = CoeffArray::from_fn(shape.to_vec(), d, |alpha, _| {
        let mag: f64 = alpha.iter().map(|&a| ((a + 1) as f64).powf(-decay)).product();
        Complex64::from_polar(mag * scale, rng.gen::<f64>() * TAU)
    })?;
    let dirichlet_norm = f.dirichlet_norm();
    Ok(f.with_metadata(CoeffMetadata {
        seed,
        decay_exponent: decay,
        dirichlet_norm,
    }))
}
