//! Dense matrices, softmax, seeded randomness and Perlin noise.

mod matrix;
mod perlin;
mod rng;

pub use matrix::Matrix;
pub use perlin::PerlinField;
pub use rng::{mix_seed, SeededRng};

use crate::error::{Error, Result};

/// Numerically stable softmax (the maximum is subtracted before exponentiating).
pub fn softmax(v: &[f64]) -> Result<Vec<f64>> {
    if v.is_empty() {
        return Err(Error::EmptyInput("softmax of an empty vector"));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numerical("softmax input is not finite".into()));
    }
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = v.iter().map(|&x| (x - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    Ok(exps.into_iter().map(|e| e / sum).collect())
}

/// Shannon entropy in nats; zero-probability entries contribute nothing.
pub fn entropy(p: &[f64]) -> f64 {
    p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.ln()).sum()
}
