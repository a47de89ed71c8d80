use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{LabeledDataset, SparseColumnMatrix};
use crate::error::{invalid, Result};

/// Ratio between consecutive signal magnitudes.
const SIGNAL_DECAY: f64 = 0.7;

/// Parameters of [`generate_synthetic`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticSpec {
    pub n: usize,
    pub d: usize,
    /// Expected fraction of nonzero entries in `A`.
    pub sparsity: f64,
    /// Number of nonzero entries in the planted coefficient vector.
    pub nnz_signal: usize,
    pub noise_sd: f64,
    pub seed: u64,
}

/// Sparse Gaussian design with a planted sparse signal:
/// `Y = A x* + noise`, where the nonzero entries of `x*` decay
/// geometrically so that coordinate-wise gaps differ widely across
/// coordinates.
///
/// Returns the dataset and the planted `x*`.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<(LabeledDataset, Vec<f64>)> {
    let SyntheticSpec {
        n,
        d,
        sparsity,
        nnz_signal,
        noise_sd,
        seed,
    } = *spec;
    if n == 0 || d == 0 {
        return Err(invalid("n and d must be positive"));
    }
    if !(sparsity > 0.0 && sparsity <= 1.0) {
        return Err(invalid(format!("sparsity {sparsity} not in (0, 1]")));
    }
    if nnz_signal > d {
        return Err(invalid(format!("nnz_signal {nnz_signal} exceeds d = {d}")));
    }
    if !(noise_sd >= 0.0 && noise_sd.is_finite()) {
        return Err(invalid(format!(
            "noise_sd {noise_sd} must be finite and >= 0"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut columns = Vec::with_capacity(d);
    for _ in 0..d {
        let mut col = Vec::new();
        for r in 0..n {
            if sparsity >= 1.0 || rng.random::<f64>() < sparsity {
                let v: f64 = rng.sample(StandardNormal);
                col.push((r, v));
            }
        }
        columns.push(col);
    }
    let matrix = SparseColumnMatrix::from_columns(n, columns)?;

    let mut signal = vec![0.0; d];
    let support = sample(&mut rng, d, nnz_signal);
    let mut magnitude = 1.0;
    for j in support.iter() {
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        signal[j] = sign * magnitude;
        magnitude *= SIGNAL_DECAY;
    }

    let mut labels = matrix.mul_vec(&signal)?;
    if noise_sd > 0.0 {
        for y in labels.iter_mut() {
            let e: f64 = rng.sample(StandardNormal);
            *y += noise_sd * e;
        }
    }
    Ok((LabeledDataset::new(matrix, labels)?, signal))
}
