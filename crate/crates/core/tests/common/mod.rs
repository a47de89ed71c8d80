#![allow(dead_code)]

use cdsel_core::problems::{make_lasso, make_logistic_l1, make_ridge_dual, Problem};
use cdsel_core::sparse::{generate_synthetic, LabeledDataset, SyntheticSpec};
use cdsel_core::updates::random_state;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn synthetic(n: usize, d: usize, seed: u64) -> LabeledDataset {
    generate_synthetic(&SyntheticSpec {
        n,
        d,
        sparsity: 0.3,
        nnz_signal: 5.min(d),
        noise_sd: 0.1,
        seed,
    })
    .unwrap()
    .0
}

/// Same design, labels replaced by their signs.
pub fn binary(data: &LabeledDataset) -> LabeledDataset {
    let labels = data
        .labels
        .iter()
        .map(|&y| if y >= 0.0 { 1.0 } else { -1.0 })
        .collect();
    LabeledDataset::new(data.matrix.clone(), labels).unwrap()
}

pub fn lasso(n: usize, d: usize, seed: u64) -> Problem {
    make_lasso(&synthetic(n, d, seed), 0.05).unwrap()
}

pub fn logistic(n: usize, d: usize, seed: u64) -> Problem {
    make_logistic_l1(&binary(&synthetic(n, d, seed)), 0.01).unwrap()
}

pub fn ridge(n: usize, d: usize, seed: u64) -> Problem {
    make_ridge_dual(&synthetic(n, d, seed), 0.1).unwrap()
}

/// The three problems on instances of the given shape.
pub fn problems(n: usize, d: usize, seed: u64) -> Vec<Problem> {
    vec![lasso(n, d, seed), logistic(n, d, seed), ridge(n, d, seed)]
}

pub fn states(p: &Problem, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_state(p, &mut rng)).collect()
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

/// Index of the largest entry, lowest index on ties.
pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in v.iter().enumerate() {
        if s > v[best] {
            best = i;
        }
    }
    best
}
