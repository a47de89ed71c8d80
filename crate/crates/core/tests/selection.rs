mod common;

use cdsel_core::selection::{Strategy, StrategyConfig, StrategyKind};
use common::argmax;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn chi_square(counts: &[u64], probs: &[f64]) -> f64 {
    let total: u64 = counts.iter().sum();
    counts
        .iter()
        .zip(probs)
        .filter(|(_, &p)| p > 0.0)
        .map(|(&c, &p)| {
            let e = p * total as f64;
            (c as f64 - e).powi(2) / e
        })
        .sum()
}

fn critical(dof: usize) -> f64 {
    ChiSquared::new(dof as f64).unwrap().inverse_cdf(0.999)
}

#[test]
fn ada_gap_samples_proportionally_to_gaps() {
    let gaps = [0.5, 0.0, 2.0, 1.0, 0.25, 3.0, 0.0, 1.25];
    let total: f64 = gaps.iter().sum();
    let probs: Vec<f64> = gaps.iter().map(|g| g / total).collect();
    let mut s = Strategy::new(&StrategyConfig::new(StrategyKind::AdaGap), gaps.len(), 21).unwrap();
    s.refresh_bin(&gaps).unwrap();
    let mut counts = vec![0u64; gaps.len()];
    for _ in 0..50_000 {
        counts[s.select()] += 1;
    }
    assert_eq!(counts[1], 0);
    assert_eq!(counts[6], 0);
    let stat = chi_square(&counts, &probs);
    assert!(stat < critical(5), "chi-square {stat}");
}

#[test]
fn full_exploration_is_uniform() {
    let d = 10;
    let cfg = StrategyConfig::new(StrategyKind::BMaxR).with_epsilon(1.0);
    let mut s = Strategy::new(&cfg, d, 22).unwrap();
    let mut scores = vec![0.0; d];
    scores[3] = 100.0;
    s.refresh_bin(&scores).unwrap();
    let mut counts = vec![0u64; d];
    for _ in 0..50_000 {
        counts[s.select()] += 1;
    }
    let stat = chi_square(&counts, &vec![1.0 / d as f64; d]);
    assert!(stat < critical(d - 1), "chi-square {stat}");
}

#[test]
fn bandit_estimates_match_shadow_array() {
    let d = 37;
    let cfg = StrategyConfig::new(StrategyKind::BMaxR).with_epsilon(0.0);
    let mut s = Strategy::new(&cfg, d, 23).unwrap();
    let mut shadow = vec![0.0; d];
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    let value = |rng: &mut ChaCha8Rng| match rng.random_range(0..4) {
        0 => 0.0,
        1 => 1.0,
        _ => rng.random_range(0.0..5.0),
    };
    for _ in 0..10_000 {
        match rng.random_range(0..10) {
            0 => {
                shadow = (0..d).map(|_| value(&mut rng)).collect();
                s.refresh_bin(&shadow).unwrap();
            }
            1..=4 => {
                assert_eq!(s.select(), argmax(&shadow));
            }
            _ => {
                let i = rng.random_range(0..d);
                let r = value(&mut rng);
                s.feedback(i, r).unwrap();
                shadow[i] = r;
            }
        }
        assert_eq!(s.scores(), shadow);
    }
}

#[test]
fn max_r_picks_lowest_index_on_ties() {
    let mut s = Strategy::new(&StrategyConfig::new(StrategyKind::MaxR), 5, 0).unwrap();
    s.refresh_bin(&[1.0, 3.0, 0.5, 3.0, 2.0]).unwrap();
    assert_eq!(s.select(), 1);
}

#[test]
fn uniform_ignores_scores() {
    let d = 6;
    let mut s = Strategy::new(&StrategyConfig::new(StrategyKind::Uniform), d, 25).unwrap();
    assert!(!s.refresh_due(1));
    let mut counts = vec![0u64; d];
    for _ in 0..30_000 {
        counts[s.select()] += 1;
    }
    let stat = chi_square(&counts, &vec![1.0 / d as f64; d]);
    assert!(stat < critical(d - 1));
}
