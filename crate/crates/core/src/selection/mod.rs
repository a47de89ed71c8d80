//! Coordinate selection strategies.
//!
//! Full-information strategies (`ada_gap`, `gs`, `max_r`) get fresh scores
//! for every coordinate before each selection. `gap_per_epoch` and `b_max_r`
//! only refresh their scores at the start of every bin of `E` iterations;
//! `b_max_r` additionally overwrites the estimate of the coordinate it just
//! updated with the marginal decrease observed after the update, and picks
//! the largest estimate with probability `1 - epsilon` (uniform otherwise).

mod tree;

pub use tree::ScoreTree;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};

/// Default exploration probability of `b_max_r`.
pub const DEFAULT_EPSILON: f64 = 0.5;

/// Total score below which `ada_gap` / `gap_per_epoch` sample uniformly.
const DEGENERATE_TOTAL: f64 = 1e-15;

const NEGATIVE_FEEDBACK_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StrategyKind {
    Uniform,
    AdaGap,
    GapPerEpoch,
    GaussSouthwell,
    MaxR,
    BMaxR,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 6] = [
        Self::Uniform,
        Self::AdaGap,
        Self::GapPerEpoch,
        Self::GaussSouthwell,
        Self::MaxR,
        Self::BMaxR,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Self::Uniform => "uniform",
            Self::AdaGap => "ada_gap",
            Self::GapPerEpoch => "gap_per_epoch",
            Self::GaussSouthwell => "gs",
            Self::MaxR => "max_r",
            Self::BMaxR => "b_max_r",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.label() == name)
            .ok_or_else(|| {
                invalid(format!(
                    "unknown strategy {name:?} (expected uniform, ada_gap, gap_per_epoch, gs, max_r or b_max_r)"
                ))
            })
    }

    /// Which per-coordinate scores the strategy consumes.
    pub fn score_kind(self) -> Option<ScoreKind> {
        match self {
            Self::Uniform => None,
            Self::AdaGap | Self::GapPerEpoch => Some(ScoreKind::Gap),
            Self::GaussSouthwell => Some(ScoreKind::GradientMagnitude),
            Self::MaxR | Self::BMaxR => Some(ScoreKind::MarginalDecrease),
        }
    }

    /// Needs `|grad_i F|`, hence a differentiable objective.
    pub fn requires_differentiable(self) -> bool {
        self == Self::GaussSouthwell
    }

    fn uses_bins(self) -> bool {
        matches!(self, Self::GapPerEpoch | Self::BMaxR)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScoreKind {
    /// `r_i`
    MarginalDecrease,
    /// `G_i`
    Gap,
    /// `|grad_i F|`
    GradientMagnitude,
}

/// Strategy name plus its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrategyConfig {
    pub kind: StrategyKind,
    /// Exploration probability (`b_max_r` only).
    pub epsilon: f64,
    /// Bin size `E`; `None` means `ceil(d / 2)`.
    pub bin_size: Option<usize>,
}

impl StrategyConfig {
    pub fn new(kind: StrategyKind) -> Self {
        Self {
            kind,
            epsilon: DEFAULT_EPSILON,
            bin_size: None,
        }
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_bin_size(mut self, bin_size: usize) -> Self {
        self.bin_size = Some(bin_size);
        self
    }

    pub fn resolved_bin_size(&self, d: usize) -> usize {
        self.bin_size.unwrap_or(d.div_ceil(2).max(1))
    }
}

/// Stateful coordinate chooser.
#[derive(Debug, Clone)]
pub struct Strategy {
    kind: StrategyKind,
    tree: ScoreTree,
    epsilon: f64,
    bin_size: usize,
    rng: ChaCha8Rng,
    feedbacks: u64,
    refreshes: u64,
}

impl Strategy {
    pub fn new(config: &StrategyConfig, d: usize, seed: u64) -> Result<Self> {
        if d == 0 {
            return Err(invalid("cannot select among zero coordinates"));
        }
        if !(0.0..=1.0).contains(&config.epsilon) {
            return Err(invalid(format!("epsilon {} not in [0, 1]", config.epsilon)));
        }
        let bin_size = config.resolved_bin_size(d);
        if bin_size == 0 {
            return Err(invalid("bin size must be at least 1"));
        }
        Ok(Self {
            kind: config.kind,
            tree: ScoreTree::new(d),
            epsilon: config.epsilon,
            bin_size,
            rng: ChaCha8Rng::seed_from_u64(seed),
            feedbacks: 0,
            refreshes: 0,
        })
    }

    pub fn kind(&self) -> StrategyKind {
        self.kind
    }

    pub fn bin_size(&self) -> usize {
        self.bin_size
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn n_coords(&self) -> usize {
        self.tree.len()
    }

    /// Current estimates (the leaves of the score tree).
    pub fn scores(&self) -> Vec<f64> {
        (0..self.tree.len()).map(|i| self.tree.get(i)).collect()
    }

    pub fn refresh_count(&self) -> u64 {
        self.refreshes
    }

    pub fn feedback_count(&self) -> u64 {
        self.feedbacks
    }

    /// Bin strategies start from a full set of scores before the first iteration.
    pub fn needs_initial_scores(&self) -> bool {
        self.kind.uses_bins()
    }

    /// Whether fresh scores must be supplied before iteration `t` (1-based).
    pub fn refresh_due(&self, t: u64) -> bool {
        match self.kind {
            StrategyKind::Uniform => false,
            StrategyKind::AdaGap | StrategyKind::GaussSouthwell | StrategyKind::MaxR => true,
            StrategyKind::GapPerEpoch | StrategyKind::BMaxR => {
                t.is_multiple_of(self.bin_size as u64)
            }
        }
    }

    /// Only `b_max_r` learns from the post-update marginal decrease.
    pub fn uses_feedback(&self) -> bool {
        self.kind == StrategyKind::BMaxR
    }

    /// Overwrites every estimate with freshly computed scores.
    pub fn refresh_bin(&mut self, scores: &[f64]) -> Result<()> {
        if scores.len() != self.tree.len() {
            return Err(invalid(format!(
                "got {} scores for {} coordinates",
                scores.len(),
                self.tree.len()
            )));
        }
        if let Some(bad) = scores.iter().find(|s| !(s.is_finite() && **s >= 0.0)) {
            return Err(Error::Consistency(format!("invalid score {bad}")));
        }
        self.tree.rebuild(scores);
        self.refreshes += 1;
        Ok(())
    }

    pub fn select(&mut self) -> usize {
        let d = self.tree.len();
        match self.kind {
            StrategyKind::Uniform => self.rng.random_range(0..d),
            StrategyKind::AdaGap | StrategyKind::GapPerEpoch => {
                let u: f64 = self.rng.random();
                if self.tree.sum() <= DEGENERATE_TOTAL {
                    // every gap vanished: any coordinate is a no-op
                    return self.rng.random_range(0..d);
                }
                self.tree.sample(u).unwrap_or(0)
            }
            StrategyKind::GaussSouthwell | StrategyKind::MaxR => self.tree.argmax(),
            StrategyKind::BMaxR => {
                let explore = self.rng.random::<f64>() < self.epsilon;
                if explore {
                    self.rng.random_range(0..d)
                } else {
                    self.tree.argmax()
                }
            }
        }
    }

    /// Reports the marginal decrease observed for coordinate `i` after it was updated.
    pub fn feedback(&mut self, i: usize, r_observed: f64) -> Result<()> {
        if i >= self.tree.len() {
            return Err(invalid(format!("coordinate {i} out of range")));
        }
        if r_observed.is_nan() || r_observed < -NEGATIVE_FEEDBACK_SLACK {
            return Err(Error::Consistency(format!(
                "negative marginal decrease {r_observed} reported for coordinate {i}"
            )));
        }
        self.feedbacks += 1;
        if matches!(self.kind, StrategyKind::BMaxR | StrategyKind::MaxR) {
            self.tree.set(i, r_observed.max(0.0));
        }
        Ok(())
    }
}
