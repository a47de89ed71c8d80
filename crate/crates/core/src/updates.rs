//! Coordinate update rules.
//!
//! The reference rule moves `x_i` by `s * kappa_i`, with the safe step
//! `s = min{1, (G_i + mu_i kappa_i^2 / 2) / (kappa_i^2 (mu_i + ||a_i||^2 / beta))}`.
//! It guarantees `F(x+) <= F(x) - r_i` with the marginal decrease
//!
//! ```text
//! r_i = G_i - ||a_i||^2 kappa_i^2 / (2 beta)     if s = 1
//! r_i = s (G_i + mu_i kappa_i^2 / 2) / 2          otherwise
//! ```
//!
//! Any rule that does at least as well as the reference step, either on `F`
//! itself or on the separable upper model of [`surrogate_gap`], inherits the
//! same guarantee. [`verify_class_h`] checks that empirically.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Error, Result};
use crate::problems::{Problem, ProblemKind, SeparablePart, SmoothPart};

const NEGATIVE_GAP_SLACK: f64 = 1e-12;

/// Slack used by the membership check.
pub const CLASS_H_SLACK: f64 = 1e-9;

/// How the new coordinate value was obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Step {
    /// Reference rule with this step in `[0, 1]`.
    Safe(f64),
    /// A specialized rule (exact minimization, shrinkage, ...).
    Specialized,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateProposal {
    pub coordinate: usize,
    pub old_x: f64,
    pub new_x: f64,
    pub step: Step,
    pub kappa: f64,
    pub gap: f64,
    /// Certified decrease `r_i` at the state the proposal was built from.
    pub marginal_decrease: f64,
}

impl UpdateProposal {
    pub fn delta(&self) -> f64 {
        self.new_x - self.old_x
    }
}

/// What an update needs to know about the current state for coordinate `i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateView {
    pub x_i: f64,
    /// `a_i^T w` with `w = grad f(Ax)`.
    pub a_i_dot_w: f64,
}

fn check_gap(gap: f64) -> Result<f64> {
    if gap < -NEGATIVE_GAP_SLACK {
        Err(Error::Consistency(format!(
            "negative coordinate gap {gap:e}"
        )))
    } else {
        Ok(gap.max(0.0))
    }
}

/// Safe step `s_i` in `[0, 1]`. Returns 1 when `kappa = 0` (no movement either way).
pub fn step_size(gap: f64, kappa: f64, mu: f64, col_sq_norm: f64, beta: f64) -> Result<f64> {
    let gap = check_gap(gap)?;
    let k2 = kappa * kappa;
    let denom = k2 * (mu + col_sq_norm / beta);
    if denom <= 0.0 {
        return Ok(1.0);
    }
    Ok(((gap + 0.5 * mu * k2) / denom).min(1.0))
}

/// Marginal decrease `r_i >= 0` for the step returned by [`step_size`].
pub fn marginal_decrease(
    gap: f64,
    kappa: f64,
    mu: f64,
    col_sq_norm: f64,
    beta: f64,
) -> Result<f64> {
    let s = step_size(gap, kappa, mu, col_sq_norm, beta)?;
    let gap = gap.max(0.0);
    let k2 = kappa * kappa;
    let r = if s >= 1.0 {
        gap - col_sq_norm * k2 / (2.0 * beta)
    } else {
        0.5 * s * (gap + 0.5 * mu * k2)
    };
    Ok(r.max(0.0))
}

/// Gap, residue, safe step and marginal decrease of coordinate `i`.
#[derive(Debug, Clone, Copy)]
pub struct Certificate {
    pub gap: f64,
    pub kappa: f64,
    pub u_bar: f64,
    pub step: f64,
    pub marginal_decrease: f64,
}

pub fn certificate(p: &Problem, i: usize, view: StateView) -> Result<Certificate> {
    let gap = p.coordinate_gap(i, view.x_i, view.a_i_dot_w)?;
    let residue = p.dual_residue(i, view.x_i, view.a_i_dot_w);
    let mu = p.separable().mu(i);
    let norm = p.matrix().col_sq_norm(i);
    let beta = p.beta();
    Ok(Certificate {
        gap,
        kappa: residue.kappa,
        u_bar: residue.u_bar,
        step: step_size(gap, residue.kappa, mu, norm, beta)?,
        marginal_decrease: marginal_decrease(gap, residue.kappa, mu, norm, beta)?,
    })
}

/// A coordinate update rule `x_i -> h(x, i)`.
pub trait CoordinateUpdate {
    fn name(&self) -> &str;

    fn propose(&self, p: &Problem, i: usize, view: StateView) -> Result<UpdateProposal>;
}

/// The update rules shipped with the solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpdateRule {
    /// `x_i + s_i kappa_i` with the safe step; valid for every problem.
    Reference,
    /// Exact coordinate minimization for the Lasso (soft-thresholding).
    LassoProx,
    /// Proximal gradient step with step `4n / ||a_i||^2` for L1 logistic regression.
    LogisticShrink,
    /// Exact coordinate minimization when both parts are quadratic.
    RidgeExact,
}

impl UpdateRule {
    pub const ALL: [UpdateRule; 4] = [
        Self::Reference,
        Self::LassoProx,
        Self::LogisticShrink,
        Self::RidgeExact,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Self::Reference => "reference",
            Self::LassoProx => "lasso_prox",
            Self::LogisticShrink => "logistic_shrink",
            Self::RidgeExact => "ridge_exact",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|r| r.label() == name)
            .ok_or_else(|| invalid(format!("unknown update rule {name:?}")))
    }

    /// The rule used for each problem in the benchmarks.
    pub fn default_for(kind: ProblemKind) -> Self {
        match kind {
            ProblemKind::Lasso => Self::LassoProx,
            ProblemKind::LogisticL1 => Self::LogisticShrink,
            ProblemKind::RidgeDual | ProblemKind::L2LeastSquares => Self::RidgeExact,
        }
    }

    pub fn supports(self, kind: ProblemKind) -> bool {
        match self {
            Self::Reference => true,
            Self::LassoProx => kind == ProblemKind::Lasso,
            Self::LogisticShrink => kind == ProblemKind::LogisticL1,
            Self::RidgeExact => {
                matches!(kind, ProblemKind::RidgeDual | ProblemKind::L2LeastSquares)
            }
        }
    }

    pub fn check_compatible(self, kind: ProblemKind) -> Result<()> {
        if self.supports(kind) {
            Ok(())
        } else {
            Err(invalid(format!(
                "update rule {} does not apply to {}",
                self.label(),
                kind.name()
            )))
        }
    }
}

fn soft_threshold(q: f64, tau: f64) -> f64 {
    q.signum() * (q.abs() - tau).max(0.0)
}

impl CoordinateUpdate for UpdateRule {
    fn name(&self) -> &str {
        self.label()
    }

    fn propose(&self, p: &Problem, i: usize, view: StateView) -> Result<UpdateProposal> {
        self.check_compatible(p.kind())?;
        let cert = certificate(p, i, view)?;
        let norm = p.matrix().col_sq_norm(i);
        let x = view.x_i;
        let (new_x, step) = match self {
            // the projection only absorbs rounding: x + s kappa lies between x and u_bar
            Self::Reference => (
                p.separable().project(i, x + cert.step * cert.kappa),
                Step::Safe(cert.step),
            ),
            Self::LassoProx => {
                let (
                    SmoothPart::Quadratic { curvature, .. },
                    SeparablePart::BoxedL1 { lambda, .. },
                ) = (p.smooth(), p.separable())
                else {
                    unreachable!("checked by kind");
                };
                // argmin_z  a^T w (z - x) + c ||a||^2 (z - x)^2 / 2 + lambda |z|
                let z = if norm > 0.0 {
                    let h = curvature * norm;
                    soft_threshold(x - view.a_i_dot_w / h, lambda / h)
                } else {
                    0.0
                };
                (p.separable().project(i, z), Step::Specialized)
            }
            Self::LogisticShrink => {
                let lambda = p.separable().l1_weight().expect("L1 problem");
                // 4 in units where (1/n) ||a_i||^2 = 1
                let z = if norm > 0.0 {
                    let step = p.beta() / norm;
                    soft_threshold(x - step * view.a_i_dot_w, step * lambda)
                } else {
                    0.0
                };
                (p.separable().project(i, z), Step::Specialized)
            }
            Self::RidgeExact => {
                let (
                    SmoothPart::Quadratic { curvature, .. },
                    SeparablePart::Quadratic { weight, linear },
                ) = (p.smooth(), p.separable())
                else {
                    unreachable!("checked by kind");
                };
                let h = curvature * norm;
                let z = (h * x - view.a_i_dot_w - linear[i]) / (h + 2.0 * weight);
                (z, Step::Specialized)
            }
        };
        Ok(UpdateProposal {
            coordinate: i,
            old_x: x,
            new_x,
            step,
            kappa: cert.kappa,
            gap: cert.gap,
            marginal_decrease: cert.marginal_decrease,
        })
    }
}

/// Separable upper model of `F(x') - F(x)`:
///
/// `sum_i (grad f(Ax)^T a_i)(x'_i - x_i) + ||a_i||^2 (x'_i - x_i)^2 / (2 beta) + g_i(x'_i) - g_i(x_i)`
pub fn surrogate_gap(p: &Problem, x: &[f64], x_prime: &[f64]) -> Result<f64> {
    if x_prime.len() != x.len() {
        return Err(invalid("x and x' differ in length"));
    }
    let ax = p.matrix().mul_vec(x)?;
    let w = p.dual_point(&ax);
    let beta = p.beta();
    let mut total = 0.0;
    for (i, (&xi, &yi)) in x.iter().zip(x_prime).enumerate() {
        if xi == yi {
            continue;
        }
        let delta = yi - xi;
        total += p.matrix().col_dot(i, &w) * delta
            + p.matrix().col_sq_norm(i) * delta * delta / (2.0 * beta)
            + p.separable().value(i, yi)
            - p.separable().value(i, xi);
    }
    Ok(total)
}

/// Random iterate inside the domain of `F`, with about half the
/// coordinates at zero.
pub fn random_state<R: Rng>(p: &Problem, rng: &mut R) -> Vec<f64> {
    let scale = [0.01, 0.1, 1.0][rng.random_range(0..3)];
    (0..p.n_coords())
        .map(|i| {
            if rng.random::<bool>() {
                return 0.0;
            }
            match p.separable().support_bound(i) {
                Some(b) => b * scale * rng.random_range(-1.0..=1.0),
                None => {
                    let z: f64 = rng.sample(StandardNormal);
                    10.0 * scale * z
                }
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassHReport {
    pub rule: String,
    pub trials: usize,
    pub violations: usize,
    /// Largest `min(F(h) - F(h_ref), Fhat(h) - Fhat(h_ref))` seen; positive
    /// beyond the slack means neither criterion held.
    pub worst_margin: f64,
}

/// Samples random `(x, i)` and checks that `rule` does at least as well as
/// the reference step on `F` or on the surrogate model (within
/// [`CLASS_H_SLACK`]).
pub fn verify_class_h(
    rule: &dyn CoordinateUpdate,
    p: &Problem,
    trials: usize,
    seed: u64,
) -> Result<ClassHReport> {
    if trials == 0 {
        return Err(invalid("trials must be at least 1"));
    }
    if p.n_coords() == 0 {
        return Err(invalid("problem has no coordinates"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = 0;
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..trials {
        let x = random_state(p, &mut rng);
        let i = rng.random_range(0..p.n_coords());
        let ax = p.matrix().mul_vec(&x)?;
        let w = p.dual_point(&ax);
        let view = StateView {
            x_i: x[i],
            a_i_dot_w: p.matrix().col_dot(i, &w),
        };
        let candidate = rule.propose(p, i, view)?;
        let reference = UpdateRule::Reference.propose(p, i, view)?;

        let with = |v: f64| {
            let mut y = x.clone();
            y[i] = v;
            y
        };
        let xh = with(candidate.new_x);
        let xr = with(reference.new_x);
        let direct = p.objective(&xh)? - p.objective(&xr)?;
        let model = surrogate_gap(p, &x, &xh)? - surrogate_gap(p, &x, &xr)?;
        let margin = direct.min(model);
        worst = worst.max(margin);
        if margin.is_nan() || margin > CLASS_H_SLACK {
            violations += 1;
        }
    }
    Ok(ClassHReport {
        rule: rule.name().to_string(),
        trials,
        violations,
        worst_margin: worst,
    })
}
