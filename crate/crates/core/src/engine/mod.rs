//! The coordinate descent driver.
//!
//! Every iteration: refresh scores when the strategy asks for them, select a
//! coordinate, build an update proposal, apply it to the cached `Ax`,
//! `w = grad f(Ax)` and `F`, then report the post-update marginal decrease of
//! the updated coordinate back to the strategy. Iterations are numbered from
//! 1; bin strategies additionally get scores before iteration 1.

mod trace;

pub use trace::{write_trace_csv, SuboptSource, TraceRecord, TRACE_HEADER};

use std::time::Instant;

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, Error, Result};
use crate::problems::{Problem, ProblemKind};
use crate::selection::{ScoreKind, Strategy, StrategyConfig, StrategyKind};
use crate::updates::{certificate, CoordinateUpdate, StateView, UpdateProposal, UpdateRule};

/// Slack of the per-step decrease audit: `F(x_t) - F(x_{t+1}) >= r - 1e-9`.
pub const AUDIT_SLACK: f64 = 1e-9;

/// Relative slack of the per-step monotonicity check.
pub const MONOTONE_SLACK: f64 = 1e-12;

/// `Ax` and friends are recomputed from scratch every this many epochs.
const RESYNC_EPOCHS: u64 = 10;

/// Work performed by the algorithm. Trace evaluation and cache resyncs are
/// not counted.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct WorkCounters {
    /// Number of traversals of a single column.
    pub col_passes: u64,
    /// Stored entries visited by those traversals.
    pub entries_touched: u64,
    /// Coordinate-wise gap (or gradient) evaluations.
    pub gap_evals: u64,
    /// Full `d`-vector score computations.
    pub full_scores: u64,
}

/// Iterate plus the caches the updates rely on.
#[derive(Debug, Clone)]
pub struct SolverState {
    pub x: Vec<f64>,
    pub ax: Vec<f64>,
    /// `grad f(Ax)`
    pub w: Vec<f64>,
    pub f: f64,
    /// Completed iterations.
    pub t: u64,
    pub counters: WorkCounters,
}

impl SolverState {
    /// State at `x = 0`.
    pub fn zero(p: &Problem) -> Result<Self> {
        Self::from_x(p, vec![0.0; p.n_coords()])
    }

    pub fn from_x(p: &Problem, x: Vec<f64>) -> Result<Self> {
        let ax = p.matrix().mul_vec(&x)?;
        let w = p.dual_point(&ax);
        let f = p.primal_value(&x, &ax)?;
        Ok(Self {
            x,
            ax,
            w,
            f,
            t: 0,
            counters: WorkCounters::default(),
        })
    }

    pub fn epoch(&self, p: &Problem) -> f64 {
        self.t as f64 / p.n_coords() as f64
    }

    /// Recomputes `Ax`, `w` and `F` from `x`.
    pub fn resync(&mut self, p: &Problem) -> Result<()> {
        self.ax = p.matrix().mul_vec(&self.x)?;
        self.w = p.dual_point(&self.ax);
        self.f = p.primal_value(&self.x, &self.ax)?;
        Ok(())
    }

    fn view(&mut self, p: &Problem, i: usize) -> StateView {
        self.counters.col_passes += 1;
        self.counters.entries_touched += p.matrix().col_nnz(i) as u64;
        self.counters.gap_evals += 1;
        StateView {
            x_i: self.x[i],
            a_i_dot_w: p.matrix().col_dot(i, &self.w),
        }
    }
}

/// Scores of one kind for every coordinate.
pub fn compute_scores(p: &Problem, st: &mut SolverState, kind: ScoreKind) -> Result<Vec<f64>> {
    let d = p.n_coords();
    let mut scores = Vec::with_capacity(d);
    for i in 0..d {
        let a_i_dot_w = p.matrix().col_dot(i, &st.w);
        let x_i = st.x[i];
        let s = match kind {
            ScoreKind::MarginalDecrease => {
                certificate(p, i, StateView { x_i, a_i_dot_w })?.marginal_decrease
            }
            ScoreKind::Gap => p.coordinate_gap(i, x_i, a_i_dot_w)?,
            ScoreKind::GradientMagnitude => p
                .coordinate_gradient(i, x_i, a_i_dot_w)
                .ok_or_else(|| invalid("gradient scores need a differentiable objective"))?
                .abs(),
        };
        scores.push(s);
    }
    st.counters.col_passes += d as u64;
    st.counters.entries_touched += p.matrix().nnz() as u64;
    st.counters.gap_evals += d as u64;
    st.counters.full_scores += 1;
    Ok(scores)
}

/// `(r_1, ..., r_d)` at the current state.
pub fn compute_all_marginal_decreases(p: &Problem, st: &mut SolverState) -> Result<Vec<f64>> {
    compute_scores(p, st, ScoreKind::MarginalDecrease)
}

/// A proposal tied to the iteration it was built at.
#[derive(Debug, Clone, Copy)]
pub struct StampedProposal {
    pub proposal: UpdateProposal,
    pub stamp: u64,
}

/// Builds a proposal for coordinate `i` against the current state.
pub fn propose(
    p: &Problem,
    st: &mut SolverState,
    rule: &dyn CoordinateUpdate,
    i: usize,
) -> Result<StampedProposal> {
    if i >= p.n_coords() {
        return Err(invalid(format!("coordinate {i} out of range")));
    }
    let view = st.view(p, i);
    Ok(StampedProposal {
        proposal: rule.propose(p, i, view)?,
        stamp: st.t,
    })
}

/// Applies a proposal: updates `x_i`, then `Ax`, `w` and `F` on the rows
/// where `a_i` is nonzero, and advances `t`.
pub fn apply_coordinate_step(
    p: &Problem,
    st: &mut SolverState,
    sp: &StampedProposal,
) -> Result<()> {
    let prop = &sp.proposal;
    let i = prop.coordinate;
    if sp.stamp != st.t || st.x[i].to_bits() != prop.old_x.to_bits() {
        return Err(Error::Consistency(format!(
            "stale proposal for coordinate {i}: built at t = {}, state at t = {}",
            sp.stamp, st.t
        )));
    }
    let delta = prop.new_x - prop.old_x;
    if delta != 0.0 {
        let (rows, vals) = p.matrix().column(i);
        let smooth = p.smooth();
        let mut df = 0.0;
        for (&r, &a) in rows.iter().zip(vals) {
            let old = st.ax[r];
            let new = old + delta * a;
            df += smooth.component_value(r, new) - smooth.component_value(r, old);
            st.ax[r] = new;
            st.w[r] = smooth.component_derivative(r, new);
        }
        df += p.separable().value(i, prop.new_x) - p.separable().value(i, prop.old_x);
        st.x[i] = prop.new_x;
        st.f += df;
        st.counters.col_passes += 1;
        st.counters.entries_touched += rows.len() as u64;
    }
    st.t += 1;
    if !st.f.is_finite() {
        return Err(Error::Numerical(format!(
            "F = {} after iteration {}: coordinate {i}, x_i {} -> {}, gap {}, kappa {}, r {}",
            st.f, st.t, prop.old_x, prop.new_x, prop.gap, prop.kappa, prop.marginal_decrease
        )));
    }
    Ok(())
}

/// Outcome of a single iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport {
    /// 1-based iteration number.
    pub t: u64,
    pub coordinate: usize,
    pub f_before: f64,
    pub f_after: f64,
    /// `r_i` before the update.
    pub marginal_decrease: f64,
    /// `r_i` after the update, when the strategy consumes it.
    pub post_marginal_decrease: Option<f64>,
    /// Whether fresh scores were computed for this iteration.
    pub refreshed: bool,
    pub new_x: f64,
}

/// Checks that a (problem, strategy, rule) triple can run together.
pub fn check_compatibility(p: &Problem, strategy: StrategyKind, rule: UpdateRule) -> Result<()> {
    rule.check_compatible(p.kind())?;
    if strategy.requires_differentiable() && !p.is_differentiable() {
        return Err(invalid(format!(
            "strategy {} needs a differentiable objective; {} has an L1 term, where \
             Gauss-Southwell would need a proximal subproblem (use max_r instead)",
            strategy.label(),
            p.kind().name()
        )));
    }
    if p.n_coords() == 0 {
        return Err(invalid("problem has no coordinates"));
    }
    Ok(())
}

/// Coordinate descent driven by a selection strategy.
#[derive(Debug, Clone)]
pub struct Solver<'p> {
    p: &'p Problem,
    state: SolverState,
    strategy: Strategy,
    rule: UpdateRule,
    started: bool,
    histogram: Vec<u64>,
    resync_every: u64,
}

impl<'p> Solver<'p> {
    pub fn new(
        p: &'p Problem,
        config: &StrategyConfig,
        rule: UpdateRule,
        seed: u64,
    ) -> Result<Self> {
        check_compatibility(p, config.kind, rule)?;
        Ok(Self {
            p,
            state: SolverState::zero(p)?,
            strategy: Strategy::new(config, p.n_coords(), seed)?,
            rule,
            started: false,
            histogram: vec![0; p.n_coords()],
            resync_every: RESYNC_EPOCHS * p.n_coords() as u64,
        })
    }

    pub fn problem(&self) -> &Problem {
        self.p
    }

    pub fn state(&self) -> &SolverState {
        &self.state
    }

    pub fn strategy(&self) -> &Strategy {
        &self.strategy
    }

    pub fn histogram(&self) -> &[u64] {
        &self.histogram
    }

    /// Recomputes the caches from `x`.
    pub fn resync(&mut self) -> Result<()> {
        self.state.resync(self.p)
    }

    fn refresh(&mut self) -> Result<()> {
        let kind = self
            .strategy
            .kind()
            .score_kind()
            .expect("refreshing strategies have a score kind");
        let scores = compute_scores(self.p, &mut self.state, kind)?;
        self.strategy.refresh_bin(&scores)
    }

    pub fn step(&mut self) -> Result<StepReport> {
        let p = self.p;
        let t = self.state.t + 1;
        let mut refreshed = false;
        if !self.started {
            self.started = true;
            if self.strategy.needs_initial_scores() {
                self.refresh()?;
                refreshed = true;
            }
        }
        if self.strategy.refresh_due(t) {
            self.refresh()?;
            refreshed = true;
        }

        let i = self.strategy.select();
        self.histogram[i] += 1;
        let f_before = self.state.f;
        let sp = propose(p, &mut self.state, &self.rule, i)?;
        apply_coordinate_step(p, &mut self.state, &sp)?;

        let post = if self.strategy.uses_feedback() {
            let view = self.state.view(p, i);
            let r = certificate(p, i, view)?.marginal_decrease;
            self.strategy.feedback(i, r)?;
            Some(r)
        } else {
            None
        };

        if self.state.t.is_multiple_of(self.resync_every) {
            self.state.resync(p)?;
        }

        Ok(StepReport {
            t,
            coordinate: i,
            f_before,
            f_after: self.state.f,
            marginal_decrease: sp.proposal.marginal_decrease,
            post_marginal_decrease: post,
            refreshed,
            new_x: sp.proposal.new_x,
        })
    }

    /// Resyncs the caches and evaluates the duality gap for a trace record.
    pub fn checkpoint(
        &mut self,
        started: Instant,
        f_star: Option<f64>,
        eta_max: f64,
    ) -> Result<TraceRecord> {
        self.state.resync(self.p)?;
        let (gap, per) = self.p.duality_gap(&self.state.x, &self.state.ax)?;
        let max_gap = per.iter().copied().fold(0.0, f64::max);
        let eta = if gap > 0.0 && max_gap > 0.0 {
            gap / max_gap
        } else {
            f64::NAN
        };
        let (subopt, subopt_source) = match f_star {
            Some(fs) => (self.state.f - fs, SuboptSource::Reference),
            None => (gap, SuboptSource::DualityGap),
        };
        let c = self.state.counters;
        Ok(TraceRecord {
            t: self.state.t,
            epoch: self.state.epoch(self.p),
            f: self.state.f,
            gap,
            subopt,
            subopt_source,
            eta,
            eta_max: if eta.is_nan() {
                eta_max
            } else {
                eta_max.max(eta)
            },
            elapsed_s: started.elapsed().as_secs_f64(),
            col_passes: c.col_passes,
            gap_evals: c.gap_evals,
            entries_touched: c.entries_touched,
            full_scores: c.full_scores,
            histogram_digest: trace::histogram_digest(&self.histogram),
        })
    }
}

/// Parameters of [`run`].
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub strategy: StrategyConfig,
    /// `None` picks the problem's default rule.
    pub rule: Option<UpdateRule>,
    pub epochs: f64,
    pub seed: u64,
    /// Iterations between trace records; `None` means one per epoch.
    pub trace_every: Option<u64>,
    pub f_star: Option<f64>,
    /// Check the certified decrease bound at every step.
    pub audit: bool,
    /// Stop at the first checkpoint whose duality gap is at most this.
    pub target_gap: Option<f64>,
    /// Record the first iteration with `F - f_star <= target` (needs `f_star`).
    pub subopt_targets: Vec<f64>,
    /// Stop once every suboptimality target has been reached.
    pub stop_on_targets: bool,
}

impl RunConfig {
    pub fn new(strategy: StrategyConfig, epochs: f64, seed: u64) -> Self {
        Self {
            strategy,
            rule: None,
            epochs,
            seed,
            trace_every: None,
            f_star: None,
            audit: false,
            target_gap: None,
            subopt_targets: Vec::new(),
            stop_on_targets: false,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AuditReport {
    pub steps: u64,
    /// Steps whose realized decrease fell short of `r - AUDIT_SLACK` (audit mode only).
    pub decrease_violations: u64,
    /// Largest `r - (F(x_t) - F(x_{t+1}))` seen.
    pub worst_shortfall: f64,
    /// Steps where `F` increased beyond the relative slack.
    pub monotone_violations: u64,
}

/// When a suboptimality target was first reached.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetHit {
    pub iteration: u64,
    pub epoch: f64,
    pub elapsed_s: f64,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub trace: Vec<TraceRecord>,
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: u64,
    pub counters: WorkCounters,
    pub audit: AuditReport,
    /// First iteration reaching each of `subopt_targets`.
    pub target_hits: Vec<Option<TargetHit>>,
    pub refreshes: u64,
    pub histogram: Vec<u64>,
    pub rule: UpdateRule,
}

/// Runs `ceil(epochs * d)` iterations (or until `target_gap`, or until all
/// suboptimality targets are hit with `stop_on_targets`), emitting a
/// trace record at `t = 0`, every `trace_every` iterations and at the end.
pub fn run(p: &Problem, config: &RunConfig) -> Result<RunResult> {
    if !(config.epochs > 0.0 && config.epochs.is_finite()) {
        return Err(invalid(format!(
            "epochs must be positive, got {}",
            config.epochs
        )));
    }
    if !config.subopt_targets.is_empty() && config.f_star.is_none() {
        return Err(invalid("suboptimality targets need a reference optimum"));
    }
    let rule = config.rule.unwrap_or(UpdateRule::default_for(p.kind()));
    let mut solver = Solver::new(p, &config.strategy, rule, config.seed)?;
    let d = p.n_coords() as u64;
    let total = (config.epochs * d as f64).ceil() as u64;
    let every = config.trace_every.unwrap_or(d).max(1);
    let started = Instant::now();

    let mut trace = Vec::new();
    let mut eta_max = f64::NAN;
    let mut record = |solver: &mut Solver, trace: &mut Vec<TraceRecord>| -> Result<bool> {
        let rec = solver.checkpoint(started, config.f_star, eta_max)?;
        eta_max = rec.eta_max;
        let done = config.target_gap.is_some_and(|g| rec.gap <= g);
        trace.push(rec);
        Ok(done)
    };

    let mut audit = AuditReport::default();
    let mut hits = vec![None; config.subopt_targets.len()];
    let check_hits = |f: f64, t: u64, hits: &mut Vec<Option<TargetHit>>| {
        if let Some(fs) = config.f_star {
            for (hit, &target) in hits.iter_mut().zip(&config.subopt_targets) {
                if hit.is_none() && f - fs <= target {
                    *hit = Some(TargetHit {
                        iteration: t,
                        epoch: t as f64 / d as f64,
                        elapsed_s: started.elapsed().as_secs_f64(),
                    });
                }
            }
        }
    };
    check_hits(solver.state().f, 0, &mut hits);

    let mut stopped = record(&mut solver, &mut trace)?;
    while !stopped && solver.state().t < total {
        let rep = solver.step()?;
        audit.steps += 1;
        let decrease = rep.f_before - rep.f_after;
        if rep.f_after > rep.f_before + MONOTONE_SLACK * rep.f_before.abs().max(1.0) {
            audit.monotone_violations += 1;
        }
        if config.audit {
            let shortfall = rep.marginal_decrease - decrease;
            audit.worst_shortfall = audit.worst_shortfall.max(shortfall);
            if shortfall > AUDIT_SLACK {
                audit.decrease_violations += 1;
            }
        }
        check_hits(rep.f_after, rep.t, &mut hits);
        let t = solver.state().t;
        let all_hit =
            config.stop_on_targets && !hits.is_empty() && hits.iter().all(Option::is_some);
        if t % every == 0 || t == total || all_hit {
            stopped = record(&mut solver, &mut trace)? || all_hit;
        }
    }

    let state = solver.state();
    Ok(RunResult {
        trace,
        x: state.x.clone(),
        f: state.f,
        iterations: state.t,
        counters: state.counters,
        audit,
        target_hits: hits,
        refreshes: solver.strategy().refresh_count(),
        histogram: solver.histogram().to_vec(),
        rule,
    })
}

/// Reference solution used to measure suboptimality.
#[derive(Debug, Clone)]
pub struct ReferenceOptimum {
    pub x: Vec<f64>,
    /// `F(x)`; within `gap` of the true optimum.
    pub f_star: f64,
    /// Duality gap at `x`, so `f_star - gap <= F* <= f_star`.
    pub gap: f64,
    /// Primal ridge solution for the ridge dual.
    pub primal: Option<Vec<f64>>,
}

fn dense(m: &crate::sparse::SparseColumnMatrix) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(m.n_rows(), m.n_cols());
    for j in 0..m.n_cols() {
        let (rows, vals) = m.column(j);
        for (&r, &v) in rows.iter().zip(vals) {
            out[(r, j)] = v;
        }
    }
    out
}

/// Solves `(c A^T A + diag) x = c A^T y` densely.
fn solve_regularized_normal_equations(
    a: &crate::sparse::SparseColumnMatrix,
    y: &[f64],
    c: f64,
    diag: f64,
) -> Result<Vec<f64>> {
    let a = dense(a);
    let y = DVector::from_column_slice(y);
    let d = a.ncols();
    let lhs = a.transpose() * &a * c + DMatrix::identity(d, d) * diag;
    let rhs = a.transpose() * y * c;
    let chol = lhs
        .cholesky()
        .ok_or_else(|| Error::Numerical("normal equations are not positive definite".into()))?;
    Ok(chol.solve(&rhs).iter().copied().collect())
}

/// Maximum iterations [`reference_optimum`] spends on iterative problems.
pub const REFERENCE_BUDGET_EPOCHS: u64 = 2000;

/// Reference optimum: a dense normal-equation solve for the quadratic
/// problems, a long uniform run until the duality gap is at most `tol`
/// otherwise.
pub fn reference_optimum(p: &Problem, tol: f64) -> Result<ReferenceOptimum> {
    let budget = REFERENCE_BUDGET_EPOCHS * p.n_coords() as u64 + 10_000;
    reference_optimum_with_budget(p, tol, budget)
}

pub fn reference_optimum_with_budget(
    p: &Problem,
    tol: f64,
    max_iterations: u64,
) -> Result<ReferenceOptimum> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(invalid(format!("tolerance must be positive, got {tol}")));
    }
    match p.kind() {
        ProblemKind::RidgeDual => {
            let ridge = p.ridge_primal().expect("ridge dual keeps its primal data");
            let n = ridge.data.n_samples() as f64;
            let primal = solve_regularized_normal_equations(
                &ridge.data.matrix,
                &ridge.data.labels,
                2.0 / n,
                ridge.lambda,
            )?;
            // alpha_j = -phi'(a_j^T x) = 2 (y_j - a_j^T x)
            let fitted = ridge.data.matrix.mul_vec(&primal)?;
            let alpha: Vec<f64> = ridge
                .data
                .labels
                .iter()
                .zip(&fitted)
                .map(|(y, v)| 2.0 * (y - v))
                .collect();
            finish_dense(p, alpha, Some(primal))
        }
        ProblemKind::L2LeastSquares => {
            let crate::problems::SmoothPart::Quadratic { target, curvature } = p.smooth() else {
                unreachable!("least squares smooth part");
            };
            let crate::problems::SeparablePart::Quadratic { weight, .. } = p.separable() else {
                unreachable!("l2 separable part");
            };
            let x =
                solve_regularized_normal_equations(p.matrix(), target, *curvature, 2.0 * weight)?;
            finish_dense(p, x, None)
        }
        ProblemKind::Lasso | ProblemKind::LogisticL1 => {
            let rule = UpdateRule::default_for(p.kind());
            let mut solver = Solver::new(p, &StrategyConfig::new(StrategyKind::Uniform), rule, 0)?;
            let check_every = p.n_coords() as u64;
            let mut best = (f64::INFINITY, f64::INFINITY);
            loop {
                solver.resync()?;
                let st = solver.state();
                let (gap, _) = p.duality_gap(&st.x, &st.ax)?;
                if gap < best.0 {
                    best = (gap, st.f);
                }
                if gap <= tol {
                    return Ok(ReferenceOptimum {
                        x: st.x.clone(),
                        f_star: st.f,
                        gap,
                        primal: None,
                    });
                }
                if st.t >= max_iterations {
                    return Err(Error::BudgetExceeded {
                        iterations: st.t,
                        best_gap: best.0,
                        best_value: best.1,
                    });
                }
                for _ in 0..check_every {
                    solver.step()?;
                }
            }
        }
    }
}

fn finish_dense(p: &Problem, x: Vec<f64>, primal: Option<Vec<f64>>) -> Result<ReferenceOptimum> {
    let ax = p.matrix().mul_vec(&x)?;
    let f_star = p.primal_value(&x, &ax)?;
    let (gap, _) = p.duality_gap(&x, &ax)?;
    Ok(ReferenceOptimum {
        x,
        f_star,
        gap,
        primal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{make_lasso, make_ridge_dual};
    use crate::sparse::{generate_synthetic, LabeledDataset, SparseColumnMatrix, SyntheticSpec};

    fn lasso_1x1() -> Problem {
        let data = LabeledDataset::new(
            SparseColumnMatrix::from_dense(&[vec![1.0]]).unwrap(),
            vec![1.0],
        )
        .unwrap();
        make_lasso(&data, 0.1).unwrap()
    }

    fn synthetic_lasso(n: usize, d: usize, seed: u64) -> Problem {
        let (data, _) = generate_synthetic(&SyntheticSpec {
            n,
            d,
            sparsity: 0.3,
            nnz_signal: 3,
            noise_sd: 0.1,
            seed,
        })
        .unwrap();
        make_lasso(&data, 0.05).unwrap()
    }

    #[test]
    fn single_coordinate_marginal_decrease() {
        let p = lasso_1x1();
        let mut st = SolverState::zero(&p).unwrap();
        let r = compute_all_marginal_decreases(&p, &mut st).unwrap();
        // G = 4.5, kappa = 5, beta = 1: s = 0.18, r = 0.18 * 4.5 / 2
        assert!((r[0] - 0.405).abs() < 1e-12);
        assert_eq!(st.counters.full_scores, 1);
        assert_eq!(st.counters.gap_evals, 1);
    }

    #[test]
    fn zero_step_only_advances_t() {
        let p = lasso_1x1();
        let mut st = SolverState::zero(&p).unwrap();
        let before = st.clone();
        let sp = StampedProposal {
            proposal: UpdateProposal {
                coordinate: 0,
                old_x: 0.0,
                new_x: 0.0,
                step: crate::updates::Step::Specialized,
                kappa: 0.0,
                gap: 0.0,
                marginal_decrease: 0.0,
            },
            stamp: 0,
        };
        apply_coordinate_step(&p, &mut st, &sp).unwrap();
        assert_eq!(st.t, 1);
        assert_eq!(st.x, before.x);
        assert_eq!(st.ax, before.ax);
        assert_eq!(st.f, before.f);
    }

    #[test]
    fn stale_proposals_are_rejected() {
        let p = lasso_1x1();
        let mut st = SolverState::zero(&p).unwrap();
        let sp = propose(&p, &mut st, &UpdateRule::LassoProx, 0).unwrap();
        apply_coordinate_step(&p, &mut st, &sp).unwrap();
        assert!(matches!(
            apply_coordinate_step(&p, &mut st, &sp),
            Err(Error::Consistency(_))
        ));
        assert!((st.x[0] - 0.9).abs() < 1e-15);
    }

    #[test]
    fn step_touches_only_the_column() {
        let p = synthetic_lasso(50, 30, 1);
        let mut st = SolverState::zero(&p).unwrap();
        let i = (0..30).find(|&j| p.matrix().col_nnz(j) > 0).unwrap();
        let before = st.counters;
        let sp = propose(&p, &mut st, &UpdateRule::Reference, i).unwrap();
        apply_coordinate_step(&p, &mut st, &sp).unwrap();
        let nnz = p.matrix().col_nnz(i) as u64;
        if sp.proposal.delta() != 0.0 {
            assert_eq!(
                st.counters.entries_touched - before.entries_touched,
                2 * nnz
            );
            assert_eq!(st.counters.col_passes - before.col_passes, 2);
        }
    }

    #[test]
    fn cache_drift_stays_small() {
        let p = synthetic_lasso(50, 30, 2);
        let mut solver = Solver::new(
            &p,
            &StrategyConfig::new(StrategyKind::Uniform),
            UpdateRule::LassoProx,
            3,
        )
        .unwrap();
        for _ in 0..1000 {
            solver.step().unwrap();
        }
        let st = solver.state();
        let fresh = p.matrix().mul_vec(&st.x).unwrap();
        let err: f64 = fresh
            .iter()
            .zip(&st.ax)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        let norm: f64 = fresh.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(err <= 1e-7 * (1.0 + norm), "drift {err}");
        let f = p.objective(&st.x).unwrap();
        assert!((f - st.f).abs() <= 1e-9 * f.abs().max(1.0));
    }

    #[test]
    fn gs_rejected_for_l1_problems() {
        let p = lasso_1x1();
        let err = Solver::new(
            &p,
            &StrategyConfig::new(StrategyKind::GaussSouthwell),
            UpdateRule::LassoProx,
            0,
        )
        .unwrap_err();
        assert!(err.to_string().contains("differentiable"));
        assert!(Solver::new(
            &p,
            &StrategyConfig::new(StrategyKind::MaxR),
            UpdateRule::RidgeExact,
            0
        )
        .is_err());
    }

    #[test]
    fn run_emits_one_record_per_epoch_plus_start() {
        let p = synthetic_lasso(40, 20, 4);
        let cfg = RunConfig::new(StrategyConfig::new(StrategyKind::BMaxR), 5.0, 1);
        let res = run(&p, &cfg).unwrap();
        assert_eq!(res.trace.len(), 6);
        assert_eq!(res.iterations, 100);
        assert_eq!(res.trace.last().unwrap().t, 100);
        assert_eq!(res.audit.monotone_violations, 0);
        // init + refreshes at t = 10, 20, ..., 100
        assert_eq!(res.refreshes, 100 / 10 + 1);
        for w in res.trace.windows(2) {
            assert!(w[1].f <= w[0].f + 1e-12 * w[0].f.abs().max(1.0));
        }
    }

    #[test]
    fn run_rejects_bad_config() {
        let p = lasso_1x1();
        let mut cfg = RunConfig::new(StrategyConfig::new(StrategyKind::Uniform), 0.0, 1);
        assert!(run(&p, &cfg).is_err());
        cfg.epochs = 1.0;
        cfg.subopt_targets = vec![1e-3];
        assert!(run(&p, &cfg).is_err());
    }

    #[test]
    fn target_gap_stops_early() {
        let p = synthetic_lasso(40, 20, 5);
        let mut cfg = RunConfig::new(StrategyConfig::new(StrategyKind::MaxR), 200.0, 1);
        cfg.target_gap = Some(1e-6);
        cfg.trace_every = Some(5);
        let res = run(&p, &cfg).unwrap();
        assert!(res.iterations < 4000);
        assert!(res.trace.last().unwrap().gap <= 1e-6);
    }

    #[test]
    fn lasso_reference_optimum_certificate() {
        let p = synthetic_lasso(40, 20, 6);
        let opt = reference_optimum(&p, 1e-9).unwrap();
        assert!(opt.gap <= 1e-9);
        assert!((p.objective(&opt.x).unwrap() - opt.f_star).abs() < 1e-12);
    }

    #[test]
    fn reference_budget_is_enforced() {
        let p = synthetic_lasso(40, 20, 7);
        assert!(matches!(
            reference_optimum_with_budget(&p, 1e-14, 5),
            Err(Error::BudgetExceeded { .. })
        ));
        assert!(reference_optimum(&p, 0.0).is_err());
    }

    #[test]
    fn ridge_reference_optimum_has_tiny_gap() {
        let (data, _) = generate_synthetic(&SyntheticSpec {
            n: 6,
            d: 4,
            sparsity: 1.0,
            nnz_signal: 2,
            noise_sd: 0.3,
            seed: 9,
        })
        .unwrap();
        let p = make_ridge_dual(&data, 0.2).unwrap();
        let opt = reference_optimum(&p, 1e-9).unwrap();
        assert!(opt.gap <= 1e-6, "gap {}", opt.gap);
        let x = p.primal_from_dual(&opt.x).unwrap();
        let primal = opt.primal.unwrap();
        for (a, b) in x.iter().zip(&primal) {
            assert!((a - b).abs() < 1e-9);
        }
    }
}
