mod common;

use cdsel_core::engine::{
    apply_coordinate_step, compute_all_marginal_decreases, compute_scores, propose, run, RunConfig,
    Solver, SolverState,
};
use cdsel_core::oracle::{oracle_eval, oracle_objective};
use cdsel_core::problems::{make_l2_least_squares, Problem};
use cdsel_core::selection::{ScoreKind, StrategyConfig, StrategyKind};
use cdsel_core::updates::UpdateRule;
use common::{argmax, lasso, logistic, ridge, states};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rules_for(p: &Problem) -> Vec<UpdateRule> {
    UpdateRule::ALL
        .into_iter()
        .filter(|r| r.supports(p.kind()))
        .collect()
}

#[test]
fn certified_decrease_on_random_states() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for p in [lasso(40, 25, 1), logistic(40, 25, 1), ridge(25, 15, 1)] {
        for rule in rules_for(&p) {
            for x in states(&p, 1000, 2) {
                let i = rng.random_range(0..p.n_coords());
                let mut st = SolverState::from_x(&p, x.clone()).unwrap();
                let sp = propose(&p, &mut st, &rule, i).unwrap();
                let mut y = x.clone();
                y[i] = sp.proposal.new_x;
                let drop = oracle_objective(&p, &x).unwrap() - oracle_objective(&p, &y).unwrap();
                assert!(
                    drop >= sp.proposal.marginal_decrease - 1e-9,
                    "{:?}/{}: drop {drop} < r {}",
                    p.kind(),
                    rule.label(),
                    sp.proposal.marginal_decrease
                );
            }
        }
    }
}

#[test]
fn caches_agree_with_oracle_after_many_steps() {
    for p in [lasso(50, 30, 3), logistic(50, 30, 3), ridge(30, 20, 3)] {
        let mut solver = Solver::new(
            &p,
            &StrategyConfig::new(StrategyKind::BMaxR),
            UpdateRule::default_for(p.kind()),
            4,
        )
        .unwrap();
        for _ in 0..1000 {
            solver.step().unwrap();
        }
        let st = solver.state();
        let snap = oracle_eval(&p, &st.x).unwrap();
        let drift: f64 = st
            .ax
            .iter()
            .zip(&snap.ax)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        assert!(drift <= 1e-7, "{:?}: drift {drift}", p.kind());
        assert!((st.f - snap.f).abs() <= 1e-7);
        let (gap, per) = p.duality_gap(&st.x, &st.ax).unwrap();
        assert!((gap - snap.gap()).abs() <= 1e-7);
        for (a, b) in per.iter().zip(&snap.gaps) {
            assert!((a - b).abs() <= 1e-7);
        }
    }
}

#[test]
fn gauss_southwell_equals_max_r_on_normalized_quadratic() {
    let data = common::synthetic(40, 30, 5);
    let (normalized, _) = data.normalized();
    let p = make_l2_least_squares(&normalized, 0.05).unwrap();
    for x in states(&p, 100, 6) {
        let mut st = SolverState::from_x(&p, x).unwrap();
        let r = compute_all_marginal_decreases(&p, &mut st).unwrap();
        let g = compute_scores(&p, &mut st, ScoreKind::GradientMagnitude).unwrap();
        assert_eq!(argmax(&r), argmax(&g));
    }
}

#[test]
fn greedy_bandit_with_unit_bins_replays_max_r() {
    let p = lasso(60, 40, 7);
    let rule = UpdateRule::LassoProx;
    let bandit = StrategyConfig::new(StrategyKind::BMaxR)
        .with_epsilon(0.0)
        .with_bin_size(1);
    let mut a = Solver::new(&p, &bandit, rule, 1).unwrap();
    let mut b = Solver::new(&p, &StrategyConfig::new(StrategyKind::MaxR), rule, 2).unwrap();
    for _ in 0..400 {
        let (ra, rb) = (a.step().unwrap(), b.step().unwrap());
        assert_eq!(ra.coordinate, rb.coordinate);
        assert_eq!(ra.new_x.to_bits(), rb.new_x.to_bits());
    }
    let bits = |s: &Solver| s.state().x.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&a), bits(&b));
}

#[test]
fn refresh_count_is_floor_t_over_e_plus_one() {
    let p = lasso(30, 20, 8);
    for (bin, iterations) in [(1, 37), (3, 40), (10, 100), (10, 99), (7, 5)] {
        for kind in [StrategyKind::BMaxR, StrategyKind::GapPerEpoch] {
            let cfg = StrategyConfig::new(kind).with_bin_size(bin);
            let mut solver = Solver::new(&p, &cfg, UpdateRule::LassoProx, 0).unwrap();
            for _ in 0..iterations {
                solver.step().unwrap();
            }
            assert_eq!(
                solver.strategy().refresh_count(),
                iterations / bin as u64 + 1
            );
            assert_eq!(
                solver.state().counters.full_scores,
                iterations / bin as u64 + 1
            );
        }
    }
}

#[test]
fn bandit_epoch_costs() {
    let p = lasso(50, 30, 9);
    let d = p.n_coords() as u64;
    let mut solver = Solver::new(
        &p,
        &StrategyConfig::new(StrategyKind::BMaxR),
        UpdateRule::LassoProx,
        3,
    )
    .unwrap();
    // the first epoch also pays for the initial scores
    for _ in 0..d {
        solver.step().unwrap();
    }
    for _ in 0..5 {
        let start = solver.state().counters.full_scores;
        for _ in 0..d {
            let before = solver.state().counters;
            let rep = solver.step().unwrap();
            let after = solver.state().counters;
            if !rep.refreshed {
                let nnz = p.matrix().col_nnz(rep.coordinate) as u64;
                assert_eq!(after.gap_evals - before.gap_evals, 2);
                assert!(after.entries_touched - before.entries_touched <= 3 * nnz);
                assert_eq!(after.full_scores, before.full_scores);
            }
        }
        assert_eq!(solver.state().counters.full_scores - start, 2);
    }
}

#[test]
fn every_strategy_descends_monotonically() {
    for p in [lasso(60, 30, 10), logistic(60, 30, 10), ridge(30, 20, 10)] {
        for kind in StrategyKind::ALL {
            if kind.requires_differentiable() && !p.is_differentiable() {
                continue;
            }
            let mut cfg = RunConfig::new(StrategyConfig::new(kind), 10.0, 11);
            cfg.audit = true;
            let res = run(&p, &cfg).unwrap();
            assert_eq!(
                res.audit.monotone_violations,
                0,
                "{:?}/{}",
                p.kind(),
                kind.label()
            );
            assert_eq!(
                res.audit.decrease_violations,
                0,
                "{:?}/{}",
                p.kind(),
                kind.label()
            );
            assert!(res.trace.last().unwrap().gap < res.trace[0].gap);
        }
    }
}

#[test]
fn stale_proposal_is_not_applied() {
    let p = lasso(20, 10, 12);
    let mut st = SolverState::zero(&p).unwrap();
    let first = propose(&p, &mut st, &UpdateRule::LassoProx, 0).unwrap();
    let second = propose(&p, &mut st, &UpdateRule::LassoProx, 1).unwrap();
    apply_coordinate_step(&p, &mut st, &first).unwrap();
    let x = st.x.clone();
    assert!(apply_coordinate_step(&p, &mut st, &second).is_err());
    assert_eq!(st.x, x);
}
