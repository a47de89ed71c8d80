mod common;

use cdsel_core::problems::Problem;
use cdsel_core::updates::{
    verify_class_h, CoordinateUpdate, StateView, UpdateProposal, UpdateRule,
};
use cdsel_core::Result;
use common::{lasso, logistic, ridge};

/// Takes ten times the safe step; a negative control.
struct Overshoot;

impl CoordinateUpdate for Overshoot {
    fn name(&self) -> &str {
        "overshoot"
    }

    fn propose(&self, p: &Problem, i: usize, view: StateView) -> Result<UpdateProposal> {
        let mut prop = UpdateRule::Reference.propose(p, i, view)?;
        prop.new_x = view.x_i + 10.0 * (prop.new_x - view.x_i);
        if p.separable().support_bound(i).is_some() {
            prop.new_x = p.separable().project(i, prop.new_x);
        }
        Ok(prop)
    }
}

#[test]
fn specialized_rules_are_in_class_h() {
    let cases = [
        (lasso(60, 40, 1), UpdateRule::LassoProx),
        (logistic(60, 40, 2), UpdateRule::LogisticShrink),
        (ridge(30, 20, 3), UpdateRule::RidgeExact),
    ];
    for (p, rule) in &cases {
        for r in [*rule, UpdateRule::Reference] {
            let rep = verify_class_h(&r, p, 1000, 4).unwrap();
            assert_eq!(
                rep.violations,
                0,
                "{}: worst margin {}",
                r.label(),
                rep.worst_margin
            );
            assert_eq!(rep.trials, 1000);
        }
    }
}

#[test]
fn overshooting_rule_is_caught() {
    for p in [lasso(60, 40, 5), ridge(30, 20, 6)] {
        let rep = verify_class_h(&Overshoot, &p, 1000, 7).unwrap();
        assert!(rep.violations > 0, "{:?}", p.kind());
    }
}
