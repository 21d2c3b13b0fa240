//! Exact optimal solvers over beliefs, a committing-order brute force for
//! disjoint-path graphs, and a QBF game-tree oracle.
//!
//! The belief-space solver works layer by layer: beliefs sharing the same
//! knowledge differ only in position, and moving over known-open edges
//! reveals nothing until a vertex with unknown incident edges is reached,
//! so each layer is a shortest-path problem towards its exits (the target,
//! frontier vertices, sensing actions) whose values come from strictly
//! larger knowledge sets.

mod disjoint;
mod engine;
mod qbf;

pub use disjoint::{decompose_paths, solve_disjoint_bruteforce, MAX_PATHS};
pub use engine::{OptResult, SolveStats, DEFAULT_STATE_CAP};
pub use qbf::{parse_qdimacs, qbf_eval, winning_choice, QbfError, QbfFormula};

use crate::model::{CtpInstance, ModelError, Variant};
use crate::policy::PolicyError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolveError {
    #[error("belief space exceeds the cap of {cap} states")]
    CapExceeded { cap: usize },
    #[error("{solver} needs an {expected} instance, got {found}")]
    WrongVariant {
        solver: &'static str,
        expected: &'static str,
        found: &'static str,
    },
    #[error("not an edge-disjoint path graph: {0}")]
    NotDisjoint(String),
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Exact optimum for any variant, memoizing at most `cap` beliefs.
pub fn solve(inst: &CtpInstance, cap: usize) -> Result<OptResult, SolveError> {
    engine::on_big_stack(|| engine::Engine::new(inst, cap).run())
}

fn expect_variant(
    inst: &CtpInstance,
    solver: &'static str,
    expected: &'static str,
) -> Result<(), SolveError> {
    let found = inst.variant().name();
    if found == expected {
        Ok(())
    } else {
        Err(SolveError::WrongVariant {
            solver,
            expected,
            found,
        })
    }
}

pub fn solve_independent(inst: &CtpInstance) -> Result<OptResult, SolveError> {
    expect_variant(inst, "solve_independent", Variant::Independent.name())?;
    solve(inst, DEFAULT_STATE_CAP)
}

/// Branch probabilities are posteriors given everything revealed so far.
pub fn solve_dependent(inst: &CtpInstance) -> Result<OptResult, SolveError> {
    expect_variant(inst, "solve_dependent", "dependent")?;
    solve(inst, DEFAULT_STATE_CAP)
}

/// Sensing actions compete with moves at every belief.
pub fn solve_sensing(inst: &CtpInstance) -> Result<OptResult, SolveError> {
    expect_variant(inst, "solve_sensing", "sensing")?;
    solve(inst, DEFAULT_STATE_CAP)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{DependencyNet, InstanceBuilder, SensingCostMap};
    use crate::numeric::{q, Cost, Rational};
    use crate::policy::{evaluate_exact, Action};

    fn pair(cheap_blocking: Rational) -> CtpInstance {
        let mut b = InstanceBuilder::new();
        let s = b.add_vertex("s");
        let t = b.add_vertex("t");
        b.add_uncertain("cheap", s, t, q(1, 1), cheap_blocking);
        b.add_sure("dear", s, t, q(3, 1));
        b.set_source(s);
        b.set_target(t);
        b.build().unwrap()
    }

    #[test]
    fn sure_edge() {
        let mut b = InstanceBuilder::new();
        let s = b.add_vertex("s");
        let t = b.add_vertex("t");
        let e = b.add_sure("st", s, t, q(5, 1));
        b.set_source(s);
        b.set_target(t);
        let inst = b.build().unwrap();
        let r = solve_independent(&inst).unwrap();
        assert_eq!(r.optimal_cost, Cost::finite(5));
        assert_eq!(r.optimal_first_action, Some(Action::Move(e)));
    }

    #[test]
    fn two_parallel_edges() {
        let inst = pair(q(1, 2));
        let r = solve_independent(&inst).unwrap();
        assert_eq!(r.optimal_cost, Cost::finite(2));
        assert_eq!(r.optimal_first_action, None);
        assert_eq!(
            evaluate_exact(&inst, &r.as_policy()).unwrap().expected_cost,
            r.optimal_cost
        );
        assert_eq!(
            solve_disjoint_bruteforce(&inst).unwrap().optimal_cost,
            r.optimal_cost
        );
    }

    #[test]
    fn unreachable_branch_is_infinite() {
        let mut b = InstanceBuilder::new();
        let s = b.add_vertex("s");
        let t = b.add_vertex("t");
        b.add_uncertain("only", s, t, q(1, 1), q(1, 3));
        b.set_source(s);
        b.set_target(t);
        let r = solve_independent(&b.build().unwrap()).unwrap();
        assert_eq!(r.optimal_cost, Cost::Infinite);
    }

    #[test]
    fn wrong_variant() {
        assert!(matches!(
            solve_dependent(&pair(q(1, 2))),
            Err(SolveError::WrongVariant { .. })
        ));
        assert!(matches!(
            solve_sensing(&pair(q(1, 2))),
            Err(SolveError::WrongVariant { .. })
        ));
    }

    #[test]
    fn exclusive_pair_posterior() {
        // probe and far are mutually exclusive
        let mut b = InstanceBuilder::new();
        let s = b.add_vertex("s");
        let x = b.add_vertex("x");
        let y = b.add_vertex("y");
        let t = b.add_vertex("t");
        let probe = b.add_uncertain("probe", s, x, q(0, 1), q(1, 2));
        b.add_sure("sy", s, y, q(1, 1));
        let far = b.add_uncertain("far", y, t, q(0, 1), q(1, 2));
        b.add_sure("st", s, t, q(10, 1));
        b.add_sure("xs", x, t, q(10, 1));
        let mut net = DependencyNet::new(1);
        let c = net.add_coin("c", Some(probe), q(1, 2));
        net.add_copy("c'", Some(far), c, true);
        b.set_variant(Variant::Dependent(net));
        b.set_source(s);
        b.set_target(t);
        let inst = b.build().unwrap();
        let r = solve_dependent(&inst).unwrap();
        // seeing probe at s tells whether far is open
        assert_eq!(
            r.optimal_cost,
            Cost::Finite(q(1, 2) * q(1, 1) + q(1, 2) * q(10, 1))
        );
        assert_eq!(
            evaluate_exact(&inst, &r.as_policy()).unwrap().expected_cost,
            r.optimal_cost
        );
    }

    #[test]
    fn free_sense_is_worth_it() {
        let mut b = InstanceBuilder::new();
        let s = b.add_vertex("s");
        let x = b.add_vertex("x");
        let t = b.add_vertex("t");
        b.add_sure("sx", s, x, q(1, 1));
        let xt = b.add_uncertain("xt", x, t, q(0, 1), q(1, 2));
        b.add_sure("st", s, t, q(3, 1));
        let mut map = SensingCostMap::new();
        map.insert(s, xt, Cost::zero());
        b.set_variant(Variant::Sensing(map));
        b.set_source(s);
        b.set_target(t);
        let inst = b.build().unwrap();
        let r = solve_sensing(&inst).unwrap();
        assert_eq!(r.optimal_cost, Cost::finite(2));
        assert_eq!(r.optimal_first_action, Some(Action::Sense(xt)));
        assert_eq!(
            evaluate_exact(&inst, &r.as_policy()).unwrap().expected_cost,
            r.optimal_cost
        );
    }

    #[test]
    fn cap_is_enforced() {
        let inst = pair(q(1, 2));
        assert!(matches!(
            solve(&inst, 0),
            Err(SolveError::CapExceeded { cap: 0 })
        ));
    }
}
