use ctp_core::gadgets::{baiting_c_pi, baiting_harness};
use ctp_core::policy::{evaluate_by_weathers, evaluate_exact, reference_policy, Action};
use ctp_core::solve::solve_independent;
use ctp_core::{q, Cost, DEFAULT_ENUMERATION_CAP};

#[test]
fn baiting_pi_is_optimal_at_small_l() {
    for l in [q(3, 2), q(2, 1)] {
        let inst = baiting_harness(&l).unwrap();
        let expected = baiting_c_pi(&l, &l).unwrap();
        let pi = reference_policy("baiting_pi", &[]).unwrap();
        assert_eq!(
            evaluate_exact(&inst, &pi).unwrap().expected_cost,
            Cost::Finite(expected.clone())
        );
        let r = solve_independent(&inst).unwrap();
        assert_eq!(r.optimal_cost, Cost::Finite(expected));
        let e0 = inst.edge_id("bg.e0").unwrap();
        assert_eq!(r.optimal_first_action, Some(Action::Move(e0)));
        assert_eq!(
            evaluate_exact(&inst, &r.as_policy()).unwrap().expected_cost,
            r.optimal_cost
        );
        assert_eq!(
            evaluate_by_weathers(&inst, &pi, DEFAULT_ENUMERATION_CAP)
                .unwrap()
                .expected_cost,
            r.optimal_cost
        );
    }
}
