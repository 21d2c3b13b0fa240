use ctp_core::model::random;
use ctp_core::policy::{evaluate_by_weathers, evaluate_exact};
use ctp_core::reductions::normalize_half_prob;
use ctp_core::solve::{solve_disjoint_bruteforce, solve_independent};
use ctp_core::DEFAULT_ENUMERATION_CAP;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn disjoint_paths_match_the_solver(seed in any::<u64>()) {
        let inst = random::disjoint_paths(seed, 4, 3);
        let brute = solve_disjoint_bruteforce(&inst).unwrap().optimal_cost;
        prop_assert_eq!(brute, solve_independent(&inst).unwrap().optimal_cost);
    }

    #[test]
    fn normalization_keeps_the_optimum(seed in any::<u64>(), uncertain in 1usize..5) {
        let inst = random::toy(seed, uncertain, true);
        let out = normalize_half_prob(&inst).unwrap();
        prop_assert_eq!(solve_independent(&out).unwrap().optimal_cost, solve_independent(&inst).unwrap().optimal_cost);
    }

    #[test]
    fn optimal_tree_evaluates_consistently(seed in any::<u64>(), uncertain in 1usize..5) {
        let inst = random::toy(seed, uncertain, false);
        let opt = solve_independent(&inst).unwrap();
        let policy = opt.as_policy();
        let tree = evaluate_exact(&inst, &policy).unwrap().expected_cost;
        prop_assert_eq!(&tree, &opt.optimal_cost);
        prop_assert_eq!(evaluate_by_weathers(&inst, &policy, DEFAULT_ENUMERATION_CAP).unwrap().expected_cost, tree);
    }
}
