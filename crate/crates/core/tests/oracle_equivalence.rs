//! Randomized cross-check of the branch-and-bound solver against the
//! exhaustive oracle on pools small enough to enumerate.

mod common;

use common::random_instance;
use fairsel_core::{brute_force_solve, build_model, solve_ip, SolveStatus, SolverOptions};

#[test]
fn solver_matches_oracle_on_random_instances() {
    for seed in 0..60u64 {
        let inst = random_instance(seed);
        let prog = build_model(&inst.ds, &inst.cons, &inst.bounds).expect("buildable");
        let sol = solve_ip(&inst.ds, &prog, &SolverOptions::default()).expect("solve");
        let oracle = brute_force_solve(&inst.ds, &inst.cons, &inst.bounds).expect("oracle");

        assert_eq!(
            sol.status, oracle.status,
            "status mismatch on seed {seed}"
        );
        assert_eq!(
            sol.objective, oracle.objective,
            "objective mismatch on seed {seed}"
        );
        if sol.status == SolveStatus::Optimal {
            let mut got = common::ids(&inst.ds, sol.outcome.as_ref().unwrap());
            let mut want = common::ids(&inst.ds, oracle.outcome.as_ref().unwrap());
            got.sort();
            want.sort();
            assert_eq!(got, want, "tie-break mismatch on seed {seed}");
        }
    }
}

#[test]
fn solver_ranking_matches_oracle_ranking_exactly() {
    // Both sides promise the lexicographically smallest feasible ordering of
    // the lexicographically smallest optimal set.
    for seed in 100..130u64 {
        let inst = random_instance(seed);
        let prog = build_model(&inst.ds, &inst.cons, &inst.bounds).expect("buildable");
        let sol = solve_ip(&inst.ds, &prog, &SolverOptions::default()).expect("solve");
        let oracle = brute_force_solve(&inst.ds, &inst.cons, &inst.bounds).expect("oracle");
        assert_eq!(sol.objective, oracle.objective, "seed {seed}");
        if sol.status == SolveStatus::Optimal {
            assert_eq!(
                common::ids(&inst.ds, sol.outcome.as_ref().unwrap()),
                common::ids(&inst.ds, oracle.outcome.as_ref().unwrap()),
                "ranking mismatch on seed {seed}"
            );
        }
    }
}
