//! Behavior of the leximin balancing loop on the 12-item pool: exact top
//! case, trace invariants, and dominance against every feasible alternative.

mod common;

use common::{balanced_top4, pool};
use fairsel_core::constraints::DiversityConstraints;
use fairsel_core::dataset::{ItemIdx, Outcome};
use fairsel_core::leximin::{leximin_solve, LeximinError};
use fairsel_core::prefix::is_prefix_feasible;
use fairsel_core::{igf_vector, IgfMode, NoClock, Rat, SolverOptions};

const EPS: Rat = Rat::new_raw(1, 1000);

#[test]
fn unconstrained_pool_balances_at_one() {
    let ds = pool();
    let cons = DiversityConstraints::unconstrained(4);
    let trace = leximin_solve(
        &ds,
        &cons,
        IgfMode::Ratio,
        EPS,
        &SolverOptions::default(),
        &NoClock,
    )
    .unwrap();
    // The unconstrained top four leaves every group either untouched or
    // cleanly cut, so the common level reaches the ceiling in one round.
    assert_eq!(trace.rounds.len(), 1);
    assert_eq!(trace.rounds[0].q_star, Rat::new(1, 1));
    assert_eq!(trace.rounds[0].frozen.len(), 5);
    assert_eq!(trace.solution.objective, Some(388));
}

#[test]
fn trace_invariants_under_diversity_constraints() {
    let ds = pool();
    let cons = balanced_top4(&ds);
    let trace = leximin_solve(
        &ds,
        &cons,
        IgfMode::Ratio,
        EPS,
        &SolverOptions::default(),
        &NoClock,
    )
    .unwrap();

    // Levels never decrease across rounds, every group ends frozen, and
    // each round freezes at least one group.
    let mut prev = Rat::new(0, 1);
    for round in &trace.rounds {
        assert!(round.q_star >= prev, "q* dropped across rounds");
        assert!(!round.frozen.is_empty());
        prev = round.q_star;
    }
    let frozen: usize = trace.rounds.iter().map(|r| r.frozen.len()).sum();
    assert_eq!(frozen, 5);
    assert!(trace.bounds.entries().all(|(_, qb)| qb.frozen));

    // The final ranking satisfies the frozen floors exactly.
    let outcome = trace.solution.outcome.as_ref().unwrap();
    let vector = igf_vector(&ds, outcome, IgfMode::Ratio);
    for (v, qb) in trace.bounds.entries() {
        assert!(
            vector.values[&v] >= qb.q,
            "group {} below its frozen floor",
            ds.schema().value_name(v)
        );
    }
}

#[test]
fn leximin_outcome_dominates_every_feasible_alternative() {
    let ds = pool();
    let cons = balanced_top4(&ds);
    let opts = SolverOptions::default();
    for mode in [IgfMode::Ratio, IgfMode::Aggregated] {
        let trace = leximin_solve(&ds, &cons, mode, EPS, &opts, &NoClock).unwrap();
        let ours = igf_vector(&ds, trace.solution.outcome.as_ref().unwrap(), mode).sorted();

        // Enumerate every feasible 4-subset and compare sorted vectors
        // lexicographically; no alternative may beat ours by more than eps.
        let n = ds.len();
        for a in 0..n {
            for b in a + 1..n {
                for c in b + 1..n {
                    for d in c + 1..n {
                        let set: Vec<ItemIdx> = vec![a, b, c, d];
                        if !is_prefix_feasible(&ds, &set, &cons).unwrap() {
                            continue;
                        }
                        let outcome = Outcome::from_indices(&ds, set.clone()).unwrap();
                        let theirs = igf_vector(&ds, &outcome, mode).sorted();
                        assert!(
                            dominates_with_slack(&ours, &theirs, EPS + EPS),
                            "{mode}: {set:?} leximin-dominates the returned outcome"
                        );
                    }
                }
            }
        }
    }
}

/// Sorted vector `ours`, padded by `slack` per coordinate, is at least
/// `theirs` in exact lexicographic order.
fn dominates_with_slack(ours: &[Rat], theirs: &[Rat], slack: Rat) -> bool {
    for (x, y) in ours.iter().zip(theirs) {
        if *x + slack > *y {
            return true;
        }
        if *x + slack < *y {
            return false;
        }
    }
    true
}

#[test]
fn balancing_strictly_improves_on_the_diversity_optimum() {
    let ds = pool();
    let cons = balanced_top4(&ds);
    // The diversity-only utility optimum {A, B, G, K} bottoms out at
    // Female = 90/281 in aggregated mode.
    let before = Outcome::from_ids(&ds, &["A", "B", "G", "K"]).unwrap();
    let before_min = igf_vector(&ds, &before, IgfMode::Aggregated)
        .min_value()
        .unwrap();
    assert_eq!(before_min, Rat::new(90, 281));

    let trace = leximin_solve(
        &ds,
        &cons,
        IgfMode::Aggregated,
        EPS,
        &SolverOptions::default(),
        &NoClock,
    )
    .unwrap();
    let after_min = igf_vector(&ds, trace.solution.outcome.as_ref().unwrap(), IgfMode::Aggregated)
        .min_value()
        .unwrap();
    assert!(after_min > before_min);
    // Constraints only tighten: balanced utility cannot beat the
    // diversity-only optimum.
    assert!(trace.solution.objective.unwrap() <= 373);
}

#[test]
fn infeasible_constraints_are_reported() {
    let ds = pool();
    let asian = ds.schema().value_id("Asian").unwrap();
    let (cons, _) = DiversityConstraints::from_entries(4, &[(asian, 4, 5)]).unwrap();
    let err = leximin_solve(
        &ds,
        &cons,
        IgfMode::Ratio,
        EPS,
        &SolverOptions::default(),
        &NoClock,
    )
    .unwrap_err();
    assert!(matches!(err, LeximinError::Infeasible));
}

#[test]
fn epsilon_is_validated() {
    let ds = pool();
    let cons = DiversityConstraints::unconstrained(4);
    for bad in [Rat::new(0, 1), Rat::new(1, 1), Rat::new(3, 2)] {
        let err = leximin_solve(
            &ds,
            &cons,
            IgfMode::Ratio,
            bad,
            &SolverOptions::default(),
            &NoClock,
        )
        .unwrap_err();
        assert!(matches!(err, LeximinError::EpsOutOfRange));
    }
}
