//! The worked selection example on the 12-item pool: known optimum, known
//! fairness values, and the interaction between fairness bounds and utility.

mod common;

use common::{balanced_top4, ids, pool, v};
use fairsel_core::{
    brute_force_solve, build_model, igf_aggregated, igf_ratio, igf_vector, solve_ip,
    DiversityConstraints, IgfBounds, IgfMode, Outcome, Rat, SolveStatus, SolverOptions,
};

#[test]
fn diversity_only_optimum_is_abgk() {
    let ds = pool();
    let cons = balanced_top4(&ds);
    let bounds = IgfBounds::unconstrained(IgfMode::Ratio);
    let prog = build_model(&ds, &cons, &bounds).unwrap();
    let sol = solve_ip(&ds, &prog, &SolverOptions::default()).unwrap();
    assert_eq!(sol.status, SolveStatus::Optimal);
    assert_eq!(sol.objective, Some(373));
    let outcome = sol.outcome.unwrap();
    let mut selected = ids(&ds, &outcome);
    selected.sort();
    assert_eq!(selected, ["A", "B", "G", "K"]);
}

#[test]
fn oracle_agrees_on_the_worked_example() {
    let ds = pool();
    let cons = balanced_top4(&ds);
    let bounds = IgfBounds::unconstrained(IgfMode::Ratio);
    let oracle = brute_force_solve(&ds, &cons, &bounds).unwrap();
    assert_eq!(oracle.objective, Some(373));
    let mut selected = ids(&ds, &oracle.outcome.unwrap());
    selected.sort();
    assert_eq!(selected, ["A", "B", "G", "K"]);
}

#[test]
fn fairness_values_of_the_optimum() {
    let ds = pool();
    let outcome = Outcome::from_ids(&ds, &["A", "B", "G", "K"]).unwrap();

    assert_eq!(
        igf_ratio(&ds, &outcome, v(&ds, "Female")).unwrap(),
        Rat::new(86, 96)
    );
    assert_eq!(
        igf_ratio(&ds, &outcome, v(&ds, "Black")).unwrap(),
        Rat::new(90, 91)
    );
    assert_eq!(
        igf_ratio(&ds, &outcome, v(&ds, "Asian")).unwrap(),
        Rat::new(86, 87)
    );
    // All male/white members at or above every rejected peer.
    assert_eq!(igf_ratio(&ds, &outcome, v(&ds, "Male")).unwrap(), Rat::new(1, 1));
    assert_eq!(igf_ratio(&ds, &outcome, v(&ds, "White")).unwrap(), Rat::new(1, 1));

    // Aggregated: G carries 90 of the 91+91+90 = 272 mass at or above her.
    assert_eq!(
        igf_aggregated(&ds, &outcome, v(&ds, "Black")).unwrap(),
        Rat::new(90, 272)
    );
    // Female: min(90/281 for G, 176/456 for K) = 90/281.
    assert_eq!(
        igf_aggregated(&ds, &outcome, v(&ds, "Female")).unwrap(),
        Rat::new(90, 281)
    );

    let vector = igf_vector(&ds, &outcome, IgfMode::Ratio);
    let expected = [
        ("White", Rat::new(1, 1)),
        ("Black", Rat::new(90, 91)),
        ("Asian", Rat::new(86, 87)),
        ("Male", Rat::new(1, 1)),
        ("Female", Rat::new(86, 96)),
    ];
    for (name, want) in expected {
        assert_eq!(vector.values[&v(&ds, name)], want, "group {name}");
    }
    assert_eq!(vector.min_value(), Some(Rat::new(86, 96)));
}

#[test]
fn ratio_bound_above_86_96_changes_the_optimum() {
    let ds = pool();
    let cons = balanced_top4(&ds);
    // Demanding more than 86/96 for Female rules out {A, B, G, K}.
    let mut bounds = IgfBounds::unconstrained(IgfMode::Ratio);
    bounds
        .set(v(&ds, "Female"), Rat::new(9, 10), false)
        .unwrap();
    let prog = build_model(&ds, &cons, &bounds).unwrap();
    let sol = solve_ip(&ds, &prog, &SolverOptions::default()).unwrap();
    assert_eq!(sol.status, SolveStatus::Optimal);
    let outcome = sol.outcome.unwrap();
    let achieved = igf_ratio(&ds, &outcome, v(&ds, "Female")).unwrap();
    assert!(achieved >= Rat::new(9, 10));
    assert!(sol.objective.unwrap() < 373);

    let oracle = brute_force_solve(&ds, &cons, &bounds).unwrap();
    assert_eq!(sol.objective, oracle.objective);
}

#[test]
fn unconstrained_top_four() {
    let ds = pool();
    let cons = DiversityConstraints::unconstrained(4);
    let bounds = IgfBounds::unconstrained(IgfMode::Ratio);
    let prog = build_model(&ds, &cons, &bounds).unwrap();
    let sol = solve_ip(&ds, &prog, &SolverOptions::default()).unwrap();
    assert_eq!(sol.objective, Some(388));
    let mut selected = ids(&ds, &sol.outcome.unwrap());
    selected.sort();
    assert_eq!(selected, ["A", "B", "C", "D"]);
}

#[test]
fn infeasible_when_a_group_cannot_fill_its_quota() {
    let ds = pool();
    // Five Asians in the top 4 is impossible.
    let (cons, _) =
        DiversityConstraints::from_entries(4, &[(v(&ds, "Asian"), 4, 5)]).unwrap();
    let bounds = IgfBounds::unconstrained(IgfMode::Ratio);
    let prog = build_model(&ds, &cons, &bounds).unwrap();
    let sol = solve_ip(&ds, &prog, &SolverOptions::default()).unwrap();
    assert_eq!(sol.status, SolveStatus::Infeasible);
    assert!(sol.outcome.is_none());

    let oracle = brute_force_solve(&ds, &cons, &bounds).unwrap();
    assert_eq!(oracle.status, SolveStatus::Infeasible);
}
