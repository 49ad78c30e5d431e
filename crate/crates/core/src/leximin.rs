//! Leximin balancing of the per-group fairness guarantees.
//!
//! Each round raises a shared lower bound q on every still-unfrozen group by
//! binary search over feasibility probes, identifies the groups that cannot
//! go higher (the binding ones), freezes them at the achieved level, and
//! repeats with the rest. The search interval is [0, 1]; an exact probe at
//! q = 1 short-circuits the degenerate top case. The loop runs at most one
//! round per group, since every round freezes at least one.

use alloc::vec::Vec;
use core::fmt;

use num_traits::{One, Zero};

use crate::constraints::DiversityConstraints;
use crate::dataset::{Dataset, ValueId};
use crate::metrics::{igf_vector, IgfMode};
use crate::model::{build_model, IgfBounds, ModelError};
use crate::solver::{feasibility_probe, solve_ip_with_clock, Clock, SolveError, Solution, SolverOptions};
use crate::Rat;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchStep {
    pub lo: Rat,
    pub hi: Rat,
    pub mid: Rat,
    pub feasible: bool,
}

#[derive(Debug, Clone)]
pub struct LeximinRound {
    pub steps: Vec<SearchStep>,
    /// Certified common level: feasible at q_star, infeasible (or capped)
    /// within eps above it.
    pub q_star: Rat,
    pub frozen: Vec<ValueId>,
}

#[derive(Debug, Clone)]
pub struct LeximinTrace {
    pub rounds: Vec<LeximinRound>,
    /// Final per-group bounds, all frozen.
    pub bounds: IgfBounds,
    /// Utility-optimal ranking under the final bounds.
    pub solution: Solution,
    /// Total feasibility probes across the whole run.
    pub probes: u64,
}

#[derive(Debug, Clone)]
pub enum LeximinError {
    Solve(SolveError),
    Model(ModelError),
    /// The diversity constraints alone admit no feasible ranking.
    Infeasible,
    EpsOutOfRange,
    NoGroups,
}

impl fmt::Display for LeximinError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LeximinError::Solve(e) => write!(f, "{e}"),
            LeximinError::Model(e) => write!(f, "{e}"),
            LeximinError::Infeasible => {
                write!(f, "no ranking satisfies the diversity constraints")
            }
            LeximinError::EpsOutOfRange => write!(f, "epsilon must lie in (0, 1)"),
            LeximinError::NoGroups => write!(f, "no non-empty group to balance"),
        }
    }
}

impl From<SolveError> for LeximinError {
    fn from(e: SolveError) -> Self {
        LeximinError::Solve(e)
    }
}

impl From<ModelError> for LeximinError {
    fn from(e: ModelError) -> Self {
        LeximinError::Model(e)
    }
}

/// Bounds with every unfrozen group raised to q; frozen entries unchanged.
fn with_unfrozen_q(bounds: &IgfBounds, q: Rat) -> IgfBounds {
    let mut out = bounds.clone();
    for (v, qb) in bounds.entries() {
        if !qb.frozen {
            out.set(v, q, false).expect("q within [0, 1]");
        }
    }
    out
}

/// Binary search for the largest common bound the unfrozen groups can carry
/// simultaneously, to within eps. Returns the certified level and the probe
/// log; the caller's frozen entries are held fixed throughout.
pub fn maximin_q(
    ds: &Dataset,
    constraints: &DiversityConstraints,
    bounds: &IgfBounds,
    eps: Rat,
    options: &SolverOptions,
    clock: &dyn Clock,
    probes: &mut u64,
) -> Result<(Rat, Vec<SearchStep>), LeximinError> {
    let mut steps = Vec::new();
    let unfrozen: Vec<ValueId> = bounds
        .entries()
        .filter(|(_, qb)| !qb.frozen)
        .map(|(v, _)| v)
        .collect();
    // Certified start for the bisection. On the first round a witness solve
    // at the current floors seeds lo with its weakest unfrozen guarantee; on
    // later rounds the previous round already certified the shared floor.
    let floor = bounds
        .entries()
        .filter(|(_, qb)| !qb.frozen)
        .map(|(_, qb)| qb.q)
        .max()
        .unwrap_or_else(Rat::zero);
    let mut lo = floor;
    if floor.is_zero() {
        let prog = build_model(ds, constraints, bounds)?;
        *probes += 1;
        let witness = solve_ip_with_clock(ds, &prog, options, clock)?;
        let outcome = witness.outcome.ok_or(LeximinError::Infeasible)?;
        let vector = igf_vector(ds, &outcome, bounds.mode);
        lo = unfrozen
            .iter()
            .map(|v| vector.values[v])
            .min()
            .unwrap_or_else(Rat::zero);
        steps.push(SearchStep {
            lo,
            hi: Rat::one(),
            mid: lo,
            feasible: true,
        });
    }

    let mut probe = |q: Rat, lo: Rat, hi: Rat| -> Result<bool, LeximinError> {
        let candidate = with_unfrozen_q(bounds, q);
        *probes += 1;
        let feasible = feasibility_probe(ds, constraints, &candidate, options, clock)?;
        steps.push(SearchStep {
            lo,
            hi,
            mid: q,
            feasible,
        });
        Ok(feasible)
    };

    if probe(Rat::one(), lo, Rat::one())? {
        return Ok((Rat::one(), steps));
    }
    let mut hi = Rat::one();
    while hi - lo > eps {
        let mid = (lo + hi) / Rat::from_integer(2);
        if probe(mid, lo, hi)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo, steps))
}

/// Full leximin loop: repeatedly maximize the common bound of the unfrozen
/// groups, freeze the binding ones, and finish with a utility-optimal solve
/// under the final per-group bounds.
pub fn leximin_solve(
    ds: &Dataset,
    constraints: &DiversityConstraints,
    mode: IgfMode,
    eps: Rat,
    options: &SolverOptions,
    clock: &dyn Clock,
) -> Result<LeximinTrace, LeximinError> {
    if eps <= Rat::zero() || eps >= Rat::one() {
        return Err(LeximinError::EpsOutOfRange);
    }
    let mut bounds = IgfBounds::uniform(ds, mode, Rat::zero())?;
    if bounds.entries().next().is_none() {
        return Err(LeximinError::NoGroups);
    }

    let mut rounds = Vec::new();
    let mut probes: u64 = 0;
    loop {
        let unfrozen: Vec<ValueId> = bounds
            .entries()
            .filter(|(_, qb)| !qb.frozen)
            .map(|(v, _)| v)
            .collect();
        if unfrozen.is_empty() {
            break;
        }

        let (q_star, steps) =
            maximin_q(ds, constraints, &bounds, eps, options, clock, &mut probes)?;

        let mut binding: Vec<ValueId> = Vec::new();
        if q_star >= Rat::one() {
            // Nothing above 1 to probe for; everyone is at the ceiling.
            binding = unfrozen.clone();
        } else {
            let at_level = with_unfrozen_q(&bounds, q_star);
            let above = (q_star + eps).min(Rat::one());
            for &v in &unfrozen {
                let mut candidate = at_level.clone();
                candidate.set(v, above, false).expect("q within [0, 1]");
                probes += 1;
                if !feasibility_probe(ds, constraints, &candidate, options, clock)? {
                    binding.push(v);
                }
            }
            if binding.is_empty() {
                // The joint bound is blocked by a combination of groups, not
                // any single one. Freeze the group with the smallest achieved
                // value in the utility-optimal ranking at the current level
                // so the round still makes progress. Ties break on group id.
                let prog = build_model(ds, constraints, &at_level)?;
                probes += 1;
                let witness = solve_ip_with_clock(ds, &prog, options, clock)?;
                let outcome = witness.outcome.ok_or(LeximinError::Infeasible)?;
                let vector = igf_vector(ds, &outcome, mode);
                let worst = unfrozen
                    .iter()
                    .copied()
                    .min_by_key(|&v| (vector.values[&v], v))
                    .expect("unfrozen non-empty");
                binding.push(worst);
            }
        }

        for &v in &binding {
            bounds.set(v, q_star, true)?;
        }
        // Unfrozen survivors keep q_star as their working floor.
        for &v in &unfrozen {
            if !binding.contains(&v) {
                bounds.set(v, q_star, false)?;
            }
        }
        rounds.push(LeximinRound {
            steps,
            q_star,
            frozen: binding,
        });
    }

    let prog = build_model(ds, constraints, &bounds)?;
    let solution = solve_ip_with_clock(ds, &prog, options, clock)?;
    if solution.outcome.is_none() {
        return Err(LeximinError::Infeasible);
    }
    Ok(LeximinTrace {
        rounds,
        bounds,
        solution,
        probes,
    })
}
