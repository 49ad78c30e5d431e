//! Exact depth-first branch-and-bound over the selection variables, with an
//! LP-relaxation bound and a brute-force oracle for desk-scale verification.
//!
//! Branching happens on x_i only. Positions are resolved combinatorially:
//! once a candidate selection is integral, a feasible ordering (or a proof
//! that none exists) comes from the prefix module, which collapses the
//! k!-sized placement space. The LP bound therefore drops the position
//! variables and keeps, per group, the strongest selection-count consequence
//! of the prefix rows; that is a relaxation of the full program, so its
//! value stays a valid upper bound. Incumbent comparisons are exact: utility
//! in scaled integers, fairness checks in rationals via the metrics module.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use num_traits::{One, Zero};

use crate::constraints::DiversityConstraints;
use crate::dataset::{Dataset, ItemIdx, Outcome, ValueId};
use crate::metrics::{igf_aggregated, igf_ratio, IgfMode};
use crate::model::{build_model, IgfBounds, IntegerProgram, RowOp, VarKind};
use crate::prefix::{check_prefix_feasible, PrefixError};
use crate::simplex::{solve_lp, LpOutcome, LpProblem, LpRow, SimplexError};
use crate::Rat;

/// Wall-clock source for time limits. The core crate has no clock of its
/// own; std callers inject one, and `NoClock` disables the time limit.
pub trait Clock {
    fn elapsed_secs(&self) -> f64;
}

/// A clock that never advances.
pub struct NoClock;

impl Clock for NoClock {
    fn elapsed_secs(&self) -> f64 {
        0.0
    }
}

#[derive(Debug, Clone)]
pub struct SolverOptions {
    pub time_limit: Option<f64>,
    pub node_limit: Option<u64>,
    /// Node cap applied to feasibility probes only. A capped probe counts as
    /// infeasible, which is conservative: the leximin level it certifies is
    /// still feasible, some headroom may just go unclaimed.
    pub probe_node_limit: Option<u64>,
    /// Tolerance for treating a relaxed variable value as integral.
    pub integrality_tol: f64,
    /// Accepted for interface parity; exploration is single-threaded and the
    /// result is worker-count independent by construction.
    pub workers: usize,
    /// Stop at the first exactly-verified incumbent (feasibility probes).
    pub first_feasible: bool,
    /// Keep exploring equal-objective subtrees so the returned optimum is
    /// the lexicographically smallest one. `None` = automatic (on for small
    /// pools, off beyond 30 items where ties are not expected).
    pub exhaustive_ties: Option<bool>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            time_limit: None,
            node_limit: None,
            probe_node_limit: None,
            integrality_tol: 1e-6,
            workers: 1,
            first_feasible: false,
            exhaustive_ties: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    LimitReached,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub status: SolveStatus,
    pub outcome: Option<Outcome>,
    /// Exact utility of the outcome, in scaled integer score units.
    pub objective: Option<i64>,
    pub nodes: u64,
    pub wall_secs: f64,
}

#[derive(Debug, Clone)]
pub enum SolveError {
    Simplex(SimplexError),
    Malformed(String),
    InstanceTooLarge { subsets: u128, budget: u128 },
    VerificationFailed(String),
}

impl fmt::Display for SolveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolveError::Simplex(e) => write!(f, "LP relaxation failed: {e}"),
            SolveError::Malformed(msg) => write!(f, "malformed program: {msg}"),
            SolveError::InstanceTooLarge { subsets, budget } => {
                write!(f, "{subsets} subsets exceed the oracle budget of {budget}")
            }
            SolveError::VerificationFailed(tag) => {
                write!(f, "optimal candidate violates row {tag}")
            }
        }
    }
}

impl From<SimplexError> for SolveError {
    fn from(e: SimplexError) -> Self {
        SolveError::Simplex(e)
    }
}

impl From<PrefixError> for SolveError {
    fn from(e: PrefixError) -> Self {
        SolveError::Malformed(alloc::format!("{e}"))
    }
}

fn rat_f64(r: Rat) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Solve the LP relaxation of the full program (position variables
/// included), with optional 0/1 fixings on binary variables.
pub fn solve_lp_relaxation(
    prog: &IntegerProgram,
    fixings: &[(usize, bool)],
) -> Result<LpOutcome, SolveError> {
    let mut lower: Vec<f64> = prog.vars.iter().map(|v| rat_f64(v.lower)).collect();
    let mut upper: Vec<f64> = prog.vars.iter().map(|v| rat_f64(v.upper)).collect();
    let mut seen: Vec<Option<bool>> = alloc::vec![None; prog.vars.len()];
    for &(j, value) in fixings {
        if j >= prog.vars.len() {
            return Err(SolveError::Malformed(alloc::format!(
                "fixing references variable {j} out of range"
            )));
        }
        if let Some(prev) = seen[j] {
            if prev != value {
                return Err(SolveError::Malformed(alloc::format!(
                    "variable {j} fixed both ways"
                )));
            }
        }
        seen[j] = Some(value);
        let v = if value { 1.0 } else { 0.0 };
        lower[j] = v;
        upper[j] = v;
    }
    let mut obj = alloc::vec![0.0f64; prog.vars.len()];
    for &(j, c) in &prog.objective {
        obj[j] = rat_f64(c);
    }
    let rows = prog
        .rows
        .iter()
        .map(|row| LpRow {
            coeffs: row.coeffs.iter().map(|&(j, c)| (j, rat_f64(c))).collect(),
            op: row.op,
            rhs: rat_f64(row.rhs),
        })
        .collect();
    Ok(solve_lp(&LpProblem {
        obj,
        lower,
        upper,
        rows,
    })?)
}

/// The selection-space relaxation used for bounding: select variables only,
/// with the cardinality row, the aggregated mass rows, and per-group count
/// rows implied by the prefix bounds. A row guarded by an item is trivially
/// satisfied once that item is fixed out, and is dropped from the node LP.
struct BoundLp {
    obj: Vec<f64>,
    base_lower: Vec<f64>,
    base_upper: Vec<f64>,
    rows: Vec<(LpRow, Option<ItemIdx>)>,
}

impl BoundLp {
    fn build(ds: &Dataset, prog: &IntegerProgram) -> Result<Self, SolveError> {
        let n = prog.n;
        for (j, var) in prog.vars.iter().enumerate() {
            if let VarKind::Select(i) = var.kind {
                if i != j {
                    return Err(SolveError::Malformed(
                        "select variables must come first".to_string(),
                    ));
                }
            }
        }
        let lower = alloc::vec![0.0; n];
        let upper = alloc::vec![1.0; n];

        // Keep only rows living purely in selection space: the cardinality
        // row and the aggregated mass rows. Position rows drop with their
        // variables; the ratio gadget is enforced by propagation and the
        // exact leaf check instead of its a_v/b_v rows. An aggregated row
        // activates only while its member can still be selected, so it is
        // guarded by that item.
        let mut rows = Vec::new();
        for row in &prog.rows {
            let selects_only = row
                .coeffs
                .iter()
                .all(|&(j, _)| matches!(prog.vars[j].kind, VarKind::Select(_)));
            if !selects_only {
                continue;
            }
            let guard = if row.tag.starts_with("agg[") {
                row.coeffs
                    .iter()
                    .find(|&&(j, c)| c != Rat::from_integer(ds.item(j).score))
                    .map(|&(j, _)| j)
            } else {
                None
            };
            rows.push((
                LpRow {
                    coeffs: row.coeffs.iter().map(|&(j, c)| (j, rat_f64(c))).collect(),
                    op: row.op,
                    rhs: rat_f64(row.rhs),
                },
                guard,
            ));
        }
        // Selection-count consequence of the prefix rows: at least l_{v,k}
        // members of I_v anywhere in the output.
        for v in prog.constraints.values_with_bounds() {
            let bound = prog.constraints.bound_at(v, prog.k);
            if bound == 0 {
                continue;
            }
            rows.push((
                LpRow {
                    coeffs: ds.group(v).iter().map(|&i| (i, 1.0)).collect(),
                    op: RowOp::Ge,
                    rhs: bound as f64,
                },
                None,
            ));
        }

        let mut obj = alloc::vec![0.0f64; n];
        for &(j, c) in &prog.objective {
            obj[j] = rat_f64(c);
        }
        Ok(BoundLp {
            obj,
            base_lower: lower,
            base_upper: upper,
            rows,
        })
    }

    /// Solve with node fixings applied to the select columns.
    fn solve(&self, fixed: &[i8]) -> Result<LpOutcome, SimplexError> {
        let mut lower = self.base_lower.clone();
        let mut upper = self.base_upper.clone();
        for (i, &f) in fixed.iter().enumerate() {
            match f {
                0 => upper[i] = 0.0,
                1 => lower[i] = 1.0,
                _ => {}
            }
        }
        let rows = self
            .rows
            .iter()
            .filter(|(_, guard)| guard.map_or(true, |i| fixed[i] != 0))
            .map(|(row, _)| row.clone())
            .collect();
        solve_lp(&LpProblem {
            obj: self.obj.clone(),
            lower,
            upper,
            rows,
        })
    }
}

struct Incumbent {
    /// Selected items sorted by id, for lexicographic comparison.
    ids: Vec<String>,
    ordering: Vec<ItemIdx>,
    utility: i64,
}

/// Logical closure of the ratio bounds plus simple count arguments, applied
/// to a node's 0/1 fixings before its LP is solved. For a group held to
/// q > 0, accepting item i forbids rejecting any group member scoring above
/// s_i / q, and rejecting j forbids accepting any member scoring below
/// q * s_j; both directions propagate to a fixpoint. Exactness note: these
/// implications are restatements of the metric definition, so closing over
/// them never cuts off a feasible completion.
struct Propagator {
    k: usize,
    /// (members, q numerator, q denominator) for every ratio-bounded group.
    groups: Vec<(Vec<ItemIdx>, i64, i64)>,
    /// (members in descending score order, q numerator, q denominator,
    /// value, attribute) per aggregated-bounded group.
    agg: Vec<(Vec<ItemIdx>, i64, i64, ValueId, usize)>,
    /// (members, required count in the whole output, value, attribute) per
    /// diversity value.
    quotas: Vec<(Vec<ItemIdx>, u32, ValueId, usize)>,
    scores: Vec<i64>,
}

impl Propagator {
    fn new(ds: &Dataset, prog: &IntegerProgram) -> Self {
        let mut groups = Vec::new();
        let mut agg = Vec::new();
        for (v, qb) in prog.bounds.entries() {
            if qb.q > Rat::zero() && !ds.group(v).is_empty() {
                let (a, b) = (*qb.q.numer(), *qb.q.denom());
                match prog.mode {
                    IgfMode::Ratio => groups.push((ds.group(v).to_vec(), a, b)),
                    IgfMode::Aggregated => {
                        agg.push((ds.group(v).to_vec(), a, b, v, ds.schema().attr_of(v)))
                    }
                }
            }
        }
        let mut quotas = Vec::new();
        for v in prog.constraints.values_with_bounds() {
            let need = prog.constraints.bound_at(v, prog.k);
            if need > 0 {
                quotas.push((ds.group(v).to_vec(), need, v, ds.schema().attr_of(v)));
            }
        }
        Propagator {
            k: prog.k,
            groups,
            agg,
            quotas,
            scores: ds.items().iter().map(|it| it.score).collect(),
        }
    }

    /// Close `fixed` under the implications; false means the node is dead.
    /// All comparisons against q = a/b are cross-multiplied into i128, so
    /// the closure is exact without any rational reductions in the loop.
    fn run(&self, fixed: &mut [i8]) -> bool {
        loop {
            let mut changed = false;
            for (members, a, b) in &self.groups {
                let (a, b) = (*a as i128, *b as i128);
                let min_accepted = members
                    .iter()
                    .filter(|&&i| fixed[i] == 1)
                    .map(|&i| self.scores[i])
                    .min();
                if let Some(m) = min_accepted {
                    let m = m as i128;
                    for &j in members {
                        // q * s_j > min accepted: j cannot be rejected.
                        if a * self.scores[j] as i128 > b * m {
                            match fixed[j] {
                                0 => return false,
                                -1 => {
                                    fixed[j] = 1;
                                    changed = true;
                                }
                                _ => {}
                            }
                        }
                    }
                }
                let max_rejected = members
                    .iter()
                    .filter(|&&i| fixed[i] == 0)
                    .map(|&i| self.scores[i])
                    .max();
                if let Some(r) = max_rejected {
                    let r = r as i128;
                    for &i in members {
                        // s_i < q * max rejected: i cannot be accepted.
                        if b * (self.scores[i] as i128) < a * r {
                            match fixed[i] {
                                1 => return false,
                                -1 => {
                                    fixed[i] = 0;
                                    changed = true;
                                }
                                _ => {}
                            }
                        }
                    }
                }
            }
            // Aggregated bound: at every accepted i the accepted mass at or
            // above s_i must reach q times the group mass at or above s_i.
            // With ties folded into score classes, compare per class the
            // best-case accepted mass to q times the class-prefix total: a
            // member of a class that falls short can never be accepted, and
            // a free member whose own score exceeds the minimum slack of the
            // accepted classes at or below it is indispensable.
            let total_ones = fixed.iter().filter(|&&f| f == 1).count();
            let quota_ones: Vec<usize> = self
                .quotas
                .iter()
                .map(|(mem, _, _, _)| mem.iter().filter(|&&i| fixed[i] == 1).count())
                .collect();
            for (members, a, b, value, attr) in &self.agg {
                let (a, b) = (*a as i128, *b as i128);
                // Free slots this group can still draw on: unmet floors of
                // the sibling values (same attribute, hence disjoint members)
                // must be filled from outside this group.
                let reserved: usize = self
                    .quotas
                    .iter()
                    .zip(&quota_ones)
                    .filter(|((_, _, w, at), _)| at == attr && w != value)
                    .map(|((_, need, _, _), &ones)| (*need as usize).saturating_sub(ones))
                    .sum();
                let spare = self.k.saturating_sub(total_ones + reserved);
                let m = members.len();
                // Per score class: (start, end, prefix total, prefix avail,
                // prefix capacity, class holds an accepted member).
                let mut classes: Vec<(usize, usize, i128, i128, i128, bool)> = Vec::new();
                let mut total: i128 = 0;
                let mut avail: i128 = 0;
                // Best achievable accepted mass in the prefix: every fixed-1
                // member plus the top `spare` free members seen so far.
                let mut ones_mass: i128 = 0;
                let mut free_cnt = 0usize;
                let mut free_top: i128 = 0;
                let mut pos = 0;
                while pos < m {
                    let s = self.scores[members[pos]];
                    let start = pos;
                    let mut has_one = false;
                    while pos < m && self.scores[members[pos]] == s {
                        let i = members[pos];
                        total += s as i128;
                        if fixed[i] != 0 {
                            avail += s as i128;
                        }
                        match fixed[i] {
                            1 => {
                                ones_mass += s as i128;
                                has_one = true;
                            }
                            -1 => {
                                if free_cnt < spare {
                                    free_top += s as i128;
                                }
                                free_cnt += 1;
                            }
                            _ => {}
                        }
                        pos += 1;
                    }
                    classes.push((start, pos, total, avail, ones_mass + free_top, has_one));
                }
                let mut conflict = false;
                for &(start, end, t, _, cap, _) in &classes {
                    if b * cap < a * t {
                        for &i in &members[start..end] {
                            match fixed[i] {
                                1 => conflict = true,
                                -1 => {
                                    fixed[i] = 0;
                                    changed = true;
                                }
                                _ => {}
                            }
                        }
                    }
                }
                if conflict {
                    return false;
                }
                if changed {
                    continue;
                }
                // Suffix minimum over accepted classes of the scaled slack
                // b * avail - a * total; a free member scoring above slack / b
                // cannot be dropped without sinking an accepted class.
                let mut min_slack: Option<i128> = None;
                for &(start, end, t, av, _, has_one) in classes.iter().rev() {
                    if has_one {
                        let slack = b * av - a * t;
                        min_slack = Some(match min_slack {
                            Some(ms) => ms.min(slack),
                            None => slack,
                        });
                    }
                    if let Some(ms) = min_slack {
                        for &h in &members[start..end] {
                            if fixed[h] == -1 && b * self.scores[h] as i128 > ms {
                                fixed[h] = 1;
                                changed = true;
                            }
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }
        let ones = fixed.iter().filter(|&&f| f == 1).count();
        let free = fixed.iter().filter(|&&f| f == -1).count();
        if ones > self.k || ones + free < self.k {
            return false;
        }
        for (members, need, _, _) in &self.quotas {
            let possible = members.iter().filter(|&&i| fixed[i] != 0).count();
            if possible < *need as usize {
                return false;
            }
        }
        // Slot budget per attribute: values of one attribute partition the
        // pool, so their outstanding deficits occupy disjoint output slots.
        let mut attrs: Vec<usize> = self.quotas.iter().map(|&(_, _, _, a)| a).collect();
        attrs.sort_unstable();
        attrs.dedup();
        for attr in attrs {
            let mut deficit = 0usize;
            for (members, need, _, a) in &self.quotas {
                if *a != attr {
                    continue;
                }
                let members_in = members.iter().filter(|&&i| fixed[i] == 1).count();
                deficit += (*need as usize).saturating_sub(members_in);
            }
            if ones + deficit > self.k {
                return false;
            }
        }
        true
    }
}

/// Exact fairness check of a candidate set against the active q bounds,
/// evaluated through the metrics module rather than the program rows.
fn igf_ok(ds: &Dataset, outcome: &Outcome, bounds: &IgfBounds) -> bool {
    for (v, qb) in bounds.entries() {
        if qb.q <= Rat::zero() || ds.group(v).is_empty() {
            continue;
        }
        let value = match bounds.mode {
            IgfMode::Ratio => igf_ratio(ds, outcome, v),
            IgfMode::Aggregated => igf_aggregated(ds, outcome, v),
        }
        .expect("non-empty group");
        if value < qb.q {
            return false;
        }
    }
    true
}

/// A free variable implicated in a fairness violation of an integral leaf,
/// used to steer branching toward the conflict instead of blind id order.
fn violation_var(
    ds: &Dataset,
    prog: &IntegerProgram,
    outcome: &Outcome,
    fixed: &[i8],
) -> Option<ItemIdx> {
    for (v, qb) in prog.bounds.entries() {
        if qb.q <= Rat::zero() || ds.group(v).is_empty() {
            continue;
        }
        let value = match prog.mode {
            IgfMode::Ratio => igf_ratio(ds, outcome, v),
            IgfMode::Aggregated => igf_aggregated(ds, outcome, v),
        }
        .expect("non-empty group");
        if value >= qb.q {
            continue;
        }
        // Groups are in descending score order: the conflict sits between
        // the highest rejected and the lowest accepted members.
        let group = ds.group(v);
        let highest_rejected = group.iter().copied().find(|&i| !outcome.contains(i));
        let lowest_accepted = group.iter().rev().copied().find(|&i| outcome.contains(i));
        for cand in [highest_rejected, lowest_accepted].into_iter().flatten() {
            if fixed[cand] == -1 {
                return Some(cand);
            }
        }
        if let Some(i) = group.iter().copied().find(|&i| fixed[i] == -1) {
            return Some(i);
        }
    }
    None
}

/// Exact verification of a ranked candidate against every row of the
/// program, with witness values for the continuous gadget columns.
fn verify_against_program(
    ds: &Dataset,
    prog: &IntegerProgram,
    ordering: &[ItemIdx],
) -> Result<(), SolveError> {
    let stats = ds
        .stats()
        .map_err(|e| SolveError::Malformed(e.to_string()))?;
    let selected: BTreeSet<ItemIdx> = ordering.iter().copied().collect();
    let mut values: Vec<Rat> = Vec::with_capacity(prog.vars.len());
    for var in &prog.vars {
        let v = match var.kind {
            VarKind::Select(i) => {
                if selected.contains(&i) {
                    Rat::one()
                } else {
                    Rat::zero()
                }
            }
            VarKind::Place(i, p) => {
                if ordering.get(p - 1) == Some(&i) {
                    Rat::one()
                } else {
                    Rat::zero()
                }
            }
            VarKind::AcceptMin(v) => {
                let accepted_min = ds
                    .group(v)
                    .iter()
                    .filter(|i| selected.contains(i))
                    .map(|&i| ds.item(i).score)
                    .min();
                Rat::from_integer(accepted_min.unwrap_or(stats.s_max))
            }
            VarKind::RejectMax(v) => {
                let rejected_max = ds
                    .group(v)
                    .iter()
                    .filter(|i| !selected.contains(i))
                    .map(|&i| ds.item(i).score)
                    .max();
                Rat::from_integer(rejected_max.unwrap_or(stats.s_min))
            }
        };
        values.push(v);
    }
    match prog.violated_row(&values) {
        None => Ok(()),
        Some(row) => Err(SolveError::VerificationFailed(row.tag.clone())),
    }
}

struct Node {
    fixed: Vec<i8>,
    bound: f64,
    seq: u64,
}

/// Solve the integer program exactly. See the module docs for the bounding
/// scheme; every returned outcome is re-verified by exact substitution.
pub fn solve_ip(
    ds: &Dataset,
    prog: &IntegerProgram,
    options: &SolverOptions,
) -> Result<Solution, SolveError> {
    solve_ip_with_clock(ds, prog, options, &NoClock)
}

pub fn solve_ip_with_clock(
    ds: &Dataset,
    prog: &IntegerProgram,
    options: &SolverOptions,
    clock: &dyn Clock,
) -> Result<Solution, SolveError> {
    let n = prog.n;
    if ds.len() != n {
        return Err(SolveError::Malformed(alloc::format!(
            "program built for {n} items, dataset has {}",
            ds.len()
        )));
    }
    let start = clock.elapsed_secs();
    let exhaustive_ties = options.exhaustive_ties.unwrap_or(n <= 30);
    let bound_lp = BoundLp::build(ds, prog)?;
    let propagator = Propagator::new(ds, prog);

    // Rank items by id for deterministic branching tie-breaks.
    let mut id_order: Vec<ItemIdx> = (0..n).collect();
    id_order.sort_by(|&a, &b| ds.item(a).id.cmp(&ds.item(b).id));
    let mut id_rank = alloc::vec![0usize; n];
    for (rank, &i) in id_order.iter().enumerate() {
        id_rank[i] = rank;
    }

    let mut incumbent: Option<Incumbent> = None;
    let mut nodes: u64 = 0;
    let mut seq: u64 = 0;
    let mut limit_hit = false;
    let mut stack: Vec<Node> = alloc::vec![Node {
        fixed: alloc::vec![-1; n],
        bound: f64::INFINITY,
        seq,
    }];

    while let Some(node) = stack.pop() {
        if let Some(limit) = options.node_limit {
            if nodes >= limit {
                limit_hit = true;
                break;
            }
        }
        if let Some(limit) = options.time_limit {
            if clock.elapsed_secs() - start > limit {
                limit_hit = true;
                break;
            }
        }
        nodes += 1;
        if nodes % 10_000 == 0 && !options.first_feasible {
            // Best-bound restart: keep diving from the most promising node.
            // Skipped in feasibility probes, where the objective bound says
            // nothing about where a witness hides and the reshuffle only
            // breaks dive locality.
            stack.sort_by(|a, b| {
                a.bound
                    .partial_cmp(&b.bound)
                    .unwrap_or(core::cmp::Ordering::Equal)
                    .then(b.seq.cmp(&a.seq))
            });
        }

        // Parent-bound prune before paying for the LP.
        if let Some(inc) = &incumbent {
            let cut = if exhaustive_ties {
                inc.utility as f64 - 0.5
            } else {
                inc.utility as f64 + 0.5
            };
            if node.bound < cut {
                continue;
            }
        }

        // Logical closure first; a conflict saves the LP entirely.
        let mut fixed = node.fixed;
        if !propagator.run(&mut fixed) {
            continue;
        }

        let lp = bound_lp.solve(&fixed)?;
        let (bound, x) = match lp {
            LpOutcome::Optimal { value, x } => (value, x),
            LpOutcome::Infeasible => {
                continue;
            }
            LpOutcome::Unbounded => {
                return Err(SolveError::Malformed(
                    "selection relaxation unbounded".to_string(),
                ))
            }
        };
        if let Some(inc) = &incumbent {
            let cut = if exhaustive_ties {
                inc.utility as f64 - 0.5
            } else {
                inc.utility as f64 + 0.5
            };
            if bound < cut {
                continue;
            }
        }

        // Most-fractional select variable, ties by ascending item id.
        let tol = options.integrality_tol;
        let mut branch: Option<(ItemIdx, f64)> = None;
        for i in 0..n {
            if fixed[i] != -1 {
                continue;
            }
            let xi = x[i];
            let frac_dist = fabs(xi - 0.5);
            if xi > tol && xi < 1.0 - tol {
                match branch {
                    Some((bi, best)) => {
                        if frac_dist < best - 1e-12
                            || (frac_dist < best + 1e-12 && id_rank[i] < id_rank[bi])
                        {
                            branch = Some((i, frac_dist));
                        }
                    }
                    None => branch = Some((i, frac_dist)),
                }
            }
        }

        if branch.is_none() {
            // Integral selection: exact feasibility and incumbent test.
            let set: Vec<ItemIdx> = (0..n)
                .filter(|&i| {
                    if fixed[i] == 1 {
                        true
                    } else if fixed[i] == 0 {
                        false
                    } else {
                        x[i] > 0.5
                    }
                })
                .collect();
            let mut accepted = false;
            let mut hint: Option<ItemIdx> = None;
            if set.len() == prog.k {
                if let Some(ordering) = check_prefix_feasible(ds, &set, &prog.constraints)? {
                    let outcome = Outcome::from_indices(ds, ordering.clone())
                        .map_err(|e| SolveError::Malformed(alloc::format!("{e}")))?;
                    if !igf_ok(ds, &outcome, &prog.bounds) {
                        hint = violation_var(ds, prog, &outcome, &fixed);
                    } else {
                        let utility = outcome.total_utility(ds);
                        let mut ids: Vec<String> =
                            set.iter().map(|&i| ds.item(i).id.clone()).collect();
                        ids.sort();
                        let better = match &incumbent {
                            None => true,
                            Some(inc) => {
                                utility > inc.utility
                                    || (utility == inc.utility && ids < inc.ids)
                            }
                        };
                        if better {
                            incumbent = Some(Incumbent {
                                ids,
                                ordering,
                                utility,
                            });
                            if options.first_feasible {
                                limit_hit = true;
                                break;
                            }
                        }
                        accepted = true;
                    }
                }
            }
            // An integral LP point that fails the exact checks (or ties the
            // incumbent) may still hide alternatives deeper down: branch on
            // the first free variable, if any.
            let explore_on = !accepted || exhaustive_ties;
            if explore_on {
                let free = hint.or_else(|| id_order.iter().copied().find(|&i| fixed[i] == -1));
                if let Some(i) = free {
                    let preferred = if x[i] > 0.5 { 1 } else { 0 };
                    for side in [1 - preferred, preferred] {
                        let mut child = fixed.clone();
                        child[i] = side as i8;
                        seq += 1;
                        stack.push(Node {
                            fixed: child,
                            bound,
                            seq,
                        });
                    }
                }
            }
            continue;
        }

        let (i, _) = branch.expect("checked above");
        let preferred = if x[i] >= 0.5 { 1 } else { 0 };
        for side in [1 - preferred, preferred] {
            let mut child = fixed.clone();
            child[i] = side as i8;
            seq += 1;
            stack.push(Node {
                fixed: child,
                bound,
                seq,
            });
        }
    }

    let wall_secs = clock.elapsed_secs() - start;
    match incumbent {
        Some(inc) => {
            verify_against_program(ds, prog, &inc.ordering)?;
            let outcome = Outcome::from_indices(ds, inc.ordering)
                .map_err(|e| SolveError::Malformed(alloc::format!("{e}")))?;
            Ok(Solution {
                status: if limit_hit {
                    SolveStatus::LimitReached
                } else {
                    SolveStatus::Optimal
                },
                outcome: Some(outcome),
                objective: Some(inc.utility),
                nodes,
                wall_secs,
            })
        }
        None => Ok(Solution {
            status: if limit_hit {
                SolveStatus::LimitReached
            } else {
                SolveStatus::Infeasible
            },
            outcome: None,
            objective: None,
            nodes,
            wall_secs,
        }),
    }
}

fn fabs(x: f64) -> f64 {
    if x < 0.0 {
        -x
    } else {
        x
    }
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

const ORACLE_BUDGET: u128 = 2_000_000;

/// Independent oracle: enumerate every k-subset, check prefix feasibility
/// and the fairness bounds directly, and return the exact optimum under the
/// same tie-break contract as `solve_ip`.
pub fn brute_force_solve(
    ds: &Dataset,
    constraints: &DiversityConstraints,
    bounds: &IgfBounds,
) -> Result<Solution, SolveError> {
    let n = ds.len();
    let k = constraints.k();
    if k > n {
        return Err(SolveError::Malformed(alloc::format!(
            "k = {k} exceeds pool size {n}"
        )));
    }
    let subsets = binomial(n as u128, k as u128);
    if subsets > ORACLE_BUDGET {
        return Err(SolveError::InstanceTooLarge {
            subsets,
            budget: ORACLE_BUDGET,
        });
    }

    // Enumerate in lexicographic id order so equal-utility optima resolve to
    // the lexicographically smallest id set automatically.
    let mut id_order: Vec<ItemIdx> = (0..n).collect();
    id_order.sort_by(|&a, &b| ds.item(a).id.cmp(&ds.item(b).id));

    let mut best: Option<(i64, Vec<ItemIdx>)> = None;
    let mut examined: u64 = 0;
    let mut combo: Vec<usize> = (0..k).collect();
    loop {
        examined += 1;
        let set: Vec<ItemIdx> = combo.iter().map(|&c| id_order[c]).collect();
        if let Some(ordering) = check_prefix_feasible(ds, &set, constraints)? {
            let outcome = Outcome::from_indices(ds, ordering.clone())
                .map_err(|e| SolveError::Malformed(alloc::format!("{e}")))?;
            if igf_ok(ds, &outcome, bounds) {
                let utility = outcome.total_utility(ds);
                let better = match &best {
                    None => true,
                    Some((bu, _)) => utility > *bu,
                };
                if better {
                    best = Some((utility, ordering));
                }
            }
        }
        // Next k-combination in lexicographic order, or stop.
        if k == 0 {
            break;
        }
        let mut idx = k - 1;
        loop {
            if combo[idx] < idx + n - k {
                combo[idx] += 1;
                for later in idx + 1..k {
                    combo[later] = combo[later - 1] + 1;
                }
                break;
            }
            if idx == 0 {
                return finish_oracle(ds, best, examined);
            }
            idx -= 1;
        }
    }

    finish_oracle(ds, best, examined)
}

fn finish_oracle(
    ds: &Dataset,
    best: Option<(i64, Vec<ItemIdx>)>,
    examined: u64,
) -> Result<Solution, SolveError> {
    match best {
        Some((utility, ordering)) => {
            let outcome = Outcome::from_indices(ds, ordering)
                .map_err(|e| SolveError::Malformed(alloc::format!("{e}")))?;
            Ok(Solution {
                status: SolveStatus::Optimal,
                outcome: Some(outcome),
                objective: Some(utility),
                nodes: examined,
                wall_secs: 0.0,
            })
        }
        None => Ok(Solution {
            status: SolveStatus::Infeasible,
            outcome: None,
            objective: None,
            nodes: examined,
            wall_secs: 0.0,
        }),
    }
}

/// Feasibility probe used by the leximin loop: is there any ranking meeting
/// the diversity constraints and the given fairness bounds?
pub fn feasibility_probe(
    ds: &Dataset,
    constraints: &DiversityConstraints,
    bounds: &IgfBounds,
    options: &SolverOptions,
    clock: &dyn Clock,
) -> Result<bool, SolveError> {
    let prog = build_model(ds, constraints, bounds)
        .map_err(|e| SolveError::Malformed(alloc::format!("{e}")))?;
    let mut probe_opts = options.clone();
    probe_opts.first_feasible = true;
    probe_opts.exhaustive_ties = Some(false);
    if let Some(cap) = options.probe_node_limit {
        let cap = probe_opts.node_limit.map_or(cap, |n| n.min(cap));
        probe_opts.node_limit = Some(cap);
    }
    let solution = solve_ip_with_clock(ds, &prog, &probe_opts, clock)?;
    Ok(solution.outcome.is_some())
}
