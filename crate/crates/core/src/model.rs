//! Integer-program builders for both fairness modes.
//!
//! The program selects and ranks k items: binary x_{i,p} (item i at position
//! p) and x_i (item i selected anywhere), with the diversity rows over
//! prefixes and, per constrained group, either the a_v/b_v ratio gadget or
//! the aggregated mass rows. The objective maximizes the summed score of the
//! selected items.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use num_traits::{One, Signed, Zero};

use crate::constraints::DiversityConstraints;
use crate::dataset::{Dataset, ItemIdx, ValueId};
use crate::metrics::IgfMode;
use crate::Rat;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QBound {
    pub q: Rat,
    pub frozen: bool,
}

/// Per-group in-group fairness lower bounds q_v. Groups without an entry are
/// unconstrained (q_v = 0).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IgfBounds {
    pub mode: IgfMode,
    entries: BTreeMap<ValueId, QBound>,
}

impl IgfBounds {
    pub fn unconstrained(mode: IgfMode) -> Self {
        IgfBounds {
            mode,
            entries: BTreeMap::new(),
        }
    }

    /// The same floating bound q for every non-empty group.
    pub fn uniform(ds: &Dataset, mode: IgfMode, q: Rat) -> Result<Self, ModelError> {
        let mut bounds = Self::unconstrained(mode);
        for v in ds.schema().value_ids() {
            if !ds.group(v).is_empty() {
                bounds.set(v, q, false)?;
            }
        }
        Ok(bounds)
    }

    pub fn set(&mut self, v: ValueId, q: Rat, frozen: bool) -> Result<(), ModelError> {
        if q < Rat::zero() || q > Rat::one() {
            return Err(ModelError::QOutOfRange(v));
        }
        self.entries.insert(v, QBound { q, frozen });
        Ok(())
    }

    pub fn q(&self, v: ValueId) -> Rat {
        self.entries.get(&v).map(|b| b.q).unwrap_or_else(Rat::zero)
    }

    pub fn get(&self, v: ValueId) -> Option<QBound> {
        self.entries.get(&v).copied()
    }

    pub fn entries(&self) -> impl Iterator<Item = (ValueId, QBound)> + '_ {
        self.entries.iter().map(|(&v, &b)| (v, b))
    }

    pub fn constrained_values(&self) -> impl Iterator<Item = ValueId> + '_ {
        self.entries
            .iter()
            .filter(|(_, b)| b.q > Rat::zero())
            .map(|(&v, _)| v)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelError {
    ModeMismatch { expected: IgfMode, got: IgfMode },
    KExceedsN { k: usize, n: usize },
    QOutOfRange(ValueId),
    EmptyDataset,
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::ModeMismatch { expected, got } => {
                write!(f, "bounds are in {got} mode, expected {expected}")
            }
            ModelError::KExceedsN { k, n } => write!(f, "k = {k} exceeds pool size n = {n}"),
            ModelError::QOutOfRange(v) => write!(f, "q for value #{} outside [0, 1]", v.0),
            ModelError::EmptyDataset => write!(f, "dataset has no items"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    /// x_i: item selected anywhere.
    Select(ItemIdx),
    /// x_{i,p}: item i at position p (1-based).
    Place(ItemIdx, usize),
    /// a_v: lower bound on the smallest accepted score in I_v.
    AcceptMin(ValueId),
    /// b_v: upper bound proxy for the largest rejected score in I_v.
    RejectMax(ValueId),
}

#[derive(Debug, Clone)]
pub struct Variable {
    pub kind: VarKind,
    pub lower: Rat,
    pub upper: Rat,
    pub integral: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowOp {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
pub struct Row {
    pub coeffs: Vec<(usize, Rat)>,
    pub op: RowOp,
    pub rhs: Rat,
    /// Provenance tag for debugging and the LP dump.
    pub tag: String,
}

impl Row {
    pub fn satisfied(&self, values: &[Rat]) -> bool {
        let lhs: Rat = self
            .coeffs
            .iter()
            .map(|&(j, c)| c * values[j])
            .fold(Rat::zero(), |acc, t| acc + t);
        match self.op {
            RowOp::Le => lhs <= self.rhs,
            RowOp::Ge => lhs >= self.rhs,
            RowOp::Eq => lhs == self.rhs,
        }
    }
}

/// Solver-neutral matrix form of the selection/ranking program, together
/// with the inputs it was built from (the solver re-verifies candidates
/// against those directly).
#[derive(Debug, Clone)]
pub struct IntegerProgram {
    pub vars: Vec<Variable>,
    pub rows: Vec<Row>,
    /// Maximization objective, sparse over variables.
    pub objective: Vec<(usize, Rat)>,
    pub n: usize,
    pub k: usize,
    pub mode: IgfMode,
    pub constraints: DiversityConstraints,
    pub bounds: IgfBounds,
}

impl IntegerProgram {
    pub fn select_var(&self, i: ItemIdx) -> usize {
        i
    }

    pub fn place_var(&self, i: ItemIdx, p: usize) -> usize {
        debug_assert!(p >= 1 && p <= self.k);
        self.n + i * self.k + (p - 1)
    }

    /// First violated row under an exact assignment, if any.
    pub fn violated_row(&self, values: &[Rat]) -> Option<&Row> {
        self.rows.iter().find(|row| !row.satisfied(values))
    }

    /// Dump the program in LP text format for cross-checking with external
    /// solvers. Coefficients are written as plain decimals.
    pub fn write_lp(&self) -> String {
        let mut out = String::new();
        out.push_str("Maximize\n obj:");
        for &(j, c) in &self.objective {
            push_term(&mut out, c, &self.var_name(j));
        }
        out.push_str("\nSubject To\n");
        for (r, row) in self.rows.iter().enumerate() {
            out.push_str(&alloc::format!(" r{}_{}:", r, sanitize(&row.tag)));
            for &(j, c) in &row.coeffs {
                push_term(&mut out, c, &self.var_name(j));
            }
            let op = match row.op {
                RowOp::Le => "<=",
                RowOp::Ge => ">=",
                RowOp::Eq => "=",
            };
            out.push_str(&alloc::format!(" {} {}\n", op, format_rat(row.rhs)));
        }
        out.push_str("Bounds\n");
        for (j, var) in self.vars.iter().enumerate() {
            if !var.integral {
                out.push_str(&alloc::format!(
                    " {} <= {} <= {}\n",
                    format_rat(var.lower),
                    self.var_name(j),
                    format_rat(var.upper)
                ));
            }
        }
        out.push_str("Binary\n");
        for (j, var) in self.vars.iter().enumerate() {
            if var.integral {
                out.push_str(&alloc::format!(" {}\n", self.var_name(j)));
            }
        }
        out.push_str("End\n");
        out
    }

    pub fn var_name(&self, j: usize) -> String {
        match self.vars[j].kind {
            VarKind::Select(i) => alloc::format!("x_i{i}"),
            VarKind::Place(i, p) => alloc::format!("x_i{i}_p{p}"),
            VarKind::AcceptMin(v) => alloc::format!("a_v{}", v.0),
            VarKind::RejectMax(v) => alloc::format!("b_v{}", v.0),
        }
    }
}

fn sanitize(tag: &str) -> String {
    tag.chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect()
}

fn push_term(out: &mut String, c: Rat, name: &str) {
    if c.is_negative() {
        out.push_str(&alloc::format!(" - {} {}", format_rat(-c), name));
    } else {
        out.push_str(&alloc::format!(" + {} {}", format_rat(c), name));
    }
}

/// Render a rational as a decimal; exact when the denominator is 2^a 5^b,
/// otherwise a 12-digit approximation.
fn format_rat(r: Rat) -> String {
    let mut den = *r.denom();
    if den == 1 {
        return r.numer().to_string();
    }
    let mut shift = 0u32;
    for base in [2i64, 5] {
        while den % base == 0 {
            den /= base;
            shift += 1;
        }
    }
    if den == 1 && shift <= 18 {
        let mantissa = (Rat::new(10i64.pow(shift), 1) * r).to_integer();
        let sign = if mantissa < 0 { "-" } else { "" };
        let abs = mantissa.unsigned_abs();
        let unit = 10u64.pow(shift);
        let mut s = alloc::format!("{sign}{}.{:0width$}", abs / unit, abs % unit, width = shift as usize);
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
        s
    } else {
        let approx = *r.numer() as f64 / *r.denom() as f64;
        alloc::format!("{approx:.12}")
    }
}

/// Ratio-mode program: the a_v/b_v gadget rows linearize "smallest accepted
/// over largest rejected >= q_v" via the lambda big-M trick.
pub fn build_ratio_model(
    ds: &Dataset,
    constraints: &DiversityConstraints,
    bounds: &IgfBounds,
) -> Result<IntegerProgram, ModelError> {
    if bounds.mode != IgfMode::Ratio {
        return Err(ModelError::ModeMismatch {
            expected: IgfMode::Ratio,
            got: bounds.mode,
        });
    }
    build(ds, constraints, bounds)
}

/// Aggregated-mode program: one mass row per (v, i) with q_v > 0, with
/// provably redundant rows pruned.
pub fn build_aggregated_model(
    ds: &Dataset,
    constraints: &DiversityConstraints,
    bounds: &IgfBounds,
) -> Result<IntegerProgram, ModelError> {
    if bounds.mode != IgfMode::Aggregated {
        return Err(ModelError::ModeMismatch {
            expected: IgfMode::Aggregated,
            got: bounds.mode,
        });
    }
    build(ds, constraints, bounds)
}

/// Build the program for whichever mode the bounds carry.
pub fn build_model(
    ds: &Dataset,
    constraints: &DiversityConstraints,
    bounds: &IgfBounds,
) -> Result<IntegerProgram, ModelError> {
    match bounds.mode {
        IgfMode::Ratio => build_ratio_model(ds, constraints, bounds),
        IgfMode::Aggregated => build_aggregated_model(ds, constraints, bounds),
    }
}

fn build(
    ds: &Dataset,
    constraints: &DiversityConstraints,
    bounds: &IgfBounds,
) -> Result<IntegerProgram, ModelError> {
    let n = ds.len();
    let k = constraints.k();
    if k > n {
        return Err(ModelError::KExceedsN { k, n });
    }
    if n == 0 {
        return Err(ModelError::EmptyDataset);
    }
    let stats = ds.stats().map_err(|_| ModelError::EmptyDataset)?;
    let lambda = stats.lambda();
    let s_min = Rat::from_integer(stats.s_min);
    let s_max = Rat::from_integer(stats.s_max);

    let mut vars: Vec<Variable> = Vec::with_capacity(n + n * k);
    for i in 0..n {
        vars.push(Variable {
            kind: VarKind::Select(i),
            lower: Rat::zero(),
            upper: Rat::one(),
            integral: true,
        });
    }
    for i in 0..n {
        for p in 1..=k {
            vars.push(Variable {
                kind: VarKind::Place(i, p),
                lower: Rat::zero(),
                upper: Rat::one(),
                integral: true,
            });
        }
    }

    // Groups that get fairness rows: q_v > 0 and a non-empty group.
    let constrained: Vec<ValueId> = bounds
        .constrained_values()
        .filter(|&v| !ds.group(v).is_empty())
        .collect();

    let mut accept_var = BTreeMap::new();
    let mut reject_var = BTreeMap::new();
    if bounds.mode == IgfMode::Ratio {
        for &v in &constrained {
            accept_var.insert(v, vars.len());
            vars.push(Variable {
                kind: VarKind::AcceptMin(v),
                lower: s_min,
                upper: s_max,
                integral: false,
            });
            reject_var.insert(v, vars.len());
            vars.push(Variable {
                kind: VarKind::RejectMax(v),
                lower: s_min,
                upper: s_max,
                integral: false,
            });
        }
    }

    let place = |i: usize, p: usize| n + i * k + (p - 1);

    let mut rows: Vec<Row> = Vec::new();

    // x_i = sum_p x_{i,p}
    for i in 0..n {
        let mut coeffs = Vec::with_capacity(k + 1);
        coeffs.push((i, Rat::one()));
        for p in 1..=k {
            coeffs.push((place(i, p), -Rat::one()));
        }
        rows.push(Row {
            coeffs,
            op: RowOp::Eq,
            rhs: Rat::zero(),
            tag: alloc::format!("link[{}]", ds.item(i).id),
        });
    }

    // At most one item per position.
    for p in 1..=k {
        let coeffs = (0..n).map(|i| (place(i, p), Rat::one())).collect();
        rows.push(Row {
            coeffs,
            op: RowOp::Le,
            rhs: Rat::one(),
            tag: alloc::format!("pos[{p}]"),
        });
    }

    // Exactly k selections. The displayed program leaves this implicit via
    // the objective; making it explicit removes degenerate optima.
    rows.push(Row {
        coeffs: (0..n).map(|i| (i, Rat::one())).collect(),
        op: RowOp::Eq,
        rhs: Rat::from_integer(k as i64),
        tag: "card".to_string(),
    });

    // Diversity rows over prefixes.
    for (v, p, bound) in constraints.entries() {
        let mut coeffs = Vec::new();
        for &i in ds.group(v) {
            for q in 1..=p {
                coeffs.push((place(i, q), Rat::one()));
            }
        }
        rows.push(Row {
            coeffs,
            op: RowOp::Ge,
            rhs: Rat::from_integer(bound as i64),
            tag: alloc::format!("div[{},{p}]", ds.schema().value_name(v)),
        });
    }

    match bounds.mode {
        IgfMode::Ratio => {
            for &v in &constrained {
                let a = accept_var[&v];
                let b = reject_var[&v];
                let q = bounds.q(v);
                let vname = ds.schema().value_name(v);
                for &i in ds.group(v) {
                    let s_i = Rat::from_integer(ds.item(i).score);
                    // a_v <= (lambda - (lambda - 1) x_i) s_i
                    rows.push(Row {
                        coeffs: alloc::vec![(a, Rat::one()), (i, (lambda - Rat::one()) * s_i)],
                        op: RowOp::Le,
                        rhs: lambda * s_i,
                        tag: alloc::format!("amin[{vname},{}]", ds.item(i).id),
                    });
                    // b_v >= (1 - x_i) s_i
                    rows.push(Row {
                        coeffs: alloc::vec![(b, Rat::one()), (i, s_i)],
                        op: RowOp::Ge,
                        rhs: s_i,
                        tag: alloc::format!("bmax[{vname},{}]", ds.item(i).id),
                    });
                }
                // a_v >= q_v b_v
                rows.push(Row {
                    coeffs: alloc::vec![(a, Rat::one()), (b, -q)],
                    op: RowOp::Ge,
                    rhs: Rat::zero(),
                    tag: alloc::format!("igf[{vname}]"),
                });
            }
        }
        IgfMode::Aggregated => {
            for &v in &constrained {
                let q = bounds.q(v);
                let vname = ds.schema().value_name(v);
                let group = ds.group(v);
                // Walk in descending score order keeping the running prefix
                // mass; ties share the same I_{i,v}.
                let mut prefix_mass: i64 = 0;
                let mut pos = 0;
                while pos < group.len() {
                    let score = ds.item(group[pos]).score;
                    let tie_start = pos;
                    while pos < group.len() && ds.item(group[pos]).score == score {
                        prefix_mass += score;
                        pos += 1;
                    }
                    let total = Rat::from_integer(prefix_mass);
                    for &i in &group[tie_start..pos] {
                        // Redundant when q_v * sum(I_{i,v}) <= s_i: satisfied
                        // even if i is the only accepted member.
                        if q * total <= Rat::from_integer(ds.item(i).score) {
                            continue;
                        }
                        // sum_{h in I_{i,v}} s_h x_h - q_v sum(I_{i,v}) x_i >= 0
                        let mut coeffs: Vec<(usize, Rat)> = group[..pos]
                            .iter()
                            .map(|&h| (h, Rat::from_integer(ds.item(h).score)))
                            .collect();
                        let mut folded = false;
                        for c in coeffs.iter_mut() {
                            if c.0 == i {
                                c.1 -= q * total;
                                folded = true;
                            }
                        }
                        debug_assert!(folded);
                        rows.push(Row {
                            coeffs,
                            op: RowOp::Ge,
                            rhs: Rat::zero(),
                            tag: alloc::format!("agg[{vname},{}]", ds.item(i).id),
                        });
                    }
                }
            }
        }
    }

    let objective = (0..n)
        .map(|i| (i, Rat::from_integer(ds.item(i).score)))
        .collect();

    Ok(IntegerProgram {
        vars,
        rows,
        objective,
        n,
        k,
        mode: bounds.mode,
        constraints: constraints.clone(),
        bounds: bounds.clone(),
    })
}
