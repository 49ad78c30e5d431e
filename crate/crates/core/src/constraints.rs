//! The diversity lower-bound table l_{v,p} and its sanity checks.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use num_traits::Zero;

use crate::dataset::{Dataset, ValueId};
use crate::Rat;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConstraintError {
    ZeroK,
    KExceedsN { k: usize, n: usize },
    NoCheckpoints,
    CheckpointOutOfRange { position: usize, k: usize },
    PositionOutOfRange { position: usize, k: usize },
    AlphaOutOfRange,
}

impl fmt::Display for ConstraintError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConstraintError::ZeroK => write!(f, "k must be at least 1"),
            ConstraintError::KExceedsN { k, n } => write!(f, "k = {k} exceeds pool size n = {n}"),
            ConstraintError::NoCheckpoints => write!(f, "checkpoint list is empty"),
            ConstraintError::CheckpointOutOfRange { position, k } => {
                write!(f, "checkpoint {position} outside 1..={k}")
            }
            ConstraintError::PositionOutOfRange { position, k } => {
                write!(f, "bound position {position} outside 1..={k}")
            }
            ConstraintError::AlphaOutOfRange => write!(f, "alpha must lie in (0, 1]"),
        }
    }
}

/// Prefix lower bounds: for each stored (v, p), at least l_{v,p} members of
/// I_v must appear in the top p positions. Bounds are monotone-normalized on
/// construction; absent entries mean 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiversityConstraints {
    k: usize,
    bounds: BTreeMap<ValueId, BTreeMap<usize, u32>>,
}

impl DiversityConstraints {
    /// Build from raw (value, position, bound) entries. Non-monotone input is
    /// raised to the running maximum; each such lift is reported back.
    pub fn from_entries(
        k: usize,
        entries: &[(ValueId, usize, u32)],
    ) -> Result<(Self, Vec<(ValueId, usize)>), ConstraintError> {
        if k == 0 {
            return Err(ConstraintError::ZeroK);
        }
        let mut bounds: BTreeMap<ValueId, BTreeMap<usize, u32>> = BTreeMap::new();
        for &(v, p, bound) in entries {
            if p == 0 || p > k {
                return Err(ConstraintError::PositionOutOfRange { position: p, k });
            }
            let per_value = bounds.entry(v).or_default();
            let slot = per_value.entry(p).or_insert(0);
            *slot = (*slot).max(bound);
        }
        let mut lifted = Vec::new();
        for (&v, per_value) in &mut bounds {
            let mut running = 0u32;
            for (&p, bound) in per_value.iter_mut() {
                if *bound < running {
                    *bound = running;
                    lifted.push((v, p));
                }
                running = *bound;
            }
        }
        // Drop zero entries so iteration sees only active bounds.
        for per_value in bounds.values_mut() {
            per_value.retain(|_, b| *b > 0);
        }
        bounds.retain(|_, per_value| !per_value.is_empty());
        Ok((DiversityConstraints { k, bounds }, lifted))
    }

    /// Unconstrained table for a given k.
    pub fn unconstrained(k: usize) -> Self {
        DiversityConstraints {
            k,
            bounds: BTreeMap::new(),
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Effective bound at prefix p: the entry at the largest checkpoint <= p.
    pub fn bound_at(&self, v: ValueId, p: usize) -> u32 {
        self.bounds
            .get(&v)
            .map(|per_value| {
                per_value
                    .range(..=p)
                    .next_back()
                    .map(|(_, &b)| b)
                    .unwrap_or(0)
            })
            .unwrap_or(0)
    }

    /// All active (value, position, bound) entries, in (value, position) order.
    pub fn entries(&self) -> impl Iterator<Item = (ValueId, usize, u32)> + '_ {
        self.bounds.iter().flat_map(|(&v, per_value)| {
            per_value.iter().map(move |(&p, &b)| (v, p, b))
        })
    }

    /// Union of positions carrying an active bound.
    pub fn checkpoints(&self) -> BTreeSet<usize> {
        self.entries().map(|(_, p, _)| p).collect()
    }

    pub fn values_with_bounds(&self) -> impl Iterator<Item = ValueId> + '_ {
        self.bounds.keys().copied()
    }

    pub fn is_unconstrained(&self) -> bool {
        self.bounds.is_empty()
    }

    /// Necessary-condition screening. Passing does not certify global
    /// feasibility; deciding that is the solver's job.
    pub fn validate(&self, ds: &Dataset) -> Vec<Violation> {
        let mut violations = Vec::new();
        for (v, p, bound) in self.entries() {
            if bound as usize > p {
                violations.push(Violation::BoundExceedsPrefix {
                    value: ds.schema().value_name(v).to_string(),
                    position: p,
                    bound,
                });
            }
            let group_size = ds.group(v).len();
            if bound as usize > group_size {
                violations.push(Violation::BoundExceedsGroup {
                    value: ds.schema().value_name(v).to_string(),
                    position: p,
                    bound,
                    group_size,
                });
            }
        }
        let checkpoints = self.checkpoints();
        for attr in 0..ds.schema().num_attrs() {
            for &p in &checkpoints {
                let demand: u64 = ds
                    .schema()
                    .values_of_attr(attr)
                    .iter()
                    .map(|&v| self.bound_at(v, p) as u64)
                    .sum();
                if demand > p as u64 {
                    violations.push(Violation::AttributeOversubscribed {
                        attr: ds.schema().attr_name(attr).to_string(),
                        position: p,
                        demand,
                    });
                }
            }
        }
        violations
    }
}

/// Proportional bounds: l_{v,p} = floor(alpha * p * |I_v| / n) at each
/// checkpoint, capped at min(p, |I_v|).
pub fn proportional_bounds(
    ds: &Dataset,
    k: usize,
    checkpoints: &[usize],
    alpha: Rat,
) -> Result<DiversityConstraints, ConstraintError> {
    if k == 0 {
        return Err(ConstraintError::ZeroK);
    }
    if k > ds.len() {
        return Err(ConstraintError::KExceedsN { k, n: ds.len() });
    }
    if checkpoints.is_empty() {
        return Err(ConstraintError::NoCheckpoints);
    }
    if alpha <= Rat::zero() || alpha > Rat::new(1, 1) {
        return Err(ConstraintError::AlphaOutOfRange);
    }
    let n = ds.len() as i64;
    let mut entries = Vec::new();
    for &p in checkpoints {
        if p == 0 || p > k {
            return Err(ConstraintError::CheckpointOutOfRange { position: p, k });
        }
        for v in ds.schema().value_ids() {
            let size = ds.group(v).len() as i64;
            let share = alpha * Rat::new(p as i64 * size, n);
            let floor = share.numer().div_euclid(*share.denom());
            let capped = floor.min(p as i64).min(size).max(0) as u32;
            if capped > 0 {
                entries.push((v, p, capped));
            }
        }
    }
    let (constraints, _lifted) = DiversityConstraints::from_entries(k, &entries)?;
    Ok(constraints)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    BoundExceedsPrefix {
        value: String,
        position: usize,
        bound: u32,
    },
    BoundExceedsGroup {
        value: String,
        position: usize,
        bound: u32,
        group_size: usize,
    },
    AttributeOversubscribed {
        attr: String,
        position: usize,
        demand: u64,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::BoundExceedsPrefix {
                value,
                position,
                bound,
            } => write!(
                f,
                "bound exceeds prefix: l[{value},{position}] = {bound} > {position}"
            ),
            Violation::BoundExceedsGroup {
                value,
                position,
                bound,
                group_size,
            } => write!(
                f,
                "bound exceeds group size: l[{value},{position}] = {bound} > |I_{value}| = {group_size}"
            ),
            Violation::AttributeOversubscribed {
                attr,
                position,
                demand,
            } => write!(
                f,
                "attribute {attr} demands {demand} > {position} slots in the top {position}"
            ),
        }
    }
}
