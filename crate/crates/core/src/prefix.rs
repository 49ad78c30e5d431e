//! Prefix feasibility: can a selected set be ordered so that every l_{v,p}
//! bound holds?
//!
//! Items sharing the same label combination are interchangeable for
//! feasibility, so the search runs over label profiles with memoization,
//! which makes it exact for any k while staying fast. On top of the
//! feasibility test, the lexicographically smallest feasible ordering (by
//! item id, position by position) is built greedily with completion checks.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use crate::constraints::DiversityConstraints;
use crate::dataset::{Dataset, ItemIdx, ValueId};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PrefixError {
    WrongSetSize { expected: usize, got: usize },
}

impl fmt::Display for PrefixError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PrefixError::WrongSetSize { expected, got } => {
                write!(f, "selected set has {got} items, constraints expect {expected}")
            }
        }
    }
}

struct Profile {
    labels: Vec<ValueId>,
    /// Members sorted by descending id, so pop() yields ascending ids.
    members: Vec<ItemIdx>,
}

struct Searcher<'a> {
    profiles: Vec<Profile>,
    /// Active bound entries (v, p, l), the only positions worth checking.
    entries: Vec<(ValueId, usize, u32)>,
    k: usize,
    memo: BTreeMap<Vec<u16>, bool>,
    ds: &'a Dataset,
}

impl<'a> Searcher<'a> {
    fn new(ds: &'a Dataset, set: &[ItemIdx], constraints: &DiversityConstraints) -> Self {
        let mut by_labels: BTreeMap<Vec<ValueId>, Vec<ItemIdx>> = BTreeMap::new();
        for &idx in set {
            by_labels
                .entry(ds.item(idx).labels.clone())
                .or_default()
                .push(idx);
        }
        let profiles = by_labels
            .into_iter()
            .map(|(labels, mut members)| {
                members.sort_by(|&a, &b| ds.item(b).id.cmp(&ds.item(a).id));
                Profile { labels, members }
            })
            .collect();
        Searcher {
            profiles,
            entries: constraints.entries().collect(),
            k: constraints.k(),
            memo: BTreeMap::new(),
            ds,
        }
    }

    fn count_for_value(&self, placed: &[u16], v: ValueId) -> u32 {
        self.profiles
            .iter()
            .zip(placed)
            .filter(|(profile, _)| profile.labels.contains(&v))
            .map(|(_, &c)| c as u32)
            .sum()
    }

    /// All bounds at exactly position p hold for the given placement counts.
    fn checkpoint_ok(&self, placed: &[u16], p: usize) -> bool {
        self.entries
            .iter()
            .filter(|&&(_, ep, _)| ep == p)
            .all(|&(v, _, bound)| self.count_for_value(placed, v) >= bound)
    }

    /// Future demand still satisfiable: for every pending bound, enough free
    /// slots and enough unplaced carriers of the value remain.
    fn lookahead_ok(&self, placed: &[u16], filled: usize) -> bool {
        for &(v, p, bound) in &self.entries {
            if p <= filled {
                continue;
            }
            let have = self.count_for_value(placed, v);
            if have >= bound {
                continue;
            }
            let need = (bound - have) as usize;
            if need > p - filled {
                return false;
            }
            let unplaced_carriers: usize = self
                .profiles
                .iter()
                .zip(placed)
                .filter(|(profile, _)| profile.labels.contains(&v))
                .map(|(profile, &c)| profile.members.len() - c as usize)
                .sum();
            if need > unplaced_carriers {
                return false;
            }
        }
        true
    }

    /// Can the remaining items be placed into positions filled+1..=k?
    fn can_complete(&mut self, placed: &Vec<u16>) -> bool {
        let filled: usize = placed.iter().map(|&c| c as usize).sum();
        if filled == self.k {
            return true;
        }
        if let Some(&cached) = self.memo.get(placed) {
            return cached;
        }
        if !self.lookahead_ok(placed, filled) {
            self.memo.insert(placed.clone(), false);
            return false;
        }
        let mut feasible = false;
        for pr in 0..self.profiles.len() {
            if (placed[pr] as usize) >= self.profiles[pr].members.len() {
                continue;
            }
            let mut next = placed.clone();
            next[pr] += 1;
            if self.checkpoint_ok(&next, filled + 1) && self.can_complete(&next) {
                feasible = true;
                break;
            }
        }
        self.memo.insert(placed.clone(), feasible);
        feasible
    }

    /// Greedy lexicographically-smallest ordering with exact completion checks.
    fn lex_order(&mut self) -> Option<Vec<ItemIdx>> {
        let mut placed: Vec<u16> = alloc::vec![0; self.profiles.len()];
        if !self.can_complete(&placed) {
            return None;
        }
        let mut order = Vec::with_capacity(self.k);
        let mut remaining: Vec<Vec<ItemIdx>> = self
            .profiles
            .iter()
            .map(|p| p.members.clone())
            .collect();
        for filled in 0..self.k {
            // Profiles ordered by the id of their next (smallest) member.
            let mut candidates: Vec<usize> = (0..self.profiles.len())
                .filter(|&pr| !remaining[pr].is_empty())
                .collect();
            candidates.sort_by(|&a, &b| {
                let ia = *remaining[a].last().expect("non-empty");
                let ib = *remaining[b].last().expect("non-empty");
                self.ds.item(ia).id.cmp(&self.ds.item(ib).id)
            });
            let mut advanced = false;
            for pr in candidates {
                let mut next = placed.clone();
                next[pr] += 1;
                if self.checkpoint_ok(&next, filled + 1) && self.can_complete(&next) {
                    order.push(remaining[pr].pop().expect("non-empty"));
                    placed = next;
                    advanced = true;
                    break;
                }
            }
            if !advanced {
                // Cannot happen: can_complete held for the current state.
                return None;
            }
        }
        Some(order)
    }
}

/// Find an ordering of `set` meeting every prefix bound, or prove none
/// exists. The returned ordering is the lexicographically smallest feasible
/// one by item id, position by position.
pub fn check_prefix_feasible(
    ds: &Dataset,
    set: &[ItemIdx],
    constraints: &DiversityConstraints,
) -> Result<Option<Vec<ItemIdx>>, PrefixError> {
    if set.len() != constraints.k() {
        return Err(PrefixError::WrongSetSize {
            expected: constraints.k(),
            got: set.len(),
        });
    }
    if constraints.is_unconstrained() {
        let mut order = set.to_vec();
        order.sort_by(|&a, &b| ds.item(a).id.cmp(&ds.item(b).id));
        return Ok(Some(order));
    }
    Ok(Searcher::new(ds, set, constraints).lex_order())
}

/// Feasibility only, skipping the ordering construction.
pub fn is_prefix_feasible(
    ds: &Dataset,
    set: &[ItemIdx],
    constraints: &DiversityConstraints,
) -> Result<bool, PrefixError> {
    if set.len() != constraints.k() {
        return Err(PrefixError::WrongSetSize {
            expected: constraints.k(),
            got: set.len(),
        });
    }
    if constraints.is_unconstrained() {
        return Ok(true);
    }
    let mut searcher = Searcher::new(ds, set, constraints);
    let placed = alloc::vec![0u16; searcher.profiles.len()];
    Ok(searcher.can_complete(&placed))
}
