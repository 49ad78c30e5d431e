//! The two in-group fairness measures, evaluated in exact rationals.
//!
//! IGF-Ratio is the lowest accepted score over the highest rejected score
//! within a group, clamped to [0,1]. IGF-Aggregated is the worst-case ratio,
//! over accepted members i, of the accepted score mass at-or-above s_i to
//! the total group score mass at-or-above s_i. An empty accepted or rejected
//! side is vacuously fair (value 1).

use alloc::collections::BTreeMap;
use alloc::string::ToString;
use core::fmt;

use num_traits::One;

use crate::dataset::{Dataset, DatasetError, Outcome, ValueId};
use crate::Rat;

#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub enum IgfMode {
    Ratio,
    Aggregated,
}

impl fmt::Display for IgfMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IgfMode::Ratio => write!(f, "ratio"),
            IgfMode::Aggregated => write!(f, "aggregated"),
        }
    }
}

/// Per-group fairness values for one outcome; covers exactly the non-empty groups.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IgfVector {
    pub mode: IgfMode,
    pub values: BTreeMap<ValueId, Rat>,
}

impl IgfVector {
    pub fn min_value(&self) -> Option<Rat> {
        self.values.values().copied().min()
    }

    /// Values sorted in non-decreasing order, for leximin comparisons.
    pub fn sorted(&self) -> alloc::vec::Vec<Rat> {
        let mut v: alloc::vec::Vec<Rat> = self.values.values().copied().collect();
        v.sort();
        v
    }
}

fn require_group(ds: &Dataset, v: ValueId) -> Result<(), DatasetError> {
    if v.0 >= ds.schema().num_values() {
        return Err(DatasetError::UnknownValue(alloc::format!("#{}", v.0)));
    }
    if ds.group(v).is_empty() {
        return Err(DatasetError::EmptyGroup(
            ds.schema().value_name(v).to_string(),
        ));
    }
    Ok(())
}

/// min(1, a_v / b_v); vacuously 1 when A_v or B_v is empty.
pub fn igf_ratio(ds: &Dataset, outcome: &Outcome, v: ValueId) -> Result<Rat, DatasetError> {
    require_group(ds, v)?;
    let split = outcome.split(ds, v);
    match (split.lowest_accepted, split.highest_rejected) {
        (Some(a), Some(b)) => Ok(Rat::new(a, b).min(Rat::one())),
        _ => Ok(Rat::one()),
    }
}

/// min over i in A_v of sum(A_{i,v}) / sum(I_{i,v}); vacuously 1 when A_v is empty.
pub fn igf_aggregated(ds: &Dataset, outcome: &Outcome, v: ValueId) -> Result<Rat, DatasetError> {
    require_group(ds, v)?;
    // Walk the group in descending score order, keeping running sums of the
    // accepted mass and the total mass. At each accepted item i the running
    // sums are exactly sum(A_{i,v}) and sum(I_{i,v}), as long as all ties
    // with s_i have been folded in first.
    let group = ds.group(v);
    let mut best: Option<Rat> = None;
    let mut accepted_mass: i64 = 0;
    let mut total_mass: i64 = 0;
    let mut pos = 0;
    while pos < group.len() {
        let score = ds.item(group[pos]).score;
        let mut tied_accepted = alloc::vec::Vec::new();
        while pos < group.len() && ds.item(group[pos]).score == score {
            let idx = group[pos];
            total_mass += score;
            if outcome.contains(idx) {
                accepted_mass += score;
                tied_accepted.push(idx);
            }
            pos += 1;
        }
        if !tied_accepted.is_empty() {
            let ratio = Rat::new(accepted_mass, total_mass);
            best = Some(match best {
                Some(b) => b.min(ratio),
                None => ratio,
            });
        }
    }
    Ok(best.unwrap_or_else(Rat::one))
}

/// The full fairness vector over all non-empty groups.
pub fn igf_vector(ds: &Dataset, outcome: &Outcome, mode: IgfMode) -> IgfVector {
    let mut values = BTreeMap::new();
    for v in ds.schema().value_ids() {
        if ds.group(v).is_empty() {
            continue;
        }
        let value = match mode {
            IgfMode::Ratio => igf_ratio(ds, outcome, v),
            IgfMode::Aggregated => igf_aggregated(ds, outcome, v),
        }
        .expect("non-empty group");
        values.insert(v, value);
    }
    IgfVector { mode, values }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{load_dataset, AttributeSchema, RawRow};
    use alloc::vec;
    use alloc::vec::Vec;

    fn pool(scores: &[(&str, &str, &str)]) -> Dataset {
        let schema = AttributeSchema::new(&[("grp", &["g", "h"])]).unwrap();
        let rows: Vec<RawRow> = scores
            .iter()
            .map(|&(id, s, g)| RawRow {
                id: id.into(),
                score: s.into(),
                labels: vec![g.into()],
            })
            .collect();
        load_dataset(&rows, &schema).unwrap()
    }

    #[test]
    fn ratio_is_lowest_accepted_over_highest_rejected() {
        let ds = pool(&[("a", "10", "g"), ("b", "8", "g"), ("c", "6", "g"), ("d", "9", "h")]);
        let g = ds.schema().value_id("g").unwrap();
        let outcome = Outcome::from_ids(&ds, &["a", "c", "d"]).unwrap();
        // Lowest accepted in g is c = 6, highest rejected is b = 8.
        assert_eq!(igf_ratio(&ds, &outcome, g).unwrap(), Rat::new(6, 8));
    }

    #[test]
    fn ratio_clamps_at_one_and_handles_vacuous_sides() {
        let ds = pool(&[("a", "10", "g"), ("b", "8", "g"), ("c", "9", "h")]);
        let g = ds.schema().value_id("g").unwrap();
        // Accepting the top of the group: 10/8 clamps to 1.
        let top = Outcome::from_ids(&ds, &["a", "c"]).unwrap();
        assert_eq!(igf_ratio(&ds, &top, g).unwrap(), Rat::one());
        // Whole group accepted: no rejected side, vacuously 1.
        let all = Outcome::from_ids(&ds, &["a", "b"]).unwrap();
        assert_eq!(igf_ratio(&ds, &all, g).unwrap(), Rat::one());
        // Nothing accepted: vacuously 1.
        let none = Outcome::from_ids(&ds, &["c"]).unwrap();
        assert_eq!(igf_ratio(&ds, &none, g).unwrap(), Rat::one());
        assert_eq!(igf_aggregated(&ds, &none, g).unwrap(), Rat::one());
    }

    #[test]
    fn aggregated_minimizes_over_accepted_members() {
        let ds = pool(&[
            ("a", "10", "g"),
            ("b", "9", "g"),
            ("c", "8", "g"),
            ("d", "7", "h"),
        ]);
        let g = ds.schema().value_id("g").unwrap();
        // Accept a and c: at a the ratio is 10/10, at c it is 18/27.
        let outcome = Outcome::from_ids(&ds, &["a", "c"]).unwrap();
        assert_eq!(igf_aggregated(&ds, &outcome, g).unwrap(), Rat::new(18, 27));
    }

    #[test]
    fn aggregated_folds_score_ties_into_one_class() {
        let ds = pool(&[
            ("a", "9", "g"),
            ("b", "9", "g"),
            ("c", "9", "g"),
            ("d", "1", "h"),
        ]);
        let g = ds.schema().value_id("g").unwrap();
        // Accepting one of three tied members: A_{i,v} = 9, I_{i,v} = 27.
        let outcome = Outcome::from_ids(&ds, &["b", "d"]).unwrap();
        assert_eq!(igf_aggregated(&ds, &outcome, g).unwrap(), Rat::new(9, 27));
    }

    #[test]
    fn unknown_and_empty_groups_error() {
        let schema = AttributeSchema::new(&[("grp", &["g", "h"])]).unwrap();
        let rows = vec![RawRow {
            id: "a".into(),
            score: "5".into(),
            labels: vec!["g".into()],
        }];
        let ds = load_dataset(&rows, &schema).unwrap();
        let outcome = Outcome::from_ids(&ds, &["a"]).unwrap();
        let h = ds.schema().value_id("h").unwrap();
        assert!(matches!(
            igf_ratio(&ds, &outcome, h),
            Err(crate::dataset::DatasetError::EmptyGroup(_))
        ));
        assert!(matches!(
            igf_aggregated(&ds, &outcome, ValueId(99)),
            Err(crate::dataset::DatasetError::UnknownValue(_))
        ));
        // The vector skips the empty group instead of erroring.
        let vector = igf_vector(&ds, &outcome, IgfMode::Ratio);
        assert_eq!(vector.values.len(), 1);
    }

    #[test]
    fn sorted_vector_is_nondecreasing() {
        let ds = pool(&[("a", "10", "g"), ("b", "4", "g"), ("c", "9", "h"), ("d", "8", "h")]);
        let outcome = Outcome::from_ids(&ds, &["b", "d"]).unwrap();
        let vector = igf_vector(&ds, &outcome, IgfMode::Ratio);
        let sorted = vector.sorted();
        assert!(sorted.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(vector.min_value(), sorted.first().copied());
    }
}
