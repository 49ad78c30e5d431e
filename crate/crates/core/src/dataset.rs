//! Item pool, attribute schema and derived group views.
//!
//! Scores are parsed from decimal literals and stored as integers after
//! scaling every score to the common number of decimal places. All utility
//! comparisons downstream are therefore exact.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::Rat;

/// Index of a sensitive attribute value in the flattened value list of a schema.
#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Debug, Hash)]
pub struct ValueId(pub usize);

/// Index of an item within a [`Dataset`].
pub type ItemIdx = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SchemaError {
    NoAttributes,
    EmptyDomain(String),
    DuplicateAttribute(String),
    /// Value identifiers must be globally unique across attributes.
    DuplicateValue(String),
}

impl fmt::Display for SchemaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SchemaError::NoAttributes => write!(f, "schema has no attributes"),
            SchemaError::EmptyDomain(a) => write!(f, "attribute {a:?} has an empty domain"),
            SchemaError::DuplicateAttribute(a) => write!(f, "duplicate attribute name {a:?}"),
            SchemaError::DuplicateValue(v) => write!(f, "duplicate value identifier {v:?}"),
        }
    }
}

/// Ordered attribute names with their value domains. Value identifiers are
/// globally unique, so a bare value name always determines its attribute.
#[derive(Debug, Clone)]
pub struct AttributeSchema {
    attr_names: Vec<String>,
    value_names: Vec<String>,
    value_attr: Vec<usize>,
    attr_values: Vec<Vec<ValueId>>,
}

impl AttributeSchema {
    pub fn from_parts(attrs: Vec<(String, Vec<String>)>) -> Result<Self, SchemaError> {
        if attrs.is_empty() {
            return Err(SchemaError::NoAttributes);
        }
        let mut schema = AttributeSchema {
            attr_names: Vec::new(),
            value_names: Vec::new(),
            value_attr: Vec::new(),
            attr_values: Vec::new(),
        };
        let mut seen_attrs = BTreeSet::new();
        let mut seen_values = BTreeSet::new();
        for (a, (name, values)) in attrs.into_iter().enumerate() {
            if !seen_attrs.insert(name.clone()) {
                return Err(SchemaError::DuplicateAttribute(name));
            }
            if values.is_empty() {
                return Err(SchemaError::EmptyDomain(name));
            }
            let mut ids = Vec::with_capacity(values.len());
            for value in values {
                if !seen_values.insert(value.clone()) {
                    return Err(SchemaError::DuplicateValue(value));
                }
                ids.push(ValueId(schema.value_names.len()));
                schema.value_names.push(value);
                schema.value_attr.push(a);
            }
            schema.attr_names.push(name);
            schema.attr_values.push(ids);
        }
        Ok(schema)
    }

    /// Convenience constructor for literal schemas in tests and fixtures.
    pub fn new(attrs: &[(&str, &[&str])]) -> Result<Self, SchemaError> {
        Self::from_parts(
            attrs
                .iter()
                .map(|(name, values)| {
                    (
                        name.to_string(),
                        values.iter().map(|v| v.to_string()).collect(),
                    )
                })
                .collect(),
        )
    }

    pub fn num_attrs(&self) -> usize {
        self.attr_names.len()
    }

    pub fn num_values(&self) -> usize {
        self.value_names.len()
    }

    pub fn attr_name(&self, attr: usize) -> &str {
        &self.attr_names[attr]
    }

    pub fn value_name(&self, v: ValueId) -> &str {
        &self.value_names[v.0]
    }

    pub fn attr_of(&self, v: ValueId) -> usize {
        self.value_attr[v.0]
    }

    pub fn values_of_attr(&self, attr: usize) -> &[ValueId] {
        &self.attr_values[attr]
    }

    pub fn value_id(&self, name: &str) -> Option<ValueId> {
        self.value_names
            .iter()
            .position(|n| n == name)
            .map(ValueId)
    }

    pub fn value_ids(&self) -> impl Iterator<Item = ValueId> {
        (0..self.value_names.len()).map(ValueId)
    }
}

/// One input record before validation. `labels` holds value names, one per
/// attribute, in any order.
#[derive(Debug, Clone)]
pub struct RawRow {
    pub id: String,
    pub score: String,
    pub labels: Vec<String>,
}

/// A validated item: scaled integer score and one value per attribute,
/// indexed by attribute position.
#[derive(Debug, Clone)]
pub struct Item {
    pub id: String,
    pub score: i64,
    pub labels: Vec<ValueId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LoadError {
    DuplicateId(String),
    BadScore { id: String, score: String },
    NonPositiveScore { id: String },
    UnknownLabel { id: String, label: String },
    MissingAttribute { id: String, attr: String },
    MultipleLabels { id: String, attr: String },
    ScoreOverflow { id: String },
}

impl fmt::Display for LoadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LoadError::DuplicateId(id) => write!(f, "duplicate item id {id:?}"),
            LoadError::BadScore { id, score } => {
                write!(f, "item {id:?}: score {score:?} is not a decimal literal")
            }
            LoadError::NonPositiveScore { id } => write!(f, "item {id:?}: non-positive score"),
            LoadError::UnknownLabel { id, label } => {
                write!(f, "item {id:?}: label {label:?} not in schema")
            }
            LoadError::MissingAttribute { id, attr } => {
                write!(f, "item {id:?}: missing a value for attribute {attr:?}")
            }
            LoadError::MultipleLabels { id, attr } => {
                write!(f, "item {id:?}: more than one value for attribute {attr:?}")
            }
            LoadError::ScoreOverflow { id } => {
                write!(f, "item {id:?}: score does not fit the common scale")
            }
        }
    }
}

/// Parse a decimal literal into (mantissa, decimal places). No exponents.
fn parse_decimal(s: &str) -> Option<(i64, u32)> {
    let s = s.trim();
    let (neg, digits) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    if digits.is_empty() {
        return None;
    }
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((i, fr)) => (i, fr),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    let mut mantissa: i64 = 0;
    for c in int_part.chars().chain(frac_part.chars()) {
        let d = c.to_digit(10)? as i64;
        mantissa = mantissa.checked_mul(10)?.checked_add(d)?;
    }
    if neg {
        mantissa = -mantissa;
    }
    Some((mantissa, frac_part.len() as u32))
}

/// The item pool with its group index. Immutable after construction.
#[derive(Debug, Clone)]
pub struct Dataset {
    schema: AttributeSchema,
    items: Vec<Item>,
    score_scale: u32,
    groups: Vec<Vec<ItemIdx>>,
    id_index: BTreeMap<String, ItemIdx>,
}

/// Load validated rows into a dataset. Every item must carry exactly one
/// value for every attribute of the schema.
pub fn load_dataset(rows: &[RawRow], schema: &AttributeSchema) -> Result<Dataset, LoadError> {
    let mut parsed: Vec<(i64, u32)> = Vec::with_capacity(rows.len());
    let mut scale: u32 = 0;
    for row in rows {
        let (mantissa, places) =
            parse_decimal(&row.score).ok_or_else(|| LoadError::BadScore {
                id: row.id.clone(),
                score: row.score.clone(),
            })?;
        if mantissa <= 0 {
            return Err(LoadError::NonPositiveScore { id: row.id.clone() });
        }
        scale = scale.max(places);
        parsed.push((mantissa, places));
    }

    let mut items = Vec::with_capacity(rows.len());
    let mut id_index = BTreeMap::new();
    for (row, (mantissa, places)) in rows.iter().zip(parsed) {
        if id_index.contains_key(&row.id) {
            return Err(LoadError::DuplicateId(row.id.clone()));
        }
        let factor = 10i64
            .checked_pow(scale - places)
            .ok_or_else(|| LoadError::ScoreOverflow { id: row.id.clone() })?;
        let score = mantissa
            .checked_mul(factor)
            .ok_or_else(|| LoadError::ScoreOverflow { id: row.id.clone() })?;

        let mut labels: Vec<Option<ValueId>> = alloc::vec![None; schema.num_attrs()];
        for label in &row.labels {
            let v = schema
                .value_id(label)
                .ok_or_else(|| LoadError::UnknownLabel {
                    id: row.id.clone(),
                    label: label.clone(),
                })?;
            let attr = schema.attr_of(v);
            if labels[attr].is_some() {
                return Err(LoadError::MultipleLabels {
                    id: row.id.clone(),
                    attr: schema.attr_name(attr).to_string(),
                });
            }
            labels[attr] = Some(v);
        }
        let mut resolved = Vec::with_capacity(labels.len());
        for (attr, slot) in labels.into_iter().enumerate() {
            match slot {
                Some(v) => resolved.push(v),
                None => {
                    return Err(LoadError::MissingAttribute {
                        id: row.id.clone(),
                        attr: schema.attr_name(attr).to_string(),
                    })
                }
            }
        }
        id_index.insert(row.id.clone(), items.len());
        items.push(Item {
            id: row.id.clone(),
            score,
            labels: resolved,
        });
    }

    // Group members sorted by descending score, ties by ascending id.
    let mut groups = alloc::vec![Vec::new(); schema.num_values()];
    let mut order: Vec<ItemIdx> = (0..items.len()).collect();
    order.sort_by(|&a, &b| {
        items[b]
            .score
            .cmp(&items[a].score)
            .then_with(|| items[a].id.cmp(&items[b].id))
    });
    for &idx in &order {
        for &v in &items[idx].labels {
            groups[v.0].push(idx);
        }
    }

    Ok(Dataset {
        schema: schema.clone(),
        items,
        score_scale: scale,
        groups,
        id_index,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DatasetError {
    EmptyDataset,
    UnknownItem(String),
    NotInGroup { id: String, value: String },
    UnknownValue(String),
    EmptyGroup(String),
}

impl fmt::Display for DatasetError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DatasetError::EmptyDataset => write!(f, "dataset has no items"),
            DatasetError::UnknownItem(id) => write!(f, "unknown item id {id:?}"),
            DatasetError::NotInGroup { id, value } => {
                write!(f, "item {id:?} does not carry value {value:?}")
            }
            DatasetError::UnknownValue(v) => write!(f, "unknown attribute value {v:?}"),
            DatasetError::EmptyGroup(v) => write!(f, "group {v:?} has no members"),
        }
    }
}

/// Extreme scores and their ratio lambda = s_max / s_min.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetStats {
    pub s_max: i64,
    pub s_min: i64,
}

impl DatasetStats {
    pub fn lambda(&self) -> Rat {
        Rat::new(self.s_max, self.s_min)
    }
}

impl Dataset {
    pub fn schema(&self) -> &AttributeSchema {
        &self.schema
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn item(&self, idx: ItemIdx) -> &Item {
        &self.items[idx]
    }

    pub fn items(&self) -> &[Item] {
        &self.items
    }

    pub fn item_by_id(&self, id: &str) -> Option<ItemIdx> {
        self.id_index.get(id).copied()
    }

    /// Members of group I_v, sorted by descending score then ascending id.
    pub fn group(&self, v: ValueId) -> &[ItemIdx] {
        &self.groups[v.0]
    }

    /// Number of decimal places folded into the integer scores.
    pub fn score_scale(&self) -> u32 {
        self.score_scale
    }

    /// 10^scale, the integer score units per raw score unit.
    pub fn score_unit(&self) -> i64 {
        10i64.pow(self.score_scale)
    }

    /// Render a scaled integer score (or utility) back as a decimal string.
    pub fn format_score(&self, scaled: i64) -> String {
        if self.score_scale == 0 {
            return scaled.to_string();
        }
        let unit = self.score_unit();
        let sign = if scaled < 0 { "-" } else { "" };
        let abs = scaled.unsigned_abs();
        let unit = unit as u64;
        let mut out = alloc::format!(
            "{sign}{}.{:0width$}",
            abs / unit,
            abs % unit,
            width = self.score_scale as usize
        );
        while out.ends_with('0') {
            out.pop();
        }
        if out.ends_with('.') {
            out.pop();
        }
        out
    }

    pub fn stats(&self) -> Result<DatasetStats, DatasetError> {
        let mut scores = self.items.iter().map(|i| i.score);
        let first = scores.next().ok_or(DatasetError::EmptyDataset)?;
        let (mut lo, mut hi) = (first, first);
        for s in scores {
            lo = lo.min(s);
            hi = hi.max(s);
        }
        Ok(DatasetStats { s_max: hi, s_min: lo })
    }

    /// The set I_{i,v}: members of I_v with score >= s_i, including i.
    pub fn better_or_equal_set(&self, v: ValueId, id: &str) -> Result<Vec<ItemIdx>, DatasetError> {
        let idx = self
            .item_by_id(id)
            .ok_or_else(|| DatasetError::UnknownItem(id.to_string()))?;
        if !self.items[idx].labels.contains(&v) {
            return Err(DatasetError::NotInGroup {
                id: id.to_string(),
                value: self.schema.value_name(v).to_string(),
            });
        }
        let threshold = self.items[idx].score;
        Ok(self.groups[v.0]
            .iter()
            .copied()
            .filter(|&j| self.items[j].score >= threshold)
            .collect())
    }
}

/// A ranked selection of k items plus its derived per-group views.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    ranking: Vec<ItemIdx>,
    selected: BTreeSet<ItemIdx>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OutcomeError {
    DuplicateItem(String),
    UnknownItem(String),
    IndexOutOfRange(usize),
}

impl fmt::Display for OutcomeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OutcomeError::DuplicateItem(id) => write!(f, "item {id:?} ranked twice"),
            OutcomeError::UnknownItem(id) => write!(f, "unknown item id {id:?}"),
            OutcomeError::IndexOutOfRange(i) => write!(f, "item index {i} out of range"),
        }
    }
}

/// Accepted/rejected split of one group under an outcome.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupSplit {
    pub accepted: Vec<ItemIdx>,
    pub rejected: Vec<ItemIdx>,
    /// a_v: lowest accepted score, if any member is accepted.
    pub lowest_accepted: Option<i64>,
    /// b_v: highest rejected score, if any member is rejected.
    pub highest_rejected: Option<i64>,
}

impl Outcome {
    pub fn from_indices(ds: &Dataset, ranking: Vec<ItemIdx>) -> Result<Self, OutcomeError> {
        let mut selected = BTreeSet::new();
        for &idx in &ranking {
            if idx >= ds.len() {
                return Err(OutcomeError::IndexOutOfRange(idx));
            }
            if !selected.insert(idx) {
                return Err(OutcomeError::DuplicateItem(ds.item(idx).id.clone()));
            }
        }
        Ok(Outcome { ranking, selected })
    }

    pub fn from_ids<S: AsRef<str>>(ds: &Dataset, ids: &[S]) -> Result<Self, OutcomeError> {
        let mut ranking = Vec::with_capacity(ids.len());
        for id in ids {
            let idx = ds
                .item_by_id(id.as_ref())
                .ok_or_else(|| OutcomeError::UnknownItem(id.as_ref().to_string()))?;
            ranking.push(idx);
        }
        Self::from_indices(ds, ranking)
    }

    /// Ranked item indices, position 1 first.
    pub fn ranking(&self) -> &[ItemIdx] {
        &self.ranking
    }

    pub fn k(&self) -> usize {
        self.ranking.len()
    }

    pub fn contains(&self, idx: ItemIdx) -> bool {
        self.selected.contains(&idx)
    }

    pub fn selected(&self) -> impl Iterator<Item = ItemIdx> + '_ {
        self.selected.iter().copied()
    }

    pub fn total_utility(&self, ds: &Dataset) -> i64 {
        self.ranking.iter().map(|&i| ds.item(i).score).sum()
    }

    /// Split group I_v into A_v and B_v, both in group order.
    pub fn split(&self, ds: &Dataset, v: ValueId) -> GroupSplit {
        let mut accepted = Vec::new();
        let mut rejected = Vec::new();
        for &idx in ds.group(v) {
            if self.contains(idx) {
                accepted.push(idx);
            } else {
                rejected.push(idx);
            }
        }
        let lowest_accepted = accepted.iter().map(|&i| ds.item(i).score).min();
        let highest_rejected = rejected.iter().map(|&i| ds.item(i).score).max();
        GroupSplit {
            accepted,
            rejected,
            lowest_accepted,
            highest_rejected,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn schema() -> AttributeSchema {
        AttributeSchema::new(&[("dept", &["cs", "math"]), ("level", &["jr", "sr"])]).unwrap()
    }

    fn row(id: &str, score: &str, labels: &[&str]) -> RawRow {
        RawRow {
            id: id.to_string(),
            score: score.to_string(),
            labels: labels.iter().map(|l| l.to_string()).collect(),
        }
    }

    #[test]
    fn decimal_scores_share_a_common_scale() {
        let rows = vec![
            row("a", "2.5", &["cs", "jr"]),
            row("b", "3", &["math", "sr"]),
            row("c", "0.75", &["cs", "sr"]),
        ];
        let ds = load_dataset(&rows, &schema()).unwrap();
        assert_eq!(ds.score_scale(), 2);
        assert_eq!(ds.item(ds.item_by_id("a").unwrap()).score, 250);
        assert_eq!(ds.item(ds.item_by_id("b").unwrap()).score, 300);
        assert_eq!(ds.item(ds.item_by_id("c").unwrap()).score, 75);
        assert_eq!(ds.format_score(250), "2.5");
        assert_eq!(ds.format_score(75), "0.75");
        assert_eq!(ds.format_score(300), "3");
    }

    #[test]
    fn load_rejects_malformed_rows() {
        let s = schema();
        let base = || vec![row("a", "1", &["cs", "jr"])];

        let mut rows = base();
        rows.push(row("a", "2", &["cs", "jr"]));
        assert!(matches!(
            load_dataset(&rows, &s),
            Err(LoadError::DuplicateId(_))
        ));

        let mut rows = base();
        rows.push(row("b", "not-a-number", &["cs", "jr"]));
        assert!(matches!(
            load_dataset(&rows, &s),
            Err(LoadError::BadScore { .. })
        ));

        let mut rows = base();
        rows.push(row("b", "0", &["cs", "jr"]));
        assert!(matches!(
            load_dataset(&rows, &s),
            Err(LoadError::NonPositiveScore { .. })
        ));

        let mut rows = base();
        rows.push(row("b", "-3", &["cs", "jr"]));
        assert!(matches!(
            load_dataset(&rows, &s),
            Err(LoadError::NonPositiveScore { .. })
        ));

        let mut rows = base();
        rows.push(row("b", "2", &["cs", "unknown"]));
        assert!(matches!(
            load_dataset(&rows, &s),
            Err(LoadError::UnknownLabel { .. })
        ));

        let mut rows = base();
        rows.push(row("b", "2", &["cs"]));
        assert!(matches!(
            load_dataset(&rows, &s),
            Err(LoadError::MissingAttribute { .. })
        ));

        let mut rows = base();
        rows.push(row("b", "2", &["cs", "math", "jr"]));
        assert!(matches!(
            load_dataset(&rows, &s),
            Err(LoadError::MultipleLabels { .. })
        ));
    }

    #[test]
    fn schema_rejects_duplicates_and_empty_domains() {
        assert!(matches!(
            AttributeSchema::new(&[]),
            Err(SchemaError::NoAttributes)
        ));
        assert!(matches!(
            AttributeSchema::new(&[("a", &[])]),
            Err(SchemaError::EmptyDomain(_))
        ));
        assert!(matches!(
            AttributeSchema::new(&[("a", &["x"]), ("a", &["y"])]),
            Err(SchemaError::DuplicateAttribute(_))
        ));
        assert!(matches!(
            AttributeSchema::new(&[("a", &["x"]), ("b", &["x"])]),
            Err(SchemaError::DuplicateValue(_))
        ));
    }

    #[test]
    fn groups_are_sorted_by_score_then_id() {
        let rows = vec![
            row("z", "5", &["cs", "jr"]),
            row("a", "5", &["cs", "sr"]),
            row("m", "9", &["cs", "jr"]),
        ];
        let ds = load_dataset(&rows, &schema()).unwrap();
        let cs = ds.schema().value_id("cs").unwrap();
        let ids: Vec<&str> = ds.group(cs).iter().map(|&i| ds.item(i).id.as_str()).collect();
        assert_eq!(ids, ["m", "a", "z"]);
    }

    #[test]
    fn stats_and_lambda() {
        let rows = vec![
            row("a", "99", &["cs", "jr"]),
            row("b", "83", &["math", "sr"]),
        ];
        let ds = load_dataset(&rows, &schema()).unwrap();
        let stats = ds.stats().unwrap();
        assert_eq!((stats.s_max, stats.s_min), (99, 83));
        assert_eq!(stats.lambda(), Rat::new(99, 83));
    }

    #[test]
    fn better_or_equal_set_includes_score_ties() {
        let rows = vec![
            row("a", "7", &["cs", "jr"]),
            row("b", "7", &["cs", "sr"]),
            row("c", "5", &["cs", "jr"]),
            row("d", "9", &["math", "jr"]),
        ];
        let ds = load_dataset(&rows, &schema()).unwrap();
        let cs = ds.schema().value_id("cs").unwrap();
        let set = ds.better_or_equal_set(cs, "b").unwrap();
        let ids: Vec<&str> = set.iter().map(|&i| ds.item(i).id.as_str()).collect();
        assert_eq!(ids, ["a", "b"]);
        assert!(matches!(
            ds.better_or_equal_set(cs, "d"),
            Err(DatasetError::NotInGroup { .. })
        ));
        assert!(matches!(
            ds.better_or_equal_set(cs, "zzz"),
            Err(DatasetError::UnknownItem(_))
        ));
    }

    #[test]
    fn outcome_split_reports_boundary_scores() {
        let rows = vec![
            row("a", "9", &["cs", "jr"]),
            row("b", "8", &["cs", "sr"]),
            row("c", "7", &["cs", "jr"]),
            row("d", "6", &["math", "jr"]),
        ];
        let ds = load_dataset(&rows, &schema()).unwrap();
        let cs = ds.schema().value_id("cs").unwrap();
        let outcome = Outcome::from_ids(&ds, &["a", "c"]).unwrap();
        let split = outcome.split(&ds, cs);
        assert_eq!(split.lowest_accepted, Some(7));
        assert_eq!(split.highest_rejected, Some(8));
        assert_eq!(outcome.total_utility(&ds), 16);

        assert!(matches!(
            Outcome::from_ids(&ds, &["a", "a"]),
            Err(OutcomeError::DuplicateItem(_))
        ));
        assert!(matches!(
            Outcome::from_ids(&ds, &["nope"]),
            Err(OutcomeError::UnknownItem(_))
        ));
    }
}
