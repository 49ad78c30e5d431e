//! Shared fixtures: a 12-item pool with two sensitive attributes, scored so
//! that each constraint family has interesting optima, plus helpers for
//! building constraint tables and random instances.
#![allow(dead_code)]

use fairsel_core::constraints::DiversityConstraints;
use fairsel_core::dataset::{load_dataset, AttributeSchema, Dataset, RawRow, ValueId};

pub fn schema() -> AttributeSchema {
    AttributeSchema::new(&[
        ("race", &["White", "Black", "Asian"]),
        ("gender", &["Male", "Female"]),
    ])
    .expect("valid schema")
}

pub const POOL: &[(&str, &str, &str, &str)] = &[
    ("A", "99", "White", "Male"),
    ("B", "98", "White", "Male"),
    ("C", "96", "White", "Female"),
    ("D", "95", "White", "Female"),
    ("E", "91", "Black", "Male"),
    ("F", "91", "Black", "Male"),
    ("G", "90", "Black", "Female"),
    ("H", "89", "Black", "Female"),
    ("I", "87", "Asian", "Male"),
    ("J", "87", "Asian", "Male"),
    ("K", "86", "Asian", "Female"),
    ("L", "83", "Asian", "Female"),
];

pub fn pool() -> Dataset {
    let schema = schema();
    let rows: Vec<RawRow> = POOL
        .iter()
        .map(|&(id, score, race, gender)| RawRow {
            id: id.into(),
            score: score.into(),
            labels: vec![race.into(), gender.into()],
        })
        .collect();
    load_dataset(&rows, &schema).expect("valid fixture")
}

pub fn v(ds: &Dataset, name: &str) -> ValueId {
    ds.schema().value_id(name).expect("known value")
}

/// Two of each gender and one of each race in the top 4.
pub fn balanced_top4(ds: &Dataset) -> DiversityConstraints {
    let entries = [
        (v(ds, "Male"), 4, 2),
        (v(ds, "Female"), 4, 2),
        (v(ds, "White"), 4, 1),
        (v(ds, "Black"), 4, 1),
        (v(ds, "Asian"), 4, 1),
    ];
    let (cons, lifted) = DiversityConstraints::from_entries(4, &entries).expect("valid");
    assert!(lifted.is_empty());
    cons
}

pub fn ids(ds: &Dataset, outcome: &fairsel_core::Outcome) -> Vec<String> {
    outcome
        .ranking()
        .iter()
        .map(|&i| ds.item(i).id.clone())
        .collect()
}

use fairsel_core::model::IgfBounds;
use fairsel_core::IgfMode;
use fairsel_core::Rat;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// A random small instance: pool, constraint table and fairness bounds.
pub struct RandomInstance {
    pub ds: Dataset,
    pub cons: DiversityConstraints,
    pub bounds: IgfBounds,
}

/// Deterministic random instance for oracle comparisons: n <= 12, k <= 4,
/// one or two attributes, integer scores, random prefix bounds and random
/// per-group fairness floors in a random mode.
pub fn random_instance(seed: u64) -> RandomInstance {
    let mut rng = StdRng::seed_from_u64(seed);
    let two_attrs = rng.gen_bool(0.5);
    let schema = if two_attrs {
        AttributeSchema::new(&[("color", &["red", "green", "blue"]), ("shape", &["round", "square"])])
    } else {
        AttributeSchema::new(&[("color", &["red", "green", "blue"])])
    }
    .expect("valid schema");

    let n = rng.gen_range(5..=12usize);
    let rows: Vec<RawRow> = (0..n)
        .map(|i| {
            let mut labels = vec![["red", "green", "blue"][rng.gen_range(0..3)].to_string()];
            if two_attrs {
                labels.push(["round", "square"][rng.gen_range(0..2)].to_string());
            }
            RawRow {
                id: format!("i{i:02}"),
                score: rng.gen_range(40..=120i64).to_string(),
                labels,
            }
        })
        .collect();
    let ds = load_dataset(&rows, &schema).expect("valid random rows");

    let k = rng.gen_range(1..=4usize.min(n));
    let mut entries = Vec::new();
    for v in ds.schema().value_ids() {
        if ds.group(v).is_empty() || !rng.gen_bool(0.6) {
            continue;
        }
        let p = rng.gen_range(1..=k);
        let cap = p.min(ds.group(v).len()) as u32;
        if cap == 0 {
            continue;
        }
        // Occasionally ask for more than the pool can give, to exercise the
        // infeasible path.
        let hi = if rng.gen_bool(0.1) { cap + 1 } else { cap };
        let bound = rng.gen_range(0..=hi);
        if bound > 0 {
            entries.push((v, p, bound));
        }
    }
    let (cons, _) = DiversityConstraints::from_entries(k, &entries).expect("valid entries");

    let mode = if rng.gen_bool(0.5) {
        IgfMode::Ratio
    } else {
        IgfMode::Aggregated
    };
    let mut bounds = IgfBounds::unconstrained(mode);
    for v in ds.schema().value_ids() {
        if ds.group(v).is_empty() || !rng.gen_bool(0.5) {
            continue;
        }
        let q = Rat::new(rng.gen_range(0..=100i64), 100);
        bounds.set(v, q, false).expect("q in range");
    }

    RandomInstance { ds, cons, bounds }
}
