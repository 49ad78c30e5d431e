//! Property tests for the metric and constraint invariants.

use fairsel_core::constraints::proportional_bounds;
use fairsel_core::dataset::{load_dataset, AttributeSchema, Dataset, RawRow};
use fairsel_core::{igf_aggregated, igf_ratio, igf_vector, IgfMode, Outcome, Rat};
use proptest::prelude::*;

#[derive(Debug, Clone)]
struct Pool {
    scores: Vec<u32>,
    labels: Vec<u8>,
    accepted: Vec<bool>,
}

fn pool_strategy() -> impl Strategy<Value = Pool> {
    (2usize..14).prop_flat_map(|n| {
        (
            proptest::collection::vec(1u32..10_000, n),
            proptest::collection::vec(0u8..3, n),
            proptest::collection::vec(any::<bool>(), n),
        )
            .prop_map(|(scores, labels, accepted)| Pool {
                scores,
                labels,
                accepted,
            })
    })
}

fn build(pool: &Pool, divisor: u32) -> (Dataset, Outcome) {
    let schema = AttributeSchema::new(&[("grp", &["g0", "g1", "g2"])]).unwrap();
    let rows: Vec<RawRow> = pool
        .scores
        .iter()
        .zip(&pool.labels)
        .enumerate()
        .map(|(i, (&s, &l))| RawRow {
            id: format!("i{i:03}"),
            score: match divisor {
                1 => s.to_string(),
                100 => format!("{}.{:02}", s / 100, s % 100),
                _ => unreachable!(),
            },
            labels: vec![format!("g{l}")],
        })
        .collect();
    let ds = load_dataset(&rows, &schema).unwrap();
    let ranking: Vec<usize> = pool
        .accepted
        .iter()
        .enumerate()
        .filter(|(_, &a)| a)
        .map(|(i, _)| i)
        .collect();
    let outcome = Outcome::from_indices(&ds, ranking).unwrap();
    (ds, outcome)
}

proptest! {
    #[test]
    fn metrics_stay_within_the_unit_interval(pool in pool_strategy()) {
        let (ds, outcome) = build(&pool, 1);
        for v in ds.schema().value_ids() {
            if ds.group(v).is_empty() {
                continue;
            }
            for value in [
                igf_ratio(&ds, &outcome, v).unwrap(),
                igf_aggregated(&ds, &outcome, v).unwrap(),
            ] {
                prop_assert!(value >= Rat::new(0, 1));
                prop_assert!(value <= Rat::new(1, 1));
            }
        }
    }

    #[test]
    fn metrics_are_invariant_under_decimal_rescaling(pool in pool_strategy()) {
        // Writing every score as value/100 in decimal notation must not
        // change either metric: both are ratios of score sums.
        let (ds1, out1) = build(&pool, 1);
        let (ds2, out2) = build(&pool, 100);
        for v in ds1.schema().value_ids() {
            if ds1.group(v).is_empty() {
                continue;
            }
            prop_assert_eq!(
                igf_ratio(&ds1, &out1, v).unwrap(),
                igf_ratio(&ds2, &out2, v).unwrap()
            );
            prop_assert_eq!(
                igf_aggregated(&ds1, &out1, v).unwrap(),
                igf_aggregated(&ds2, &out2, v).unwrap()
            );
        }
    }

    #[test]
    fn metrics_ignore_input_row_order(pool in pool_strategy(), seed in any::<u64>()) {
        let (ds1, out1) = build(&pool, 1);
        // Rotate the rows; identify items by id afterwards.
        let n = pool.scores.len();
        let shift = (seed as usize) % n;
        let mut rotated = pool.clone();
        rotated.scores.rotate_left(shift);
        rotated.labels.rotate_left(shift);
        rotated.accepted.rotate_left(shift);
        let schema = AttributeSchema::new(&[("grp", &["g0", "g1", "g2"])]).unwrap();
        let rows: Vec<RawRow> = rotated
            .scores
            .iter()
            .zip(&rotated.labels)
            .enumerate()
            .map(|(i, (&s, &l))| RawRow {
                id: format!("i{:03}", (i + shift) % n),
                score: s.to_string(),
                labels: vec![format!("g{l}")],
            })
            .collect();
        let ds2 = load_dataset(&rows, &schema).unwrap();
        let ids: Vec<String> = out1
            .selected()
            .map(|i| ds1.item(i).id.clone())
            .collect();
        let out2 = Outcome::from_ids(&ds2, &ids).unwrap();
        for v in ds1.schema().value_ids() {
            if ds1.group(v).is_empty() {
                continue;
            }
            prop_assert_eq!(
                igf_ratio(&ds1, &out1, v).unwrap(),
                igf_ratio(&ds2, &out2, v).unwrap()
            );
            prop_assert_eq!(
                igf_aggregated(&ds1, &out1, v).unwrap(),
                igf_aggregated(&ds2, &out2, v).unwrap()
            );
        }
    }

    #[test]
    fn vector_min_matches_sorted_head(pool in pool_strategy()) {
        let (ds, outcome) = build(&pool, 1);
        for mode in [IgfMode::Ratio, IgfMode::Aggregated] {
            let vector = igf_vector(&ds, &outcome, mode);
            let sorted = vector.sorted();
            prop_assert!(sorted.windows(2).all(|w| w[0] <= w[1]));
            prop_assert_eq!(vector.min_value(), sorted.first().copied());
        }
    }

    #[test]
    fn proportional_bounds_always_pass_validation(
        pool in pool_strategy(),
        k_frac in 1u32..=100,
        alpha_num in 1i64..=100,
    ) {
        let (ds, _) = build(&pool, 1);
        let n = ds.len();
        let k = ((k_frac as usize * n) / 100).clamp(1, n);
        let alpha = Rat::new(alpha_num, 100);
        let checkpoints: Vec<usize> = (1..=k).collect();
        let cons = proportional_bounds(&ds, k, &checkpoints, alpha).unwrap();
        // Floors of proportional shares can never oversubscribe a prefix or
        // outgrow a group.
        prop_assert!(cons.validate(&ds).is_empty());
        // Effective bounds are monotone in the prefix.
        for v in ds.schema().value_ids() {
            for p in 1..k {
                prop_assert!(cons.bound_at(v, p) <= cons.bound_at(v, p + 1));
            }
        }
    }

    #[test]
    fn accepting_everyone_is_perfectly_fair(pool in pool_strategy()) {
        let (ds, _) = build(&pool, 1);
        let everyone = Outcome::from_indices(&ds, (0..ds.len()).collect()).unwrap();
        for v in ds.schema().value_ids() {
            if ds.group(v).is_empty() {
                continue;
            }
            prop_assert_eq!(igf_ratio(&ds, &everyone, v).unwrap(), Rat::new(1, 1));
            prop_assert_eq!(igf_aggregated(&ds, &everyone, v).unwrap(), Rat::new(1, 1));
        }
    }
}
