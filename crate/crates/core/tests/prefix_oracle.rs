//! The profile-based prefix feasibility check against a permutation oracle:
//! for k <= 6 every ordering of the candidate set can be tried directly.

mod common;

use common::random_instance;
use fairsel_core::constraints::DiversityConstraints;
use fairsel_core::dataset::{Dataset, ItemIdx};
use fairsel_core::prefix::{check_prefix_feasible, is_prefix_feasible};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::SeedableRng;

fn ordering_ok(ds: &Dataset, order: &[ItemIdx], cons: &DiversityConstraints) -> bool {
    for (v, p, bound) in cons.entries() {
        let count = order[..p]
            .iter()
            .filter(|&&i| ds.item(i).labels.contains(&v))
            .count();
        if (count as u32) < bound {
            return false;
        }
    }
    true
}

fn permutation_oracle(ds: &Dataset, set: &[ItemIdx], cons: &DiversityConstraints) -> bool {
    let mut order: Vec<ItemIdx> = set.to_vec();
    order.sort();
    loop {
        if ordering_ok(ds, &order, cons) {
            return true;
        }
        if !next_permutation(&mut order) {
            return false;
        }
    }
}

fn next_permutation(a: &mut [ItemIdx]) -> bool {
    if a.len() < 2 {
        return false;
    }
    let mut i = a.len() - 1;
    while i > 0 && a[i - 1] >= a[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = a.len() - 1;
    while a[j] <= a[i - 1] {
        j -= 1;
    }
    a.swap(i - 1, j);
    a[i..].reverse();
    true
}

#[test]
fn feasibility_matches_permutation_oracle() {
    let mut rng = StdRng::seed_from_u64(7);
    let mut checked = 0u32;
    for seed in 0..80u64 {
        let inst = random_instance(seed);
        let k = inst.cons.k();
        if k > 6 {
            continue;
        }
        // A handful of random k-subsets per instance.
        let all: Vec<ItemIdx> = (0..inst.ds.len()).collect();
        for _ in 0..8 {
            let mut set: Vec<ItemIdx> = all
                .choose_multiple(&mut rng, k)
                .copied()
                .collect();
            set.sort();
            let fast = is_prefix_feasible(&inst.ds, &set, &inst.cons).unwrap();
            let slow = permutation_oracle(&inst.ds, &set, &inst.cons);
            assert_eq!(fast, slow, "seed {seed}, set {set:?}");
            checked += 1;
        }
    }
    assert!(checked >= 400, "expected a meaningful sample, got {checked}");
}

#[test]
fn returned_ordering_is_feasible_and_lex_smallest() {
    let mut rng = StdRng::seed_from_u64(11);
    for seed in 0..60u64 {
        let inst = random_instance(seed);
        let k = inst.cons.k();
        if k > 6 {
            continue;
        }
        let all: Vec<ItemIdx> = (0..inst.ds.len()).collect();
        for _ in 0..4 {
            let mut set: Vec<ItemIdx> = all
                .choose_multiple(&mut rng, k)
                .copied()
                .collect();
            set.sort();
            let Some(order) = check_prefix_feasible(&inst.ds, &set, &inst.cons).unwrap() else {
                continue;
            };
            assert!(ordering_ok(&inst.ds, &order, &inst.cons));
            // Lexicographically smallest by id sequence: enumerate all
            // feasible permutations and take the minimum id sequence.
            let mut perm: Vec<ItemIdx> = set.clone();
            let mut best: Option<Vec<String>> = None;
            loop {
                if ordering_ok(&inst.ds, &perm, &inst.cons) {
                    let ids: Vec<String> =
                        perm.iter().map(|&i| inst.ds.item(i).id.clone()).collect();
                    best = Some(match best {
                        None => ids,
                        Some(b) => b.min(ids),
                    });
                }
                if !next_permutation(&mut perm) {
                    break;
                }
            }
            let got: Vec<String> = order.iter().map(|&i| inst.ds.item(i).id.clone()).collect();
            assert_eq!(Some(got), best, "seed {seed}, set {set:?}");
        }
    }
}

#[test]
fn wrong_set_size_is_rejected() {
    let inst = random_instance(1);
    let k = inst.cons.k();
    let set: Vec<ItemIdx> = (0..k + 1).collect();
    assert!(is_prefix_feasible(&inst.ds, &set, &inst.cons).is_err());
}

#[test]
fn random_sizes_cover_the_small_range() {
    // The generator must exercise k = 1..=4; guard against fixture drift.
    let mut seen = [false; 5];
    for seed in 0..40u64 {
        let inst = random_instance(seed);
        seen[inst.cons.k()] = true;
    }
    assert!(seen[1] && seen[2] && seen[3] && seen[4]);
}

#[test]
fn permutation_helper_enumerates_everything() {
    let mut a = vec![0usize, 1, 2];
    let mut count = 1;
    while next_permutation(&mut a) {
        count += 1;
    }
    assert_eq!(count, 6);
}
