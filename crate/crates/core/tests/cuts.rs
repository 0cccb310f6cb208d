mod common;

use std::time::Instant;

use common::*;
use efmrf_core::cuts::{brute_force_cuts, cut_order, enumerate_min_cuts};
use efmrf_core::EdgeWeights;
use proptest::prelude::*;
use rand::Rng;

fn check_against_oracle(beta: &EdgeWeights, count: usize) {
    let set = enumerate_min_cuts(beta, count);
    let oracle = all_cut_weights(beta);
    let expected = count.min(oracle.len() + 1);
    assert_eq!(set.len(), expected);
    assert!(set.cuts()[0].is_trivial());
    let got = &set.weights()[1..];
    for (k, (&g, &o)) in got.iter().zip(&oracle).enumerate() {
        assert!((g - o).abs() <= 1e-9 * (1.0 + o), "cut {k}: {g} vs {o}");
    }
    // Reported weights are the true crossing weights of the reported sides.
    for c in &set.cuts()[1..] {
        let mut w = 0.0;
        for &u in c.side_a() {
            for &v in c.side_b() {
                w += beta.get(u, v);
            }
        }
        assert!((w - c.weight()).abs() <= 1e-9 * (1.0 + w));
        assert!(c.side_a().contains(&0));
    }
}

#[test]
fn ranked_weights_match_exhaustive_enumeration() {
    let mut r = rng(30);
    for case in 0..60 {
        let d = 3 + case % 10;
        let beta = if case % 2 == 0 { random_weights(&mut r, d, 0.0, 1.0) } else { random_sparse_connected(&mut r, d, 0.6) };
        let count = r.random_range(2..60);
        check_against_oracle(&beta, count);
    }
}

#[test]
fn all_bipartitions_are_distinct() {
    let mut r = rng(31);
    let beta = random_weights(&mut r, 8, 0.1, 1.0);
    let set = enumerate_min_cuts(&beta, 1000);
    assert_eq!(set.len(), 1 << 7);
    let mut masks: Vec<Vec<bool>> = set.cuts().iter().map(|c| c.mask()).collect();
    masks.sort();
    masks.dedup();
    assert_eq!(masks.len(), 1 << 7);
}

#[test]
fn ties_resolve_like_the_exhaustive_order() {
    // Integer weights give many exact ties.
    let mut r = rng(32);
    for _ in 0..30 {
        let d = 7;
        let beta = EdgeWeights::from_fn(d, |_, _| r.random_range(0..3) as f64).unwrap();
        let set = enumerate_min_cuts(&beta, 20);
        let all = brute_force_cuts(&beta);
        for (a, b) in set.cuts().iter().zip(&all) {
            assert_eq!(a.side_b(), b.side_b());
        }
    }
}

#[test]
fn brute_force_is_sorted() {
    let mut r = rng(33);
    let beta = random_weights(&mut r, 9, 0.0, 1.0);
    let all = brute_force_cuts(&beta);
    assert!(all[0].is_trivial());
    assert!(all[1..].windows(2).all(|w| cut_order(&w[0], &w[1]).is_le()));
}

#[test]
fn hundred_cuts_at_dimension_eighty_are_fast() {
    let mut r = rng(34);
    let beta = random_sparse_connected(&mut r, 80, 0.9);
    let start = Instant::now();
    let set = enumerate_min_cuts(&beta, 100);
    assert_eq!(set.len(), 100);
    assert!(set.weights()[1..].windows(2).all(|w| w[0] <= w[1]));
    assert!(start.elapsed().as_secs_f64() < 5.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn enumeration_matches_oracle(seed in any::<u64>(), d in 2usize..11, count in 1usize..40) {
        let beta = random_sparse_connected(&mut rng(seed), d, 0.5);
        check_against_oracle(&beta, count);
    }

    #[test]
    fn cut_weights_are_nondecreasing(seed in any::<u64>(), d in 2usize..14) {
        let beta = random_weights(&mut rng(seed), d, 0.0, 2.0);
        let w = enumerate_min_cuts(&beta, 50).weights();
        prop_assert!(w[1..].windows(2).all(|p| p[0] <= p[1]));
    }
}
