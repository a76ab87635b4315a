#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wardgeo::prelude::*;

/// Relative slack for height monotonicity; merge heights are computed by
/// repeated updates and can lose a few ulps.
pub const MONOTONE_SLACK: f64 = 1e-12;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_dissim(rng: &mut impl Rng, n: usize) -> DissimMatrix {
    let values = (0..n * (n - 1) / 2)
        .map(|_| rng.gen_range(0.01..10.0))
        .collect();
    DissimMatrix::from_condensed(n, values).unwrap()
}

pub fn random_weights(rng: &mut impl Rng, n: usize) -> WeightVector {
    WeightVector::new((0..n).map(|_| rng.gen_range(0.05..5.0)).collect()).unwrap()
}

pub fn random_features(rng: &mut impl Rng, n: usize, p: usize) -> FeatureTable {
    let rows = (0..n)
        .map(|_| (0..p).map(|_| rng.gen_range(-50.0..50.0)).collect())
        .collect();
    FeatureTable::from_rows(rows).unwrap()
}

pub fn random_partition(rng: &mut impl Rng, n: usize) -> Partition {
    let k = rng.gen_range(1..=n);
    let keys: Vec<usize> = (0..n)
        .map(|i| if i < k { i } else { rng.gen_range(0..k) })
        .collect();
    Partition::canonical(&keys)
}

/// Relative gap between the smallest and second smallest δ at every step
/// of the reference kernel; the instance counts as tie-free when this stays
/// above `min_gap`.
pub fn is_tie_free(delta: &DeltaMatrix, min_gap: f64) -> bool {
    let mut ok = true;
    agglomerate_inspect(delta, |view| {
        let act = view.active();
        let mut first = f64::INFINITY;
        let mut second = f64::INFINITY;
        for (p, &a) in act.iter().enumerate() {
            for &b in &act[p + 1..] {
                let v = view.delta(a, b);
                if v < first {
                    second = first;
                    first = v;
                } else if v < second {
                    second = v;
                }
            }
        }
        if second.is_finite() && (second - first) <= min_gap * second.abs() {
            ok = false;
        }
    })
    .unwrap();
    ok
}

pub fn assert_monotone(tree: &Dendrogram) {
    assert!(
        tree.is_monotone(MONOTONE_SLACK),
        "height reversal in {:?}",
        tree.heights()
    );
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}
