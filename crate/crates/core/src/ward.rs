//! Ward-like agglomeration over an aggregation matrix.
//!
//! Two kernels share one contract. [`agglomerate`] scans every active pair
//! at every step and is the reference; [`agglomerate_nnchain`] follows
//! nearest-neighbour chains in `O(n^2)` time and relies on the Ward update
//! being reducible.
//!
//! Clusters live in the slot of their smallest observation index, so ties
//! on the minimum are resolved by the lowest smaller-leaf index first and
//! the lowest larger-leaf index second.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use crate::condensed::{condensed_len, rank, rank_unordered};
use crate::dissim::{DissimMatrix, WeightVector};
use crate::error::{Error, Result};
use crate::quality::pseudo_inertia;

pub use crate::dendrogram::{cut_tree, Dendrogram, Merge, NodeRef, Partition};

/// Above this many observations [`Kernel::Auto`] picks the chain kernel.
pub const NAIVE_MAX_AUTO: usize = 64;

/// Pairwise aggregation measures plus the weight of every cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaMatrix {
    n: usize,
    values: Vec<f64>,
    weights: WeightVector,
}

impl DeltaMatrix {
    pub fn new(n: usize, values: Vec<f64>, weights: WeightVector) -> Result<Self> {
        if n < 2 {
            return Err(Error::TooFewObservations(n));
        }
        if values.len() != condensed_len(n) {
            return Err(Error::CondensedLength {
                n,
                expected: condensed_len(n),
                got: values.len(),
            });
        }
        weights.check_len(n)?;
        if let Some(k) = values.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            let (i, j) = crate::condensed::unrank(n, k);
            return Err(Error::InvalidValue {
                i,
                j,
                value: values[k],
            });
        }
        Ok(Self { n, values, weights })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn weights(&self) -> &WeightVector {
        &self.weights
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            0.0
        } else {
            self.values[rank_unordered(self.n, i, j)]
        }
    }
}

/// `delta_ij = w_i w_j / (w_i + w_j) * d_ij^2`.
pub fn delta_singletons(d: &DissimMatrix, wt: &WeightVector) -> Result<DeltaMatrix> {
    let n = d.n();
    wt.check_len(n)?;
    let w = wt.as_slice();
    let mut values = Vec::with_capacity(condensed_len(n));
    for i in 0..n {
        for j in i + 1..n {
            let dij = d.values()[rank(n, i, j)];
            values.push(dij * dij * (w[i] * w[j] / (w[i] + w[j])));
        }
    }
    DeltaMatrix::new(n, values, wt.clone())
}

/// Lance–Williams update for Ward: the measure between `A ∪ B` and `D`.
#[inline]
pub fn lw_update(
    delta_ad: f64,
    delta_bd: f64,
    delta_ab: f64,
    mu_a: f64,
    mu_b: f64,
    mu_d: f64,
) -> f64 {
    ((mu_a + mu_d) * delta_ad + (mu_b + mu_d) * delta_bd - mu_d * delta_ab) / (mu_a + mu_b + mu_d)
}

/// `I(A ∪ B) - I(A) - I(B)` recomputed from the dissimilarities.
pub fn delta_direct(d: &DissimMatrix, wt: &WeightVector, a: &[usize], b: &[usize]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySet);
    }
    let mut in_a = vec![false; d.n()];
    for &i in a {
        if i >= d.n() {
            return Err(Error::IndexOutOfRange { index: i, n: d.n() });
        }
        in_a[i] = true;
    }
    if let Some(&i) = b.iter().find(|&&i| i < d.n() && in_a[i]) {
        return Err(Error::OverlappingSets(i));
    }
    let union: Vec<usize> = a.iter().chain(b).copied().collect();
    Ok(pseudo_inertia(d, wt, &union)? - pseudo_inertia(d, wt, a)? - pseudo_inertia(d, wt, b)?)
}

/// Which agglomeration kernel to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Kernel {
    /// Naive for `n <= NAIVE_MAX_AUTO`, chain otherwise.
    #[default]
    Auto,
    Naive,
    NnChain,
}

impl std::str::FromStr for Kernel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Kernel::Auto),
            "naive" => Ok(Kernel::Naive),
            "chain" | "nnchain" | "nn-chain" => Ok(Kernel::NnChain),
            _ => Err(Error::InvalidArgument(format!("unknown kernel {s:?}"))),
        }
    }
}

pub fn agglomerate_with(delta: &DeltaMatrix, kernel: Kernel) -> Result<Dendrogram> {
    match kernel {
        Kernel::Naive => agglomerate(delta),
        Kernel::NnChain => agglomerate_nnchain(delta),
        Kernel::Auto if delta.n() <= NAIVE_MAX_AUTO => agglomerate(delta),
        Kernel::Auto => agglomerate_nnchain(delta),
    }
}

/// A merge between two slots, each named by its smallest observation index.
#[derive(Debug, Clone, Copy)]
struct SlotMerge {
    low: usize,
    high: usize,
    height: f64,
    weight: f64,
}

/// State of the reference kernel before a merge, for inspection.
pub struct StepView<'a> {
    pub step: usize,
    n: usize,
    active: &'a [usize],
    members: &'a [Vec<usize>],
    d: &'a [f64],
}

impl StepView<'_> {
    /// Slots of the current clusters, each named by its smallest observation.
    pub fn active(&self) -> &[usize] {
        self.active
    }

    pub fn members(&self, slot: usize) -> &[usize] {
        &self.members[slot]
    }

    /// Current aggregation measure between two active slots.
    pub fn delta(&self, a: usize, b: usize) -> f64 {
        self.d[rank_unordered(self.n, a, b)]
    }
}

/// Greedy agglomeration: each step merges the pair with the smallest
/// current measure, scanning all active pairs.
pub fn agglomerate(delta: &DeltaMatrix) -> Result<Dendrogram> {
    agglomerate_inspect(delta, |_| {})
}

/// [`agglomerate`], calling `inspect` before every merge.
pub fn agglomerate_inspect(
    delta: &DeltaMatrix,
    mut inspect: impl FnMut(&StepView<'_>),
) -> Result<Dendrogram> {
    let n = delta.n();
    let mut d = delta.values.clone();
    let mut mu = delta.weights.as_slice().to_vec();
    let mut active: Vec<usize> = (0..n).collect();
    let mut members: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    let mut steps = Vec::with_capacity(n - 1);

    for step in 0..n - 1 {
        inspect(&StepView {
            step,
            n,
            active: &active,
            members: &members,
            d: &d,
        });
        let mut best = f64::INFINITY;
        let (mut bi, mut bj) = (usize::MAX, usize::MAX);
        for (pos, &i) in active.iter().enumerate() {
            let row = i * n - i * (i + 1) / 2 - i;
            for &j in &active[pos + 1..] {
                let v = d[row + j - 1];
                if v < best {
                    best = v;
                    bi = i;
                    bj = j;
                }
            }
        }
        if !best.is_finite() {
            return Err(Error::NonFiniteDelta { step });
        }
        let (mu_a, mu_b) = (mu[bi], mu[bj]);
        for &k in &active {
            if k == bi || k == bj {
                continue;
            }
            let ik = rank_unordered(n, bi, k);
            let jk = rank_unordered(n, bj, k);
            d[ik] = lw_update(d[ik], d[jk], best, mu_a, mu_b, mu[k]);
        }
        mu[bi] = mu_a + mu_b;
        active.retain(|&k| k != bj);
        let moved = std::mem::take(&mut members[bj]);
        members[bi].extend(moved);
        steps.push(SlotMerge {
            low: bi,
            high: bj,
            height: best,
            weight: mu[bi],
        });
    }
    build_dendrogram(n, &steps)
}

/// Nearest-neighbour chain agglomeration.
///
/// Produces the same hierarchy as [`agglomerate`] when the minimum is
/// unique at every step; with ties, equal-height merges may be resolved
/// differently.
pub fn agglomerate_nnchain(delta: &DeltaMatrix) -> Result<Dendrogram> {
    let n = delta.n();
    let mut d = delta.values.clone();
    let mut mu = delta.weights.as_slice().to_vec();
    let mut active = vec![true; n];
    // Index of the raw merge currently occupying each slot.
    let mut node_of: Vec<Option<usize>> = vec![None; n];
    let mut raw: Vec<(SlotMerge, [Option<usize>; 2])> = Vec::with_capacity(n - 1);
    let mut chain: Vec<usize> = Vec::with_capacity(n);
    let mut first_active = 0;

    while raw.len() < n - 1 {
        if chain.is_empty() {
            while !active[first_active] {
                first_active += 1;
            }
            chain.push(first_active);
        }
        let (a, b, h) = loop {
            let x = *chain.last().expect("chain not empty");
            let prev = chain.len().checked_sub(2).map(|p| chain[p]);
            let (mut best, mut y) = match prev {
                Some(p) => (d[rank_unordered(n, x, p)], p),
                None => (f64::INFINITY, usize::MAX),
            };
            for k in 0..n {
                if k == x || !active[k] {
                    continue;
                }
                let v = d[rank_unordered(n, x, k)];
                if v < best {
                    best = v;
                    y = k;
                }
            }
            if !best.is_finite() {
                return Err(Error::NonFiniteDelta { step: raw.len() });
            }
            if Some(y) == prev {
                chain.truncate(chain.len() - 2);
                break (x.min(y), x.max(y), best);
            }
            chain.push(y);
        };

        let (mu_a, mu_b) = (mu[a], mu[b]);
        for k in 0..n {
            if k == a || k == b || !active[k] {
                continue;
            }
            let ak = rank_unordered(n, a, k);
            let bk = rank_unordered(n, b, k);
            d[ak] = lw_update(d[ak], d[bk], h, mu_a, mu_b, mu[k]);
        }
        mu[a] = mu_a + mu_b;
        active[b] = false;
        let children = [node_of[a], node_of[b]];
        node_of[a] = Some(raw.len());
        node_of[b] = None;
        raw.push((
            SlotMerge {
                low: a,
                high: b,
                height: h,
                weight: mu[a],
            },
            children,
        ));
    }

    // Chronological order: lowest height first among merges whose children
    // are already placed, then by slot indices.
    #[derive(PartialEq)]
    struct Key(f64, usize, usize, usize);
    impl Eq for Key {}
    impl PartialOrd for Key {
        fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
            Some(self.cmp(other))
        }
    }
    impl Ord for Key {
        fn cmp(&self, other: &Self) -> Ordering {
            self.0
                .total_cmp(&other.0)
                .then(self.1.cmp(&other.1))
                .then(self.2.cmp(&other.2))
                .then(self.3.cmp(&other.3))
        }
    }
    let mut parent = vec![None; raw.len()];
    let mut pending = vec![0u8; raw.len()];
    for (k, (_, children)) in raw.iter().enumerate() {
        for c in children.iter().flatten() {
            parent[*c] = Some(k);
            pending[k] += 1;
        }
    }
    let key = |k: usize| {
        let m = raw[k].0;
        Reverse(Key(m.height, m.low, m.high, k))
    };
    let mut heap: BinaryHeap<_> = (0..raw.len())
        .filter(|&k| pending[k] == 0)
        .map(key)
        .collect();
    let mut steps = Vec::with_capacity(raw.len());
    while let Some(Reverse(Key(_, _, _, k))) = heap.pop() {
        steps.push(raw[k].0);
        if let Some(p) = parent[k] {
            pending[p] -= 1;
            if pending[p] == 0 {
                heap.push(key(p));
            }
        }
    }
    build_dendrogram(n, &steps)
}

fn build_dendrogram(n: usize, steps: &[SlotMerge]) -> Result<Dendrogram> {
    let mut node: Vec<NodeRef> = (0..n).map(NodeRef::Leaf).collect();
    let mut merges = Vec::with_capacity(steps.len());
    for (m, s) in steps.iter().enumerate() {
        merges.push(Merge {
            left: node[s.low],
            right: node[s.high],
            height: s.height,
            weight: s.weight,
        });
        node[s.low] = NodeRef::Merge(m);
    }
    Dendrogram::new(n, (1..=n).map(|i| i.to_string()).collect(), merges)
}

/// Sum of heights expected from a dendrogram of `d`: the total pseudo-inertia.
pub fn total_inertia(d: &DissimMatrix, wt: &WeightVector) -> Result<f64> {
    let all: Vec<usize> = (0..d.n()).collect();
    pseudo_inertia(d, wt, &all)
}

/// Merge heights sorted ascending.
pub fn sorted_heights(t: &Dendrogram) -> Vec<f64> {
    let mut h = t.heights();
    h.sort_by(f64::total_cmp);
    h
}
