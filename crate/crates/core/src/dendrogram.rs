//! Merge histories and the partitions obtained by cutting them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::compensated_sum;

/// A child of a merge: an original observation or an earlier merge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeRef {
    Leaf(usize),
    Merge(usize),
}

/// One agglomeration step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub left: NodeRef,
    pub right: NodeRef,
    /// Aggregation measure at the time of the merge.
    pub height: f64,
    /// Total weight of the merged cluster.
    pub weight: f64,
}

/// Full merge history over `n` observations, in chronological order.
///
/// The left child of every merge is the subtree holding the smaller leaf index.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dendrogram {
    n: usize,
    ids: Vec<String>,
    merges: Vec<Merge>,
}

#[derive(Deserialize)]
struct RawDendrogram {
    n: usize,
    ids: Vec<String>,
    merges: Vec<Merge>,
}

impl<'de> Deserialize<'de> for Dendrogram {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let raw = RawDendrogram::deserialize(de)?;
        Dendrogram::new(raw.n, raw.ids, raw.merges).map_err(serde::de::Error::custom)
    }
}

impl Dendrogram {
    /// Checks the structural invariants: `n - 1` merges, every leaf and
    /// every earlier merge used exactly once as a child, finite heights,
    /// and merge weights that add up.
    pub fn new(n: usize, ids: Vec<String>, merges: Vec<Merge>) -> Result<Self> {
        if n < 2 {
            return Err(Error::TooFewObservations(n));
        }
        if ids.len() != n {
            return Err(Error::InvalidDendrogram(format!(
                "{} ids for n={n}",
                ids.len()
            )));
        }
        if merges.len() != n - 1 {
            return Err(Error::InvalidDendrogram(format!(
                "{} merges for n={n}, expected {}",
                merges.len(),
                n - 1
            )));
        }
        let mut leaf_used = vec![false; n];
        let mut merge_used = vec![false; n - 1];
        for (m, merge) in merges.iter().enumerate() {
            if !merge.height.is_finite() || !(merge.weight.is_finite() && merge.weight > 0.0) {
                return Err(Error::InvalidDendrogram(format!(
                    "merge {m} has invalid height or weight"
                )));
            }
            for child in [merge.left, merge.right] {
                let slot = match child {
                    NodeRef::Leaf(i) if i < n => &mut leaf_used[i],
                    NodeRef::Merge(k) if k < m => &mut merge_used[k],
                    _ => {
                        return Err(Error::InvalidDendrogram(format!(
                            "merge {m} refers to {child:?}, which does not exist yet"
                        )))
                    }
                };
                if *slot {
                    return Err(Error::InvalidDendrogram(format!(
                        "{child:?} used twice (again in merge {m})"
                    )));
                }
                *slot = true;
            }
        }
        if merge_used[..n - 2].iter().any(|u| !u) {
            return Err(Error::InvalidDendrogram("a merge is never reused".into()));
        }
        Ok(Self { n, ids, merges })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }

    pub fn heights(&self) -> Vec<f64> {
        self.merges.iter().map(|m| m.height).collect()
    }

    /// Compensated sum of all merge heights.
    pub fn height_sum(&self) -> f64 {
        compensated_sum(self.merges.iter().map(|m| m.height))
    }

    pub fn root_weight(&self) -> f64 {
        self.merges.last().map_or(0.0, |m| m.weight)
    }

    /// True when no merge sits lower than its predecessor, allowing a
    /// relative rounding slack of `rel_tol`.
    pub fn is_monotone(&self, rel_tol: f64) -> bool {
        self.merges
            .windows(2)
            .all(|w| w[1].height >= w[0].height - rel_tol * w[0].height.abs())
    }

    pub fn with_ids(mut self, ids: Vec<String>) -> Result<Self> {
        if ids.len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "{} ids for {} observations",
                ids.len(),
                self.n
            )));
        }
        self.ids = ids;
        Ok(self)
    }

    /// Leaf permutation for drawing without crossing branches.
    pub fn leaf_order(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.n);
        let mut stack = vec![NodeRef::Merge(self.merges.len() - 1)];
        while let Some(node) = stack.pop() {
            match node {
                NodeRef::Leaf(i) => out.push(i),
                NodeRef::Merge(m) => {
                    stack.push(self.merges[m].right);
                    stack.push(self.merges[m].left);
                }
            }
        }
        out
    }

    /// Observations under a node.
    pub fn members(&self, node: NodeRef) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![node];
        while let Some(node) = stack.pop() {
            match node {
                NodeRef::Leaf(i) => out.push(i),
                NodeRef::Merge(m) => {
                    stack.push(self.merges[m].left);
                    stack.push(self.merges[m].right);
                }
            }
        }
        out.sort_unstable();
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("dendrogram serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidDendrogram(e.to_string()))
    }
}

/// Cluster labels `1..=k`, one per observation, each label used.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    labels: Vec<usize>,
    k: usize,
}

impl Partition {
    pub fn new(labels: Vec<usize>, k: usize) -> Result<Self> {
        let mut seen = vec![false; k];
        for (i, &l) in labels.iter().enumerate() {
            if l == 0 || l > k {
                return Err(Error::InvalidPartition(format!(
                    "label {l} of observation {i} outside 1..={k}"
                )));
            }
            seen[l - 1] = true;
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidPartition(format!(
                "label {} is unused",
                missing + 1
            )));
        }
        Ok(Self { labels, k })
    }

    /// Renumbers arbitrary group keys so labels follow first appearance.
    pub fn canonical<T: Eq + std::hash::Hash>(keys: &[T]) -> Self {
        let mut map = std::collections::HashMap::new();
        let labels = keys
            .iter()
            .map(|key| {
                let next = map.len() + 1;
                *map.entry(key).or_insert(next)
            })
            .collect();
        Self {
            labels,
            k: map.len(),
        }
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    /// Members of each cluster, indexed by `label - 1`.
    pub fn clusters(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.k];
        for (i, &l) in self.labels.iter().enumerate() {
            out[l - 1].push(i);
        }
        out
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.clusters().iter().map(Vec::len).collect()
    }
}

/// Partition into `k` clusters obtained by undoing the last `k - 1` merges.
/// Labels are ordered by the smallest observation index in each cluster.
pub fn cut_tree(tree: &Dendrogram, k: usize) -> Result<Partition> {
    let n = tree.n();
    if k == 0 || k > n {
        return Err(Error::ClusterCountOutOfRange { k, n });
    }
    // Representative leaf of every merge, then union of leaves.
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut rep = Vec::with_capacity(n - 1);
    let leaf_of = |node: NodeRef, rep: &Vec<usize>| match node {
        NodeRef::Leaf(i) => i,
        NodeRef::Merge(m) => rep[m],
    };
    for merge in &tree.merges()[..n - k] {
        let a = leaf_of(merge.left, &rep);
        let b = leaf_of(merge.right, &rep);
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        let root = ra.min(rb);
        parent[ra.max(rb)] = root;
        rep.push(root);
    }
    let roots: Vec<usize> = (0..n).map(|i| find(&mut parent, i)).collect();
    Ok(Partition::canonical(&roots))
}
