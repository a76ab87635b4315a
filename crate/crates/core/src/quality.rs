//! Pseudo-inertia and the explained-inertia criteria used to pick the
//! mixing parameter.

use rayon::prelude::*;

use crate::dendrogram::{cut_tree, Partition};
use crate::dissim::{DissimMatrix, FeatureTable, WeightVector};
use crate::error::{Error, Result};
use crate::mixing::{self, MixSpec};
use crate::numeric::{fmt_sig7, KahanSum};
use crate::ward::Kernel;

fn check_members(n: usize, members: &[usize]) -> Result<()> {
    if members.is_empty() {
        return Err(Error::EmptySet);
    }
    if let Some(&index) = members.iter().find(|&&i| i >= n) {
        return Err(Error::IndexOutOfRange { index, n });
    }
    Ok(())
}

/// `I(C) = sum_{i,j in C} w_i w_j d_ij^2 / (2 mu_C)`.
pub fn pseudo_inertia(d: &DissimMatrix, wt: &WeightVector, members: &[usize]) -> Result<f64> {
    wt.check_len(d.n())?;
    check_members(d.n(), members)?;
    let mut sorted = members.to_vec();
    sorted.sort_unstable();
    let mut mu = KahanSum::new();
    let mut pairs = KahanSum::new();
    for (a, &i) in sorted.iter().enumerate() {
        mu.add(wt[i]);
        for &j in &sorted[a + 1..] {
            let dij = d.get(i, j);
            pairs.add(wt[i] * wt[j] * dij * dij);
        }
    }
    Ok(pairs.value() / mu.value())
}

/// Mixed pseudo-inertia of one cluster, evaluated pair by pair on
/// `(1 - alpha) d0^2 + alpha d1^2`.
pub fn mixed_pseudo_inertia(
    d0: &DissimMatrix,
    d1: &DissimMatrix,
    wt: &WeightVector,
    members: &[usize],
    alpha: f64,
) -> Result<f64> {
    check_same_n(d0, d1)?;
    wt.check_len(d0.n())?;
    check_members(d0.n(), members)?;
    let mut sorted = members.to_vec();
    sorted.sort_unstable();
    let mut mu = KahanSum::new();
    let mut pairs = KahanSum::new();
    for (a, &i) in sorted.iter().enumerate() {
        mu.add(wt[i]);
        for &j in &sorted[a + 1..] {
            let (x, y) = (d0.get(i, j), d1.get(i, j));
            pairs.add(wt[i] * wt[j] * ((1.0 - alpha) * x * x + alpha * y * y));
        }
    }
    Ok(pairs.value() / mu.value())
}

fn check_same_n(d0: &DissimMatrix, d1: &DissimMatrix) -> Result<()> {
    if d0.n() != d1.n() {
        return Err(Error::DimensionMismatch(format!(
            "D0 has {} observations, D1 has {}",
            d0.n(),
            d1.n()
        )));
    }
    Ok(())
}

fn check_partition(n: usize, p: &Partition) -> Result<()> {
    if p.n() != n {
        return Err(Error::DimensionMismatch(format!(
            "partition covers {} observations, matrix has {n}",
            p.n()
        )));
    }
    Ok(())
}

/// Per-cluster sums over pairs `i < j` in the same cluster of `term(i, j)`,
/// divided by the cluster weight and added up.
fn within_by(
    n: usize,
    wt: &WeightVector,
    p: &Partition,
    term: impl Fn(usize, usize) -> f64,
) -> f64 {
    let labels = p.labels();
    let mut pairs = vec![KahanSum::new(); p.k()];
    let mut mu = vec![KahanSum::new(); p.k()];
    for i in 0..n {
        let li = labels[i] - 1;
        mu[li].add(wt[i]);
        for j in i + 1..n {
            if labels[j] - 1 == li {
                pairs[li].add(wt[i] * wt[j] * term(i, j));
            }
        }
    }
    pairs
        .iter()
        .zip(&mu)
        .map(|(s, m)| s.value() / m.value())
        .collect::<KahanSum>()
        .value()
}

/// `W(P) = sum_k I(C_k)`.
pub fn within_inertia(d: &DissimMatrix, wt: &WeightVector, p: &Partition) -> Result<f64> {
    wt.check_len(d.n())?;
    check_partition(d.n(), p)?;
    Ok(within_by(d.n(), wt, p, |i, j| {
        let v = d.get(i, j);
        v * v
    }))
}

/// Mixed within-cluster inertia `W_alpha(P)`, summed directly from the
/// mixed squared dissimilarities. Pass the matrices the clustering used
/// (rescaled ones when scaling is on).
pub fn mixed_within(
    d0: &DissimMatrix,
    d1: &DissimMatrix,
    wt: &WeightVector,
    p: &Partition,
    alpha: f64,
) -> Result<f64> {
    check_same_n(d0, d1)?;
    wt.check_len(d0.n())?;
    check_partition(d0.n(), p)?;
    Ok(within_by(d0.n(), wt, p, |i, j| {
        let (x, y) = (d0.get(i, j), d1.get(i, j));
        (1.0 - alpha) * x * x + alpha * y * y
    }))
}

/// Proportion of the total pseudo-inertia under `d` explained by `p`:
/// `1 - W(P) / W(P_1)`.
pub fn q_criterion(d: &DissimMatrix, wt: &WeightVector, p: &Partition) -> Result<f64> {
    let total = within_inertia(d, wt, &Partition::canonical(&vec![0u8; d.n()]))?;
    if total <= 0.0 {
        return Err(Error::Degenerate(
            "total pseudo-inertia is zero; all observations coincide".into(),
        ));
    }
    Ok(1.0 - within_inertia(d, wt, p)? / total)
}

/// `Q_beta` for an intermediate `beta`, on the mixed inertia.
pub fn q_beta(
    d0: &DissimMatrix,
    d1: &DissimMatrix,
    wt: &WeightVector,
    p: &Partition,
    beta: f64,
) -> Result<f64> {
    let one = Partition::canonical(&vec![0u8; d0.n()]);
    let total = mixed_within(d0, d1, wt, &one, beta)?;
    if total <= 0.0 {
        return Err(Error::Degenerate(
            "total mixed pseudo-inertia is zero".into(),
        ));
    }
    Ok(1.0 - mixed_within(d0, d1, wt, p, beta)? / total)
}

/// Inertia about the weighted centre of gravity, for Euclidean data.
pub fn centroid_inertia_oracle(
    features: &FeatureTable,
    wt: &WeightVector,
    members: &[usize],
) -> Result<f64> {
    wt.check_len(features.n())?;
    check_members(features.n(), members)?;
    let rows = features.rows();
    let mu: f64 = members.iter().map(|&i| wt[i]).sum();
    let g: Vec<f64> = (0..features.p())
        .map(|c| members.iter().map(|&i| wt[i] * rows[i][c]).sum::<f64>() / mu)
        .collect();
    Ok(members
        .iter()
        .map(|&i| {
            wt[i]
                * rows[i]
                    .iter()
                    .zip(&g)
                    .map(|(x, gc)| (x - gc) * (x - gc))
                    .sum::<f64>()
        })
        .collect::<KahanSum>()
        .value())
}

/// Strictly increasing grid of mixing values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaGrid(Vec<f64>);

impl AlphaGrid {
    const SNAP: f64 = 1e9;

    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidGrid("grid is empty".into()));
        }
        for &v in &values {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidGrid(format!("{v} is outside [0, 1]")));
            }
        }
        if values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid(
                "values must be strictly increasing".into(),
            ));
        }
        Ok(Self(values))
    }

    /// Inclusive `start:stop:step`; the step must divide the range to 1e-9.
    pub fn from_range(start: f64, stop: f64, step: f64) -> Result<Self> {
        if step.is_nan() || step <= 0.0 || start.is_nan() || stop.is_nan() || stop < start {
            return Err(Error::InvalidGrid(format!(
                "bad range {start}:{stop}:{step}"
            )));
        }
        let count = (stop - start) / step;
        let steps = count.round();
        if (count - steps).abs() > 1e-9 {
            return Err(Error::InvalidGrid(format!(
                "step {step} does not divide [{start}, {stop}]"
            )));
        }
        let values = (0..=steps as usize)
            .map(|j| ((start + j as f64 * step) * Self::SNAP).round() / Self::SNAP)
            .collect();
        Self::new(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    fn position(&self, target: f64) -> Option<usize> {
        self.0.iter().position(|&a| a == target)
    }
}

impl std::str::FromStr for AlphaGrid {
    type Err = Error;

    /// `start:stop:step` or a comma-separated list. A triple that is not a
    /// valid `start:stop:step` is read as `start:step:stop`, so `0:0.1:1`
    /// also means 0, 0.1, ..., 1.
    fn from_str(s: &str) -> Result<Self> {
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidGrid(format!("not a number: {t:?}")))
        };
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            [a, b, c] => {
                let (a, b, c) = (num(a)?, num(b)?, num(c)?);
                Self::from_range(a, b, c).or_else(|e| Self::from_range(a, c, b).map_err(|_| e))
            }
            [single] => Self::new(single.split(',').map(num).collect::<Result<_>>()?),
            _ => Err(Error::InvalidGrid(format!(
                "expected start:stop:step, got {s:?}"
            ))),
        }
    }
}

/// Explained-inertia values for each grid point at a fixed `K`.
#[derive(Debug, Clone, PartialEq)]
pub struct QTable {
    pub alphas: Vec<f64>,
    pub k: usize,
    pub q0: Vec<f64>,
    pub q1: Vec<f64>,
    /// `Q0 / Q0(alpha = 0)`; `None` when undefined.
    pub q0norm: Vec<Option<f64>>,
    /// `Q1 / Q1(alpha = 1)`; `None` when undefined.
    pub q1norm: Vec<Option<f64>>,
}

impl QTable {
    /// Builds the table from raw columns and fills the normalised columns.
    /// With `require_anchors`, a grid without both 0 and 1 is an error;
    /// otherwise the missing anchor leaves its column undefined.
    pub fn from_columns(
        grid: &AlphaGrid,
        k: usize,
        q0: Vec<f64>,
        q1: Vec<f64>,
        require_anchors: bool,
    ) -> Result<Self> {
        let (a0, a1) = (grid.position(0.0), grid.position(1.0));
        if require_anchors && (a0.is_none() || a1.is_none()) {
            return Err(Error::InvalidGrid(
                "normalised values need both 0 and 1 in the grid".into(),
            ));
        }
        let norm = |col: &[f64], anchor: Option<usize>| -> Vec<Option<f64>> {
            match anchor.map(|a| col[a]) {
                Some(base) if base != 0.0 => col.iter().map(|&q| Some(q / base)).collect(),
                _ => vec![None; col.len()],
            }
        };
        Ok(Self {
            alphas: grid.values().to_vec(),
            k,
            q0norm: norm(&q0, a0),
            q1norm: norm(&q1, a1),
            q0,
            q1,
        })
    }

    /// Grid points where `Q0` beats its value at alpha 0, or `Q1` beats its
    /// value at alpha 1. Greedy agglomeration does not guarantee either.
    pub fn anchor_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let find = |a: f64| self.alphas.iter().position(|&x| x == a);
        if let Some(a0) = find(0.0) {
            for (j, &q) in self.q0.iter().enumerate() {
                if q > self.q0[a0] {
                    out.push(format!(
                        "Q0 at alpha={} ({}) exceeds Q0 at alpha=0 ({})",
                        fmt_sig7(self.alphas[j]),
                        fmt_sig7(q),
                        fmt_sig7(self.q0[a0])
                    ));
                }
            }
        }
        if let Some(a1) = find(1.0) {
            for (j, &q) in self.q1.iter().enumerate() {
                if q > self.q1[a1] {
                    out.push(format!(
                        "Q1 at alpha={} ({}) exceeds Q1 at alpha=1 ({})",
                        fmt_sig7(self.alphas[j]),
                        fmt_sig7(q),
                        fmt_sig7(self.q1[a1])
                    ));
                }
            }
        }
        out
    }

    /// `alpha,Q0,Q1,Q0norm,Q1norm` with 7 significant digits; `NA` marks
    /// undefined normalised values.
    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map_or_else(|| "NA".to_string(), fmt_sig7);
        let mut out = String::from("alpha,Q0,Q1,Q0norm,Q1norm\n");
        for j in 0..self.alphas.len() {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                fmt_sig7(self.alphas[j]),
                fmt_sig7(self.q0[j]),
                fmt_sig7(self.q1[j]),
                opt(self.q0norm[j]),
                opt(self.q1norm[j]),
            ));
        }
        out
    }
}

/// Options for [`choice_alpha`].
#[derive(Debug, Clone, Copy)]
pub struct ChoiceOptions {
    pub scale: bool,
    /// Fail when the grid lacks the normalisation anchors 0 and 1.
    pub require_anchors: bool,
    pub kernel: Kernel,
}

impl Default for ChoiceOptions {
    fn default() -> Self {
        Self {
            scale: true,
            require_anchors: true,
            kernel: Kernel::Auto,
        }
    }
}

/// For each grid value: cluster with that mixing value, cut at `k`, and
/// score the cut with `Q0` and `Q1`.
pub fn choice_alpha(
    d0: &DissimMatrix,
    d1: &DissimMatrix,
    grid: &AlphaGrid,
    k: usize,
    wt: Option<&WeightVector>,
    opts: ChoiceOptions,
) -> Result<QTable> {
    let n = d0.n();
    check_same_n(d0, d1)?;
    if k < 2 || k > n {
        return Err(Error::ClusterCountOutOfRange { k, n });
    }
    if opts.require_anchors && (grid.position(0.0).is_none() || grid.position(1.0).is_none()) {
        return Err(Error::InvalidGrid(
            "normalised values need both 0 and 1 in the grid".into(),
        ));
    }
    let wt = match wt {
        Some(w) => {
            w.check_len(n)?;
            w.clone()
        }
        None => WeightVector::uniform(n),
    };
    let (s0, s1) = mixing::prepare_pair(d0, d1, opts.scale)?;
    let (delta0, delta1) = mixing::delta_pair(&s0, &s1, &wt)?;
    let rows = grid
        .values()
        .par_iter()
        .map(|&alpha| {
            let spec = MixSpec::new(alpha, opts.scale)?;
            let delta = mixing::mix_delta(&delta0, &delta1, spec.alpha())?;
            let tree = crate::ward::agglomerate_with(&delta, opts.kernel)?;
            let p = cut_tree(&tree, k)?;
            Ok((q_criterion(&s0, &wt, &p)?, q_criterion(&s1, &wt, &p)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let (q0, q1) = rows.into_iter().unzip();
    QTable::from_columns(grid, k, q0, q1, opts.require_anchors)
}
