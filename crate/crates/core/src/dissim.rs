//! Dissimilarity matrices and the inputs they are built from.

use std::collections::HashMap;

use crate::condensed::{condensed_len, rank, rank_unordered};
use crate::error::{Error, Result};

/// Mean Earth radius in kilometres used by [`geodesic_dissim`].
pub const EARTH_RADIUS_KM: f64 = 6371.0088;

/// Symmetric dissimilarity matrix over `n >= 2` observations in condensed form.
#[derive(Debug, Clone, PartialEq)]
pub struct DissimMatrix {
    n: usize,
    values: Vec<f64>,
    ids: Option<Vec<String>>,
}

impl DissimMatrix {
    /// Wraps condensed values, checking length and that every value is finite and `>= 0`.
    pub fn from_condensed(n: usize, values: Vec<f64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::TooFewObservations(n));
        }
        let expected = condensed_len(n);
        if values.len() != expected {
            return Err(Error::CondensedLength {
                n,
                expected,
                got: values.len(),
            });
        }
        if let Some(k) = values.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            let (i, j) = crate::condensed::unrank(n, k);
            return Err(Error::InvalidValue {
                i,
                j,
                value: values[k],
            });
        }
        Ok(Self {
            n,
            values,
            ids: None,
        })
    }

    /// Builds a matrix by evaluating `f(i, j)` for every pair `i < j`.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(condensed_len(n));
        for i in 0..n {
            for j in i + 1..n {
                values.push(f(i, j));
            }
        }
        Self::from_condensed(n, values)
    }

    pub fn with_ids(mut self, ids: Vec<String>) -> Result<Self> {
        if ids.len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "{} ids for {} observations",
                ids.len(),
                self.n
            )));
        }
        self.ids = Some(ids);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn ids(&self) -> Option<&[String]> {
        self.ids.as_deref()
    }

    /// Observation labels, falling back to 1-based positions.
    pub fn ids_or_default(&self) -> Vec<String> {
        match &self.ids {
            Some(ids) => ids.clone(),
            None => (1..=self.n).map(|i| i.to_string()).collect(),
        }
    }

    /// `d(i, j)`; zero on the diagonal.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            0.0
        } else {
            self.values[rank_unordered(self.n, i, j)]
        }
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Dense row-major `n x n` copy, for I/O.
    pub fn to_square(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j)).collect())
            .collect()
    }

    /// Same matrix with each value mapped through `f`.
    pub(crate) fn map_values(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        let mut out = Self::from_condensed(self.n, self.values.iter().map(|&v| f(v)).collect())?;
        out.ids = self.ids.clone();
        Ok(out)
    }
}

/// Positive per-observation weights.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if let Some(index) = weights.iter().position(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::InvalidWeight {
                index,
                value: weights[index],
            });
        }
        Ok(Self(weights))
    }

    /// Every observation weighted `1/n`.
    pub fn uniform(n: usize) -> Self {
        Self(vec![1.0 / n as f64; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn total(&self) -> f64 {
        crate::numeric::compensated_sum(self.0.iter().copied())
    }

    pub(crate) fn check_len(&self, n: usize) -> Result<()> {
        if self.0.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{} weights for {} observations",
                self.0.len(),
                n
            )));
        }
        Ok(())
    }
}

impl std::ops::Index<usize> for WeightVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Numeric observations: `n` rows by `p` columns.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    ids: Vec<String>,
    columns: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl FeatureTable {
    pub fn new(ids: Vec<String>, columns: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::InvalidArgument(
                "feature table needs at least one column".into(),
            ));
        }
        if ids.len() != rows.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} ids for {} rows",
                ids.len(),
                rows.len()
            )));
        }
        for (r, row) in rows.iter().enumerate() {
            if row.len() != columns.len() {
                return Err(Error::DimensionMismatch(format!(
                    "row {} has {} values, expected {}",
                    r,
                    row.len(),
                    columns.len()
                )));
            }
            if let Some(c) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFiniteFeature { row: r, column: c });
            }
        }
        Ok(Self { ids, columns, rows })
    }

    /// Table from bare rows, with ids `1..=n` and columns `V1..Vp`.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let p = rows.first().map_or(0, Vec::len);
        let ids = (1..=rows.len()).map(|i| i.to_string()).collect();
        let columns = (1..=p).map(|c| format!("V{c}")).collect();
        Self::new(ids, columns, rows)
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn p(&self) -> usize {
        self.columns.len()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// Centres each column and divides by its sample standard deviation.
    /// Constant columns are only centred.
    pub fn standardized(&self) -> Self {
        let n = self.n() as f64;
        let mut rows = self.rows.clone();
        for c in 0..self.p() {
            let mean = crate::numeric::compensated_sum(self.rows.iter().map(|r| r[c])) / n;
            let ss =
                crate::numeric::compensated_sum(self.rows.iter().map(|r| (r[c] - mean).powi(2)));
            let sd = if self.n() > 1 {
                (ss / (n - 1.0)).sqrt()
            } else {
                0.0
            };
            for row in rows.iter_mut() {
                row[c] -= mean;
                if sd > 0.0 {
                    row[c] /= sd;
                }
            }
        }
        Self {
            ids: self.ids.clone(),
            columns: self.columns.clone(),
            rows,
        }
    }
}

/// Latitude/longitude pairs in degrees.
#[derive(Debug, Clone, PartialEq)]
pub struct GeoPoints {
    ids: Vec<String>,
    coords: Vec<(f64, f64)>,
}

impl GeoPoints {
    pub fn new(ids: Vec<String>, coords: Vec<(f64, f64)>) -> Result<Self> {
        if ids.len() != coords.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} ids for {} points",
                ids.len(),
                coords.len()
            )));
        }
        for (row, &(lat, lon)) in coords.iter().enumerate() {
            let ok = (-90.0..=90.0).contains(&lat) && (-180.0..=180.0).contains(&lon);
            if !ok {
                return Err(Error::CoordinateOutOfRange { row, lat, lon });
            }
        }
        Ok(Self { ids, coords })
    }

    pub fn n(&self) -> usize {
        self.coords.len()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn coords(&self) -> &[(f64, f64)] {
        &self.coords
    }
}

/// Symmetric neighbour lists; self-adjacency is implicit and never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjacencyList {
    ids: Vec<String>,
    neighbors: Vec<Vec<usize>>,
}

impl AdjacencyList {
    /// Validates symmetry and index range. Self entries are dropped.
    pub fn new(ids: Vec<String>, neighbors: Vec<Vec<usize>>) -> Result<Self> {
        let n = neighbors.len();
        if ids.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{} ids for {} neighbour lists",
                ids.len(),
                n
            )));
        }
        let mut lists: Vec<Vec<usize>> = Vec::with_capacity(n);
        for (i, list) in neighbors.into_iter().enumerate() {
            let mut list: Vec<usize> = list.into_iter().filter(|&j| j != i).collect();
            if let Some(&index) = list.iter().find(|&&j| j >= n) {
                return Err(Error::IndexOutOfRange { index, n });
            }
            list.sort_unstable();
            list.dedup();
            lists.push(list);
        }
        for (i, list) in lists.iter().enumerate() {
            for &j in list {
                if lists[j].binary_search(&i).is_err() {
                    return Err(Error::AsymmetricAdjacency {
                        i: ids[i].clone(),
                        j: ids[j].clone(),
                    });
                }
            }
        }
        Ok(Self {
            ids,
            neighbors: lists,
        })
    }

    /// Builds lists from ids, resolving neighbour ids by name.
    pub fn from_named(entries: Vec<(String, Vec<String>)>) -> Result<Self> {
        let index: HashMap<&str, usize> = entries
            .iter()
            .enumerate()
            .map(|(i, (id, _))| (id.as_str(), i))
            .collect();
        if index.len() != entries.len() {
            return Err(Error::InvalidArgument("duplicate ids in adjacency".into()));
        }
        let mut neighbors = Vec::with_capacity(entries.len());
        for (id, list) in &entries {
            let mut resolved = Vec::with_capacity(list.len());
            for other in list {
                match index.get(other.as_str()) {
                    Some(&j) => resolved.push(j),
                    None => {
                        return Err(Error::InvalidArgument(format!(
                            "{id} lists unknown neighbour {other}"
                        )))
                    }
                }
            }
            neighbors.push(resolved);
        }
        let ids = entries.into_iter().map(|(id, _)| id).collect();
        Self::new(ids, neighbors)
    }

    pub fn n(&self) -> usize {
        self.neighbors.len()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }
}

/// Euclidean distances between the rows of a feature table.
pub fn euclidean_dissim(features: &FeatureTable) -> Result<DissimMatrix> {
    let rows = features.rows();
    DissimMatrix::from_fn(features.n(), |i, j| {
        rows[i]
            .iter()
            .zip(&rows[j])
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    })?
    .with_ids(features.ids().to_vec())
}

/// Haversine great-circle distance in kilometres.
pub fn haversine_km((lat1, lon1): (f64, f64), (lat2, lon2): (f64, f64)) -> f64 {
    let (phi1, phi2) = (lat1.to_radians(), lat2.to_radians());
    let dphi = phi2 - phi1;
    let dlambda = (lon2 - lon1).to_radians();
    let h = (dphi / 2.0).sin().powi(2) + phi1.cos() * phi2.cos() * (dlambda / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_KM * h.sqrt().min(1.0).asin()
}

/// Great-circle distances between points.
pub fn geodesic_dissim(points: &GeoPoints) -> Result<DissimMatrix> {
    let coords = points.coords();
    DissimMatrix::from_fn(points.n(), |i, j| haversine_km(coords[i], coords[j]))?
        .with_ids(points.ids().to_vec())
}

/// `1 - A` with `a_ii = 1`: 0 between neighbours, 1 otherwise.
pub fn adjacency_dissim(adj: &AdjacencyList) -> Result<DissimMatrix> {
    let n = adj.n();
    if n < 2 {
        return Err(Error::TooFewObservations(n));
    }
    let mut values = vec![1.0; condensed_len(n)];
    for i in 0..n {
        for &j in adj.neighbors(i) {
            if i < j {
                values[rank(n, i, j)] = 0.0;
            }
        }
    }
    DissimMatrix::from_condensed(n, values)?.with_ids(adj.ids().to_vec())
}

/// Divides every value by the matrix maximum.
pub fn normalize_max(d: &DissimMatrix) -> Result<DissimMatrix> {
    let max = d.max();
    if max <= 0.0 {
        return Err(Error::Degenerate(
            "all dissimilarities are zero; cannot rescale by the maximum".into(),
        ));
    }
    d.map_values(|v| v / max)
}
