//! Point clouds with a metric and optional distance-to-measure weights.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::exec::{self, Exec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    L2,
    L1,
    /// Distances read from an `n x n` matrix.
    Precomputed,
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l2" | "euclidean" => Ok(Metric::L2),
            "l1" | "manhattan" => Ok(Metric::L1),
            "precomputed" => Ok(Metric::Precomputed),
            other => Err(Error::param(format!("unknown metric {other:?}"))),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::L2 => "l2",
            Metric::L1 => "l1",
            Metric::Precomputed => "precomputed",
        })
    }
}

#[derive(Debug, Clone)]
enum Geometry {
    Coordinates { data: Vec<f64>, dim: usize },
    Matrix { data: Vec<f64> },
}

/// Points (or a distance matrix) plus per-point DTM weights once computed.
#[derive(Debug, Clone)]
pub struct WeightedPointCloud {
    n: usize,
    metric: Metric,
    geometry: Geometry,
    weights: Vec<f64>,
    k: Option<usize>,
}

impl WeightedPointCloud {
    /// Builds a cloud from coordinate rows. Rejects ragged rows, non-finite
    /// coordinates and exact duplicates.
    pub fn from_points(rows: &[Vec<f64>], metric: Metric) -> Result<Self> {
        if metric == Metric::Precomputed {
            return Err(Error::param(
                "precomputed metric needs a distance matrix, not coordinates",
            ));
        }
        let dim = rows.first().map_or(0, Vec::len);
        if rows.is_empty() || dim == 0 {
            return Err(Error::param("point cloud is empty"));
        }
        let mut data = Vec::with_capacity(rows.len() * dim);
        let mut seen: HashMap<Vec<u64>, usize> = HashMap::with_capacity(rows.len());
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::Parse {
                    row: i + 1,
                    column: row.len().min(dim) + 1,
                    message: format!("expected {dim} coordinates, found {}", row.len()),
                });
            }
            if let Some(c) = row.iter().position(|x| !x.is_finite()) {
                return Err(Error::Parse {
                    row: i + 1,
                    column: c + 1,
                    message: "coordinate is not finite".into(),
                });
            }
            // +0.0 and -0.0 are the same point
            let key: Vec<u64> = row.iter().map(|x| (x + 0.0).to_bits()).collect();
            if let Some(&first) = seen.get(&key) {
                return Err(Error::DuplicatePoint {
                    first: first + 1,
                    second: i + 1,
                });
            }
            seen.insert(key, i);
            data.extend_from_slice(row);
        }
        Ok(WeightedPointCloud {
            n: rows.len(),
            metric,
            geometry: Geometry::Coordinates { data, dim },
            weights: Vec::new(),
            k: None,
        })
    }

    /// Builds a cloud from a square symmetric distance matrix with zero
    /// diagonal and positive off-diagonal entries.
    pub fn from_distance_matrix(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::param("distance matrix is empty"));
        }
        let mut data = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Parse {
                    row: i + 1,
                    column: row.len().min(n) + 1,
                    message: format!("distance matrix must be {n} x {n}, row has {}", row.len()),
                });
            }
            data.extend_from_slice(row);
        }
        for i in 0..n {
            for j in 0..n {
                let x = data[i * n + j];
                let bad = |message: String| Error::Parse {
                    row: i + 1,
                    column: j + 1,
                    message,
                };
                if !x.is_finite() || x < 0.0 {
                    return Err(bad(format!("distance {x} is not a finite non-negative number")));
                }
                if i == j && x != 0.0 {
                    return Err(bad(format!("diagonal entry is {x}, expected 0")));
                }
                if j > i {
                    let y = data[j * n + i];
                    if x != y {
                        return Err(bad(format!(
                            "matrix is not symmetric: d({},{}) = {x} but d({},{}) = {y}",
                            i + 1,
                            j + 1,
                            j + 1,
                            i + 1
                        )));
                    }
                    if x == 0.0 {
                        return Err(Error::DuplicatePoint {
                            first: i + 1,
                            second: j + 1,
                        });
                    }
                }
            }
        }
        Ok(WeightedPointCloud {
            n,
            metric: Metric::Precomputed,
            geometry: Geometry::Matrix { data },
            weights: Vec::new(),
            k: None,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    /// Ambient dimension, or `None` for a precomputed matrix.
    pub fn dim(&self) -> Option<usize> {
        match &self.geometry {
            Geometry::Coordinates { dim, .. } => Some(*dim),
            Geometry::Matrix { .. } => None,
        }
    }

    pub fn point(&self, p: usize) -> Option<&[f64]> {
        match &self.geometry {
            Geometry::Coordinates { data, dim } => Some(&data[p * dim..(p + 1) * dim]),
            Geometry::Matrix { .. } => None,
        }
    }

    pub fn distance(&self, p: usize, q: usize) -> f64 {
        match &self.geometry {
            Geometry::Matrix { data } => data[p * self.n + q],
            Geometry::Coordinates { data, dim } => {
                let a = &data[p * dim..(p + 1) * dim];
                let b = &data[q * dim..(q + 1) * dim];
                match self.metric {
                    Metric::L1 => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
                    _ => a
                        .iter()
                        .zip(b)
                        .map(|(x, y)| (x - y) * (x - y))
                        .sum::<f64>()
                        .sqrt(),
                }
            }
        }
    }

    /// DTM weights, empty until [`dtm_weights`] has run.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn has_weights(&self) -> bool {
        self.weights.len() == self.n && self.n > 0
    }

    /// Neighbor count the weights were computed with.
    pub fn k(&self) -> Option<usize> {
        self.k
    }

    /// Installs externally computed weights.
    pub fn with_weights(mut self, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != self.n {
            return Err(Error::param(format!(
                "expected {} weights, got {}",
                self.n,
                weights.len()
            )));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::param("weights must be finite and non-negative"));
        }
        self.weights = weights;
        self.k = None;
        Ok(self)
    }

    /// Largest pairwise distance (O(n²)).
    pub fn diameter(&self, exec: Exec) -> f64 {
        exec::map_range(exec, self.n, |p| {
            (p + 1..self.n)
                .map(|q| self.distance(p, q))
                .fold(0.0, f64::max)
        })
        .into_iter()
        .fold(0.0, f64::max)
    }
}

fn check_k(cloud: &WeightedPointCloud, k: usize) -> Result<()> {
    if k == 0 || k >= cloud.len() {
        return Err(Error::param(format!(
            "k = {k} must satisfy 1 <= k <= n-1 with n = {}",
            cloud.len()
        )));
    }
    Ok(())
}

fn knn_unchecked(cloud: &WeightedPointCloud, p: usize, k: usize) -> Vec<(usize, f64)> {
    let mut cand: Vec<(usize, f64)> = (0..cloud.len())
        .filter(|&q| q != p)
        .map(|q| (q, cloud.distance(p, q)))
        .collect();
    let cmp = |a: &(usize, f64), b: &(usize, f64)| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0));
    if k < cand.len() {
        cand.select_nth_unstable_by(k - 1, cmp);
        cand.truncate(k);
    }
    cand.sort_unstable_by(cmp);
    cand
}

/// The `k` nearest other points of `p`, ties broken by lower index, sorted by distance.
pub fn knn(cloud: &WeightedPointCloud, p: usize, k: usize) -> Result<Vec<(usize, f64)>> {
    check_k(cloud, k)?;
    if p >= cloud.len() {
        return Err(Error::param(format!("point {p} out of range")));
    }
    Ok(knn_unchecked(cloud, p, k))
}

/// kNN lists for every point.
pub fn knn_all(cloud: &WeightedPointCloud, k: usize, exec: Exec) -> Result<Vec<Vec<(usize, f64)>>> {
    check_k(cloud, k)?;
    Ok(exec::map_range(exec, cloud.len(), |p| {
        knn_unchecked(cloud, p, k)
    }))
}

/// Sets `w_p` to the root-mean-square distance from `p` to its `k` nearest neighbors.
pub fn dtm_weights(cloud: &WeightedPointCloud, k: usize) -> Result<WeightedPointCloud> {
    dtm_weights_with(cloud, k, Exec::default())
}

pub fn dtm_weights_with(
    cloud: &WeightedPointCloud,
    k: usize,
    exec: Exec,
) -> Result<WeightedPointCloud> {
    let lists = knn_all(cloud, k, exec)?;
    let weights = lists
        .iter()
        .map(|nn| (nn.iter().map(|(_, d)| d * d).sum::<f64>() / k as f64).sqrt())
        .collect();
    let mut out = cloud.clone();
    out.weights = weights;
    out.k = Some(k);
    Ok(out)
}
