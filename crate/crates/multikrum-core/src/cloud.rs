//! Point clouds, index subsets, and the subset statistics they induce.
//!
//! A cloud is an n×d matrix of finite coordinates, one input vector per row.
//! Subsets of rows are canonical sorted index sequences (0-based). For a
//! subset A the two statistics of interest are the mean x̄_A and the scatter
//! Σ_A = (1/|A|) Σ_{i∈A} ‖x_i − x̄_A‖², and for two subsets the cross-sum
//! identity (1/ab) Σ_{i∈A} Σ_{j∈B} ‖x_i−x_j‖² = ‖x̄_A−x̄_B‖² + Σ_A + Σ_B.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// An n-by-d matrix of finite coordinates, one point per row.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    n: usize,
    d: usize,
    data: Vec<f64>,
}

impl PointCloud {
    /// Builds a cloud from row vectors. Rows must be nonempty, of equal
    /// length, and every entry must be finite.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidArgument("cloud needs at least one point".into()));
        }
        let d = rows[0].len();
        if d == 0 {
            return Err(Error::InvalidArgument("points need at least one coordinate".into()));
        }
        let mut data = Vec::with_capacity(rows.len() * d);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != d {
                return Err(Error::InvalidArgument(format!(
                    "ragged rows: points[{i}] has {} entries, expected {d}",
                    row.len()
                )));
            }
            for (k, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::InvalidArgument(format!(
                        "points[{i}][{k}] is not finite"
                    )));
                }
                data.push(v);
            }
        }
        Ok(PointCloud { n: rows.len(), d, data })
    }

    /// Builds a cloud from a flat row-major buffer of length n·d.
    pub fn from_flat(n: usize, d: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::InvalidArgument("cloud shape must be at least 1x1".into()));
        }
        if data.len() != n * d {
            return Err(Error::InvalidArgument(format!(
                "flat buffer has {} entries, expected {}",
                data.len(),
                n * d
            )));
        }
        for (pos, &v) in data.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "points[{}][{}] is not finite",
                    pos / d,
                    pos % d
                )));
            }
        }
        Ok(PointCloud { n, d, data })
    }

    /// Number of points.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Coordinate dimension.
    pub fn d(&self) -> usize {
        self.d
    }

    /// The i-th point as a coordinate slice.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    /// Iterator over all points in index order.
    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.d)
    }
}

/// A sorted set of distinct point indices (0-based).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexSubset {
    indices: Vec<usize>,
}

impl IndexSubset {
    /// Canonicalizes arbitrary-order indices into a sorted subset; duplicate
    /// indices are rejected.
    pub fn new(mut indices: Vec<usize>) -> Result<Self> {
        indices.sort_unstable();
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument("subset has duplicate indices".into()));
        }
        Ok(IndexSubset { indices })
    }

    /// The subset {0, 1, …, k−1}.
    pub fn prefix(k: usize) -> Self {
        IndexSubset { indices: (0..k).collect() }
    }

    /// The full index set of an n-point cloud.
    pub fn full(n: usize) -> Self {
        Self::prefix(n)
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.indices
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.indices.iter().copied()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }

    /// Checks the subset is nonempty and indexes into an n-point cloud.
    pub(crate) fn check_for(&self, n: usize) -> Result<()> {
        if self.indices.is_empty() {
            return Err(Error::InvalidArgument("subset is empty".into()));
        }
        if let Some(&max) = self.indices.last() {
            if max >= n {
                return Err(Error::InvalidArgument(format!(
                    "subset index {max} out of range for {n} points"
                )));
            }
        }
        Ok(())
    }
}

/// The mean x̄_A and scatter Σ_A of a subset of rows.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsetStats {
    pub mean: Vec<f64>,
    pub scatter: f64,
}

/// A dense n×n matrix of pairwise squared distances.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// Row i: squared distances from x_i to every point.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }
}

/// Squared Euclidean distance between two equal-length coordinate slices.
pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "dimension mismatch");
    let mut acc = 0.0;
    for k in 0..a.len() {
        let diff = a[k] - b[k];
        acc += diff * diff;
    }
    acc
}

/// Mean of the rows selected by `a`: (1/|A|) Σ_{i∈A} x_i.
pub fn subset_mean(cloud: &PointCloud, a: &IndexSubset) -> Result<Vec<f64>> {
    a.check_for(cloud.n())?;
    let mut mean = vec![0.0; cloud.d()];
    for i in a.iter() {
        for (acc, &v) in mean.iter_mut().zip(cloud.row(i)) {
            *acc += v;
        }
    }
    let inv = 1.0 / a.len() as f64;
    for acc in &mut mean {
        *acc *= inv;
    }
    Ok(mean)
}

/// Scatter Σ_A: mean squared deviation of the selected rows from their mean.
pub fn subset_scatter(cloud: &PointCloud, a: &IndexSubset) -> Result<f64> {
    Ok(subset_stats(cloud, a)?.scatter)
}

/// Mean and scatter of a subset, with the mean computed once.
pub fn subset_stats(cloud: &PointCloud, a: &IndexSubset) -> Result<SubsetStats> {
    let mean = subset_mean(cloud, a)?;
    let mut acc = 0.0;
    for i in a.iter() {
        acc += squared_distance(cloud.row(i), &mean);
    }
    let scatter = acc / a.len() as f64;
    Ok(SubsetStats { mean, scatter })
}

/// Full matrix of pairwise squared distances ‖x_i − x_j‖².
pub fn pairwise_sqdist(cloud: &PointCloud) -> DistanceMatrix {
    let n = cloud.n();
    let mut data = Vec::with_capacity(n * n);
    for i in 0..n {
        let xi = cloud.row(i);
        for j in 0..n {
            data.push(squared_distance(xi, cloud.row(j)));
        }
    }
    DistanceMatrix { n, data }
}

/// Evaluates both sides of the cross-sum identity
/// (1/ab) Σ_{i∈A} Σ_{j∈B} ‖x_i−x_j‖² = ‖x̄_A−x̄_B‖² + Σ_A + Σ_B
/// and returns them as (lhs, rhs).
pub fn cross_identity_eval(
    cloud: &PointCloud,
    a: &IndexSubset,
    b: &IndexSubset,
) -> Result<(f64, f64)> {
    a.check_for(cloud.n())?;
    b.check_for(cloud.n())?;
    let mut acc = 0.0;
    for i in a.iter() {
        let xi = cloud.row(i);
        for j in b.iter() {
            acc += squared_distance(xi, cloud.row(j));
        }
    }
    let lhs = acc / (a.len() as f64 * b.len() as f64);
    let stats_a = subset_stats(cloud, a)?;
    let stats_b = subset_stats(cloud, b)?;
    let rhs = squared_distance(&stats_a.mean, &stats_b.mean) + stats_a.scatter + stats_b.scatter;
    Ok((lhs, rhs))
}
