//! Scores, neighbor sets, and Krum / m-MultiKrum aggregation.
//!
//! The score of a point x is the mean of the n−f smallest squared distances
//! from x to the cloud, the point itself included (so the self distance 0
//! always counts), with normalizer 1/(n−f). m-MultiKrum averages the m
//! cloud points with smallest scores; Krum is the m = 1 case. All ties are
//! broken toward the smaller index, so every selection is deterministic and
//! score comparison is exact floating point with no epsilon fuzzing.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::cloud::{pairwise_sqdist, squared_distance, subset_mean, IndexSubset, PointCloud};
use crate::{Error, Result};

/// Default Weiszfeld stopping tolerance for the geometric-median baseline.
pub const DEFAULT_GEOMEDIAN_TOL: f64 = 1e-10;
/// Default Weiszfeld iteration cap for the geometric-median baseline.
pub const DEFAULT_GEOMEDIAN_MAX_ITER: usize = 1000;

/// Aggregation parameters: cloud size n, declared Byzantine count f, and
/// MultiKrum averaging size m.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AggregationParams {
    pub n: usize,
    pub f: usize,
    pub m: usize,
}

impl AggregationParams {
    /// Requires n ≥ 1, f ≤ n−1 (so neighbor sets are nonempty), 1 ≤ m ≤ n.
    pub fn new(n: usize, f: usize, m: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("n must be at least 1".into()));
        }
        if f > n - 1 {
            return Err(Error::InvalidArgument(format!("f = {f} must be at most n−1 = {}", n - 1)));
        }
        if m == 0 || m > n {
            return Err(Error::InvalidArgument(format!("m = {m} must be in [1, n] = [1, {n}]")));
        }
        Ok(AggregationParams { n, f, m })
    }
}

/// Per-point scores s(x_i), nonnegative and finite.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreVector {
    scores: Vec<f64>,
}

impl ScoreVector {
    pub fn new(scores: Vec<f64>) -> Result<Self> {
        if scores.is_empty() {
            return Err(Error::InvalidArgument("score vector is empty".into()));
        }
        for (i, &s) in scores.iter().enumerate() {
            if !s.is_finite() || s < 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "scores[{i}] = {s} is not a finite nonnegative value"
                )));
            }
        }
        Ok(ScoreVector { scores })
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.scores
    }
}

/// The selected index set S*_m together with the averaged aggregate.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionResult {
    pub selected: IndexSubset,
    pub aggregate: Vec<f64>,
}

/// Baseline aggregation rules used as comparison subjects.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineRule {
    Mean,
    CoordinateMedian,
    TrimmedMean,
    GeometricMedian,
}

/// Outcome of the Weiszfeld iteration; `converged` is false when the
/// iteration cap was reached before the step norm dropped below tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct WeiszfeldResult {
    pub point: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

// Indices 0..len sorted by (value, index). The comparator is a total order
// because equal values fall back to distinct indices, so the result is
// deterministic and ties always resolve toward the smaller index.
fn order_by_value(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_unstable_by(|&i, &j| values[i].total_cmp(&values[j]).then(i.cmp(&j)));
    order
}

// Shared scoring kernel: mean of the k smallest entries, summed in
// (value, index) order so score() and score_all() agree bitwise.
fn score_from_distances(dists: &[f64], k: usize) -> f64 {
    let order = order_by_value(dists);
    let mut acc = 0.0;
    for &i in order.iter().take(k) {
        acc += dists[i];
    }
    acc / k as f64
}

fn check_f(cloud: &PointCloud, f: usize) -> Result<()> {
    if f > cloud.n() - 1 {
        return Err(Error::InvalidArgument(format!(
            "f = {f} must be at most n−1 = {}",
            cloud.n() - 1
        )));
    }
    Ok(())
}

fn check_query(cloud: &PointCloud, x: &[f64]) -> Result<()> {
    if x.len() != cloud.d() {
        return Err(Error::InvalidArgument(format!(
            "query has {} coordinates, cloud has d = {}",
            x.len(),
            cloud.d()
        )));
    }
    Ok(())
}

/// The n−f cloud indices closest to x (ties toward the smaller index).
/// When x coincides with a cloud point the self index is eligible at
/// distance 0.
pub fn neighbor_set(cloud: &PointCloud, f: usize, x: &[f64]) -> Result<IndexSubset> {
    check_f(cloud, f)?;
    check_query(cloud, x)?;
    let dists: Vec<f64> = cloud.rows().map(|r| squared_distance(x, r)).collect();
    let order = order_by_value(&dists);
    IndexSubset::new(order[..cloud.n() - f].to_vec())
}

/// Score s(x): mean of the n−f smallest squared distances from x to the
/// cloud points.
pub fn score(cloud: &PointCloud, f: usize, x: &[f64]) -> Result<f64> {
    check_f(cloud, f)?;
    check_query(cloud, x)?;
    let dists: Vec<f64> = cloud.rows().map(|r| squared_distance(x, r)).collect();
    Ok(score_from_distances(&dists, cloud.n() - f))
}

/// Scores of every cloud point, computed from one shared pairwise distance
/// matrix. Entry i equals `score(cloud, f, x_i)` bitwise.
pub fn score_all(cloud: &PointCloud, f: usize) -> Result<ScoreVector> {
    check_f(cloud, f)?;
    let matrix = pairwise_sqdist(cloud);
    let k = cloud.n() - f;
    let scores = (0..cloud.n())
        .map(|i| score_from_distances(matrix.row(i), k))
        .collect();
    ScoreVector::new(scores)
}

/// The m indices with smallest scores, ties toward the smaller index,
/// returned sorted ascending.
pub fn select_smallest(scores: &ScoreVector, m: usize) -> Result<IndexSubset> {
    if m == 0 || m > scores.len() {
        return Err(Error::InvalidArgument(format!(
            "m = {m} must be in [1, {}]",
            scores.len()
        )));
    }
    let order = order_by_value(scores.as_slice());
    IndexSubset::new(order[..m].to_vec())
}

/// m-MultiKrum: select the m smallest-score points and average them.
/// Krum is the m = 1 case.
pub fn multikrum(cloud: &PointCloud, f: usize, m: usize) -> Result<SelectionResult> {
    let scores = score_all(cloud, f)?;
    let selected = select_smallest(&scores, m)?;
    let aggregate = subset_mean(cloud, &selected)?;
    Ok(SelectionResult { selected, aggregate })
}

/// Per-coordinate median; the midpoint of the two central order statistics
/// when the count is even.
pub fn coordinate_median(cloud: &PointCloud) -> Vec<f64> {
    let n = cloud.n();
    let mut out = Vec::with_capacity(cloud.d());
    let mut column = vec![0.0; n];
    for k in 0..cloud.d() {
        for (i, slot) in column.iter_mut().enumerate() {
            *slot = cloud.row(i)[k];
        }
        column.sort_unstable_by(f64::total_cmp);
        out.push(if n % 2 == 1 {
            column[n / 2]
        } else {
            0.5 * (column[n / 2 - 1] + column[n / 2])
        });
    }
    out
}

/// Geometric median by Weiszfeld iteration, started at the coordinate-wise
/// median. If the iterate lands within `tol` of a data point, that point is
/// returned (the fixed-point weights are singular there).
pub fn geometric_median(cloud: &PointCloud, tol: f64, max_iter: usize) -> WeiszfeldResult {
    let d = cloud.d();
    let mut y = coordinate_median(cloud);
    for it in 0..max_iter {
        let mut weighted = vec![0.0; d];
        let mut total = 0.0;
        for row in cloud.rows() {
            let dist = libm::sqrt(squared_distance(&y, row));
            if dist <= tol {
                return WeiszfeldResult { point: row.to_vec(), iterations: it, converged: true };
            }
            let w = 1.0 / dist;
            total += w;
            for (acc, &v) in weighted.iter_mut().zip(row) {
                *acc += w * v;
            }
        }
        for acc in &mut weighted {
            *acc /= total;
        }
        let step = libm::sqrt(squared_distance(&weighted, &y));
        y = weighted;
        if step <= tol {
            return WeiszfeldResult { point: y, iterations: it + 1, converged: true };
        }
    }
    WeiszfeldResult { point: y, iterations: max_iter, converged: false }
}

/// Baseline aggregation. `f` only matters for the trimmed mean (which drops
/// the f smallest and f largest values per coordinate and requires 2f < n);
/// `tol`/`max_iter` only matter for the geometric median.
pub fn baseline_aggregate(
    cloud: &PointCloud,
    rule: BaselineRule,
    f: usize,
    tol: f64,
    max_iter: usize,
) -> Result<Vec<f64>> {
    match rule {
        BaselineRule::Mean => subset_mean(cloud, &IndexSubset::full(cloud.n())),
        BaselineRule::CoordinateMedian => Ok(coordinate_median(cloud)),
        BaselineRule::TrimmedMean => {
            let n = cloud.n();
            if 2 * f >= n {
                return Err(Error::InvalidArgument(format!(
                    "trimmed mean requires 2f < n, got f = {f}, n = {n}"
                )));
            }
            let mut out = Vec::with_capacity(cloud.d());
            let mut column = vec![0.0; n];
            for k in 0..cloud.d() {
                for (i, slot) in column.iter_mut().enumerate() {
                    *slot = cloud.row(i)[k];
                }
                column.sort_unstable_by(f64::total_cmp);
                let kept = &column[f..n - f];
                out.push(kept.iter().sum::<f64>() / kept.len() as f64);
            }
            Ok(out)
        }
        BaselineRule::GeometricMedian => {
            if tol <= 0.0 {
                return Err(Error::InvalidArgument("geometric median needs tol > 0".into()));
            }
            Ok(geometric_median(cloud, tol, max_iter).point)
        }
    }
}
