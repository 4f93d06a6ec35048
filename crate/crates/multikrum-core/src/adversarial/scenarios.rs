//! Explicit worst-case configurations: the two-value split that makes Krum
//! miss the honest majority, and the three-cluster layout that drags the
//! full (n−f)-MultiKrum average.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::aggregators::AggregationParams;
use crate::cloud::{IndexSubset, PointCloud};
use crate::{Error, Result};

use super::Scenario;

/// Default ε for the three-cluster construction; the analytic bound is the
/// ε → 0 limit.
pub const DEFAULT_THREE_CLUSTER_EPSILON: f64 = 1e-6;

// One-dimensional rows for the split construction: n/2−1 points at e for
// even n ((n−1)/2 for odd), the rest at 0.
pub(crate) fn krum_split_rows(n: usize) -> Vec<Vec<f64>> {
    let ones = if n % 2 == 0 { n / 2 - 1 } else { (n - 1) / 2 };
    (0..n).map(|i| vec![if i < ones { 1.0 } else { 0.0 }]).collect()
}

// One-dimensional rows for the three-cluster construction: f points at −e,
// n−2f at 0, f at (1−ε)e.
pub(crate) fn three_cluster_rows(n: usize, f: usize, epsilon: f64) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| {
            vec![if i < f {
                -1.0
            } else if i < n - f {
                0.0
            } else {
                1.0 - epsilon
            }]
        })
        .collect()
}

/// Split scenario witnessing the Krum (m = 1) lower bound. The honest set
/// is the index prefix of size n−f, which mixes both clusters.
pub fn scenario_krum(n: usize, f: usize) -> Result<Scenario> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!("need n ≥ 3, got n = {n}")));
    }
    if 2 * f >= n {
        return Err(Error::InvalidArgument(format!(
            "need n − 2f ≥ 1, got n = {n}, f = {f}"
        )));
    }
    let params = AggregationParams::new(n, f, 1)?;
    let cloud = PointCloud::from_rows(&krum_split_rows(n))?;
    Scenario::new(
        format!("krum-split(n={n},f={f})"),
        0.0,
        params,
        IndexSubset::prefix(n - f),
        cloud,
    )
}

/// Three-cluster scenario witnessing the (n−f)-MultiKrum lower bound
/// 4f/(n−2f) as ε → 0. Honest = the −e cluster plus the zeros; the
/// Byzantine cluster sits at (1−ε)e so it scores below the −e cluster and
/// gets selected.
pub fn scenario_three_cluster(n: usize, f: usize, epsilon: f64) -> Result<Scenario> {
    if f == 0 || n <= 3 * f {
        return Err(Error::OutOfRegime(format!(
            "the three-cluster construction needs n > 3f and f ≥ 1, got n = {n}, f = {f}"
        )));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "epsilon = {epsilon} must be in (0, 1)"
        )));
    }
    let params = AggregationParams::new(n, f, n - f)?;
    let cloud = PointCloud::from_rows(&three_cluster_rows(n, f, epsilon))?;
    Scenario::new(
        format!("three-cluster(n={n},f={f})"),
        epsilon,
        params,
        IndexSubset::prefix(n - f),
        cloud,
    )
}
