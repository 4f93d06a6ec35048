//! The robustness ratio ‖F(X) − x̄_S‖²/Σ_S and its exhaustive sup over
//! honest sets.

use alloc::format;
use alloc::vec::Vec;

use crate::aggregators::{multikrum, AggregationParams};
use crate::cloud::{squared_distance, subset_stats, IndexSubset, PointCloud};
use crate::{Error, Result};

/// Enumeration ceiling for the exhaustive sup over honest sets.
pub const SUP_ENUMERATION_LIMIT: u128 = 1_000_000;

/// Numerator, denominator, and the extended-real ratio. The convention is
/// 0/0 = −∞ (a perfect answer on a degenerate instance) and positive/0 =
/// +∞ (an unbounded failure), matching sup semantics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioResult {
    /// ‖F(X) − x̄_S‖².
    pub numerator: f64,
    /// Σ_S.
    pub denominator: f64,
    pub ratio: f64,
}

impl RatioResult {
    fn from_parts(numerator: f64, denominator: f64) -> Self {
        let ratio = if denominator > 0.0 {
            numerator / denominator
        } else if numerator > 0.0 {
            f64::INFINITY
        } else {
            f64::NEG_INFINITY
        };
        RatioResult { numerator, denominator, ratio }
    }
}

/// Ratio of the m-MultiKrum aggregate's squared deviation from the honest
/// mean to the honest scatter, for a fixed honest set S of size n−f.
pub fn kappa_ratio(
    cloud: &PointCloud,
    params: AggregationParams,
    s: &IndexSubset,
) -> Result<RatioResult> {
    if params.n != cloud.n() {
        return Err(Error::InvalidArgument(format!(
            "params.n = {} does not match cloud size {}",
            params.n,
            cloud.n()
        )));
    }
    if s.len() != params.n - params.f {
        return Err(Error::InvalidArgument(format!(
            "honest set has {} indices, need n−f = {}",
            s.len(),
            params.n - params.f
        )));
    }
    let aggregate = multikrum(cloud, params.f, params.m)?.aggregate;
    let stats = subset_stats(cloud, s)?;
    Ok(RatioResult::from_parts(
        squared_distance(&aggregate, &stats.mean),
        stats.scatter,
    ))
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i + 1) as u128;
        if acc > SUP_ENUMERATION_LIMIT {
            return u128::MAX;
        }
    }
    acc
}

/// Maximizes `kappa_ratio` over every honest set of size n−f by exhaustive
/// lexicographic enumeration; ties keep the lexicographically first S.
/// Guarded by `SUP_ENUMERATION_LIMIT` on the subset count.
pub fn kappa_ratio_sup_s(
    cloud: &PointCloud,
    params: AggregationParams,
) -> Result<(IndexSubset, f64)> {
    if params.n != cloud.n() {
        return Err(Error::InvalidArgument(format!(
            "params.n = {} does not match cloud size {}",
            params.n,
            cloud.n()
        )));
    }
    if binomial(params.n, params.f) > SUP_ENUMERATION_LIMIT {
        return Err(Error::Infeasible(format!(
            "enumerating C({}, {}) honest sets exceeds the {SUP_ENUMERATION_LIMIT} limit; \
             evaluate kappa_ratio at a fixed honest set instead",
            params.n, params.f
        )));
    }
    // The aggregate does not depend on S; evaluate it once.
    let aggregate = multikrum(cloud, params.f, params.m)?.aggregate;
    let k = params.n - params.f;
    let mut indices: Vec<usize> = (0..k).collect();
    let mut best: Option<(IndexSubset, f64)> = None;
    loop {
        let subset = IndexSubset::new(indices.clone()).expect("enumeration emits sorted indices");
        let stats = subset_stats(cloud, &subset)?;
        let value =
            RatioResult::from_parts(squared_distance(&aggregate, &stats.mean), stats.scatter)
                .ratio;
        // Strict improvement keeps the lexicographically first maximizer.
        if best.as_ref().map_or(true, |(_, b)| value > *b) {
            best = Some((subset, value));
        }
        // Advance to the next size-k combination in lexicographic order.
        let mut i = k;
        while i > 0 && indices[i - 1] == params.n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            break;
        }
        indices[i - 1] += 1;
        for j in i..k {
            indices[j] = indices[j - 1] + 1;
        }
    }
    Ok(best.expect("at least one subset enumerated"))
}
