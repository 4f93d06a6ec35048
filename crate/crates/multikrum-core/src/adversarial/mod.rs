//! Robustness-ratio evaluation, worst-case configuration generators,
//! stochastic lower-bound search, and the numeric lemma-verification suite.

use alloc::format;
use alloc::string::String;

use rand_core::RngCore;

use crate::aggregators::AggregationParams;
use crate::cloud::{IndexSubset, PointCloud};
use crate::{Error, Result};

mod lemmas;
mod ratio;
mod scenarios;
mod search;

pub use lemmas::{verify_lemmas, LemmaReport, SuiteOutcome};
pub use ratio::{kappa_ratio, kappa_ratio_sup_s, RatioResult};
pub use scenarios::{scenario_krum, scenario_three_cluster, DEFAULT_THREE_CLUSTER_EPSILON};
pub use search::{search_lower_bound, SearchConfig, SearchResult, SEED_EPSILON};

/// A point cloud with a designated honest subset: the unit of evaluation
/// for the robustness ratio, and the certificate format for search results.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    /// Construction parameter where applicable (0 when unused).
    pub epsilon: f64,
    pub params: AggregationParams,
    pub honest: IndexSubset,
    pub cloud: PointCloud,
}

impl Scenario {
    /// Requires |honest| = n−f, honest indices valid, params.n matching the
    /// cloud, and epsilon ∈ [0, 1).
    pub fn new(
        name: String,
        epsilon: f64,
        params: AggregationParams,
        honest: IndexSubset,
        cloud: PointCloud,
    ) -> Result<Self> {
        if params.n != cloud.n() {
            return Err(Error::InvalidArgument(format!(
                "params.n = {} does not match cloud size {}",
                params.n,
                cloud.n()
            )));
        }
        if honest.len() != params.n - params.f {
            return Err(Error::InvalidArgument(format!(
                "honest set has {} indices, need n−f = {}",
                honest.len(),
                params.n - params.f
            )));
        }
        if let Some(&bad) = honest.as_slice().iter().find(|&&i| i >= params.n) {
            return Err(Error::InvalidArgument(format!(
                "honest index {bad} out of range for n = {}",
                params.n
            )));
        }
        if !(0.0..1.0).contains(&epsilon) {
            return Err(Error::InvalidArgument(format!(
                "epsilon = {epsilon} must be in [0, 1)"
            )));
        }
        Ok(Scenario { name, epsilon, params, honest, cloud })
    }

    /// Re-evaluates the robustness ratio of this scenario (certificate
    /// replay).
    pub fn ratio(&self) -> Result<RatioResult> {
        kappa_ratio(&self.cloud, self.params, &self.honest)
    }
}

// Standard normal via Box–Muller from two 53-bit uniforms; u1 ∈ (0, 1]
// keeps the log finite. Self-contained so seeded streams stay stable
// across dependency upgrades.
pub(crate) fn standard_normal<R: RngCore>(rng: &mut R) -> f64 {
    const SCALE: f64 = 1.0 / 9007199254740992.0; // 2^-53
    let u1 = ((rng.next_u64() >> 11) + 1) as f64 * SCALE;
    let u2 = (rng.next_u64() >> 11) as f64 * SCALE;
    libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(2.0 * core::f64::consts::PI * u2)
}

// Uniform draw from [0, bound) by modulo; bias is irrelevant here (bounds
// are tiny relative to 2^64) and the mapping stays reproducible.
pub(crate) fn uniform_below<R: RngCore>(rng: &mut R, bound: usize) -> usize {
    debug_assert!(bound > 0);
    (rng.next_u64() % bound as u64) as usize
}
