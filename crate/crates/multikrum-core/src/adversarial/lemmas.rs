//! Randomized verification of the analysis inequalities: the cross-set
//! mean-variance identity, the selected-score bound, the score-to-mean
//! distance bound, and the Young/Jensen auxiliary inequalities.
//!
//! All five statements are theorems, so a correct implementation reports
//! zero failures; any failure pinpoints a bug (or a broken tolerance) and
//! carries a reproducible counterexample description.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::aggregators::{score, score_all, select_smallest};
use crate::cloud::{cross_identity_eval, squared_distance, subset_stats, IndexSubset, PointCloud};
use crate::{Error, Result};

use super::{standard_normal, uniform_below};

/// Relative tolerance for identity checks.
pub const IDENTITY_RTOL: f64 = 1e-9;
/// Absolute slack granted to inequality checks.
pub const INEQUALITY_SLACK: f64 = 1e-12;
/// α values at which the score-to-mean distance bound is checked, besides
/// the data-dependent α* = √(s(x)/Σ_S).
pub const ALPHA_GRID: [f64; 5] = [0.1, 0.5, 1.0, 2.0, 10.0];

/// Per-suite tally; `first_failure` documents the earliest counterexample.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOutcome {
    pub name: &'static str,
    pub checks: u64,
    pub failures: u64,
    pub first_failure: Option<String>,
}

impl SuiteOutcome {
    fn new(name: &'static str) -> Self {
        SuiteOutcome { name, checks: 0, failures: 0, first_failure: None }
    }

    fn record(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures += 1;
            if self.first_failure.is_none() {
                self.first_failure = Some(describe());
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LemmaReport {
    pub trials: usize,
    pub seed: u64,
    pub suites: Vec<SuiteOutcome>,
}

impl LemmaReport {
    pub fn all_passed(&self) -> bool {
        self.suites.iter().all(|s| s.failures == 0)
    }
}

fn sq_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

// Uniformly random size-k subset of [0, n) by partial Fisher–Yates.
fn random_subset<R: RngCore>(rng: &mut R, n: usize, k: usize) -> IndexSubset {
    let mut pool: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = i + uniform_below(rng, n - i);
        pool.swap(i, j);
    }
    pool.truncate(k);
    IndexSubset::new(pool).expect("distinct indices by construction")
}

fn gaussian_rows<R: RngCore>(rng: &mut R, n: usize, d: usize) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..d).map(|_| standard_normal(rng)).collect()).collect()
}

// 53-bit uniform in (0, 1].
fn positive_uniform<R: RngCore>(rng: &mut R) -> f64 {
    const SCALE: f64 = 1.0 / 9007199254740992.0;
    ((rng.next_u64() >> 11) + 1) as f64 * SCALE
}

/// Runs `trials` random instances (3 ≤ n ≤ max_n, 0 ≤ f ≤ (n−1)/2,
/// 1 ≤ m ≤ n−f, 1 ≤ d ≤ max_d, standard-normal cloud, uniform honest set)
/// and checks each suite once per trial. Deterministic for a fixed seed.
pub fn verify_lemmas(
    trials: usize,
    seed: u64,
    max_n: usize,
    max_d: usize,
) -> Result<LemmaReport> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    if max_n < 3 {
        return Err(Error::InvalidArgument(format!("max_n = {max_n} must be at least 3")));
    }
    if max_d == 0 {
        return Err(Error::InvalidArgument("max_d must be at least 1".into()));
    }

    let mut cross = SuiteOutcome::new("cross-identity");
    let mut selected = SuiteOutcome::new("selected-score-bound");
    let mut distance = SuiteOutcome::new("score-distance-bound");
    let mut young = SuiteOutcome::new("young");
    let mut jensen = SuiteOutcome::new("jensen");

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for trial in 0..trials {
        // Fixed draw order keeps every trial reproducible from the seed.
        let n = 3 + uniform_below(&mut rng, max_n - 2);
        let f = uniform_below(&mut rng, (n - 1) / 2 + 1);
        let m = 1 + uniform_below(&mut rng, n - f);
        let d = 1 + uniform_below(&mut rng, max_d);
        let cloud = PointCloud::from_rows(&gaussian_rows(&mut rng, n, d))?;
        let s_set = random_subset(&mut rng, n, n - f);
        let a_size = 1 + uniform_below(&mut rng, n);
        let a_set = random_subset(&mut rng, n, a_size);
        let b_size = 1 + uniform_below(&mut rng, n);
        let b_set = random_subset(&mut rng, n, b_size);
        let x: Vec<f64> = (0..d).map(|_| standard_normal(&mut rng)).collect();
        let y: Vec<f64> = (0..d).map(|_| standard_normal(&mut rng)).collect();
        let alpha = libm::pow(10.0, 2.0 * positive_uniform(&mut rng) - 1.0);
        let k = 1 + uniform_below(&mut rng, 8);
        let points = gaussian_rows(&mut rng, k, d);
        let weights: Vec<f64> = (0..k).map(|_| positive_uniform(&mut rng)).collect();

        // Cross-set identity: the A×B mean of squared distances equals
        // ‖x̄_A − x̄_B‖² + Σ_A + Σ_B.
        let (lhs, rhs) = cross_identity_eval(&cloud, &a_set, &b_set)?;
        cross.record((lhs - rhs).abs() <= IDENTITY_RTOL * lhs.abs().max(1.0), || {
            format!("trial {trial}: n={n} d={d} |A|={} |B|={}: {lhs} vs {rhs}", a_set.len(), b_set.len())
        });

        // Selected-score bound: the mean score of the m selected points is
        // at most twice the honest scatter.
        let scores = score_all(&cloud, f)?;
        let sel = select_smallest(&scores, m)?;
        let mean_selected =
            sel.iter().map(|i| scores.as_slice()[i]).sum::<f64>() / m as f64;
        let stats = subset_stats(&cloud, &s_set)?;
        selected.record(mean_selected <= 2.0 * stats.scatter + INEQUALITY_SLACK, || {
            format!(
                "trial {trial}: n={n} f={f} m={m}: mean score {mean_selected} > 2·{}",
                stats.scatter
            )
        });

        // Score-to-mean distance bound at every grid α and at the
        // stationary α* = √(s(x)/Σ_S) when that is positive and finite.
        let s_x = score(&cloud, f, &x)?;
        let lhs = squared_distance(&x, &stats.mean);
        let prefactor = (n - f) as f64 / (n - 2 * f) as f64;
        let alpha_star = if stats.scatter > 0.0 && s_x > 0.0 {
            Some(libm::sqrt(s_x / stats.scatter))
        } else {
            None
        };
        let mut bad_alpha = None;
        for a in ALPHA_GRID.iter().copied().chain(alpha_star) {
            let rhs = prefactor * ((1.0 + a) * s_x + (1.0 + 1.0 / a) * stats.scatter);
            if lhs > rhs + INEQUALITY_SLACK {
                bad_alpha = Some(a);
                break;
            }
        }
        distance.record(bad_alpha.is_none(), || {
            format!(
                "trial {trial}: n={n} f={f} d={d} α={}: ‖x−x̄_S‖²={lhs} exceeds the bound",
                bad_alpha.unwrap_or(f64::NAN)
            )
        });

        // ‖x+y‖² ≤ (1+α)‖x‖² + (1+1/α)‖y‖².
        let sum: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
        let young_rhs = (1.0 + alpha) * sq_norm(&x) + (1.0 + 1.0 / alpha) * sq_norm(&y);
        young.record(sq_norm(&sum) <= young_rhs + INEQUALITY_SLACK, || {
            format!("trial {trial}: d={d} α={alpha}: ‖x+y‖²={} > {young_rhs}", sq_norm(&sum))
        });

        // ‖Σλᵢxᵢ/Σλᵢ‖² ≤ Σλᵢ‖xᵢ‖²/Σλᵢ.
        let total: f64 = weights.iter().sum();
        let mut combo = vec![0.0; d];
        let mut rhs = 0.0;
        for (row, &w) in points.iter().zip(&weights) {
            for (acc, &v) in combo.iter_mut().zip(row) {
                *acc += w * v;
            }
            rhs += w * sq_norm(row);
        }
        for acc in &mut combo {
            *acc /= total;
        }
        rhs /= total;
        jensen.record(sq_norm(&combo) <= rhs + INEQUALITY_SLACK, || {
            format!("trial {trial}: k={k} d={d}: ‖combo‖²={} > {rhs}", sq_norm(&combo))
        });
    }

    Ok(LemmaReport {
        trials,
        seed,
        suites: vec![cross, selected, distance, young, jensen],
    })
}
