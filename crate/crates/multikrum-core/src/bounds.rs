//! Closed-form robustness bounds, the per-instance decomposition
//! coefficient, and the transition point m† where the decreasing factor
//! κ_b(m) crosses (√2+1)².
//!
//! Every bound that carries a (n−f)/(n−2f) prefactor in its statement is
//! returned with that prefactor applied; the raw factors κ_a(m), κ_b(m)
//! are exposed separately because the transition computation and the
//! report tables need them unscaled.

use alloc::format;
use alloc::vec::Vec;

use crate::{Error, Result};

/// (√2+1)² = 3+2√2, the constant upper-bound factor and the crossing level
/// for the transition point.
pub const KAPPA_CONST_FACTOR: f64 = 3.0 + 2.0 * core::f64::consts::SQRT_2;

/// (√2+1)^{-2} = 3−2√2, the limit of m†/n as f/n → 0.
pub const M_DAGGER_FRACTION_LIMIT: f64 = 3.0 - 2.0 * core::f64::consts::SQRT_2;

/// Default absolute tolerance on m for the transition bisection.
pub const DEFAULT_TRANSITION_TOL: f64 = 1e-9;

/// Problem size (n, f) with the denominator condition n − 2f ≥ 1 that every
/// bound requires.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProblemSize {
    pub n: usize,
    pub f: usize,
}

impl ProblemSize {
    pub fn new(n: usize, f: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("n must be at least 1".into()));
        }
        if 2 * f >= n {
            return Err(Error::InvalidArgument(format!(
                "need n − 2f ≥ 1, got n = {n}, f = {f}"
            )));
        }
        Ok(ProblemSize { n, f })
    }

    fn nf(&self) -> f64 {
        (self.n - self.f) as f64
    }

    fn n2f(&self) -> f64 {
        (self.n - 2 * self.f) as f64
    }

    /// (n−f)/(n−2f), the prefactor shared by all upper bounds.
    fn prefactor(&self) -> f64 {
        self.nf() / self.n2f()
    }

    fn check_m(&self, m: usize) -> Result<()> {
        if m == 0 || m > self.n - self.f {
            return Err(Error::InvalidArgument(format!(
                "m = {m} must be in [1, n−f] = [1, {}]",
                self.n - self.f
            )));
        }
        Ok(())
    }
}

/// Universal lower bound f/(n−2f), valid for every robust aggregation rule.
pub fn universal_lower(p: ProblemSize) -> f64 {
    p.f as f64 / p.n2f()
}

/// Krum (m = 1) lower bound: (n−2)/(n−2f+2) for even n, (n−1)/(n−2f+1) for
/// odd n. Requires n ≥ 3 so the split construction is nondegenerate.
pub fn krum_lower(p: ProblemSize) -> Result<f64> {
    if p.n < 3 {
        return Err(Error::InvalidArgument(format!("need n ≥ 3, got n = {}", p.n)));
    }
    let (n, f) = (p.n as f64, p.f as f64);
    Ok(if p.n % 2 == 0 { (n - 2.0) / (n - 2.0 * f + 2.0) } else { (n - 1.0) / (n - 2.0 * f + 1.0) })
}

/// Lower bound 4f/(n−2f) for (n−f)-MultiKrum, valid only in the n > 3f,
/// f ≥ 1 regime where the three-cluster construction applies.
pub fn nf_multikrum_lower(p: ProblemSize) -> Result<f64> {
    if p.f == 0 || p.n <= 3 * p.f {
        return Err(Error::OutOfRegime(format!(
            "the (n−f)-MultiKrum lower bound needs n > 3f and f ≥ 1, got n = {}, f = {}",
            p.n, p.f
        )));
    }
    Ok(4.0 * p.f as f64 / p.n2f())
}

/// Constant upper bound (√2+1)²·(n−f)/(n−2f) (the m-independent branch).
pub fn kappa_const(p: ProblemSize) -> f64 {
    KAPPA_CONST_FACTOR * p.prefactor()
}

/// Prior-work Krum upper bound 6(n−f)/(n−2f), kept for comparison columns.
pub fn prior_krum_upper(p: ProblemSize) -> f64 {
    6.0 * p.prefactor()
}

/// Raw factor κ_b at real-valued m > 0:
/// (√(n−2f)/√m + √(2f)/√m + f/m)². Strictly decreasing in m.
pub fn kappa_b_factor_real(p: ProblemSize, m: f64) -> f64 {
    let root_m = libm::sqrt(m);
    let t = libm::sqrt(p.n2f()) / root_m + libm::sqrt(2.0 * p.f as f64) / root_m + p.f as f64 / m;
    t * t
}

/// Raw factor κ_a(m) = (√(n−2f)/√m + √2 + 1)², for integer m ∈ [1, n−f].
pub fn kappa_a_factor(p: ProblemSize, m: usize) -> Result<f64> {
    p.check_m(m)?;
    let t = libm::sqrt(p.n2f()) / libm::sqrt(m as f64) + core::f64::consts::SQRT_2 + 1.0;
    Ok(t * t)
}

/// Raw factor κ_b(m) for integer m ∈ [1, n−f].
pub fn kappa_b_factor(p: ProblemSize, m: usize) -> Result<f64> {
    p.check_m(m)?;
    Ok(kappa_b_factor_real(p, m as f64))
}

/// Two-branch decomposition upper bound:
/// (n−f)/(n−2f)·κ_a(m) for m ≤ f, (n−f)/(n−2f)·κ_b(m) otherwise.
pub fn kappa_dec(p: ProblemSize, m: usize) -> Result<f64> {
    let factor = if m <= p.f { kappa_a_factor(p, m)? } else { kappa_b_factor(p, m)? };
    Ok(p.prefactor() * factor)
}

/// Per-instance coefficient for a selected set containing u Byzantine
/// points: ((n−f)/m²)·(√(m−u) + (√(2m)+√u)·√(u/(n−2f)))².
pub fn kappa_dec_instance(p: ProblemSize, m: usize, u: usize) -> Result<f64> {
    p.check_m(m)?;
    if u > m.min(p.f) {
        return Err(Error::InvalidArgument(format!(
            "u = {u} must be in [0, min(m, f)] = [0, {}]",
            m.min(p.f)
        )));
    }
    let (mf, uf) = (m as f64, u as f64);
    let t = libm::sqrt(mf - uf)
        + (libm::sqrt(2.0 * mf) + libm::sqrt(uf)) * libm::sqrt(uf / p.n2f());
    Ok(p.nf() / (mf * mf) * (t * t))
}

/// m-MultiKrum upper bound: (n−f)/(n−2f)·min((√2+1)², κ_b(m)). Equals
/// min(kappa_const, kappa_dec) for every m because κ_b(m) > (√2+1)² exactly
/// on the κ_a branch m ≤ f.
pub fn multikrum_upper(p: ProblemSize, m: usize) -> Result<f64> {
    let b = kappa_b_factor(p, m)?;
    Ok(p.prefactor() * KAPPA_CONST_FACTOR.min(b))
}

/// Printed closed form R(n,f,m) with a = min(m, n−2f):
/// ((n−f)²/(f(n−2f)))·((a·f/(n−f) + m − a)/m)², implemented verbatim.
/// For m ≤ n−2f it collapses algebraically to f/(n−2f); for larger m it
/// disagrees with the configuration-based ratio (see the verification
/// command, which surfaces the discrepancy).
pub fn appendix_lower_r(p: ProblemSize, m: usize) -> Result<f64> {
    if p.f == 0 || p.n <= 3 * p.f {
        return Err(Error::OutOfRegime(format!(
            "the closed form R needs n > 3f and f ≥ 1, got n = {}, f = {}",
            p.n, p.f
        )));
    }
    p.check_m(m)?;
    let a = m.min(p.n - 2 * p.f) as f64;
    let (mf, ff) = (m as f64, p.f as f64);
    let bias = (a * ff / p.nf() + mf - a) / mf;
    Ok(p.nf() * p.nf() / (ff * p.n2f()) * bias * bias)
}

/// Transition point of the upper bound: the real root m† of
/// κ_b(m) = (√2+1)², its integer counterpart, and the analytic brackets.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionReport {
    pub n: usize,
    pub f: usize,
    /// Real root of κ_b(m) = (√2+1)², from bisection to `tol`; may exceed
    /// n−f, in which case no integer m in range crosses.
    pub m_dagger_real: f64,
    /// Smallest integer m ∈ [1, n−f] with κ_b(m) < (√2+1)²; None when even
    /// m = n−f stays at or above the crossing level.
    pub m_dagger_int: Option<usize>,
    /// Analytic lower bracket (A² + √(A⁴ + 4Cf²))/(2C).
    pub bracket_low: f64,
    /// Analytic upper bracket (A² + √(A⁴ + 2Cf²))/C.
    pub bracket_high: f64,
    /// A = √(n−2f) + √(2f).
    pub a_coeff: f64,
    /// C = (√2+1)².
    pub crossing: f64,
}

/// Locates m† by bisection on the strictly decreasing map m ↦ κ_b(m) to
/// absolute tolerance `tol`, starting from [1, n] and doubling the right
/// endpoint until it passes below the crossing level. Requires f ≥ 1
/// (κ_b with f = 0 is n/m, which has no meaningful crossing).
pub fn transition(p: ProblemSize, tol: f64) -> Result<TransitionReport> {
    if p.f == 0 {
        return Err(Error::InvalidArgument("transition needs f ≥ 1".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tol = {tol} must be positive")));
    }
    let c = KAPPA_CONST_FACTOR;
    let above = |m: f64| kappa_b_factor_real(p, m) >= c;

    // κ_b(1) ≥ (1 + √2 + 1)² > C whenever f ≥ 1, so [1, hi] brackets the
    // root once κ_b(hi) < C; κ_b ↓ 0 as m → ∞ guarantees termination.
    let mut lo = 1.0_f64;
    let mut hi = p.n as f64;
    while above(hi) {
        hi *= 2.0;
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if above(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let m_dagger_real = 0.5 * (lo + hi);

    // Integer counterpart by binary search over the decreasing sequence.
    let top = p.n - p.f;
    let m_dagger_int = if above(top as f64) {
        None
    } else {
        let (mut lo_i, mut hi_i) = (1usize, top);
        while lo_i < hi_i {
            let mid = lo_i + (hi_i - lo_i) / 2;
            if above(mid as f64) {
                lo_i = mid + 1;
            } else {
                hi_i = mid;
            }
        }
        Some(hi_i)
    };

    let a_coeff = libm::sqrt(p.n2f()) + libm::sqrt(2.0 * p.f as f64);
    let a2 = a_coeff * a_coeff;
    let f2 = (p.f * p.f) as f64;
    let bracket_low = (a2 + libm::sqrt(a2 * a2 + 4.0 * c * f2)) / (2.0 * c);
    let bracket_high = (a2 + libm::sqrt(a2 * a2 + 2.0 * c * f2)) / c;

    Ok(TransitionReport {
        n: p.n,
        f: p.f,
        m_dagger_real,
        m_dagger_int,
        bracket_low,
        bracket_high,
        a_coeff,
        crossing: c,
    })
}

/// Every bound evaluated across m ∈ [1, n−f], plus the scalar lower bounds
/// and the prior-work comparison value. Bounds that only exist in a
/// restricted regime are None outside it.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub n: usize,
    pub f: usize,
    pub m: Vec<usize>,
    /// min((√2+1)², κ_b(m)) with prefactor — constant for m ≤ f, then
    /// strictly decreasing once κ_b drops below the constant.
    pub upper_thm1: Vec<f64>,
    /// Two-branch decomposition bound with prefactor.
    pub kappa_dec: Vec<f64>,
    /// Raw factor κ_a(m), no prefactor.
    pub kappa_a: Vec<f64>,
    /// Raw factor κ_b(m), no prefactor.
    pub kappa_b: Vec<f64>,
    /// Printed closed form R(n,f,m); None unless n > 3f and f ≥ 1.
    pub appendix_r: Option<Vec<f64>>,
    pub kappa_const: f64,
    pub universal_lower: f64,
    /// None for n < 3.
    pub krum_lower: Option<f64>,
    /// None unless n > 3f and f ≥ 1.
    pub nf_lower: Option<f64>,
    pub prior_krum_upper: f64,
}

pub fn summary_table(p: ProblemSize) -> BoundReport {
    let top = p.n - p.f;
    let in_nf_regime = p.f >= 1 && p.n > 3 * p.f;
    let mut report = BoundReport {
        n: p.n,
        f: p.f,
        m: (1..=top).collect(),
        upper_thm1: Vec::with_capacity(top),
        kappa_dec: Vec::with_capacity(top),
        kappa_a: Vec::with_capacity(top),
        kappa_b: Vec::with_capacity(top),
        appendix_r: in_nf_regime.then(|| Vec::with_capacity(top)),
        kappa_const: kappa_const(p),
        universal_lower: universal_lower(p),
        krum_lower: krum_lower(p).ok(),
        nf_lower: nf_multikrum_lower(p).ok(),
        prior_krum_upper: prior_krum_upper(p),
    };
    for m in 1..=top {
        report.upper_thm1.push(multikrum_upper(p, m).expect("m in range"));
        report.kappa_dec.push(kappa_dec(p, m).expect("m in range"));
        report.kappa_a.push(kappa_a_factor(p, m).expect("m in range"));
        report.kappa_b.push(kappa_b_factor(p, m).expect("m in range"));
        if let Some(r) = report.appendix_r.as_mut() {
            r.push(appendix_lower_r(p, m).expect("m in range"));
        }
    }
    report
}
