//! Byzantine-robust aggregation: Krum and m-MultiKrum selection, closed-form
//! bounds on the robustness coefficient, and adversarial configuration search.
//!
//! The crate is `no_std` (with `alloc`): everything operates on in-memory
//! `f64` point clouds and is deterministic for fixed inputs and seeds. IO,
//! serialization, and the command-line front-end live in the companion
//! `multikrum-cli` crate.
//!
//! - [`cloud`] — point clouds, index subsets, subset mean/scatter, pairwise
//!   squared distances, and the cross-sum identity.
//! - [`aggregators`] — scores, neighbor sets, Krum/MultiKrum selection, and
//!   baseline rules (mean, medians, trimmed mean).
//! - [`bounds`] — closed-form lower/upper bounds on the robustness
//!   coefficient and the transition point of the upper-bound envelope.
//! - [`adversarial`] — the robustness-ratio evaluator, worst-case
//!   configuration generators, seeded lower-bound search, and the
//!   inequality verification suite.

#![no_std]
#![deny(unsafe_code)]

extern crate alloc;

pub mod adversarial;
pub mod aggregators;
pub mod bounds;
pub mod cloud;

use alloc::string::String;
use core::fmt;

/// Error type shared by all modules.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// An argument violates a documented precondition.
    InvalidArgument(String),
    /// The requested quantity is undefined for these parameters (e.g. the
    /// n > 3f lower bound evaluated at n ≤ 3f).
    OutOfRegime(String),
    /// An exhaustive enumeration would exceed its feasibility guard.
    Infeasible(String),
    /// A computed value contradicts a proven bound. Always a bug indicator,
    /// never a legitimate result.
    TheoryViolation(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::OutOfRegime(msg) => write!(f, "out of regime: {msg}"),
            Error::Infeasible(msg) => write!(f, "infeasible: {msg}"),
            Error::TheoryViolation(msg) => write!(f, "theory violation: {msg}"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
