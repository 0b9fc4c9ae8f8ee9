//! Queue-length distributions for the two-level non-preemptive M/M/c
//! priority queue with a common exponential service rate.
//!
//! The library computes, to near machine precision, the wait-conditional
//! joint PMF `f(n, m)` of finding `n` low-priority and `m` high-priority
//! clients in the queue given that all servers are busy, together with its
//! marginals and several exactly known companion distributions. Two
//! independent numerical engines are provided:
//!
//! * [`quadratic`] — nonlinear coefficient recurrences for the partial
//!   generating function, plus truncated power-series convolutions;
//! * [`rintegral`] — a closed-form series evaluation of the contour
//!   integrals that represent the PMF, organized so that every term is
//!   positive and well scaled.
//!
//! A third surface, [`chebyshev`], reconstructs the joint PMF from the
//! low-priority marginal through a pair of polynomial families and exists
//! as a structural verification layer rather than a production engine.
//!
//! The [`validation`] module turns the redundancy between these routes and
//! several exact closed forms into a battery of worst-case agreement tests
//! (measured in decimal places), an independent truncated-CTMC oracle and a
//! discrete-event Monte-Carlo simulator. The [`cli`] module backs the
//! `npqueue` binary; most capabilities also have a runnable example under
//! `examples/`.
//!
//! Entry points: build a [`ModelParams`], then call one of the engine
//! functions, e.g.
//!
//! ```
//! use npqueue::{ModelParams, quadratic};
//!
//! let params = ModelParams::new(0.9, 0.5).unwrap();
//! let lo = quadratic::lo_marginal_qr(&params, 20);
//! assert!((lo.values[0] - 0.13837360052304) .abs() < 1e-12);
//! ```

use std::fmt;

pub mod asymptotics;
pub mod chebyshev;
pub mod cli;
pub mod dist;
pub mod model;
pub mod output;
pub mod quadratic;
pub mod rintegral;
pub mod validation;

pub use dist::{JointPmf, Method, PmfKind, PmfVector};
pub use model::{DerivedConstants, ModelParams};

/// Errors reported by the library.
///
/// Domain violations are rejected eagerly so that no NaN propagates into
/// the recurrences.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A parameter is outside its admissible domain.
    Domain(String),
    /// An operation that requires `0 < nu < 1` was invoked at a pole
    /// collision (`nu = 0` or `nu = 1`); the caller should use the
    /// analytic single-class reduction instead.
    Degenerate(String),
    /// The operation needs the server count, but the model was built
    /// without one.
    MissingServerCount,
    /// A worst-case comparison had no qualifying points; returned instead
    /// of a vacuous pass.
    EmptyComparison(String),
    /// A linear solve was too ill-conditioned to trust.
    IllConditioned(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::Degenerate(msg) => write!(f, "degenerate hifrac: {msg}"),
            Error::MissingServerCount => {
                write!(f, "operation requires the server count N, but none was supplied")
            }
            Error::EmptyComparison(msg) => {
                write!(f, "comparison has no qualifying points: {msg}")
            }
            Error::IllConditioned(msg) => write!(f, "ill-conditioned solve: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

/// Library-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
