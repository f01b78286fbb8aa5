use alloc::boxed::Box;
use core::fmt;

use crate::compactness::ExtractionReport;
use crate::epsvar::EvarResult;

#[derive(Debug, Clone)]
pub enum Error {
    /// Domain bounds or cell counts violate their invariants.
    InvalidDomain(&'static str),
    /// Value vector length disagrees with the domain cell count.
    DimensionMismatch {
        expected: usize,
        found: usize,
    },
    NonFiniteValue {
        index: usize,
    },
    IncompatibleDomains,
    WrongDimension {
        expected: usize,
        found: usize,
    },
    NonpositiveEps,
    InvalidExponent,
    InvalidConfig(&'static str),
    /// Oracle search space above its cap.
    TooLarge {
        size: f64,
        cap: f64,
    },
    /// Iteration budget exhausted; the best feasible point found is attached.
    Nonconvergence(Box<EvarResult>),
    /// Extraction could not reach the requested tolerance within the index budget.
    BudgetExceeded(Box<ExtractionReport>),
    NoKnownLimit,
    ResolutionTooCoarse,
    /// A solver error raised while evaluating at a particular `eps`.
    AtEps {
        eps: f64,
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn at_eps(self, eps: f64) -> Self {
        match self {
            e @ Error::AtEps { .. } => e,
            e => Error::AtEps { eps, source: Box::new(e) },
        }
    }

    /// Innermost error, skipping `AtEps` annotations.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtEps { source, .. } => source.root(),
            e => e,
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidDomain(why) => write!(f, "invalid domain: {why}"),
            Error::DimensionMismatch { expected, found } => {
                write!(f, "expected {expected} values, found {found}")
            }
            Error::NonFiniteValue { index } => write!(f, "value at cell {index} is not finite"),
            Error::IncompatibleDomains => f.write_str("grid functions live on different domains"),
            Error::WrongDimension { expected, found } => {
                write!(f, "operation needs a {expected}D function, got {found}D")
            }
            Error::NonpositiveEps => f.write_str("eps must be positive"),
            Error::InvalidExponent => f.write_str("exponent p must be >= 1"),
            Error::InvalidConfig(why) => write!(f, "invalid configuration: {why}"),
            Error::TooLarge { size, cap } => {
                write!(f, "search space {size:e} exceeds the cap {cap:e}")
            }
            Error::Nonconvergence(r) => write!(
                f,
                "solver stopped after {} iterations with gap {:e} (target {:e})",
                r.iterations, r.optimality_gap, r.gap_tol
            ),
            Error::BudgetExceeded(r) => write!(
                f,
                "extraction did not converge within the index budget ({} indices kept)",
                r.indices.len()
            ),
            Error::NoKnownLimit => f.write_str("family has no known limit"),
            Error::ResolutionTooCoarse => {
                f.write_str("grid resolution cannot separate the required breakpoints")
            }
            Error::AtEps { eps, source } => write!(f, "at eps = {eps}: {source}"),
        }
    }
}

impl core::error::Error for Error {}
