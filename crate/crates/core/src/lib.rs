//! Computable variation functionals on grid functions.
//!
//! The crate works with piecewise-constant functions on uniform (or
//! breakpoint-aligned) grids over a bounded interval or rectangle and
//! provides:
//!
//! * pointwise, total and essential variation, jump sets ([`variation`]);
//! * the `(eps, p)`-variation `inf { TV(v) : ||u - v||_p <= eps }` through an
//!   exact taut-string solver (`p = inf`, 1D), a Lagrangian dynamic program
//!   (`p = 1`, 1D), a primal-dual first-order solver (any `p`, 1D and 2D)
//!   and two brute-force oracles ([`epsvar`]);
//! * subsequence extraction harnesses for families of grid functions:
//!   pointwise (Helly), L1 clustering (BV) and the diagonal procedure over a
//!   decreasing `eps` schedule ([`compactness`]);
//! * the radial step examples and control families ([`examples`]);
//! * step approximation in the sup norm and regularity profiles
//!   ([`regulated`]).
//!
//! The crate is `no_std` and only needs `alloc`.

#![cfg_attr(not(test), no_std)]
// `!(x > 0.0)` rejects NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod compactness;
pub mod epsvar;
mod error;
pub mod examples;
pub mod grid;
mod math;
pub mod regulated;
#[cfg(feature = "serde")]
mod serde_impls;
pub mod variation;

pub use error::Error;
pub use grid::{Domain, GridFn, LpExponent, Shape};

pub type Result<T, E = Error> = core::result::Result<T, E>;
