//! The `(eps, p)`-variation
//!
//! ```text
//! (eps, p)-Var u = inf { TV(v) : ||u - v||_p <= eps }
//! ```
//!
//! and the machinery around it: an exact taut-string solver for `p = inf` in
//! 1D, a primal-dual solver for every `p` in 1D and 2D, two brute-force
//! oracles, monotone `eps`-profiles and right-continuity checks.
//!
//! Every solver returns an [`EvarResult`] whose `value` is recomputed as the
//! variation of the returned minimizer, never copied from solver state. The
//! feasible set always contains `u` itself on a grid, so the value is finite.

mod lagrangian;
mod oracle;
mod primal_dual;
pub mod projection;
pub(crate) mod taut;

use alloc::vec::Vec;
use core::fmt;

use crate::grid::{GridFn, LpExponent};
use crate::variation::total_variation;
use crate::{Error, Result};

pub use lagrangian::evar_l1_lagrangian;
pub use oracle::{
    evar_oracle_dp, evar_oracle_exhaustive, uniform_lattice, DP_MAX_CELLS, EXHAUSTIVE_MAX_SPACE,
};
pub use primal_dual::evar_solve;
pub use taut::evar_taut_string;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Method {
    TautString,
    L1Lagrangian,
    PrimalDual,
    OracleDp,
    OracleExhaustive,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::TautString => "taut_string",
            Method::L1Lagrangian => "l1_lagrangian",
            Method::PrimalDual => "primal_dual",
            Method::OracleDp => "oracle_dp",
            Method::OracleExhaustive => "oracle_exhaustive",
        }
    }

    /// Whether `value` is the exact optimum (up to rounding).
    pub fn is_exact(self) -> bool {
        matches!(self, Method::TautString | Method::OracleDp)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Value of `(eps, p)`-Var with an attaining (or near-attaining) minimizer.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct EvarResult {
    /// `TV(minimizer)`.
    pub value: f64,
    pub minimizer: GridFn,
    /// `max(0, ||u - minimizer||_p - eps)`.
    pub feasibility_residual: f64,
    /// Certified bound on `value - optimum`; zero for exact methods. For the
    /// lattice oracle this is the Lipschitz estimate `cells * spacing`.
    pub optimality_gap: f64,
    /// Absolute gap target the solver worked to (zero for exact methods).
    pub gap_tol: f64,
    pub iterations: usize,
    pub eps: f64,
    pub p: LpExponent,
    pub method: Method,
}

impl EvarResult {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn from_minimizer(
        u: &GridFn,
        minimizer: GridFn,
        eps: f64,
        p: LpExponent,
        optimality_gap: f64,
        gap_tol: f64,
        iterations: usize,
        method: Method,
    ) -> Self {
        EvarResult {
            value: total_variation(&minimizer),
            feasibility_residual: primal_dual::residual(u, &minimizer, eps, p),
            minimizer,
            optimality_gap,
            gap_tol,
            iterations,
            eps,
            p,
            method,
        }
    }
}

/// Parameters of the iterative solver and the lattice oracle.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct SolverConfig {
    pub max_iters: usize,
    pub feas_tol: f64,
    /// Relative gap target; the absolute target is `gap_tol * (1 + TV(u))`.
    pub gap_tol: f64,
    /// Primal step scale; the per-cell step is `primal_step * mean|cell| / |cell|`.
    pub primal_step: f64,
    /// Iterations between gap evaluations.
    pub check_every: usize,
    /// Spacing of the default value lattice for the exhaustive oracle.
    pub value_lattice_spacing: f64,
    /// All solvers here are deterministic; the seed is carried into reports
    /// for provenance.
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_iters: 50_000,
            feas_tol: 1e-8,
            gap_tol: 1e-6,
            primal_step: 1.0,
            check_every: 10,
            value_lattice_spacing: 0.05,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::InvalidConfig("max_iters must be positive"));
        }
        if !(self.feas_tol > 0.0) || !(self.gap_tol > 0.0) {
            return Err(Error::InvalidConfig("tolerances must be positive"));
        }
        if !(self.primal_step > 0.0) || !self.primal_step.is_finite() {
            return Err(Error::InvalidConfig("primal_step must be positive"));
        }
        if !(self.value_lattice_spacing > 0.0) {
            return Err(Error::InvalidConfig("value_lattice_spacing must be positive"));
        }
        Ok(())
    }
}

/// Default method choice: the exact taut string for `p = inf` in 1D, the
/// Lagrangian dynamic program for `p = 1` in 1D, the primal-dual solver
/// otherwise.
pub fn evar(u: &GridFn, eps: f64, p: LpExponent, cfg: &SolverConfig) -> Result<EvarResult> {
    if p.is_infinite() && u.dim() == 1 {
        evar_taut_string(u, eps)
    } else if p.get() == 1.0 && u.dim() == 1 {
        evar_l1_lagrangian(u, eps, cfg)
    } else {
        evar_solve(u, eps, p, cfg)
    }
}

/// Like [`evar`] but accepts a non-converged solve: the returned point is
/// still feasible and its gap is certified. The flag is `false` in that case.
pub fn evar_lenient(u: &GridFn, eps: f64, p: LpExponent, cfg: &SolverConfig) -> Result<(EvarResult, bool)> {
    match evar(u, eps, p, cfg) {
        Ok(r) => Ok((r, true)),
        Err(Error::Nonconvergence(r)) => Ok((*r, false)),
        Err(e) => Err(e),
    }
}

/// Slack allowed when comparing two values from the same solver family.
pub(crate) fn pair_slack(a: &EvarResult, b: &EvarResult) -> f64 {
    if a.method.is_exact() && b.method.is_exact() {
        0.0
    } else {
        2.0 * a.gap_tol.max(b.gap_tol).max(a.optimality_gap).max(b.optimality_gap)
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct MonotoneViolation {
    /// `values[index + 1] > values[index] + slack`.
    pub index: usize,
    pub excess: f64,
}

/// `eps -> (eps, p)-Var u` on an increasing grid of `eps` values.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct EvarProfile {
    pub p: LpExponent,
    pub eps_grid: Vec<f64>,
    pub values: Vec<f64>,
    pub gaps: Vec<f64>,
    pub methods: Vec<Method>,
    /// Places where the profile increases by more than the solver slack.
    /// Empty for a healthy profile; never repaired.
    pub violations: Vec<MonotoneViolation>,
}

impl EvarProfile {
    pub fn is_monotone(&self) -> bool {
        self.violations.is_empty()
    }
}

pub(crate) fn check_eps_grid(eps_grid: &[f64]) -> Result<()> {
    if eps_grid.is_empty() {
        return Err(Error::InvalidConfig("eps grid is empty"));
    }
    if eps_grid.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::NonpositiveEps);
    }
    if eps_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidConfig("eps grid must be strictly increasing"));
    }
    Ok(())
}

/// Builds a profile from already computed results (in increasing `eps`).
pub fn profile_from_results(p: LpExponent, results: &[EvarResult]) -> EvarProfile {
    let mut violations = Vec::new();
    for (index, w) in results.windows(2).enumerate() {
        let excess = w[1].value - w[0].value - pair_slack(&w[0], &w[1]);
        if excess > 0.0 {
            violations.push(MonotoneViolation { index, excess });
        }
    }
    EvarProfile {
        p,
        eps_grid: results.iter().map(|r| r.eps).collect(),
        values: results.iter().map(|r| r.value).collect(),
        gaps: results.iter().map(|r| r.optimality_gap).collect(),
        methods: results.iter().map(|r| r.method).collect(),
        violations,
    }
}

/// `(eps, p)`-Var u for every `eps` in a strictly increasing grid.
pub fn evar_profile(u: &GridFn, eps_grid: &[f64], p: LpExponent, cfg: &SolverConfig) -> Result<EvarProfile> {
    check_eps_grid(eps_grid)?;
    let results = eps_grid
        .iter()
        .map(|&eps| evar(u, eps, p, cfg).map_err(|e| e.at_eps(eps)))
        .collect::<Result<Vec<_>>>()?;
    Ok(profile_from_results(p, &results))
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct RightContinuityReport {
    pub eps0: f64,
    pub p: LpExponent,
    pub base_value: f64,
    pub deltas: Vec<f64>,
    /// `(eps0 + delta, p)`-Var u for each delta.
    pub values: Vec<f64>,
    /// `|value(eps0 + delta_min) - value(eps0)|`.
    pub limit_gap: f64,
    /// Values increase towards `base_value` as delta shrinks (within slack).
    pub monotone: bool,
    pub tolerance: f64,
    pub pass: bool,
}

/// Checks `(eps0 + delta, p)`-Var u -> `(eps0, p)`-Var u as `delta` decreases
/// to zero. Passes iff the final gap is within `tolerance` and the values
/// approach monotonically.
pub fn right_continuity_check(
    u: &GridFn,
    eps0: f64,
    p: LpExponent,
    deltas: &[f64],
    tolerance: f64,
    cfg: &SolverConfig,
) -> Result<RightContinuityReport> {
    if !(p.is_infinite() || p.get() == 1.0) {
        return Err(Error::InvalidConfig("right-continuity is checked for p = 1 and p = inf"));
    }
    if !(eps0 > 0.0) {
        return Err(Error::NonpositiveEps);
    }
    if deltas.is_empty() || deltas.iter().any(|d| !(*d > 0.0)) || deltas.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidConfig("deltas must be positive and strictly decreasing"));
    }
    let base = evar(u, eps0, p, cfg).map_err(|e| e.at_eps(eps0))?;
    let results = deltas
        .iter()
        .map(|&d| evar(u, eps0 + d, p, cfg).map_err(|e| e.at_eps(eps0 + d)))
        .collect::<Result<Vec<_>>>()?;
    let mut monotone = true;
    for w in results.windows(2) {
        // smaller delta means smaller eps, so the value must not drop
        if w[1].value < w[0].value - pair_slack(&w[0], &w[1]) {
            monotone = false;
        }
    }
    let last = results.last().expect("deltas nonempty");
    if last.value > base.value + pair_slack(last, &base) {
        monotone = false;
    }
    let limit_gap = (last.value - base.value).abs();
    Ok(RightContinuityReport {
        eps0,
        p,
        base_value: base.value,
        deltas: deltas.to_vec(),
        values: results.iter().map(|r| r.value).collect(),
        limit_gap,
        monotone,
        tolerance,
        pass: monotone && limit_gap <= tolerance,
    })
}

#[cfg(test)]
mod tests;
