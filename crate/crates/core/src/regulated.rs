//! Step approximation in the sup norm and regularity profiles.
//!
//! On a fixed grid every function is a step function, so the qualitative
//! statements here hold structurally. What carries information is
//! quantitative: how many runs a sup-norm step approximation needs, how its
//! variation compares with the optimal `(eps, inf)`-variation, and how the
//! `(eps, p)`-profile grows as `eps` shrinks.

use alloc::vec::Vec;

use crate::epsvar::taut::{taut_path, tube};
use crate::epsvar::{evar_profile, evar_taut_string, EvarProfile, SolverConfig};
use crate::grid::{lp_distance, GridFn, LpExponent};
use crate::math::ln;
use crate::variation::{count_runs, total_variation};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct StepApprox {
    pub steps: GridFn,
    /// Number of runs `K`.
    pub runs: usize,
    /// First cell of each run.
    pub run_starts: Vec<usize>,
    /// `||u - steps||_inf`; never above `eps`.
    pub sup_error: f64,
}

/// Step function with the fewest runs within `eps` of `u` in the sup norm.
///
/// Runs are grown greedily while the common window `[max - eps, min + eps]`
/// stays nonempty; this is optimal for covering a sequence by windows of
/// width `2 eps`. Run values are then picked on a taut string through the
/// windows, so the variation is the least possible for this run structure.
pub fn approx_by_steps(u: &GridFn, eps: f64) -> Result<StepApprox> {
    u.ensure_1d()?;
    if !(eps > 0.0) {
        return Err(Error::NonpositiveEps);
    }
    let (lo, hi) = tube(u.values(), eps);
    let mut run_starts = alloc::vec![0];
    let mut win_lo = alloc::vec![lo[0]];
    let mut win_hi = alloc::vec![hi[0]];
    for i in 1..lo.len() {
        let r = win_lo.len() - 1;
        let (a, b) = (win_lo[r].max(lo[i]), win_hi[r].min(hi[i]));
        if a <= b {
            win_lo[r] = a;
            win_hi[r] = b;
        } else {
            run_starts.push(i);
            win_lo.push(lo[i]);
            win_hi.push(hi[i]);
        }
    }
    let levels = taut_path(&win_lo, &win_hi);
    let mut values = Vec::with_capacity(lo.len());
    for (r, &start) in run_starts.iter().enumerate() {
        let end = run_starts.get(r + 1).copied().unwrap_or(lo.len());
        values.extend(core::iter::repeat_n(levels[r], end - start));
    }
    let steps = GridFn::new(u.shared_domain().clone(), values)?;
    let sup_error = lp_distance(u, &steps, LpExponent::INFINITY)?;
    Ok(StepApprox { runs: count_runs(steps.values()), steps, run_starts, sup_error })
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct RegularityVerdict {
    /// Every profile value is finite (always true on a grid).
    pub finite: bool,
    pub max_value: f64,
    /// `TV(u)`, which bounds the whole profile.
    pub tv_bound: f64,
    pub bounded_by_tv: bool,
    /// Slope of `log value` against `log eps` over the two smallest `eps`
    /// with positive values; about `-1/2` for the radial example.
    pub small_eps_slope: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct RegularityProfile {
    pub profile: EvarProfile,
    pub verdict: RegularityVerdict,
}

/// `(eps, p)`-profile of `u` with a finiteness and growth verdict.
pub fn p_regulated_profile(
    u: &GridFn,
    eps_grid: &[f64],
    p: LpExponent,
    cfg: &SolverConfig,
) -> Result<RegularityProfile> {
    let profile = evar_profile(u, eps_grid, p, cfg)?;
    let tv = total_variation(u);
    let slack = 2.0 * cfg.gap_tol * (1.0 + tv);
    let positive: Vec<(f64, f64)> = profile
        .eps_grid
        .iter()
        .zip(&profile.values)
        .filter(|(_, v)| **v > 0.0)
        .map(|(e, v)| (*e, *v))
        .collect();
    let small_eps_slope = match positive.as_slice() {
        [(e0, v0), (e1, v1), ..] => Some((ln(*v1) - ln(*v0)) / (ln(*e1) - ln(*e0))),
        _ => None,
    };
    let max_value = profile.values.iter().copied().fold(0.0, f64::max);
    let verdict = RegularityVerdict {
        finite: profile.values.iter().all(|v| v.is_finite()),
        max_value,
        tv_bound: tv,
        bounded_by_tv: max_value <= tv + slack,
        small_eps_slope,
    };
    Ok(RegularityProfile { profile, verdict })
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct EquivalenceRow {
    pub eps: f64,
    /// (a) `(eps, inf)`-Var u is finite.
    pub evar_finite: bool,
    /// (b) a step function lies within `eps` in the sup norm.
    pub steps_within_eps: bool,
    pub runs: usize,
    pub taut_value: f64,
    pub step_variation: f64,
    /// `taut_value <= step_variation`.
    pub cross_bound: bool,
    pub agree: bool,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct EquivalenceReport {
    pub rows: Vec<EquivalenceRow>,
    /// (c) the canonical representative is itself a step function with this many runs.
    pub representative_runs: usize,
    pub all_agree: bool,
}

/// Per `eps`: finite `(eps, inf)`-variation against a successful sup-norm step
/// approximation, plus the bound `(eps, inf)-Var u <= TV(steps)`.
pub fn equivalence_abc_check(u: &GridFn, eps_grid: &[f64]) -> Result<EquivalenceReport> {
    u.ensure_1d()?;
    let mut rows = Vec::with_capacity(eps_grid.len());
    for &eps in eps_grid {
        let taut = evar_taut_string(u, eps).map_err(|e| e.at_eps(eps))?;
        let steps = approx_by_steps(u, eps)?;
        let step_variation = total_variation(&steps.steps);
        let evar_finite = taut.value.is_finite();
        let steps_within_eps = steps.sup_error <= eps;
        let cross_bound = taut.value <= step_variation;
        rows.push(EquivalenceRow {
            eps,
            evar_finite,
            steps_within_eps,
            runs: steps.runs,
            taut_value: taut.value,
            step_variation,
            cross_bound,
            agree: evar_finite == steps_within_eps && cross_bound,
        });
    }
    Ok(EquivalenceReport {
        all_agree: rows.iter().all(|r| r.agree),
        representative_runs: count_runs(u.values()),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::{beta, closed_form_variation, RadialExample, RadialExampleSpec};
    use crate::grid::Domain;
    use crate::variation::run_count;
    use proptest::prelude::*;

    fn ramp(n: usize) -> GridFn {
        GridFn::from_fn(Domain::interval(0.0, 1.0, n).unwrap(), |x, _| x).unwrap()
    }

    #[test]
    fn ramp_needs_two_runs() {
        let s = approx_by_steps(&ramp(64), 0.25).unwrap();
        assert_eq!(s.runs, 2);
        assert!(s.sup_error <= 0.25);
        let tv = total_variation(&s.steps);
        let taut = evar_taut_string(&ramp(64), 0.25).unwrap().value;
        assert!(taut <= tv);
        assert!((tv - 0.5).abs() < 1.0 / 32.0 + 1e-12);
    }

    #[test]
    fn step_input_is_reproduced() {
        let d = Domain::interval(0.0, 1.0, 9).unwrap();
        let u = GridFn::new(d, alloc::vec![0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 3.0, 3.0, 3.0]).unwrap();
        let s = approx_by_steps(&u, 0.1).unwrap();
        assert_eq!(s.runs, 3);
        assert_eq!(s.run_starts, [0, 3, 6]);
        assert!(s.sup_error <= 0.1);
        assert_eq!(approx_by_steps(&u, 0.6).unwrap().runs, 2);
        assert_eq!(approx_by_steps(&u, 1.5).unwrap().runs, 1);
    }

    #[test]
    fn radial_truncation_run_bound() {
        let ex = RadialExample::new(RadialExampleSpec::aligned(40)).unwrap();
        let u = ex.u();
        for n_eps in [1, 3, 8, 20] {
            let eps = beta(n_eps);
            let s = approx_by_steps(&u, eps).unwrap();
            assert!(s.runs <= 2 * (n_eps + 1) + 1, "n_eps = {n_eps}: {} runs", s.runs);
            assert!(s.sup_error <= eps);
        }
    }

    #[test]
    fn profile_of_radial_example() {
        let ex = RadialExample::new(RadialExampleSpec::aligned(200)).unwrap();
        let u = ex.u();
        let ms = [64, 16, 4];
        let eps: Vec<f64> = ms.iter().map(|&m| beta(m)).collect();
        let prof = p_regulated_profile(&u, &eps, LpExponent::INFINITY, &SolverConfig::default()).unwrap();
        assert!(prof.verdict.finite && prof.verdict.bounded_by_tv);
        for (v, &m) in prof.profile.values.iter().zip(&ms) {
            // plateaus k < m stay; each loses at most 2 eps of height from both sides
            let upper = closed_form_variation(m - 1);
            assert!(*v <= upper + 1e-12);
            assert!(*v >= upper - 4.0 * m as f64 * beta(m));
        }
        assert!(prof.profile.is_monotone());
        let slope = prof.verdict.small_eps_slope.unwrap();
        assert!(slope < 0.0, "slope {slope}");
    }

    #[test]
    fn constant_profile_is_zero() {
        let u = GridFn::constant(Domain::interval(0.0, 1.0, 8).unwrap(), 2.0).unwrap();
        let prof = p_regulated_profile(&u, &[0.1, 0.2], LpExponent::ONE, &SolverConfig::default()).unwrap();
        assert_eq!(prof.profile.values, [0.0, 0.0]);
        assert_eq!(prof.verdict.small_eps_slope, None);
    }

    #[test]
    fn equivalence_holds_on_grids() {
        let u = ramp(32);
        let rep = equivalence_abc_check(&u, &[0.05, 0.25, 1.0]).unwrap();
        assert!(rep.all_agree);
        assert_eq!(rep.representative_runs, 32);
        assert_eq!(rep.rows[2].runs, 1);
    }

    proptest! {
        #[test]
        fn steps_are_feasible_and_dominate_taut(
            vals in prop::collection::vec(-1.0f64..1.0, 1..48),
            e1 in 0.01f64..0.5,
            e2 in 0.01f64..0.5,
        ) {
            let d = Domain::interval(0.0, 1.0, vals.len()).unwrap();
            let u = GridFn::new(d, vals).unwrap();
            let (small, large) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
            let a = approx_by_steps(&u, small).unwrap();
            let b = approx_by_steps(&u, large).unwrap();
            prop_assert!(a.sup_error <= small);
            prop_assert!(b.sup_error <= large);
            prop_assert!(b.runs <= a.runs);
            prop_assert!(a.runs <= run_count(&u).unwrap());
            let taut = evar_taut_string(&u, small).unwrap().value;
            prop_assert!(taut <= total_variation(&a.steps));
        }
    }
}
