//! Exact `(eps, inf)`-variation in 1D.
//!
//! Minimizes `sum |v_{i+1} - v_i|` subject to `v_i` in the tube
//! `[u_i - eps, u_i + eps]`. The cost-to-come after cell `i` has the form
//! `m_i + dist(x, I_i)` on the tube, where `I_i` is an interval, so a forward
//! sweep only carries `I_i`: it shrinks while the tube cells overlap and
//! collapses to the near tube edge when the string is forced to move. The
//! backward sweep pulls the string tight by clamping into each `I_i`.

use alloc::vec::Vec;

use crate::grid::{GridFn, LpExponent};
use crate::math::{tube_hi, tube_lo};
use crate::{Error, Result};

use super::{EvarResult, Method};

/// Tube `[lo_i, hi_i]` around every value, shrunk by at most an ulp so that
/// every point of it is within `eps` in floating point.
pub(crate) fn tube(values: &[f64], eps: f64) -> (Vec<f64>, Vec<f64>) {
    values.iter().map(|&u| (tube_lo(u, eps), tube_hi(u, eps))).unzip()
}

/// Minimal-variation path through the boxes `[lo_i, hi_i]`.
pub(crate) fn taut_path(lo: &[f64], hi: &[f64]) -> Vec<f64> {
    let n = lo.len();
    let mut reach: Vec<(f64, f64)> = Vec::with_capacity(n);
    let mut cur = (lo[0], hi[0]);
    reach.push(cur);
    for i in 1..n {
        let (a, b) = (cur.0.max(lo[i]), cur.1.min(hi[i]));
        cur = if a <= b {
            (a, b)
        } else if lo[i] > cur.1 {
            (lo[i], lo[i])
        } else {
            (hi[i], hi[i])
        };
        reach.push(cur);
    }
    let mut v = alloc::vec![0.0; n];
    let (a, b) = reach[n - 1];
    v[n - 1] = (0.5 * (a + b)).clamp(a, b);
    for i in (0..n - 1).rev() {
        let (a, b) = reach[i];
        v[i] = v[i + 1].clamp(a, b);
    }
    v
}

/// Exact `(eps, inf)`-variation of a 1D grid function with its canonical
/// taut-string minimizer.
pub fn evar_taut_string(u: &GridFn, eps: f64) -> Result<EvarResult> {
    u.ensure_1d()?;
    if !(eps > 0.0) {
        return Err(Error::NonpositiveEps);
    }
    let (lo, hi) = tube(u.values(), eps);
    let v = taut_path(&lo, &hi);
    Ok(EvarResult::from_minimizer(
        u,
        u.with_values(v),
        eps,
        LpExponent::INFINITY,
        0.0,
        0.0,
        0,
        Method::TautString,
    ))
}
