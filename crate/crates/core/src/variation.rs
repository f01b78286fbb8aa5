//! Pointwise, total and essential variation of grid functions, jump sets and
//! step-function predicates.
//!
//! On a piecewise-constant 1D grid function the supremum over partitions in
//! the pointwise variation is attained by one point per cell, so it equals
//! the sum of absolute successive differences. In 2D the variation is the
//! anisotropic face sum `sum |u_i - u_j| * |face|`, which is exact for
//! axis-aligned piecewise-constant data.

use alloc::vec::Vec;

use crate::grid::GridFn;
use crate::Result;

/// Interfaces whose jump exceeds a threshold.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct JumpSet {
    /// Interface `k` separates cells `k` and `k + 1`.
    pub positions: Vec<usize>,
    pub magnitudes: Vec<f64>,
}

impl JumpSet {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

/// `sum_i |v_{i+1} - v_i|`, summed per monotone piece as `|end - start|` so
/// that intermediate points on a monotone stretch add no rounding.
pub(crate) fn successive_abs_sum(values: &[f64]) -> f64 {
    let mut total = 0.0;
    let mut start = match values.first() {
        Some(&v) => v,
        None => return 0.0,
    };
    let mut dir = 0.0f64;
    for w in values.windows(2) {
        let d = w[1] - w[0];
        if d == 0.0 {
            continue;
        }
        if dir != 0.0 && d.signum() != dir {
            total += (w[0] - start).abs();
            start = w[0];
        }
        dir = d.signum();
    }
    total + (values[values.len() - 1] - start).abs()
}

/// Face-sum variation of a raw value vector laid out on `u`'s domain.
pub(crate) fn face_sum(faces: &[(usize, usize, f64)], values: &[f64]) -> f64 {
    faces.iter().map(|&(i, j, w)| w * (values[j] - values[i]).abs()).sum()
}

/// `sum_i |u_{i+1} - u_i|`.
pub fn pointwise_var(u: &GridFn) -> Result<f64> {
    u.ensure_1d()?;
    Ok(successive_abs_sum(u.values()))
}

/// Discrete variation: successive differences in 1D, length-weighted face
/// differences in 2D.
pub fn total_variation(u: &GridFn) -> f64 {
    if u.dim() == 1 {
        successive_abs_sum(u.values())
    } else {
        face_sum(&u.domain().faces(), u.values())
    }
}

/// Infimum of the pointwise variation over versions of `u`. The grid
/// representative is already the minimal version, so this is
/// [`pointwise_var`].
pub fn essential_var(u: &GridFn) -> Result<f64> {
    pointwise_var(u)
}

pub fn jump_set(u: &GridFn, threshold: f64) -> Result<JumpSet> {
    u.ensure_1d()?;
    let mut out = JumpSet::default();
    for (k, w) in u.values().windows(2).enumerate() {
        let m = (w[1] - w[0]).abs();
        if m > threshold {
            out.positions.push(k);
            out.magnitudes.push(m);
        }
    }
    Ok(out)
}

/// Number of maximal constant runs of a 1D function.
pub fn run_count(u: &GridFn) -> Result<usize> {
    u.ensure_1d()?;
    Ok(count_runs(u.values()))
}

pub(crate) fn count_runs(values: &[f64]) -> usize {
    if values.is_empty() {
        return 0;
    }
    1 + values.windows(2).filter(|w| w[0] != w[1]).count()
}

pub fn is_step_function(u: &GridFn, max_pieces: usize) -> Result<bool> {
    Ok(run_count(u)? <= max_pieces)
}
