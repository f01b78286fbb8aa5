//! First-order primal-dual solver for `min TV(v) s.t. ||v - u||_p <= eps`.
//!
//! Writes `TV(v) = ||K v||_1` with `K` the face-difference operator scaled by
//! face measure and runs the Chambolle-Pock iteration
//!
//! ```text
//! y <- clamp(y + S K xbar, -1, 1)
//! x <- proj_B(x - T K^T y)
//! xbar <- 2 x - x_old
//! ```
//!
//! with diagonal steps `T = tau0 W^-1` (`W` the cell measures) and
//! `S_f = 1 / (theta * sum_i |K_fi| T_i)`, `theta` above the largest column
//! sum of `|K|`; this keeps `||S^1/2 K T^1/2|| < 1`. Because the primal metric
//! is `W`, the primal step is the weighted-metric projection onto the Lp ball.
//!
//! Every iterate is feasible, so `TV(x)` is an upper bound, and any `|y| <= 1`
//! yields the lower bound `<K^T y, u> - eps * ||W^-1 K^T y||_{q,w}` (`q` the
//! conjugate exponent). The reported gap is the difference of the best bounds.

use alloc::boxed::Box;
use alloc::vec::Vec;

use crate::grid::{lp_distance, GridFn, LpExponent};
use crate::math::{abs_pow, powf, tube_hi, tube_lo};
use crate::variation::face_sum;
use crate::{Error, Result};

use super::projection::project_offset;
use super::{EvarResult, Method, SolverConfig};

struct Problem<'a> {
    u: &'a [f64],
    w: Vec<f64>,
    faces: Vec<(usize, usize, f64)>,
    eps: f64,
    p: LpExponent,
    // tube bounds used for the p = inf projection
    tube: Option<(Vec<f64>, Vec<f64>)>,
}

impl Problem<'_> {
    fn adjoint(&self, y: &[f64], g: &mut [f64]) {
        g.iter_mut().for_each(|x| *x = 0.0);
        for (&(i, j, c), &yf) in self.faces.iter().zip(y) {
            g[i] -= c * yf;
            g[j] += c * yf;
        }
    }

    fn dual_value(&self, g: &[f64]) -> f64 {
        let lin: f64 = g.iter().zip(self.u).map(|(a, b)| a * b).sum();
        let q = self.p.conjugate();
        let dn = if q.is_infinite() {
            g.iter().zip(&self.w).fold(0.0f64, |m, (gi, wi)| m.max(gi.abs() / wi))
        } else if q.get() == 1.0 {
            g.iter().map(|x| x.abs()).sum()
        } else {
            let qv = q.get();
            let s: f64 = g.iter().zip(&self.w).map(|(gi, wi)| wi * abs_pow(gi / wi, qv)).sum();
            powf(s, 1.0 / qv)
        };
        lin - self.eps * dn
    }

    fn project(&self, z: &mut [f64]) {
        if let Some((lo, hi)) = &self.tube {
            for ((x, l), h) in z.iter_mut().zip(lo).zip(hi) {
                *x = x.clamp(*l, *h);
            }
            return;
        }
        for (x, ui) in z.iter_mut().zip(self.u) {
            *x -= ui;
        }
        project_offset(z, &self.w, self.eps, self.p);
        for (x, ui) in z.iter_mut().zip(self.u) {
            *x += ui;
        }
    }
}

/// `(eps, p)`-variation by the primal-dual iteration. Works in 1D and 2D and
/// for every `p >= 1`. Starts from `v = u`; the iteration order is fixed, so
/// results are reproducible.
pub fn evar_solve(u: &GridFn, eps: f64, p: LpExponent, cfg: &SolverConfig) -> Result<EvarResult> {
    if !(eps > 0.0) {
        return Err(Error::NonpositiveEps);
    }
    cfg.validate()?;
    let domain = u.domain();
    let tv_u = face_sum(&domain.faces(), u.values());
    let gap_tol = cfg.gap_tol * (1.0 + tv_u);
    let prob = Problem {
        u: u.values(),
        w: domain.cell_measures(),
        faces: domain.faces(),
        eps,
        p,
        tube: p.is_infinite().then(|| u.values().iter().map(|&x| (tube_lo(x, eps), tube_hi(x, eps))).unzip()),
    };
    let n = prob.u.len();
    let m = prob.faces.len();

    let finish = |x: Vec<f64>, gap: f64, iters: usize| {
        EvarResult::from_minimizer(u, u.with_values(x), eps, p, gap, gap_tol, iters, Method::PrimalDual)
    };
    if m == 0 || tv_u == 0.0 {
        return Ok(finish(prob.u.to_vec(), 0.0, 0));
    }

    let mean_w = prob.w.iter().sum::<f64>() / n as f64;
    let tau0 = cfg.primal_step * mean_w;
    let tau: Vec<f64> = prob.w.iter().map(|wi| tau0 / wi).collect();
    let mut colsum = alloc::vec![0.0; n];
    for &(i, j, c) in &prob.faces {
        colsum[i] += c;
        colsum[j] += c;
    }
    let theta = colsum.iter().copied().fold(0.0, f64::max) / 0.99;
    let sigma: Vec<f64> = prob.faces.iter().map(|&(i, j, c)| 1.0 / (theta * c * (tau[i] + tau[j]))).collect();

    let mut x = prob.u.to_vec();
    let mut x_bar = x.clone();
    let mut y = alloc::vec![0.0; m];
    let mut g = alloc::vec![0.0; n];
    let mut z = alloc::vec![0.0; n];

    let mut best_x = x.clone();
    let mut best_primal = tv_u;
    let mut best_dual = f64::NEG_INFINITY;
    let check_every = cfg.check_every.max(1);

    for iter in 1..=cfg.max_iters {
        for (f, &(i, j, c)) in prob.faces.iter().enumerate() {
            y[f] = (y[f] + sigma[f] * c * (x_bar[j] - x_bar[i])).clamp(-1.0, 1.0);
        }
        prob.adjoint(&y, &mut g);
        for k in 0..n {
            z[k] = x[k] - tau[k] * g[k];
        }
        prob.project(&mut z);
        for k in 0..n {
            x_bar[k] = 2.0 * z[k] - x[k];
        }
        core::mem::swap(&mut x, &mut z);

        if iter % check_every == 0 || iter == cfg.max_iters {
            let primal = face_sum(&prob.faces, &x);
            if primal < best_primal {
                best_primal = primal;
                best_x.copy_from_slice(&x);
            }
            best_dual = best_dual.max(prob.dual_value(&g));
            if best_primal - best_dual <= gap_tol {
                return Ok(finish(best_x, (best_primal - best_dual).max(0.0), iter));
            }
        }
    }
    let result = finish(best_x, (best_primal - best_dual).max(0.0), cfg.max_iters);
    Err(Error::Nonconvergence(Box::new(result)))
}

/// Feasibility residual `max(0, ||u - v||_p - eps)`.
pub(crate) fn residual(u: &GridFn, v: &GridFn, eps: f64, p: LpExponent) -> f64 {
    lp_distance(u, v, p).map(|d| (d - eps).max(0.0)).unwrap_or(f64::INFINITY)
}
