//! `(eps, 1)`-variation in 1D through the Lagrangian
//!
//! ```text
//! g(lambda) = min_v  sum |v_{i+1} - v_i| + lambda sum w_i |v_i - u_i|
//! ```
//!
//! For fixed `lambda` the minimum is attained with every `v_i` among the data
//! values (level sets of `v` only change where a threshold crosses a data
//! value), so a dynamic program over the sorted data values with a two-pass
//! distance transform solves it in `O(n |S|)`. The fidelity of the minimizer
//! decreases in `lambda`; bisection brackets the `lambda` where it crosses
//! `eps`. Every `lambda` gives the lower bound `g(lambda) - lambda eps`, and
//! mixing the two bracketing minimizers gives a feasible point whose variation
//! meets it once both are minimizers at the same `lambda`.

use alloc::boxed::Box;
use alloc::vec::Vec;

use crate::grid::{GridFn, LpExponent};
use crate::variation::successive_abs_sum;
use crate::{Error, Result};

use super::{EvarResult, Method, SolverConfig};

const MAX_BISECTIONS: usize = 200;

struct Lagrangian<'a> {
    u: &'a [f64],
    w: Vec<f64>,
    levels: Vec<f64>,
    // level index of each data value
    rank: Vec<usize>,
    back: Vec<u32>,
    cost: Vec<f64>,
    next: Vec<f64>,
    arg: Vec<u32>,
}

struct Candidate {
    v: Vec<f64>,
    tv: f64,
    fid: f64,
}

impl Lagrangian<'_> {
    fn fidelity(&self, v: &[f64]) -> f64 {
        v.iter().zip(self.u).zip(&self.w).map(|((a, b), w)| w * (a - b).abs()).sum()
    }

    fn candidate(&self, v: Vec<f64>) -> Candidate {
        Candidate { tv: successive_abs_sum(&v), fid: self.fidelity(&v), v }
    }

    fn solve(&mut self, lambda: f64) -> Candidate {
        let s = self.levels.len();
        let n = self.u.len();
        for k in 0..s {
            self.cost[k] = lambda * self.w[0] * (self.levels[k] - self.u[0]).abs();
        }
        for i in 1..n {
            // distance transform: next[k] = min_j cost[j] + |S_k - S_j|
            self.next[0] = self.cost[0];
            self.arg[0] = 0;
            for k in 1..s {
                let moved = self.next[k - 1] + (self.levels[k] - self.levels[k - 1]);
                if moved < self.cost[k] {
                    self.next[k] = moved;
                    self.arg[k] = self.arg[k - 1];
                } else {
                    self.next[k] = self.cost[k];
                    self.arg[k] = k as u32;
                }
            }
            for k in (0..s - 1).rev() {
                let moved = self.next[k + 1] + (self.levels[k + 1] - self.levels[k]);
                if moved < self.next[k] {
                    self.next[k] = moved;
                    self.arg[k] = self.arg[k + 1];
                }
            }
            let row = &mut self.back[i * s..(i + 1) * s];
            row.copy_from_slice(&self.arg);
            for k in 0..s {
                self.cost[k] = self.next[k] + lambda * self.w[i] * (self.levels[k] - self.u[i]).abs();
            }
        }
        let mut k = (0..s).min_by(|&a, &b| self.cost[a].total_cmp(&self.cost[b])).expect("levels nonempty");
        let mut v = alloc::vec![0.0; n];
        for i in (0..n).rev() {
            v[i] = self.levels[k];
            if i > 0 {
                k = self.back[i * s + k] as usize;
            }
        }
        self.candidate(v)
    }

    /// Constant at a weighted median: the minimizer as `lambda -> 0`.
    fn median(&self) -> Candidate {
        let mut order: Vec<usize> = (0..self.u.len()).collect();
        order.sort_by(|&a, &b| self.rank[a].cmp(&self.rank[b]));
        let half = 0.5 * self.w.iter().sum::<f64>();
        let mut acc = 0.0;
        let mut c = self.u[order[0]];
        for &i in &order {
            acc += self.w[i];
            c = self.u[i];
            if acc >= half {
                break;
            }
        }
        self.candidate(alloc::vec![c; self.u.len()])
    }

    /// Feasible point on the segment between an infeasible and a feasible
    /// candidate, as close to the infeasible end as the constraint allows.
    fn mix(&self, lo: &Candidate, hi: &Candidate, eps: f64) -> Option<Candidate> {
        if !(lo.fid > hi.fid) {
            return None;
        }
        let mut theta = (eps - hi.fid) / (lo.fid - hi.fid);
        for _ in 0..8 {
            let v: Vec<f64> = lo.v.iter().zip(&hi.v).map(|(a, b)| theta * a + (1.0 - theta) * b).collect();
            let c = self.candidate(v);
            if c.fid <= eps {
                return Some(c);
            }
            theta *= 1.0 - 1e-12;
        }
        None
    }
}

/// Exact `(eps, 1)`-variation of a 1D grid function (certified to rounding).
pub fn evar_l1_lagrangian(u: &GridFn, eps: f64, cfg: &SolverConfig) -> Result<EvarResult> {
    u.ensure_1d()?;
    if !(eps > 0.0) {
        return Err(Error::NonpositiveEps);
    }
    cfg.validate()?;
    let vals = u.values();
    let n = vals.len();
    let tv_u = successive_abs_sum(vals);
    let gap_tol = cfg.gap_tol * (1.0 + tv_u);
    let mut levels = vals.to_vec();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    let rank =
        vals.iter().map(|x| levels.binary_search_by(|l| l.total_cmp(x)).expect("value is a level")).collect();
    let s = levels.len();
    let w = u.domain().cell_measures();
    let w_min = w.iter().copied().fold(f64::INFINITY, f64::min);
    let mut lag = Lagrangian {
        u: vals,
        w,
        levels,
        rank,
        back: alloc::vec![0; n * s],
        cost: alloc::vec![0.0; s],
        next: alloc::vec![0.0; s],
        arg: alloc::vec![0; s],
    };
    let done = |v: Vec<f64>, gap: f64, iters: usize| {
        EvarResult::from_minimizer(
            u,
            u.with_values(v),
            eps,
            LpExponent::ONE,
            gap,
            gap_tol,
            iters,
            Method::L1Lagrangian,
        )
    };

    let median = lag.median();
    if median.fid <= eps || s == 1 {
        return Ok(done(median.v, 0.0, 0));
    }
    // beyond 2 / min w moving any value costs more fidelity than it saves variation
    let mut lam_hi = 4.0 / w_min;
    let mut hi = lag.solve(lam_hi);
    while hi.fid > eps {
        lam_hi *= 2.0;
        hi = lag.solve(lam_hi);
    }
    let mut lo = median;
    let mut lam_lo = 0.0;
    let mut best_dual = hi.tv + lam_hi * (hi.fid - eps);
    let mut best: Candidate = lag.candidate(hi.v.clone());
    let mut iters = 0;
    while iters < MAX_BISECTIONS {
        if let Some(m) = lag.mix(&lo, &hi, eps) {
            if m.tv < best.tv {
                best = m;
            }
        }
        if hi.tv < best.tv {
            best = lag.candidate(hi.v.clone());
        }
        let gap = best.tv - best_dual;
        if gap <= 1e-13 * (1.0 + tv_u) {
            break;
        }
        let lam = if lam_lo == 0.0 { lam_hi * 1e-6 } else { libm::sqrt(lam_lo * lam_hi) };
        if !(lam > lam_lo && lam < lam_hi) {
            break;
        }
        iters += 1;
        let c = lag.solve(lam);
        best_dual = best_dual.max(c.tv + lam * (c.fid - eps));
        if c.fid > eps {
            lam_lo = lam;
            lo = c;
        } else {
            lam_hi = lam;
            hi = c;
        }
    }
    let gap = (best.tv - best_dual).max(0.0);
    let result = done(best.v, gap, iters);
    if gap <= gap_tol {
        Ok(result)
    } else {
        Err(Error::Nonconvergence(Box::new(result)))
    }
}
