//! Brute-force reference solvers. Independent of the taut-string and
//! primal-dual code paths; used to cross-check them.

use alloc::vec::Vec;

use crate::grid::{GridFn, LpExponent};
use crate::math::abs_pow;
use crate::{Error, Result};

use super::taut::tube;
use super::{EvarResult, Method, SolverConfig};

/// Largest 1D grid accepted by [`evar_oracle_dp`].
pub const DP_MAX_CELLS: usize = 256;
/// Cap on `lattice_len ^ cells` for [`evar_oracle_exhaustive`].
pub const EXHAUSTIVE_MAX_SPACE: f64 = 1e8;

/// `(eps, inf)`-variation by dynamic programming over the candidate values
/// `{u_j - eps, u_j + eps}`, which contain an optimal path. `O(n |S|^2)`.
pub fn evar_oracle_dp(u: &GridFn, eps: f64) -> Result<EvarResult> {
    u.ensure_1d()?;
    if !(eps > 0.0) {
        return Err(Error::NonpositiveEps);
    }
    let n = u.len();
    if n > DP_MAX_CELLS {
        return Err(Error::TooLarge { size: n as f64, cap: DP_MAX_CELLS as f64 });
    }
    let (lo, hi) = tube(u.values(), eps);
    let mut cand: Vec<f64> = lo.iter().chain(&hi).copied().collect();
    cand.sort_by(f64::total_cmp);
    cand.dedup();
    let s = cand.len();

    let mut cost = alloc::vec![f64::INFINITY; s];
    let mut parent = alloc::vec![usize::MAX; n * s];
    for (k, &c) in cand.iter().enumerate() {
        if c >= lo[0] && c <= hi[0] {
            cost[k] = 0.0;
        }
    }
    let mut next = alloc::vec![f64::INFINITY; s];
    for i in 1..n {
        for (k, &c) in cand.iter().enumerate() {
            next[k] = f64::INFINITY;
            if c < lo[i] || c > hi[i] {
                continue;
            }
            for (j, &prev) in cand.iter().enumerate() {
                let total = cost[j] + (c - prev).abs();
                if total < next[k] {
                    next[k] = total;
                    parent[i * s + k] = j;
                }
            }
        }
        core::mem::swap(&mut cost, &mut next);
    }
    let mut k = (0..s).min_by(|&a, &b| cost[a].total_cmp(&cost[b])).expect("candidate set is nonempty");
    let mut v = alloc::vec![0.0; n];
    for i in (0..n).rev() {
        v[i] = cand[k];
        if i > 0 {
            k = parent[i * s + k];
        }
    }
    Ok(EvarResult::from_minimizer(
        u,
        u.with_values(v),
        eps,
        LpExponent::INFINITY,
        0.0,
        0.0,
        0,
        Method::OracleDp,
    ))
}

/// `lo, lo + step, ...` up to `hi` (inclusive within rounding).
pub fn uniform_lattice(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidConfig("lattice needs lo <= hi and a positive step"));
    }
    let count = ((hi - lo) / step + 1e-9) as usize + 1;
    Ok((0..count).map(|k| lo + k as f64 * step).collect())
}

struct Search<'a> {
    u: &'a [f64],
    w: Vec<f64>,
    lattice: &'a [f64],
    // faces into already-assigned cells, per cell
    back: Vec<Vec<(usize, f64)>>,
    p: LpExponent,
    budget: f64,
    current: Vec<f64>,
    best: Vec<f64>,
    best_tv: f64,
}

impl Search<'_> {
    fn run(&mut self, cell: usize, tv: f64, spent: f64) {
        if cell == self.u.len() {
            if tv < self.best_tv {
                self.best_tv = tv;
                self.best.copy_from_slice(&self.current);
            }
            return;
        }
        for li in 0..self.lattice.len() {
            let val = self.lattice[li];
            let dev = (val - self.u[cell]).abs();
            let cost = if self.p.is_infinite() {
                if dev > self.budget {
                    continue;
                }
                0.0
            } else {
                let c = spent + self.w[cell] * abs_pow(dev, self.p.get());
                if c > self.budget {
                    continue;
                }
                c
            };
            let mut t = tv;
            for &(j, len) in &self.back[cell] {
                t += len * (val - self.current[j]).abs();
            }
            if t >= self.best_tv {
                continue;
            }
            self.current[cell] = val;
            self.run(cell + 1, t, cost);
        }
    }
}

/// Exact optimum of `TV(v)` over `v` with every value in `lattice` and
/// `||u - v||_p <= eps + feas_tol`, by depth-first enumeration with
/// feasibility and incumbent pruning. Works in 1D and 2D.
///
/// The lattice optimum upper-bounds the continuous one; `optimality_gap`
/// reports the Lipschitz estimate `cells * max_spacing`.
pub fn evar_oracle_exhaustive(
    u: &GridFn,
    eps: f64,
    p: LpExponent,
    lattice: &[f64],
    cfg: &SolverConfig,
) -> Result<EvarResult> {
    if !(eps > 0.0) {
        return Err(Error::NonpositiveEps);
    }
    if lattice.is_empty() || lattice.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidConfig("lattice must be nonempty and finite"));
    }
    let n = u.len();
    let size = libm::pow(lattice.len() as f64, n as f64);
    if size > EXHAUSTIVE_MAX_SPACE {
        return Err(Error::TooLarge { size, cap: EXHAUSTIVE_MAX_SPACE });
    }
    let mut back = alloc::vec![Vec::new(); n];
    for (i, j, c) in u.domain().faces() {
        back[j].push((i, c));
    }
    let budget = if p.is_infinite() { eps + cfg.feas_tol } else { abs_pow(eps + cfg.feas_tol, p.get()) };
    let mut search = Search {
        u: u.values(),
        w: u.domain().cell_measures(),
        lattice,
        back,
        p,
        budget,
        current: alloc::vec![0.0; n],
        best: alloc::vec![0.0; n],
        best_tv: f64::INFINITY,
    };
    search.run(0, 0.0, 0.0);
    if !search.best_tv.is_finite() {
        return Err(Error::InvalidConfig("lattice contains no feasible point"));
    }
    let mut sorted = lattice.to_vec();
    sorted.sort_by(f64::total_cmp);
    let spacing = sorted.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    Ok(EvarResult::from_minimizer(
        u,
        u.with_values(search.best),
        eps,
        p,
        n as f64 * spacing,
        0.0,
        0,
        Method::OracleExhaustive,
    ))
}
