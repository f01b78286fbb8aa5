//! Projections onto cell-weighted Lp balls.
//!
//! All projections are taken in the metric `<a, b>_w = sum_i w_i a_i b_i`
//! induced by the cell measures, which is the metric the primal step of the
//! solver uses. In that metric the KKT conditions decouple per cell with the
//! weights cancelling, so every case reduces to a scalar search:
//!
//! * `p = 1`: soft thresholding `sign(d) max(|d| - t, 0)` with one threshold `t`
//!   found by sorting;
//! * `p = 2`: radial scaling;
//! * `p = inf`: clamping;
//! * other `p`: `t_i + lambda p t_i^(p-1) = |d_i|` per cell (safeguarded
//!   Newton), with the multiplier `lambda` bracketed and bisected.

use alloc::vec::Vec;

use crate::grid::LpExponent;
use crate::math::{abs_pow, powf, sqrt};

/// Projects the offset `d` (from the ball center) onto
/// `{ d : (sum_i w_i |d_i|^p)^(1/p) <= radius }`, in place.
pub fn project_offset(d: &mut [f64], w: &[f64], radius: f64, p: LpExponent) {
    debug_assert_eq!(d.len(), w.len());
    if p.is_infinite() {
        for x in d.iter_mut() {
            *x = x.clamp(-radius, radius);
        }
    } else if p.get() == 1.0 {
        project_l1(d, w, radius);
    } else if p.get() == 2.0 {
        let norm = sqrt(d.iter().zip(w).map(|(x, wi)| wi * x * x).sum::<f64>());
        if norm > radius {
            let s = radius / norm;
            for x in d.iter_mut() {
                *x *= s;
            }
        }
    } else {
        project_lp(d, w, radius, p.get());
    }
}

fn project_l1(d: &mut [f64], w: &[f64], radius: f64) {
    let total: f64 = d.iter().zip(w).map(|(x, wi)| wi * x.abs()).sum();
    if total <= radius {
        return;
    }
    let mut order: Vec<usize> = (0..d.len()).collect();
    order.sort_by(|&a, &b| d[b].abs().total_cmp(&d[a].abs()));
    let mut cum_w = 0.0;
    let mut cum_wd = 0.0;
    let mut threshold = 0.0;
    for &i in &order {
        let a = d[i].abs();
        let t = (cum_wd + w[i] * a - radius) / (cum_w + w[i]);
        if a > t {
            cum_w += w[i];
            cum_wd += w[i] * a;
            threshold = t;
        } else {
            break;
        }
    }
    let threshold = threshold.max(0.0);
    for x in d.iter_mut() {
        let a = x.abs() - threshold;
        *x = if a > 0.0 { a.copysign(*x) } else { 0.0 };
    }
}

/// Root `t` in `[0, a]` of `t + c t^(p-1) = a` (`c >= 0`, `p > 1`).
fn shrink_scalar(a: f64, c: f64, p: f64) -> f64 {
    if a == 0.0 || c == 0.0 {
        return a;
    }
    let (mut lo, mut hi) = (0.0, a);
    let mut t = a;
    for _ in 0..100 {
        let f = t + c * powf(t, p - 1.0) - a;
        if f > 0.0 {
            hi = t;
        } else {
            lo = t;
        }
        if hi - lo <= 1e-15 * a {
            break;
        }
        let df = 1.0 + c * (p - 1.0) * powf(t, p - 2.0);
        let mut next = t - f / df;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        t = next;
    }
    t
}

fn project_lp(d: &mut [f64], w: &[f64], radius: f64, p: f64) {
    let target = powf(radius, p);
    let mass = |lambda: f64| -> f64 {
        d.iter().zip(w).map(|(&x, &wi)| wi * abs_pow(shrink_scalar(x.abs(), lambda * p, p), p)).sum()
    };
    if mass(0.0) <= target {
        return;
    }
    // mass is decreasing in lambda: bracket, then bisect geometrically
    let mut lo = 0.0;
    let mut hi = 1.0;
    while mass(hi) > target {
        lo = hi;
        hi *= 2.0;
        if hi > 1e300 {
            break;
        }
    }
    for _ in 0..200 {
        let mid = if lo == 0.0 { 0.5 * hi } else { sqrt(lo * hi) };
        if mass(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * hi {
            break;
        }
    }
    for x in d.iter_mut() {
        *x = shrink_scalar(x.abs(), hi * p, p).copysign(*x);
    }
    // hi is on the feasible side; clean up rounding
    let m: f64 = d.iter().zip(w).map(|(&x, &wi)| wi * abs_pow(x, p)).sum();
    if m > target {
        let s = powf(target / m, 1.0 / p);
        for x in d.iter_mut() {
            *x *= s;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{weighted_norm, Domain};
    use alloc::vec;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn wdist2(a: &[f64], b: &[f64], w: &[f64]) -> f64 {
        a.iter().zip(b).zip(w).map(|((x, y), wi)| wi * (x - y) * (x - y)).sum()
    }

    fn wnorm(d: &[f64], w: &[f64], p: f64) -> f64 {
        if p.is_infinite() {
            d.iter().fold(0.0f64, |m, x| m.max(x.abs()))
        } else {
            powf(d.iter().zip(w).map(|(x, wi)| wi * abs_pow(*x, p)).sum::<f64>(), 1.0 / p)
        }
    }

    #[test]
    fn l1_projection_hand_case() {
        // equal weights 1/2: ball sum |d|/2 <= 0.5, d = (2, 0) -> (1, 0)
        let mut d = vec![2.0, 0.0];
        project_offset(&mut d, &[0.5, 0.5], 0.5, LpExponent::ONE);
        assert_eq!(d, vec![1.0, 0.0]);
        // d = (2, 1): threshold t with (2 - t + 1 - t)/2 = 0.5 -> t = 1
        let mut d = vec![2.0, -1.0];
        project_offset(&mut d, &[0.5, 0.5], 0.5, LpExponent::ONE);
        assert_eq!(d, vec![1.0, 0.0]);
    }

    #[test]
    fn inside_points_are_fixed() {
        for p in [1.0, 1.5, 2.0, 3.0, f64::INFINITY] {
            let mut d = vec![0.01, -0.02, 0.0];
            let before = d.clone();
            project_offset(&mut d, &[1.0, 1.0, 1.0], 1.0, LpExponent::new(p).unwrap());
            assert_eq!(d, before);
        }
    }

    #[test]
    fn weighted_norm_matches_grid_norm() {
        let dom = Domain::breakpoints(vec![0.0, 0.1, 0.5, 1.5]).unwrap();
        let w = dom.cell_measures();
        let d = [0.3, -1.0, 2.0];
        for p in [1.0, 2.5, f64::INFINITY] {
            let lp = LpExponent::new(p).unwrap();
            let a = weighted_norm(&dom, d.iter().copied(), lp);
            assert!((a - wnorm(&d, &w, p)).abs() < 1e-14);
        }
    }

    // Random feasible points are never closer (in the weighted metric) than the projection.
    fn check_projection(p: f64, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..8);
        let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
        let z: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let r = rng.gen_range(0.05..1.0);
        let mut d = z.clone();
        project_offset(&mut d, &w, r, LpExponent::new(p).unwrap());
        assert!(wnorm(&d, &w, p) <= r * (1.0 + 1e-12), "p={p}");
        let best = wdist2(&d, &z, &w);
        for _ in 0..2000 {
            let mut c: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let m = wnorm(&c, &w, p);
            if m > r {
                let s = r / m * rng.gen_range(0.5..1.0);
                c.iter_mut().for_each(|x| *x *= s);
            }
            assert!(wdist2(&c, &z, &w) >= best - 1e-9, "p={p} seed={seed}");
        }
        // small perturbations of the projection that stay feasible do not improve it
        for _ in 0..500 {
            let mut c: Vec<f64> = d.iter().map(|x| x + rng.gen_range(-1e-3..1e-3)).collect();
            let m = wnorm(&c, &w, p);
            if m > r {
                c.iter_mut().for_each(|x| *x *= r / m);
            }
            assert!(wdist2(&c, &z, &w) >= best - 1e-9, "p={p} seed={seed}");
        }
    }

    #[test]
    fn projections_are_nearest_points() {
        for seed in 0..40 {
            for p in [1.0, 1.5, 2.0, 3.0, f64::INFINITY] {
                check_projection(p, seed);
            }
        }
    }

    proptest! {
        #[test]
        fn projection_is_idempotent(
            z in prop::collection::vec(-3.0f64..3.0, 1..10),
            r in 0.01f64..2.0,
            pi in 0usize..5,
        ) {
            let p = [1.0, 1.5, 2.0, 4.0, f64::INFINITY][pi];
            let w: Vec<f64> = (0..z.len()).map(|i| 0.1 + 0.05 * i as f64).collect();
            let mut once = z.clone();
            project_offset(&mut once, &w, r, LpExponent::new(p).unwrap());
            let mut twice = once.clone();
            project_offset(&mut twice, &w, r, LpExponent::new(p).unwrap());
            for (a, b) in once.iter().zip(&twice) {
                prop_assert!((a - b).abs() <= 1e-9);
            }
        }
    }
}
