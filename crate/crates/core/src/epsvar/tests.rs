use super::*;
use crate::grid::{lp_distance, Domain};
use crate::variation::total_variation;
use alloc::sync::Arc;
use alloc::vec;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn f1(values: Vec<f64>) -> GridFn {
    let d = Domain::interval(0.0, 1.0, values.len()).unwrap();
    GridFn::new(d, values).unwrap()
}

fn step(n: usize) -> GridFn {
    GridFn::from_fn(Domain::interval(0.0, 1.0, n).unwrap(), |x, _| if x > 0.5 { 1.0 } else { 0.0 }).unwrap()
}

fn assert_attains(r: &EvarResult, u: &GridFn, feas_tol: f64) {
    assert_eq!(r.value, total_variation(&r.minimizer));
    let d = lp_distance(u, &r.minimizer, r.p).unwrap();
    assert!(d <= r.eps + feas_tol, "distance {d} > eps {}", r.eps);
    assert!(r.feasibility_residual <= feas_tol);
}

#[test]
fn taut_string_step_example() {
    let u = step(8);
    let r = evar_taut_string(&u, 0.25).unwrap();
    assert!((r.value - 0.5).abs() < 1e-12);
    assert_eq!(r.optimality_gap, 0.0);
    assert_eq!(r.feasibility_residual, 0.0);
    assert_attains(&r, &u, 0.0);
}

#[test]
fn taut_string_wide_tube_is_flat() {
    let u = f1(vec![0.3, -0.2, 0.9, 0.1]);
    let r = evar_taut_string(&u, 0.55).unwrap();
    assert_eq!(r.value, 0.0);
    // the canonical flat minimizer sits at the midrange
    assert!((r.minimizer.values()[0] - 0.35).abs() < 1e-12);
    assert_eq!(r.feasibility_residual, 0.0);
}

#[test]
fn taut_string_errors() {
    let sq = GridFn::constant(Domain::rect((0.0, 1.0), (0.0, 1.0), 2, 2).unwrap(), 0.0).unwrap();
    assert!(matches!(evar_taut_string(&sq, 0.1), Err(Error::WrongDimension { .. })));
    assert!(matches!(evar_taut_string(&step(4), 0.0), Err(Error::NonpositiveEps)));
    assert!(matches!(evar_taut_string(&step(4), -1.0), Err(Error::NonpositiveEps)));
}

#[test]
fn dp_oracle_hand_case() {
    // candidates {-0.25, 0.25, 0.75, 1.25}; best path 0.25 -> 0.75
    let r = evar_oracle_dp(&f1(vec![0.0, 1.0]), 0.25).unwrap();
    assert!((r.value - 0.5).abs() < 1e-15);
    assert_eq!(evar_oracle_dp(&f1(vec![2.0; 7]), 0.1).unwrap().value, 0.0);
    let big = f1(vec![0.0; DP_MAX_CELLS + 1]);
    assert!(matches!(evar_oracle_dp(&big, 0.1), Err(Error::TooLarge { .. })));
}

#[test]
fn dp_oracle_matches_taut_string_on_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let n = rng.gen_range(1..=64);
        let u = f1((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect());
        for eps in [0.05, 0.1, 0.3] {
            let a = evar_taut_string(&u, eps).unwrap();
            let b = evar_oracle_dp(&u, eps).unwrap();
            assert!((a.value - b.value).abs() <= 1e-9, "{} vs {}", a.value, b.value);
            assert_attains(&b, &u, 0.0);
        }
    }
}

#[test]
fn primal_dual_p1_step() {
    let u = step(8);
    let cfg = SolverConfig::default();
    let r = evar_solve(&u, 0.1, LpExponent::ONE, &cfg).unwrap();
    assert!((r.value - 0.8).abs() <= r.gap_tol + 1e-9, "value {}", r.value);
    assert!(r.optimality_gap <= r.gap_tol);
    assert_attains(&r, &u, cfg.feas_tol);
}

#[test]
fn primal_dual_tiny_eps_keeps_variation() {
    let u = f1(vec![0.0, 0.5, -0.25, 1.0, 1.0]);
    let r = evar_solve(&u, 1e-12, LpExponent::TWO, &SolverConfig::default()).unwrap();
    assert!((r.value - total_variation(&u)).abs() <= r.gap_tol + 1e-9);
}

#[test]
fn constant_input_gives_zero_for_every_method() {
    let u = f1(vec![0.7; 6]);
    let cfg = SolverConfig::default();
    for p in [1.0, 1.5, 2.0, f64::INFINITY] {
        let r = evar_solve(&u, 0.3, LpExponent::new(p).unwrap(), &cfg).unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(r.minimizer, u);
    }
    assert_eq!(evar_taut_string(&u, 0.3).unwrap().value, 0.0);
}

#[test]
fn exhaustive_step_example() {
    let u = step(6);
    let lattice = uniform_lattice(0.0, 1.0, 0.1).unwrap();
    assert_eq!(lattice.len(), 11);
    let r = evar_oracle_exhaustive(&u, 0.1, LpExponent::ONE, &lattice, &SolverConfig::default()).unwrap();
    assert!((r.value - 0.8).abs() < 1e-12, "value {}", r.value);
    assert!((r.optimality_gap - 6.0 * 0.1).abs() < 1e-9);
    let huge = evar_oracle_exhaustive(&u, 10.0, LpExponent::ONE, &lattice, &SolverConfig::default()).unwrap();
    assert_eq!(huge.value, 0.0);
}

#[test]
fn exhaustive_caps_search_space() {
    let u = step(12);
    let lattice = uniform_lattice(0.0, 1.0, 0.1).unwrap();
    let err = evar_oracle_exhaustive(&u, 0.1, LpExponent::ONE, &lattice, &SolverConfig::default());
    assert!(matches!(err, Err(Error::TooLarge { .. })));
}

#[test]
fn exhaustive_on_exact_candidates_matches_taut_string() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let n = rng.gen_range(2..=5);
        let u = f1((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect());
        let eps = 0.15;
        let taut = evar_taut_string(&u, eps).unwrap();
        let (lo, hi) = taut::tube(u.values(), eps);
        let mut lattice: Vec<f64> = lo.iter().chain(&hi).copied().collect();
        lattice.sort_by(f64::total_cmp);
        let ex = evar_oracle_exhaustive(&u, eps, LpExponent::INFINITY, &lattice, &SolverConfig::default())
            .unwrap();
        assert!((ex.value - taut.value).abs() < 1e-12);
    }
}

#[test]
fn exhaustive_2d_agrees_with_primal_dual() {
    let d = Domain::rect((0.0, 1.0), (0.0, 1.0), 3, 2).unwrap();
    let u = GridFn::new(d, vec![0.0, 0.0, 1.0, 0.0, 1.0, 1.0]).unwrap();
    let lattice = uniform_lattice(0.0, 1.0, 0.125).unwrap();
    let cfg = SolverConfig::default();
    for p in [LpExponent::ONE, LpExponent::INFINITY] {
        let ex = evar_oracle_exhaustive(&u, 0.125, p, &lattice, &cfg).unwrap();
        let pd = evar_solve(&u, 0.125, p, &cfg).unwrap();
        // lattice optimum is an upper bound for the continuous optimum
        assert!(pd.value <= ex.value + pd.gap_tol + 1e-9, "p={p}: {} vs {}", pd.value, ex.value);
        assert!(ex.value <= pd.value + ex.optimality_gap);
    }
}

#[test]
fn primal_dual_matches_taut_string_for_p_inf() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let cfg = SolverConfig::default();
    for _ in 0..10 {
        let n = rng.gen_range(2..=24);
        let u = f1((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect());
        let exact = evar_taut_string(&u, 0.1).unwrap();
        let pd = evar_solve(&u, 0.1, LpExponent::INFINITY, &cfg).unwrap();
        assert!((pd.value - exact.value).abs() <= pd.gap_tol + 1e-9);
        assert_eq!(pd.feasibility_residual, 0.0);
    }
}

#[test]
fn primal_dual_general_p_against_lattice_oracle() {
    let u = step(5);
    let lattice = uniform_lattice(-0.2, 1.2, 0.05).unwrap();
    let cfg = SolverConfig::default();
    for p in [1.5, 2.0, 3.0] {
        let p = LpExponent::new(p).unwrap();
        let pd = evar_solve(&u, 0.2, p, &cfg).unwrap();
        let ex = evar_oracle_exhaustive(&u, 0.2, p, &lattice, &cfg).unwrap();
        assert!(pd.value <= ex.value + pd.gap_tol + 1e-9);
        assert!(ex.value <= pd.value + ex.optimality_gap);
        assert_attains(&pd, &u, cfg.feas_tol);
    }
}

#[test]
fn nonconvergence_returns_feasible_partial_result() {
    let u = step(32);
    let cfg = SolverConfig { max_iters: 3, check_every: 1, ..SolverConfig::default() };
    match evar_solve(&u, 0.1, LpExponent::ONE, &cfg) {
        Err(Error::Nonconvergence(r)) => {
            assert!(r.optimality_gap > r.gap_tol);
            assert!(r.feasibility_residual <= cfg.feas_tol);
            assert_eq!(r.iterations, 3);
        }
        other => panic!("expected nonconvergence, got {other:?}"),
    }
}

#[test]
fn config_validation() {
    let bad = SolverConfig { gap_tol: 0.0, ..SolverConfig::default() };
    assert!(matches!(evar_solve(&step(4), 0.1, LpExponent::ONE, &bad), Err(Error::InvalidConfig(_))));
    assert!(matches!(
        evar_solve(&step(4), 0.0, LpExponent::ONE, &SolverConfig::default()),
        Err(Error::NonpositiveEps)
    ));
}

#[test]
fn profile_examples() {
    let u = step(8);
    let cfg = SolverConfig::default();
    let prof = evar_profile(&u, &[0.1, 0.2], LpExponent::INFINITY, &cfg).unwrap();
    assert!(prof.is_monotone());
    assert!(prof.values[1] <= prof.values[0]);
    assert!(prof.values.iter().all(|&v| v <= total_variation(&u)));
    let prof1 = evar_profile(&u, &[0.1, 0.2], LpExponent::ONE, &cfg).unwrap();
    assert!(prof1.values[1] <= prof1.values[0] + 2.0 * 1e-6 * 2.0);
    let c = f1(vec![1.0; 5]);
    let pc = evar_profile(&c, &[0.01, 0.1, 1.0], LpExponent::TWO, &cfg).unwrap();
    assert!(pc.values.iter().all(|&v| v == 0.0));
    assert!(evar_profile(&u, &[0.2, 0.1], LpExponent::ONE, &cfg).is_err());
    assert!(evar_profile(&u, &[0.0, 0.1], LpExponent::ONE, &cfg).is_err());
}

#[test]
fn profile_reports_rather_than_repairs() {
    let u = step(8);
    let mut a = evar_taut_string(&u, 0.1).unwrap();
    let b = evar_taut_string(&u, 0.2).unwrap();
    a.value = 0.0;
    let prof = profile_from_results(LpExponent::INFINITY, &[a, b.clone()]);
    assert_eq!(prof.violations.len(), 1);
    assert_eq!(prof.values[1], b.value);
}

#[test]
fn right_continuity_examples() {
    let u = step(8);
    let cfg = SolverConfig::default();
    let deltas = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-7];
    let r = right_continuity_check(&u, 0.2, LpExponent::INFINITY, &deltas, 1e-6, &cfg).unwrap();
    assert!(r.pass, "{r:?}");
    let c = f1(vec![0.5; 4]);
    let rc = right_continuity_check(&c, 0.2, LpExponent::INFINITY, &deltas, 0.0, &cfg).unwrap();
    assert!(rc.values.iter().all(|&v| v == 0.0) && rc.limit_gap == 0.0 && rc.pass);
    let r1 = right_continuity_check(&u, 0.1, LpExponent::ONE, &deltas, 1e-3, &cfg).unwrap();
    assert!(r1.pass, "{r1:?}");
    assert!(r1.limit_gap <= 2.0 * 1e-6 * 2.0 + 2e-6);
    assert!(right_continuity_check(&u, 0.1, LpExponent::TWO, &deltas, 1e-3, &cfg).is_err());
}

fn random_u() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, 1..48)
}

proptest! {
    #[test]
    fn taut_monotone_and_dominated(v in random_u(), e0 in 0.01f64..0.5, de in 0.0f64..0.5) {
        let u = f1(v);
        let a = evar_taut_string(&u, e0).unwrap();
        let b = evar_taut_string(&u, e0 + de + 1e-9).unwrap();
        prop_assert!(b.value <= a.value);
        prop_assert!(a.value <= total_variation(&u));
        prop_assert_eq!(a.feasibility_residual, 0.0);
        prop_assert_eq!(a.value, total_variation(&a.minimizer));
    }

    #[test]
    fn taut_flat_beyond_half_range(v in random_u(), extra in 0.0f64..1.0) {
        let u = f1(v);
        let eps = (u.max() - u.min()) / 2.0 + extra + 1e-12;
        prop_assert_eq!(evar_taut_string(&u, eps).unwrap().value, 0.0);
    }

    #[test]
    fn taut_equivariance_dyadic(v in prop::collection::vec(-32i32..32, 1..30), c in -4i32..4, s in 1i32..4) {
        // dyadic data keep every operation exact
        let u = f1(v.iter().map(|&x| x as f64 / 16.0).collect());
        let eps = 0.125;
        let base = evar_taut_string(&u, eps).unwrap().value;
        let shifted = evar_taut_string(&u.map(|x| x + c as f64).unwrap(), eps).unwrap().value;
        prop_assert_eq!(base, shifted);
        let a = -(s as f64);
        let scaled = evar_taut_string(&u.map(|x| a * x).unwrap(), a.abs() * eps).unwrap().value;
        prop_assert_eq!(scaled, a.abs() * base);
    }

    #[test]
    fn taut_equivariance_general(v in random_u(), c in -3.0f64..3.0, a in 0.2f64..3.0) {
        let u = f1(v);
        let base = evar_taut_string(&u, 0.1).unwrap().value;
        let shifted = evar_taut_string(&u.map(|x| x + c).unwrap(), 0.1).unwrap().value;
        prop_assert!((base - shifted).abs() <= 1e-12 * (1.0 + base));
        let scaled = evar_taut_string(&u.map(|x| -a * x).unwrap(), a * 0.1).unwrap().value;
        prop_assert!((scaled - a * base).abs() <= 1e-12 * (1.0 + a * base));
    }
}

#[test]
fn primal_dual_properties_on_random_inputs() {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    let cfg = SolverConfig::default();
    let dom = Arc::new(Domain::interval(0.0, 2.0, 12).unwrap());
    for _ in 0..6 {
        let u = GridFn::new(dom.clone(), (0..12).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
        let tv = total_variation(&u);
        for p in [LpExponent::ONE, LpExponent::TWO] {
            let a = evar_solve(&u, 0.05, p, &cfg).unwrap();
            let b = evar_solve(&u, 0.2, p, &cfg).unwrap();
            assert_attains(&a, &u, cfg.feas_tol);
            assert!(b.value <= a.value + 2.0 * a.gap_tol.max(b.gap_tol));
            assert!(a.value <= tv + a.gap_tol);
            // translation and scaling
            let t = evar_solve(&u.map(|x| x + 0.75).unwrap(), 0.05, p, &cfg).unwrap();
            assert!((t.value - a.value).abs() <= 2.0 * a.gap_tol.max(t.gap_tol));
            let s = evar_solve(&u.map(|x| 2.0 * x).unwrap(), 0.1, p, &cfg).unwrap();
            assert!((s.value - 2.0 * a.value).abs() <= 2.0 * s.gap_tol.max(2.0 * a.gap_tol));
        }
        // p-ordering: ||.||_1 <= |Omega|^(1 - 1/2) ||.||_2
        let eps = 0.1;
        let c = libm::sqrt(dom.measure());
        let v2 = evar_solve(&u, eps, LpExponent::TWO, &cfg).unwrap();
        let v1 = evar_solve(&u, c * eps, LpExponent::ONE, &cfg).unwrap();
        assert!(v1.value <= v2.value + 2.0 * v1.gap_tol.max(v2.gap_tol));
        let vinf = evar_taut_string(&u, eps).unwrap();
        let v2b = evar_solve(&u, libm::sqrt(dom.measure()) * eps, LpExponent::TWO, &cfg).unwrap();
        assert!(v2b.value <= vinf.value + 2.0 * v2b.gap_tol);
    }
}

#[test]
fn l1_lagrangian_step_values() {
    let cfg = SolverConfig::default();
    for (eps, expect) in [(0.1, 0.8), (0.25, 0.5), (0.5, 0.0), (0.7, 0.0)] {
        let r = evar_l1_lagrangian(&step(8), eps, &cfg).unwrap();
        assert!((r.value - expect).abs() < 1e-12, "eps {eps}: {}", r.value);
        assert!(r.optimality_gap <= 1e-12);
        assert_attains(&r, &step(8), 1e-15);
    }
}

#[test]
fn l1_lagrangian_against_lattice_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let cfg = SolverConfig::default();
    let lattice = uniform_lattice(-1.0, 1.0, 0.1).unwrap();
    for _ in 0..20 {
        let u = f1((0..5).map(|_| rng.gen_range(-10..=10) as f64 / 10.0).collect());
        for eps in [0.05, 0.15, 0.3] {
            let lag = evar_l1_lagrangian(&u, eps, &cfg).unwrap();
            let ex = evar_oracle_exhaustive(&u, eps, LpExponent::ONE, &lattice, &cfg).unwrap();
            assert!(lag.value <= ex.value + 1e-12, "{} > {}", lag.value, ex.value);
            assert!(ex.value <= lag.value + ex.optimality_gap);
            assert_attains(&lag, &u, 1e-15);
        }
    }
}

#[test]
fn l1_lagrangian_matches_primal_dual_on_nonuniform_grids() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let cfg = SolverConfig::default();
    for _ in 0..10 {
        let n = rng.gen_range(2..=20);
        let mut edges = vec![0.0];
        for _ in 0..n {
            let last = *edges.last().unwrap();
            edges.push(last + rng.gen_range(0.01..0.2));
        }
        let d = Arc::new(Domain::breakpoints(edges).unwrap());
        let u = GridFn::new(d, (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
        for eps in [0.02, 0.1] {
            let lag = evar_l1_lagrangian(&u, eps, &cfg).unwrap();
            let pd = evar_solve(&u, eps, LpExponent::ONE, &cfg).unwrap();
            assert!((lag.value - pd.value).abs() <= pd.gap_tol + 1e-9, "{} vs {}", lag.value, pd.value);
            assert!(lag.value <= pd.value + 1e-9);
        }
    }
}

#[test]
fn evar_dispatches_p1_in_1d() {
    let cfg = SolverConfig::default();
    assert_eq!(evar(&step(8), 0.1, LpExponent::ONE, &cfg).unwrap().method, Method::L1Lagrangian);
    assert_eq!(evar(&step(8), 0.1, LpExponent::TWO, &cfg).unwrap().method, Method::PrimalDual);
}
