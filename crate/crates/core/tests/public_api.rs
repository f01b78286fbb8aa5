use evarlab_core::compactness::{bv_extract, frankova_extract, helly_extract, ExtractionConfig};
use evarlab_core::epsvar::{evar, evar_oracle_dp, evar_profile, Method, SolverConfig};
use evarlab_core::examples::{
    build_stress_families, closed_form_variation, RadialExample, RadialExampleSpec,
};
use evarlab_core::regulated::{approx_by_steps, equivalence_abc_check};
use evarlab_core::variation::{essential_var, jump_set, pointwise_var, total_variation};
use evarlab_core::{Domain, Error, GridFn, LpExponent};

#[test]
fn variation_functionals_agree_in_1d() {
    let ex = RadialExample::new(RadialExampleSpec::aligned(25)).unwrap();
    let u = ex.u();
    let tv = total_variation(&u);
    assert!((tv - closed_form_variation(25)).abs() < 1e-12);
    assert_eq!(pointwise_var(&u).unwrap(), essential_var(&u).unwrap());
    assert_eq!(jump_set(&u, 0.0).unwrap().len(), 2 * 26);
}

#[test]
fn default_solvers_per_exponent() {
    let u = GridFn::from_fn(Domain::interval(0.0, 1.0, 40).unwrap(), |x, _| (6.0 * x).sin()).unwrap();
    let cfg = SolverConfig::default();
    let cases = [
        (LpExponent::INFINITY, Method::TautString),
        (LpExponent::ONE, Method::L1Lagrangian),
        (LpExponent::TWO, Method::PrimalDual),
    ];
    for (p, method) in cases {
        let r = evar(&u, 0.1, p, &cfg).unwrap();
        assert_eq!(r.method, method);
        assert!(r.value <= total_variation(&u));
        assert!(r.feasibility_residual <= cfg.feas_tol);
    }
    let exact = evar_oracle_dp(&u, 0.1).unwrap().value;
    assert!((evar(&u, 0.1, LpExponent::INFINITY, &cfg).unwrap().value - exact).abs() < 1e-9);
}

#[test]
fn profile_is_monotone_in_2d() {
    let spec = RadialExampleSpec {
        dim: 2,
        r0: 0.5,
        n_terms: 6,
        grid: evarlab_core::examples::RadialGrid::Sampled { resolution: 16 },
    };
    let u = RadialExample::new(spec).unwrap().u();
    let cfg = SolverConfig { max_iters: 20_000, gap_tol: 1e-4, ..SolverConfig::default() };
    let prof = evar_profile(&u, &[0.05, 0.2, 0.5], LpExponent::TWO, &cfg).unwrap();
    assert!(prof.is_monotone(), "{:?}", prof.values);
    assert!(prof.values[0] <= total_variation(&u) + 1e-9);
}

#[test]
fn steps_and_equivalence() {
    let u = GridFn::from_fn(Domain::interval(0.0, 1.0, 50).unwrap(), |x, _| x * x).unwrap();
    let s = approx_by_steps(&u, 0.05).unwrap();
    assert!(s.sup_error <= 0.05);
    assert!(equivalence_abc_check(&u, &[0.01, 0.05, 0.2]).unwrap().all_agree);
}

#[test]
fn extraction_harnesses_on_control_families() {
    let fams = build_stress_families().unwrap();
    let get = |name: &str| fams.iter().find(|f| f.name == name).unwrap().family.clone();
    let tail = get("tail");
    assert!(bv_extract(&tail, 100, 0.05).unwrap().converged);
    assert!(helly_extract(&tail, 100, None, 0.1).unwrap().converged);
    let config = ExtractionConfig::dyadic(3, LpExponent::INFINITY, 100);
    assert!(frankova_extract(&tail, &config, 0.05).unwrap().converged);
    let two = get("two-cluster");
    let rep = bv_extract(&two, 60, 0.05).unwrap();
    assert!(rep.indices.iter().all(|n| n % 2 == 1));
    assert!(matches!(
        frankova_extract(&get("sine"), &ExtractionConfig::dyadic(2, LpExponent::INFINITY, 24), 1e-3),
        Err(Error::BudgetExceeded(_))
    ));
}
