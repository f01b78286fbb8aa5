//! Sequence-level machinery on finite index budgets: uniform
//! `(eps, p)`-variation bounds, pointwise (Helly) and L1 (BV) subsequence
//! extraction, the diagonal extraction over a decreasing `eps` schedule, and
//! lower-semicontinuity checks.
//!
//! Infinite sequences are modelled by deterministic generators plus an index
//! budget `n_max`. Failing to extract within the budget is reported as
//! [`Error::BudgetExceeded`] with the partial report attached.
//!
//! Selection is greedy clustering: the first function seeds cluster 1, each
//! later one joins the nearest existing seed within the cluster radius or
//! seeds a new cluster, and the largest cluster wins (ties go to the lowest
//! seed index).

use alloc::boxed::Box;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::epsvar::{evar, evar_lenient, SolverConfig};
use crate::grid::{embedding_constant, lp_distance, Domain, GridFn, LpExponent};
use crate::variation::{pointwise_var, total_variation};
use crate::{Error, Result};

/// Smallest selected tail that counts as a converged subsequence.
pub const MIN_TAIL: usize = 3;
/// Relative growth of a running supremum over the second half of the budget
/// above which a quantity is flagged as growing.
pub const GROWTH_RTOL: f64 = 0.05;

type Generator = dyn Fn(usize) -> GridFn + Send + Sync;

/// Deterministic sequence `n -> u_n` (`n >= 1`) on one fixed domain.
#[derive(Clone)]
pub struct FnFamily {
    domain: Arc<Domain>,
    generator: Arc<Generator>,
    len: Option<usize>,
    description: String,
    known_limit: Option<GridFn>,
}

impl fmt::Debug for FnFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnFamily")
            .field("description", &self.description)
            .field("len", &self.len)
            .field("has_known_limit", &self.known_limit.is_some())
            .finish()
    }
}

impl FnFamily {
    pub fn new(
        domain: impl Into<Arc<Domain>>,
        description: impl Into<String>,
        generator: impl Fn(usize) -> GridFn + Send + Sync + 'static,
    ) -> Self {
        FnFamily {
            domain: domain.into(),
            generator: Arc::new(generator),
            len: None,
            description: description.into(),
            known_limit: None,
        }
    }

    /// Finite family `u_1, ..., u_m` from explicit members.
    pub fn from_members(members: Vec<GridFn>, description: impl Into<String>) -> Result<Self> {
        let first = members.first().ok_or(Error::InvalidConfig("family has no members"))?;
        let domain = first.shared_domain().clone();
        if members.iter().any(|m| !m.is_compatible(first)) {
            return Err(Error::IncompatibleDomains);
        }
        let len = members.len();
        let members = Arc::new(members);
        let mut fam = FnFamily::new(domain, description, move |n| members[n - 1].clone());
        fam.len = Some(len);
        Ok(fam)
    }

    pub fn with_known_limit(mut self, limit: GridFn) -> Result<Self> {
        if limit.domain() != &*self.domain {
            return Err(Error::IncompatibleDomains);
        }
        self.known_limit = Some(limit);
        Ok(self)
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn known_limit(&self) -> Option<&GridFn> {
        self.known_limit.as_ref()
    }

    /// Number of members, `None` for unbounded generators.
    pub fn len(&self) -> Option<usize> {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == Some(0)
    }

    /// Member `n` (1-based).
    pub fn get(&self, n: usize) -> Result<GridFn> {
        if n == 0 || self.len.is_some_and(|l| n > l) {
            return Err(Error::InvalidConfig("family index out of range"));
        }
        let u = (self.generator)(n);
        if u.domain() != &*self.domain {
            return Err(Error::IncompatibleDomains);
        }
        Ok(u)
    }

    /// Index budget actually available: `min(n_max, len)`.
    pub fn budget(&self, n_max: usize) -> usize {
        self.len.map_or(n_max, |l| l.min(n_max))
    }

    pub fn members(&self, n_max: usize) -> Result<Vec<GridFn>> {
        (1..=self.budget(n_max)).map(|n| self.get(n)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Trend {
    Bounded,
    Growing,
}

impl Trend {
    pub fn as_str(self) -> &'static str {
        match self {
            Trend::Bounded => "bounded",
            Trend::Growing => "growing",
        }
    }
}

/// Compares the running supremum at the end of the sequence with the one at
/// its midpoint.
pub fn growth_trend(values: &[f64], slack: f64) -> Trend {
    if values.len() < 2 {
        return Trend::Bounded;
    }
    let half = values.len() / 2;
    let sup_half = values[..half].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sup_all = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if sup_all - sup_half > GROWTH_RTOL * sup_all.abs() + slack {
        Trend::Growing
    } else {
        Trend::Bounded
    }
}

/// Least-squares slope of `values` against their index.
fn ls_slope(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    if values.len() < 2 {
        return 0.0;
    }
    let mx = (n - 1.0) / 2.0;
    let my = values.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (i, y) in values.iter().enumerate() {
        let dx = i as f64 - mx;
        sxy += dx * (y - my);
        sxx += dx * dx;
    }
    sxy / sxx
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct UniformRow {
    pub eps: f64,
    pub sup_evar: f64,
    /// Index `n` attaining the supremum.
    pub argsup: usize,
    /// `(eps, p)`-Var u_n for `n = 1..=budget`.
    pub values: Vec<f64>,
    /// Largest absolute gap target among the solves.
    pub gap_tol: f64,
    /// Least-squares slope over the second half of the budget.
    pub slope: f64,
    pub trend: Trend,
    /// Solves that hit the iteration limit (their values are still upper bounds).
    pub unconverged: usize,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct UniformReport {
    pub p: LpExponent,
    pub n_max: usize,
    pub rows: Vec<UniformRow>,
}

/// Empirical `sup_{n <= n_max} (eps, p)`-Var u_n per `eps`, with a growth
/// diagnostic separating bounded from growing behaviour.
pub fn uniform_evar_check(
    fam: &FnFamily,
    eps_list: &[f64],
    p: LpExponent,
    n_max: usize,
    cfg: &SolverConfig,
) -> Result<UniformReport> {
    let members = fam.members(n_max)?;
    let mut rows = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        if !(eps > 0.0) {
            return Err(Error::NonpositiveEps);
        }
        let mut values = Vec::with_capacity(members.len());
        let mut gap_tol: f64 = 0.0;
        let mut unconverged = 0;
        for u in &members {
            let (r, ok) = evar_lenient(u, eps, p, cfg).map_err(|e| e.at_eps(eps))?;
            gap_tol = gap_tol.max(r.gap_tol).max(r.optimality_gap);
            unconverged += usize::from(!ok);
            values.push(r.value);
        }
        rows.push(uniform_row(eps, values, gap_tol, unconverged));
    }
    Ok(UniformReport { p, n_max: members.len(), rows })
}

/// Summarizes precomputed values `(eps, p)`-Var u_n, `n = 1..`.
pub fn uniform_row(eps: f64, values: Vec<f64>, gap_tol: f64, unconverged: usize) -> UniformRow {
    let (argsup, sup_evar) = values
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, v)| if v > best.1 { (i, v) } else { best });
    let half = values.len() / 2;
    UniformRow {
        eps,
        sup_evar: sup_evar.max(0.0),
        argsup: argsup + 1,
        slope: ls_slope(&values[half..]),
        trend: growth_trend(&values, 2.0 * gap_tol),
        values,
        gap_tol,
        unconverged,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ExtractionMethod {
    Helly,
    Bv,
    Diagonal,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum Warning {
    /// Sup norms keep growing over the budget.
    UnboundedNorm,
    /// Variations (or L1 norm plus variation) keep growing over the budget.
    UnboundedVariation,
    /// Approximant variations at this `eps` keep growing over the budget.
    UnboundedTrend { eps: f64 },
    /// Observed distance between consecutive level limits exceeds its estimate.
    CauchyChainViolated { level: usize, observed: f64, bound: f64 },
    /// An approximant solve stopped at the iteration limit.
    SolverGap { eps: f64, index: usize, gap: f64 },
}

/// Per-level record of the extraction. The raw (unapproximated) level has `eps = 0`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct LevelDiagnostic {
    pub eps: f64,
    /// Largest variation among the level's functions (the observed `K_eps`).
    pub k_bound: f64,
    pub cluster_radius: f64,
    /// Largest pairwise distance inside the selected cluster.
    pub cluster_diameter: f64,
    pub candidates: usize,
    pub selected: usize,
    /// Index `n` whose function stands for the level limit.
    pub limit_index: usize,
    /// L1 distance to the previous level limit.
    pub limit_step: Option<f64>,
    /// Estimate `C (eps_l + eps_prev) + 2 radius_prev` for `limit_step`.
    pub cauchy_bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct VariationCheck {
    pub limit_variation: f64,
    pub min_observed: f64,
    /// `limit_variation <= min_observed + tol`.
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ExtractionReport {
    pub method: ExtractionMethod,
    /// Selected subsequence `n(k)`, strictly increasing.
    pub indices: Vec<usize>,
    /// `indices[tail_start..]` lie in the final cluster.
    pub tail_start: usize,
    pub limit_candidate: GridFn,
    pub limit_index: usize,
    pub per_level: Vec<LevelDiagnostic>,
    pub converged: bool,
    /// `||u_{n(k)} - limit_candidate||_1` along `indices`.
    pub l1_trace: Vec<f64>,
    pub tol: f64,
    pub variation_check: Option<VariationCheck>,
    pub warnings: Vec<Warning>,
}

impl ExtractionReport {
    /// Largest L1 distance to the limit over the tail.
    pub fn tail_l1(&self) -> f64 {
        self.l1_trace[self.tail_start..].iter().copied().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone)]
struct Cluster {
    seed: usize,
    members: Vec<usize>,
}

/// Greedy clustering of items `0..count` in order.
fn greedy_clusters(count: usize, radius: f64, dist: impl Fn(usize, usize) -> f64) -> Vec<Cluster> {
    let mut clusters: Vec<Cluster> = Vec::new();
    for item in 0..count {
        let mut nearest: Option<(usize, f64)> = None;
        for (c, cl) in clusters.iter().enumerate() {
            let d = dist(cl.seed, item);
            if d <= radius && nearest.is_none_or(|(_, best)| d < best) {
                nearest = Some((c, d));
            }
        }
        match nearest {
            Some((c, _)) => clusters[c].members.push(item),
            None => clusters.push(Cluster { seed: item, members: alloc::vec![item] }),
        }
    }
    clusters
}

/// Largest cluster; clusters are created in seed order, so the first maximum
/// has the lowest seed.
fn largest(clusters: Vec<Cluster>) -> Cluster {
    let mut best: Option<Cluster> = None;
    for c in clusters {
        if best.as_ref().is_none_or(|b| c.members.len() > b.members.len()) {
            best = Some(c);
        }
    }
    best.expect("at least one cluster")
}

fn diameter(members: &[usize], dist: impl Fn(usize, usize) -> f64) -> f64 {
    let mut d: f64 = 0.0;
    for (a, &i) in members.iter().enumerate() {
        for &j in &members[a + 1..] {
            d = d.max(dist(i, j));
        }
    }
    d
}

fn l1(a: &GridFn, b: &GridFn) -> f64 {
    lp_distance(a, b, LpExponent::ONE).expect("family members share a domain")
}

fn finish(report: ExtractionReport) -> Result<ExtractionReport> {
    if report.converged {
        Ok(report)
    } else {
        Err(Error::BudgetExceeded(Box::new(report)))
    }
}

fn check_tol(tol: f64, n: usize) -> Result<()> {
    if !(tol > 0.0) {
        return Err(Error::InvalidConfig("tolerance must be positive"));
    }
    if n == 0 {
        return Err(Error::InvalidConfig("index budget must be positive"));
    }
    Ok(())
}

/// Pointwise selection: for each probe cell in turn, cluster the current
/// subsequence by the value at that cell (radius `tol / 2`) and keep the
/// largest cluster. The limit candidate is the last selected function, so
/// every selected function is within `tol` of it at every probe cell.
pub fn helly_extract(
    fam: &FnFamily,
    n_max: usize,
    probe_cells: Option<&[usize]>,
    tol: f64,
) -> Result<ExtractionReport> {
    if fam.domain().dim() != 1 {
        return Err(Error::WrongDimension { expected: 1, found: fam.domain().dim() });
    }
    let members = fam.members(n_max)?;
    check_tol(tol, members.len())?;
    let all_cells: Vec<usize> = (0..fam.domain().n_cells()).collect();
    let probes = probe_cells.unwrap_or(&all_cells);
    if probes.iter().any(|&c| c >= all_cells.len()) {
        return Err(Error::InvalidConfig("probe cell out of range"));
    }

    let mut warnings = Vec::new();
    let sups: Vec<f64> = members.iter().map(|u| u.max().abs().max(u.min().abs())).collect();
    if growth_trend(&sups, 0.0) == Trend::Growing {
        warnings.push(Warning::UnboundedNorm);
    }
    let vars: Vec<f64> = members.iter().map(pointwise_var).collect::<Result<_>>()?;
    if growth_trend(&vars, 0.0) == Trend::Growing {
        warnings.push(Warning::UnboundedVariation);
    }

    let mut current: Vec<usize> = (0..members.len()).collect();
    for &cell in probes {
        let vals: Vec<f64> = current.iter().map(|&i| members[i].values()[cell]).collect();
        let chosen = largest(greedy_clusters(current.len(), tol / 2.0, |a, b| (vals[a] - vals[b]).abs()));
        current = chosen.members.iter().map(|&k| current[k]).collect();
    }
    let limit_pos = *current.last().expect("clusters are nonempty");
    let limit = members[limit_pos].clone();
    let cluster_diameter = diameter(&current, |i, j| {
        probes.iter().fold(0.0f64, |m, &c| m.max((members[i].values()[c] - members[j].values()[c]).abs()))
    });
    let min_observed = current.iter().map(|&i| vars[i]).fold(f64::INFINITY, f64::min);
    let limit_variation = pointwise_var(&limit)?;
    let report = ExtractionReport {
        method: ExtractionMethod::Helly,
        indices: current.iter().map(|i| i + 1).collect(),
        tail_start: 0,
        l1_trace: current.iter().map(|&i| l1(&members[i], &limit)).collect(),
        limit_index: limit_pos + 1,
        limit_candidate: limit,
        per_level: alloc::vec![LevelDiagnostic {
            eps: 0.0,
            k_bound: vars.iter().copied().fold(0.0, f64::max),
            cluster_radius: tol / 2.0,
            cluster_diameter,
            candidates: members.len(),
            selected: current.len(),
            limit_index: limit_pos + 1,
            limit_step: None,
            cauchy_bound: None,
        }],
        converged: current.len() >= MIN_TAIL,
        tol,
        variation_check: Some(VariationCheck {
            limit_variation,
            min_observed,
            holds: limit_variation <= min_observed + tol,
        }),
        warnings,
    };
    finish(report)
}

/// L1 selection: greedy clustering of `u_1..u_budget` in L1 with radius
/// `tol / 2`; the limit candidate is the last member of the largest cluster.
pub fn bv_extract(fam: &FnFamily, n_max: usize, tol: f64) -> Result<ExtractionReport> {
    let members = fam.members(n_max)?;
    check_tol(tol, members.len())?;
    let tvs: Vec<f64> = members.iter().map(total_variation).collect();
    let mut warnings = Vec::new();
    let bv_norms: Vec<f64> =
        members.iter().zip(&tvs).map(|(u, tv)| u.lp_norm(LpExponent::ONE) + tv).collect();
    if growth_trend(&bv_norms, 0.0) == Trend::Growing {
        warnings.push(Warning::UnboundedVariation);
    }
    let all: Vec<usize> = (0..members.len()).collect();
    let (level, selected) = select_level(&members, &all, 0.0, tol / 2.0, &tvs);
    let limit_pos = *selected.last().expect("clusters are nonempty");
    let limit = members[limit_pos].clone();
    let min_observed = selected.iter().map(|&i| tvs[i]).fold(f64::INFINITY, f64::min);
    let limit_variation = tvs[limit_pos];
    let report = ExtractionReport {
        method: ExtractionMethod::Bv,
        indices: selected.iter().map(|i| i + 1).collect(),
        tail_start: 0,
        l1_trace: selected.iter().map(|&i| l1(&members[i], &limit)).collect(),
        limit_index: limit_pos + 1,
        limit_candidate: limit,
        per_level: alloc::vec![level],
        converged: selected.len() >= MIN_TAIL,
        tol,
        variation_check: Some(VariationCheck {
            limit_variation,
            min_observed,
            holds: limit_variation <= min_observed + tol,
        }),
        warnings,
    };
    finish(report)
}

/// Clusters `funcs[candidates]` in L1 and returns the level record and the
/// selected positions (into `funcs`), in increasing order.
fn select_level(
    funcs: &[GridFn],
    candidates: &[usize],
    eps: f64,
    radius: f64,
    tvs: &[f64],
) -> (LevelDiagnostic, Vec<usize>) {
    let chosen = largest(greedy_clusters(candidates.len(), radius, |a, b| {
        l1(&funcs[candidates[a]], &funcs[candidates[b]])
    }));
    let selected: Vec<usize> = chosen.members.iter().map(|&k| candidates[k]).collect();
    let limit_pos = *selected.last().expect("clusters are nonempty");
    let level = LevelDiagnostic {
        eps,
        k_bound: candidates.iter().map(|&i| tvs[i]).fold(0.0, f64::max),
        cluster_radius: radius,
        cluster_diameter: diameter(&selected, |i, j| l1(&funcs[i], &funcs[j])),
        candidates: candidates.len(),
        selected: selected.len(),
        limit_index: limit_pos + 1,
        limit_step: None,
        cauchy_bound: None,
    };
    (level, selected)
}

/// Parameters of the diagonal extraction.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ExtractionConfig {
    /// Strictly decreasing positive `eps_l`.
    pub eps_schedule: Vec<f64>,
    pub p: LpExponent,
    pub n_max: usize,
    /// Level cluster radius is `cluster_scale * C(Omega, p) * eps_l`.
    pub cluster_scale: f64,
    pub solver: SolverConfig,
}

impl ExtractionConfig {
    pub fn new(eps_schedule: Vec<f64>, p: LpExponent, n_max: usize) -> Self {
        ExtractionConfig { eps_schedule, p, n_max, cluster_scale: 1.0, solver: SolverConfig::default() }
    }

    /// `eps_l = 2^-l` for `l = 1..=levels`.
    pub fn dyadic(levels: usize, p: LpExponent, n_max: usize) -> Self {
        let schedule = (1..=levels as i32).map(|l| libm::ldexp(1.0, -l)).collect();
        ExtractionConfig::new(schedule, p, n_max)
    }

    pub fn validate(&self) -> Result<()> {
        if self.eps_schedule.is_empty() || self.eps_schedule.iter().any(|e| !(*e > 0.0)) {
            return Err(Error::InvalidConfig("eps schedule must be nonempty and positive"));
        }
        if self.eps_schedule.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::InvalidConfig("eps schedule must be strictly decreasing"));
        }
        if self.n_max == 0 || !(self.cluster_scale > 0.0) {
            return Err(Error::InvalidConfig("budgets must be positive"));
        }
        self.solver.validate()
    }
}

/// Diagonal extraction over a decreasing `eps` schedule.
///
/// Level `l` replaces every `u_n` of the previous level's subsequence by an
/// `(eps_l, p)`-variation minimizer `v_n` (so `||u_n - v_n||_p <= eps_l` and
/// `TV(v_n)` is as small as possible), clusters the `v_n` in L1 with radius
/// `C eps_l`, and keeps the largest cluster, which nests the subsequences. A
/// final level clusters the raw `u_n` with radius `tol / 2`. The returned
/// indices are the diagonal `n(k) = S_k(k)` over all levels followed by the
/// rest of the final subsequence; the limit candidate is the last function of
/// the final cluster.
pub fn frankova_extract(fam: &FnFamily, config: &ExtractionConfig, tol: f64) -> Result<ExtractionReport> {
    config.validate()?;
    let members = fam.members(config.n_max)?;
    check_tol(tol, members.len())?;
    let c = embedding_constant(fam.domain(), config.p);
    let mut warnings = Vec::new();

    let mut subseq: Vec<usize> = (0..members.len()).collect();
    let mut levels: Vec<Vec<usize>> = Vec::new();
    let mut per_level = Vec::new();
    let mut prev: Option<(GridFn, f64, f64)> = None; // (level limit, eps, radius)

    for &eps in &config.eps_schedule {
        // positions outside the current subsequence keep the raw function and are never read
        let mut approx = members.clone();
        let mut tvs = alloc::vec![0.0; members.len()];
        for &i in &subseq {
            let (r, ok) =
                evar_lenient(&members[i], eps, config.p, &config.solver).map_err(|e| e.at_eps(eps))?;
            if !ok {
                warnings.push(Warning::SolverGap { eps, index: i + 1, gap: r.optimality_gap });
            }
            tvs[i] = r.value;
            approx[i] = r.minimizer;
        }
        let trend_values: Vec<f64> = subseq.iter().map(|&i| tvs[i]).collect();
        if growth_trend(&trend_values, 0.0) == Trend::Growing {
            warnings.push(Warning::UnboundedTrend { eps });
        }
        let radius = config.cluster_scale * c * eps;
        let (mut level, selected) = select_level(&approx, &subseq, eps, radius, &tvs);
        let limit_pos = *selected.last().expect("clusters are nonempty");
        let level_limit = approx[limit_pos].clone();
        if let Some((prev_limit, prev_eps, prev_radius)) = &prev {
            let step = l1(&level_limit, prev_limit);
            let bound = c * (eps + prev_eps + 2.0 * config.solver.feas_tol) + 2.0 * prev_radius;
            level.limit_step = Some(step);
            level.cauchy_bound = Some(bound);
            if step > bound {
                warnings.push(Warning::CauchyChainViolated {
                    level: per_level.len() + 1,
                    observed: step,
                    bound,
                });
            }
        }
        per_level.push(level);
        prev = Some((level_limit, eps, radius));
        subseq = selected.clone();
        levels.push(selected);
    }

    // raw level: eps = 0, v_n = u_n
    let tvs: Vec<f64> = members.iter().map(total_variation).collect();
    let (mut level, selected) = select_level(&members, &subseq, 0.0, tol / 2.0, &tvs);
    let limit_pos = *selected.last().expect("clusters are nonempty");
    let limit = members[limit_pos].clone();
    if let Some((prev_limit, prev_eps, prev_radius)) = &prev {
        level.limit_step = Some(l1(&limit, prev_limit));
        level.cauchy_bound = Some(c * (prev_eps + config.solver.feas_tol) + 2.0 * prev_radius);
    }
    per_level.push(level);
    levels.push(selected);

    let depth = levels.len();
    let last = &levels[depth - 1];
    let diagonal_ok = levels.iter().enumerate().all(|(k, s)| s.len() > k);
    let (positions, tail_start) = if diagonal_ok {
        let mut pos: Vec<usize> = levels.iter().enumerate().map(|(k, s)| s[k]).collect();
        pos.extend_from_slice(&last[depth..]);
        (pos, depth - 1)
    } else {
        (last.clone(), 0)
    };
    let tail_len = positions.len() - tail_start;
    let l1_trace: Vec<f64> = positions.iter().map(|&i| l1(&members[i], &limit)).collect();
    let converged = diagonal_ok && tail_len >= MIN_TAIL && l1_trace[tail_start..].iter().all(|&d| d <= tol);
    let report = ExtractionReport {
        method: ExtractionMethod::Diagonal,
        indices: positions.iter().map(|i| i + 1).collect(),
        tail_start,
        limit_candidate: limit,
        limit_index: limit_pos + 1,
        per_level,
        converged,
        l1_trace,
        tol,
        variation_check: None,
        warnings,
    };
    finish(report)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct LscRow {
    /// Tail start `N`.
    pub n_from: usize,
    /// `min_{n >= N} (eps, p)`-Var u_n.
    pub tail_min: f64,
    /// `max_{n >= N} ||u_n - u||_p`.
    pub delta: f64,
    /// `2 gap_tol + (eps, p)-Var u - (eps + delta, p)-Var u`.
    pub slack: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct LscReport {
    pub eps: f64,
    pub p: LpExponent,
    /// `(eps, p)`-Var of the known limit.
    pub limit_value: f64,
    /// `max_n (eps, p)`-Var u_n over the budget.
    pub sup_evar: f64,
    pub rows: Vec<LscRow>,
    /// `||u_n - u||_1` decreases to a value below its start.
    pub l1_converging: bool,
    /// Slack at the longest tail start.
    pub final_slack: f64,
    pub pass: bool,
}

/// Checks `(eps, p)`-Var u <= min_{n >= N} (eps, p)-Var u_n + slack for
/// growing `N`, where `u` is the family's known limit. The slack is twice the
/// solver gap plus the right-continuity margin at the tail distance: any
/// competitor for `u_n` is feasible for `u` at `eps + ||u_n - u||_p`.
pub fn lsc_check(
    fam: &FnFamily,
    eps: f64,
    p: LpExponent,
    n_max: usize,
    cfg: &SolverConfig,
) -> Result<LscReport> {
    let limit = fam.known_limit().ok_or(Error::NoKnownLimit)?;
    if !(p.is_infinite() || p.get() == 1.0) {
        return Err(Error::InvalidConfig("lower semicontinuity is checked for p = 1 and p = inf"));
    }
    if !(eps > 0.0) {
        return Err(Error::NonpositiveEps);
    }
    let members = fam.members(n_max)?;
    let budget = members.len();
    if budget == 0 {
        return Err(Error::InvalidConfig("index budget must be positive"));
    }
    let base = evar(limit, eps, p, cfg).map_err(|e| e.at_eps(eps))?;
    let mut values = Vec::with_capacity(budget);
    let mut gap_tol = base.gap_tol.max(base.optimality_gap);
    for u in &members {
        let (r, _) = evar_lenient(u, eps, p, cfg).map_err(|e| e.at_eps(eps))?;
        gap_tol = gap_tol.max(r.gap_tol).max(r.optimality_gap);
        values.push(r.value);
    }
    let dist_p: Vec<f64> = members.iter().map(|u| lp_distance(u, limit, p)).collect::<Result<_>>()?;
    let dist_1: Vec<f64> = members.iter().map(|u| l1(u, limit)).collect();
    let l1_converging = dist_1[budget - 1] == 0.0 || dist_1[budget - 1] < dist_1[0];

    let mut starts: Vec<usize> =
        [budget / 8, budget / 4, budget / 2, budget].into_iter().map(|n| n.max(1)).collect();
    starts.dedup();
    let mut rows = Vec::with_capacity(starts.len());
    for n_from in starts {
        let tail = n_from - 1..budget;
        let tail_min = values[tail.clone()].iter().copied().fold(f64::INFINITY, f64::min);
        let delta = dist_p[tail].iter().copied().fold(0.0, f64::max);
        let margin = if delta > 0.0 {
            let wider = evar(limit, eps + delta, p, cfg).map_err(|e| e.at_eps(eps + delta))?;
            (base.value - wider.value).max(0.0)
        } else {
            0.0
        };
        let slack = 2.0 * gap_tol + margin;
        rows.push(LscRow { n_from, tail_min, delta, slack, holds: base.value <= tail_min + slack });
    }
    let final_slack = rows.last().map_or(0.0, |r| r.slack);
    Ok(LscReport {
        eps,
        p,
        limit_value: base.value,
        sup_evar: values.iter().copied().fold(0.0, f64::max),
        pass: l1_converging && rows.iter().all(|r| r.holds),
        rows,
        l1_converging,
        final_slack,
    })
}
