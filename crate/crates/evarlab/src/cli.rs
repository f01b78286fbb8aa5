//! The `evarlab` command line.
//!
//! Exit codes: 0 on success, 1 on usage or validation errors, 2 when a solver
//! stops at its iteration limit or an extraction runs out of indices. In the
//! last case the (partial) result is still written and a warning goes to
//! stderr.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use evarlab_core::compactness::{
    bv_extract, frankova_extract, helly_extract, lsc_check, uniform_row, ExtractionConfig, ExtractionReport,
    FnFamily,
};
use evarlab_core::epsvar::{
    evar_l1_lagrangian, evar_lenient, evar_oracle_dp, evar_oracle_exhaustive, evar_solve, evar_taut_string,
    profile_from_results, uniform_lattice, EvarResult, SolverConfig,
};
use evarlab_core::examples::{build_stress_families, RadialExample, RadialExampleSpec, RadialGrid};
use evarlab_core::regulated::approx_by_steps;
use evarlab_core::variation::{essential_var, jump_set, pointwise_var, total_variation};
use evarlab_core::{Error, GridFn, LpExponent};
use rayon::prelude::*;
use serde_json::json;

use crate::io::{read_fn, write_fn};

/// Environment variable capping worker threads (0 or unset: one per core).
pub const THREADS_ENV: &str = "EVARLAB_THREADS";

#[derive(Parser, Debug)]
#[command(
    name = "evarlab",
    version,
    about = "Variation functionals and (eps, p)-variation on grid functions"
)]
struct Cli {
    /// JSON file with solver settings; flags override it.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverFlags,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct SolverFlags {
    #[arg(long, global = true)]
    max_iters: Option<usize>,
    /// Relative duality-gap target.
    #[arg(long, global = true)]
    gap_tol: Option<f64>,
    #[arg(long, global = true)]
    feas_tol: Option<f64>,
    #[arg(long, global = true)]
    primal_step: Option<f64>,
    #[arg(long, global = true)]
    check_every: Option<usize>,
    /// Spacing of the default lattice for the exhaustive oracle.
    #[arg(long, global = true)]
    lattice_step: Option<f64>,
    /// Recorded in reports; every solver is deterministic.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Variation of a function (total by default).
    Var {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(long, conflicts_with = "essential")]
        pointwise: bool,
        #[arg(long)]
        essential: bool,
        /// Print the jumps above this threshold as CSV instead.
        #[arg(long)]
        jump_threshold: Option<f64>,
    },
    /// (eps, p)-variation with residual, gap and method.
    Evar {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value = "inf")]
        p: LpExponent,
        #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
        method: MethodArg,
        /// Write the minimizer here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// (eps, p)-variation over an eps grid.
    Sweep {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(long)]
        eps_from: f64,
        #[arg(long)]
        eps_to: f64,
        #[arg(long, default_value_t = 10)]
        eps_steps: usize,
        #[arg(long, default_value = "inf")]
        p: LpExponent,
        #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
        method: MethodArg,
        /// Space the eps values geometrically.
        #[arg(long)]
        log: bool,
    },
    /// Fewest-run step function within eps in the sup norm.
    Steps {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Subsequence extraction on a family.
    Extract {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long, value_enum, default_value_t = ExtractMethod::Diagonal)]
        method: ExtractMethod,
        #[arg(long, default_value = "1")]
        p: LpExponent,
        #[arg(long, default_value = "0.5,0.25,0.125,0.0625,0.03125,0.015625")]
        eps_schedule: String,
        #[arg(long, default_value_t = 200)]
        n_max: usize,
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
        /// Level cluster radius in units of C * eps.
        #[arg(long, default_value_t = 1.0)]
        cluster_scale: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// sup_n (eps, p)-Var u_n with a growth trend, per eps.
    CheckUniform {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long, default_value = "0.5,0.25,0.1")]
        eps_list: String,
        #[arg(long, default_value = "inf")]
        p: LpExponent,
        #[arg(long, default_value_t = 200)]
        n_max: usize,
    },
    /// Lower semicontinuity against the family's known limit, per eps.
    CheckLsc {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long, default_value = "0.1,0.25")]
        eps_list: String,
        #[arg(long, default_value = "1")]
        p: LpExponent,
        #[arg(long, default_value_t = 200)]
        n_max: usize,
    },
    /// Radial step examples.
    Example {
        #[arg(long, value_enum)]
        id: ExampleId,
        /// Truncation index for ex1-un.
        #[arg(long)]
        n: Option<usize>,
        /// Space dimension.
        #[arg(long = "N", default_value_t = 1)]
        dim: usize,
        #[arg(long, default_value_t = 0.5)]
        r0: f64,
        #[arg(long, default_value_t = 201)]
        n_terms: usize,
        /// Use a uniform 1D grid with this many cells and snap the radii.
        #[arg(long)]
        snap_cells: Option<usize>,
        /// Cells per axis in 2D.
        #[arg(long, default_value_t = 128)]
        resolution: usize,
        /// Output file (a directory for ex2-family).
        #[arg(long)]
        out: PathBuf,
    },
    /// Brute-force reference values.
    Oracle {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value = "inf")]
        p: LpExponent,
        #[arg(long, value_enum, default_value_t = OracleKind::Dp)]
        kind: OracleKind,
        /// Lattice range for the exhaustive oracle (defaults to the data range widened by eps).
        #[arg(long)]
        lattice_lo: Option<f64>,
        #[arg(long)]
        lattice_hi: Option<f64>,
    },
}

#[derive(Args, Debug)]
struct FamilyArgs {
    #[arg(long, value_enum)]
    family: FamilyKind,
    /// Member files for `file-list`, comma separated.
    #[arg(long)]
    files: Option<String>,
    /// Text file listing member files, one per line, for `file-list`.
    #[arg(long)]
    list: Option<PathBuf>,
    /// Known limit for `file-list`.
    #[arg(long)]
    limit: Option<PathBuf>,
    /// Number of terms of the radial example.
    #[arg(long = "terms", default_value_t = 201)]
    terms: usize,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum FamilyKind {
    Example2,
    Const,
    Tail,
    TwoCluster,
    Sine,
    FileList,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum MethodArg {
    Auto,
    Taut,
    Lagrangian,
    Pd,
    Dp,
    Exhaustive,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum ExtractMethod {
    Diagonal,
    Bv,
    Helly,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum ExampleId {
    Ex1U,
    Ex1Un,
    Ex2Family,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum OracleKind {
    Dp,
    Exhaustive,
}

/// Whether a command finished completely or emitted a partial result.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Outcome {
    Complete,
    Partial,
}

type CmdResult = Result<Outcome, String>;

struct Ctx<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
    cfg: SolverConfig,
    pool: rayon::ThreadPool,
}

impl Ctx<'_> {
    fn print(&mut self, s: &str) -> Result<(), String> {
        self.out.write_all(s.as_bytes()).map_err(|e| e.to_string())
    }

    fn warn(&mut self, msg: &str) {
        let _ = writeln!(self.err, "warning: {msg}");
    }
}

/// Number in shortest round-trip form; exponent notation for very small or
/// very large magnitudes.
pub fn fmt_num(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && !(1e-5..1e16).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

/// Runs the CLI on `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = effective_config(&cli).and_then(|cfg| {
        let mut ctx = Ctx { out, err, cfg, pool: thread_pool()? };
        dispatch(cli.command, &mut ctx)
    });
    match result {
        Ok(Outcome::Complete) => 0,
        Ok(Outcome::Partial) => 2,
        Err(msg) => {
            let _ = writeln!(err, "error: {msg}");
            1
        }
    }
}

fn thread_pool() -> Result<rayon::ThreadPool, String> {
    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) => {
            v.trim().parse::<usize>().map_err(|_| format!("{THREADS_ENV} must be a nonnegative integer"))?
        }
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().map_err(|e| e.to_string())
}

fn effective_config(cli: &Cli) -> Result<SolverConfig, String> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?
        }
        None => SolverConfig::default(),
    };
    let f = &cli.solver;
    if let Some(v) = f.max_iters {
        cfg.max_iters = v;
    }
    if let Some(v) = f.gap_tol {
        cfg.gap_tol = v;
    }
    if let Some(v) = f.feas_tol {
        cfg.feas_tol = v;
    }
    if let Some(v) = f.primal_step {
        cfg.primal_step = v;
    }
    if let Some(v) = f.check_every {
        cfg.check_every = v;
    }
    if let Some(v) = f.lattice_step {
        cfg.value_lattice_spacing = v;
    }
    if let Some(v) = f.seed {
        cfg.seed = v;
    }
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

fn dispatch(cmd: Command, ctx: &mut Ctx<'_>) -> CmdResult {
    match cmd {
        Command::Var { input, pointwise, essential, jump_threshold } => {
            cmd_var(ctx, &input, pointwise, essential, jump_threshold)
        }
        Command::Evar { input, eps, p, method, out } => cmd_evar(ctx, &input, eps, p, method, out.as_deref()),
        Command::Sweep { input, eps_from, eps_to, eps_steps, p, method, log } => {
            cmd_sweep(ctx, &input, eps_from, eps_to, eps_steps, p, method, log)
        }
        Command::Steps { input, eps, out } => cmd_steps(ctx, &input, eps, out.as_deref()),
        Command::Extract { family, method, p, eps_schedule, n_max, tol, cluster_scale, out } => {
            let schedule = parse_list(&eps_schedule)?;
            let mut config = ExtractionConfig::new(schedule, p, n_max);
            config.cluster_scale = cluster_scale;
            config.solver = ctx.cfg.clone();
            cmd_extract(ctx, &family, method, &config, tol, &out)
        }
        Command::CheckUniform { family, eps_list, p, n_max } => {
            cmd_check_uniform(ctx, &family, &parse_list(&eps_list)?, p, n_max)
        }
        Command::CheckLsc { family, eps_list, p, n_max } => {
            cmd_check_lsc(ctx, &family, &parse_list(&eps_list)?, p, n_max)
        }
        Command::Example { id, n, dim, r0, n_terms, snap_cells, resolution, out } => {
            let grid = match (dim, snap_cells) {
                (2, _) => RadialGrid::Sampled { resolution },
                (_, Some(n_cells)) => RadialGrid::Snapped { n_cells },
                _ => RadialGrid::Aligned,
            };
            cmd_example(ctx, id, n, RadialExampleSpec { dim, r0, n_terms, grid }, &out)
        }
        Command::Oracle { input, eps, p, kind, lattice_lo, lattice_hi } => {
            cmd_oracle(ctx, &input, eps, p, kind, lattice_lo, lattice_hi)
        }
    }
}

fn err_str(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',').map(|t| t.trim().parse::<f64>().map_err(|_| format!("not a number: {t:?}"))).collect()
}

fn load(path: &Path) -> Result<GridFn, String> {
    read_fn(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn cmd_var(
    ctx: &mut Ctx<'_>,
    input: &Path,
    pointwise: bool,
    essential: bool,
    jumps: Option<f64>,
) -> CmdResult {
    let u = load(input)?;
    if let Some(t) = jumps {
        let j = jump_set(&u, t).map_err(err_str)?;
        let mut s = String::from("interface_index,position,magnitude\n");
        for (&k, &m) in j.positions.iter().zip(&j.magnitudes) {
            let _ = writeln!(s, "{k},{},{}", fmt_num(u.domain().edge(k + 1)), fmt_num(m));
        }
        ctx.print(&s)?;
        return Ok(Outcome::Complete);
    }
    let v = if pointwise {
        pointwise_var(&u).map_err(err_str)?
    } else if essential {
        essential_var(&u).map_err(err_str)?
    } else {
        total_variation(&u)
    };
    ctx.print(&format!("{}\n", fmt_num(v)))?;
    Ok(Outcome::Complete)
}

fn default_lattice(u: &GridFn, eps: f64, step: f64) -> Result<Vec<f64>, Error> {
    uniform_lattice(u.min() - eps, u.max() + eps, step)
}

fn solve(
    u: &GridFn,
    eps: f64,
    p: LpExponent,
    method: MethodArg,
    cfg: &SolverConfig,
) -> Result<(EvarResult, bool), Error> {
    let lenient = |r: Result<EvarResult, Error>| match r {
        Ok(r) => Ok((r, true)),
        Err(Error::Nonconvergence(r)) => Ok((*r, false)),
        Err(e) => Err(e),
    };
    let need_inf = |p: LpExponent| {
        if p.is_infinite() {
            Ok(())
        } else {
            Err(Error::InvalidConfig("method needs p = inf"))
        }
    };
    match method {
        MethodArg::Auto => evar_lenient(u, eps, p, cfg),
        MethodArg::Taut => {
            need_inf(p)?;
            lenient(evar_taut_string(u, eps))
        }
        MethodArg::Dp => {
            need_inf(p)?;
            lenient(evar_oracle_dp(u, eps))
        }
        MethodArg::Lagrangian => {
            if p.get() != 1.0 {
                return Err(Error::InvalidConfig("method needs p = 1"));
            }
            lenient(evar_l1_lagrangian(u, eps, cfg))
        }
        MethodArg::Pd => lenient(evar_solve(u, eps, p, cfg)),
        MethodArg::Exhaustive => {
            let lattice = default_lattice(u, eps, cfg.value_lattice_spacing)?;
            lenient(evar_oracle_exhaustive(u, eps, p, &lattice, cfg))
        }
    }
}

const EVAR_HEADER: &str = "value,feasibility_residual,optimality_gap,method\n";

fn evar_row(r: &EvarResult) -> String {
    format!(
        "{},{},{},{}\n",
        fmt_num(r.value),
        fmt_num(r.feasibility_residual),
        fmt_num(r.optimality_gap),
        r.method
    )
}

fn finish_evar(ctx: &mut Ctx<'_>, r: &EvarResult, converged: bool, out: Option<&Path>) -> CmdResult {
    ctx.print(&format!("{EVAR_HEADER}{}", evar_row(r)))?;
    if let Some(path) = out {
        write_fn(&r.minimizer, path).map_err(err_str)?;
    }
    if converged {
        Ok(Outcome::Complete)
    } else {
        ctx.warn(&format!(
            "solver stopped after {} iterations; gap {} above target {}",
            r.iterations,
            fmt_num(r.optimality_gap),
            fmt_num(r.gap_tol)
        ));
        Ok(Outcome::Partial)
    }
}

fn cmd_evar(
    ctx: &mut Ctx<'_>,
    input: &Path,
    eps: f64,
    p: LpExponent,
    method: MethodArg,
    out: Option<&Path>,
) -> CmdResult {
    let u = load(input)?;
    let (r, ok) = solve(&u, eps, p, method, &ctx.cfg).map_err(err_str)?;
    finish_evar(ctx, &r, ok, out)
}

fn eps_grid(from: f64, to: f64, steps: usize, log: bool) -> Result<Vec<f64>, String> {
    if !(from > 0.0 && to > from) || steps < 2 {
        return Err("need 0 < eps-from < eps-to and at least 2 steps".into());
    }
    let last = (steps - 1) as f64;
    Ok((0..steps)
        .map(|k| {
            let t = k as f64 / last;
            if k == steps - 1 {
                to
            } else if log {
                from * (to / from).powf(t)
            } else {
                from + (to - from) * t
            }
        })
        .collect())
}

#[allow(clippy::too_many_arguments)]
fn cmd_sweep(
    ctx: &mut Ctx<'_>,
    input: &Path,
    from: f64,
    to: f64,
    steps: usize,
    p: LpExponent,
    method: MethodArg,
    log: bool,
) -> CmdResult {
    let u = load(input)?;
    let grid = eps_grid(from, to, steps, log)?;
    let cfg = ctx.cfg.clone();
    let solved: Vec<(EvarResult, bool)> = ctx.pool.install(|| {
        grid.par_iter()
            .map(|&eps| solve(&u, eps, p, method, &cfg).map_err(|e| format!("at eps = {eps}: {e}")))
            .collect::<Result<_, _>>()
    })?;
    let results: Vec<EvarResult> = solved.iter().map(|(r, _)| r.clone()).collect();
    let profile = profile_from_results(p, &results);
    let mut s = String::from("eps,evar,gap\n");
    for r in &results {
        let _ = writeln!(s, "{},{},{}", fmt_num(r.eps), fmt_num(r.value), fmt_num(r.optimality_gap));
    }
    ctx.print(&s)?;
    for v in &profile.violations {
        ctx.warn(&format!(
            "profile increases after eps = {} by {}",
            fmt_num(grid[v.index]),
            fmt_num(v.excess)
        ));
    }
    let unconverged = solved.iter().filter(|(_, ok)| !ok).count();
    if unconverged > 0 {
        ctx.warn(&format!("{unconverged} solves stopped at the iteration limit"));
        return Ok(Outcome::Partial);
    }
    Ok(Outcome::Complete)
}

fn cmd_steps(ctx: &mut Ctx<'_>, input: &Path, eps: f64, out: Option<&Path>) -> CmdResult {
    let u = load(input)?;
    let s = approx_by_steps(&u, eps).map_err(err_str)?;
    ctx.print(&format!("K,sup_error\n{},{}\n", s.runs, fmt_num(s.sup_error)))?;
    if let Some(path) = out {
        write_fn(&s.steps, path).map_err(err_str)?;
    }
    Ok(Outcome::Complete)
}

fn build_family(args: &FamilyArgs) -> Result<FnFamily, String> {
    let stress = |name: &str| -> Result<FnFamily, String> {
        let fams = build_stress_families().map_err(err_str)?;
        Ok(fams.into_iter().find(|f| f.name == name).expect("known stress family").family)
    };
    match args.family {
        FamilyKind::Example2 => {
            Ok(RadialExample::new(RadialExampleSpec::aligned(args.terms)).map_err(err_str)?.family())
        }
        FamilyKind::Const => stress("const"),
        FamilyKind::Tail => stress("tail"),
        FamilyKind::TwoCluster => stress("two-cluster"),
        FamilyKind::Sine => stress("sine"),
        FamilyKind::FileList => {
            let mut paths: Vec<PathBuf> = Vec::new();
            if let Some(files) = &args.files {
                paths.extend(files.split(',').map(|s| PathBuf::from(s.trim())));
            }
            if let Some(list) = &args.list {
                let text = fs::read_to_string(list).map_err(|e| format!("{}: {e}", list.display()))?;
                let base = list.parent().unwrap_or(Path::new(""));
                paths.extend(text.lines().map(str::trim).filter(|l| !l.is_empty()).map(|l| base.join(l)));
            }
            if paths.is_empty() {
                return Err("file-list needs --files or --list".into());
            }
            let members = paths.iter().map(|p| load(p)).collect::<Result<Vec<_>, _>>()?;
            let fam = FnFamily::from_members(members, format!("{} files", paths.len())).map_err(err_str)?;
            match &args.limit {
                Some(path) => fam.with_known_limit(load(path)?).map_err(err_str),
                None => Ok(fam),
            }
        }
    }
}

fn family_json(args: &FamilyArgs, fam: &FnFamily) -> serde_json::Value {
    json!({
        "kind": args.family.to_possible_value().map(|v| v.get_name().to_string()),
        "description": fam.description(),
        "cells": fam.domain().n_cells(),
    })
}

fn cmd_extract(
    ctx: &mut Ctx<'_>,
    args: &FamilyArgs,
    method: ExtractMethod,
    config: &ExtractionConfig,
    tol: f64,
    out: &Path,
) -> CmdResult {
    let fam = build_family(args)?;
    let result = match method {
        ExtractMethod::Diagonal => frankova_extract(&fam, config, tol),
        ExtractMethod::Bv => bv_extract(&fam, config.n_max, tol),
        ExtractMethod::Helly => helly_extract(&fam, config.n_max, None, tol),
    };
    let (report, outcome): (ExtractionReport, Outcome) = match result {
        Ok(r) => (r, Outcome::Complete),
        Err(Error::BudgetExceeded(r)) => (*r, Outcome::Partial),
        Err(e) => return Err(e.to_string()),
    };
    let doc = json!({
        "command": "extract",
        "family": family_json(args, &fam),
        "method": method.to_possible_value().map(|v| v.get_name().to_string()),
        "tol": tol,
        "extraction": config,
        "solver": &ctx.cfg,
        "report": report,
    });
    let mut text = serde_json::to_string_pretty(&doc).map_err(err_str)?;
    text.push('\n');
    fs::write(out, text).map_err(|e| format!("{}: {e}", out.display()))?;
    ctx.print(&format!(
        "converged,indices,tail_l1\n{},{},{}\n",
        report.converged,
        report.indices.len(),
        fmt_num(report.tail_l1())
    ))?;
    for w in &report.warnings {
        ctx.warn(&format!("{w:?}"));
    }
    if outcome == Outcome::Partial {
        ctx.warn("extraction did not converge within the index budget");
    }
    Ok(outcome)
}

fn cmd_check_uniform(
    ctx: &mut Ctx<'_>,
    args: &FamilyArgs,
    eps_list: &[f64],
    p: LpExponent,
    n_max: usize,
) -> CmdResult {
    let fam = build_family(args)?;
    let members = fam.members(n_max).map_err(err_str)?;
    let cfg = ctx.cfg.clone();
    let mut s = String::from("eps,sup_evar,trend\n");
    let mut unconverged = 0;
    for &eps in eps_list {
        let solved: Vec<(EvarResult, bool)> = ctx.pool.install(|| {
            members
                .par_iter()
                .map(|u| evar_lenient(u, eps, p, &cfg).map_err(|e| format!("at eps = {eps}: {e}")))
                .collect::<Result<_, _>>()
        })?;
        let gap = solved.iter().fold(0.0f64, |m, (r, _)| m.max(r.gap_tol).max(r.optimality_gap));
        let bad = solved.iter().filter(|(_, ok)| !ok).count();
        let row = uniform_row(eps, solved.into_iter().map(|(r, _)| r.value).collect(), gap, bad);
        unconverged += bad;
        let _ = writeln!(s, "{},{},{}", fmt_num(eps), fmt_num(row.sup_evar), row.trend.as_str());
    }
    ctx.print(&s)?;
    if unconverged > 0 {
        ctx.warn(&format!("{unconverged} solves stopped at the iteration limit"));
        return Ok(Outcome::Partial);
    }
    Ok(Outcome::Complete)
}

fn cmd_check_lsc(
    ctx: &mut Ctx<'_>,
    args: &FamilyArgs,
    eps_list: &[f64],
    p: LpExponent,
    n_max: usize,
) -> CmdResult {
    let fam = build_family(args)?;
    let cfg = ctx.cfg.clone();
    let reports = ctx.pool.install(|| {
        eps_list
            .par_iter()
            .map(|&eps| lsc_check(&fam, eps, p, n_max, &cfg).map_err(err_str))
            .collect::<Result<Vec<_>, _>>()
    })?;
    let mut s = String::from("eps,sup_evar,trend,limit_value,final_slack\n");
    for r in &reports {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            fmt_num(r.eps),
            fmt_num(r.sup_evar),
            if r.pass { "pass" } else { "fail" },
            fmt_num(r.limit_value),
            fmt_num(r.final_slack)
        );
    }
    ctx.print(&s)?;
    Ok(Outcome::Complete)
}

fn cmd_example(
    ctx: &mut Ctx<'_>,
    id: ExampleId,
    n: Option<usize>,
    spec: RadialExampleSpec,
    out: &Path,
) -> CmdResult {
    let ex = RadialExample::new(spec).map_err(err_str)?;
    match id {
        ExampleId::Ex1U | ExampleId::Ex1Un => {
            let u = if id == ExampleId::Ex1U {
                ex.u()
            } else {
                ex.un(n.ok_or("ex1-un needs --n")?).map_err(err_str)?
            };
            write_fn(&u, out).map_err(err_str)?;
            ctx.print(&format!(
                "cells,total_variation,snap_error\n{},{},{}\n",
                u.len(),
                fmt_num(total_variation(&u)),
                fmt_num(ex.snap_error())
            ))?;
        }
        ExampleId::Ex2Family => {
            fs::create_dir_all(out).map_err(|e| format!("{}: {e}", out.display()))?;
            let fam = ex.family();
            let mut s = String::from("n,total_variation,file\n");
            for k in 1..=spec.n_terms {
                let u = fam.get(k).map_err(err_str)?;
                let name = format!("u_{k:04}.json");
                write_fn(&u, out.join(&name)).map_err(err_str)?;
                let _ = writeln!(s, "{k},{},{name}", fmt_num(total_variation(&u)));
            }
            let limit = fam.known_limit().expect("radial family has a limit");
            write_fn(limit, out.join("limit.json")).map_err(err_str)?;
            let _ = writeln!(s, "limit,{},limit.json", fmt_num(total_variation(limit)));
            ctx.print(&s)?;
        }
    }
    Ok(Outcome::Complete)
}

fn cmd_oracle(
    ctx: &mut Ctx<'_>,
    input: &Path,
    eps: f64,
    p: LpExponent,
    kind: OracleKind,
    lo: Option<f64>,
    hi: Option<f64>,
) -> CmdResult {
    let u = load(input)?;
    let r = match kind {
        OracleKind::Dp => {
            if !p.is_infinite() {
                return Err("the dp oracle needs p = inf".into());
            }
            evar_oracle_dp(&u, eps).map_err(err_str)?
        }
        OracleKind::Exhaustive => {
            let lattice = uniform_lattice(
                lo.unwrap_or(u.min() - eps),
                hi.unwrap_or(u.max() + eps),
                ctx.cfg.value_lattice_spacing,
            )
            .map_err(err_str)?;
            evar_oracle_exhaustive(&u, eps, p, &lattice, &ctx.cfg).map_err(err_str)?
        }
    };
    finish_evar(ctx, &r, true, None)
}
