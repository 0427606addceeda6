//! The `corrclust` command line.

use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use corrclust_core::decomposition::fallback_cut_bound;
use corrclust_core::graph::cut_vector;
use corrclust_core::instances::{self, gap_fractional, gen_gap, reduce_3sat, GapParams};
use corrclust_core::oracle::{self, opt_clustering, opt_separating_partition, opt_st_cut};
use corrclust_core::relaxation::{self, check_feasible, FractionalSolution, SolverConfig};
use corrclust_core::rounding::{self, solution_metric, CHECK_TOL, GENERAL_DELTA};
use corrclust_core::seed::derive_seed;
use corrclust_core::{Norm, Scope, SignedGraph};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{CliError, Result};
use crate::io::{self, SolutionDump};
use crate::report::*;

#[derive(Debug, Parser)]
#[command(
    name = "corrclust",
    version,
    about = "Correlation clustering with local l_q objectives"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the relaxation and dump the fractional solution.
    Solve(SolveArgs),
    /// Round a fractional solution (solving the relaxation unless one is given).
    Round(RoundArgs),
    /// Exhaustive optimum of a small instance.
    Exact(ExactArgs),
    /// Integrality-gap instance: closed-form fractional value against the exact cut.
    Gap(GapArgs),
    /// Reduce a CNF formula to a min l_inf s-t cut instance.
    Reduce(ReduceArgs),
    /// Generate an instance.
    Gen(GenArgs),
    /// Solve, round and check every guarantee, with the exact optimum when small.
    Verify(VerifyArgs),
}

/// `inf` or a real `q >= 1`.
pub fn parse_q(s: &str) -> std::result::Result<Norm, String> {
    match s {
        "inf" | "infinity" | "Inf" => Ok(Norm::Inf),
        _ => {
            let q: f64 = s
                .parse()
                .map_err(|_| format!("{s:?} is neither a number nor `inf`"))?;
            Norm::new(q).map_err(|e| e.to_string())
        }
    }
}

fn parse_trials(s: &str) -> std::result::Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("at least one trial".into()),
        Ok(t) => Ok(t),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_parser = parse_q, default_value = "1")]
    pub q: Norm,
    #[arg(long, default_value_t = 16)]
    pub breakpoints: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Solve the full program with the `z` branch.
    #[arg(long)]
    pub use_z: bool,
    /// Separate triangle inequalities lazily at every size.
    #[arg(long)]
    pub lazy: bool,
    #[arg(long, default_value_t = 0)]
    pub refine_rounds: usize,
}

impl SolverArgs {
    fn config(&self) -> SolverConfig {
        SolverConfig {
            breakpoints: self.breakpoints,
            tol: self.tol,
            use_z: self.use_z,
            lazy_triangles: self.lazy,
            refine_rounds: self.refine_rounds,
            ..SolverConfig::default()
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    General,
    Complete,
    Bipartite,
}

impl Mode {
    fn name(self) -> &'static str {
        match self {
            Mode::General => "general",
            Mode::Complete => "complete",
            Mode::Bipartite => "bipartite",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct RoundArgs {
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, value_enum, default_value = "general")]
    pub mode: Mode,
    /// A solution dump from `solve`; skips solving.
    #[arg(long)]
    pub solution: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "1", value_parser = parse_trials)]
    pub trials: usize,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExactKind {
    /// All set partitions, disagreements at every vertex.
    Clustering,
    /// All set partitions, disagreements on the left side only.
    Left,
    /// Two-part cuts separating the terminals.
    StCut,
    /// All set partitions separating the terminals.
    Separating,
}

#[derive(Debug, Clone, Args)]
pub struct ExactArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_parser = parse_q, default_value = "1")]
    pub q: Norm,
    #[arg(long, value_enum, default_value = "clustering")]
    pub kind: ExactKind,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct GapArgs {
    #[arg(long)]
    pub a: usize,
    #[arg(long)]
    pub b: usize,
    #[arg(long, value_parser = parse_q, default_value = "2")]
    pub q: Norm,
    /// Skip the exhaustive s-t cut.
    #[arg(long)]
    pub no_oracle: bool,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ReduceArgs {
    /// DIMACS CNF file.
    #[arg(long)]
    pub input: PathBuf,
    /// Where to write the reduction graph (stdout if absent).
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Where to write the JSON report (stderr summary only if absent).
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Decide satisfiability and the min l_inf True-False cut exhaustively.
    #[arg(long)]
    pub verify: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GenKind {
    /// Unit weights, each pair present with probability `p-edge`.
    Random,
    /// As `random` with weights uniform in `[1, max-weight]`.
    Weighted,
    /// Complete bipartite, unit weights.
    Bipartite,
    /// The layered gap instance with terminals.
    Gap,
}

#[derive(Debug, Clone, Args)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub kind: GenKind,
    #[arg(long, default_value_t = 8)]
    pub n: usize,
    #[arg(long, default_value_t = 0.5)]
    pub p_plus: f64,
    #[arg(long, default_value_t = 1.0)]
    pub p_edge: f64,
    #[arg(long, default_value_t = 5.0)]
    pub max_weight: f64,
    #[arg(long, default_value_t = 3)]
    pub left: usize,
    #[arg(long, default_value_t = 3)]
    pub right: usize,
    #[arg(long, default_value_t = 2)]
    pub a: usize,
    #[arg(long, default_value_t = 2)]
    pub b: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Rounding mode; picked from the instance when absent.
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "1", value_parser = parse_trials)]
    pub trials: usize,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

fn emit<T: Serialize>(value: &T, output: Option<&Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(&text, output)
}

fn write_text(text: &str, output: Option<&Path>) -> Result<()> {
    match output {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::io(path, e)),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .map_err(|e| CliError::io(Path::new("<stdout>"), e))
        }
    }
}

fn check(failures: &[String]) -> Result<()> {
    match failures.first() {
        None => Ok(()),
        Some(first) if failures.len() == 1 => Err(CliError::Assertion(first.clone())),
        Some(first) => Err(CliError::Assertion(format!(
            "{first} (and {} more)",
            failures.len() - 1
        ))),
    }
}

fn lp_summary(sol: &FractionalSolution) -> LpSummary {
    LpSummary {
        value: sol.value,
        lower_bound: sol.lower_bound,
        y_branch: sol.y_branch,
        z_branch: sol.z_branch,
        pivots: sol.pivots,
    }
}

/// Runs `cli` on a worker pool capped by `CORRCLUST_THREADS`.
pub fn run(cli: Cli) -> Result<()> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Ok(raw) = std::env::var("CORRCLUST_THREADS") {
        let threads: usize = raw
            .parse()
            .map_err(|_| CliError::Usage(format!("CORRCLUST_THREADS={raw:?} is not a count")))?;
        pool = pool.num_threads(threads);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start workers: {e}")))?;
    pool.install(|| match cli.command {
        Command::Solve(a) => cmd_solve(&a),
        Command::Round(a) => cmd_round(&a),
        Command::Exact(a) => cmd_exact(&a),
        Command::Gap(a) => cmd_gap(&a),
        Command::Reduce(a) => cmd_reduce(&a),
        Command::Gen(a) => cmd_gen(&a),
        Command::Verify(a) => cmd_verify(&a),
    })
}

pub fn cmd_solve(a: &SolveArgs) -> Result<()> {
    let g = io::read_graph(&a.solver.input)?;
    let sol = relaxation::solve(&g, a.solver.q, &a.solver.config())?;
    eprintln!("value {} lower_bound {}", sol.value, sol.lower_bound);
    emit(&SolutionDump::new(&sol), a.output.as_deref())
}

/// Rounds `sol` in `mode`; general mode runs `trials` seeds derived from `seed`.
pub fn round_report(
    g: &SignedGraph,
    sol: &FractionalSolution,
    q: Norm,
    mode: Mode,
    seed: u64,
    trials: usize,
) -> Result<RoundReport> {
    let trial_reports: Vec<TrialReport> = match mode {
        Mode::Complete | Mode::Bipartite => {
            let (r, audit) = if mode == Mode::Complete {
                rounding::round_complete(g, sol)?
            } else {
                rounding::round_bipartite(g, sol)?
            };
            let mut t = TrialReport::new(0, None, &r, sol.value);
            let excess = r.worst_excess(g, 5.0);
            if excess > CHECK_TOL {
                t.failures
                    .push(format!("a vertex exceeds 5 y(u) by {excess}"));
            }
            if audit.min_profit < -CHECK_TOL {
                t.failures
                    .push(format!("profit {} is negative", audit.min_profit));
            }
            if audit.min_negative_edge_profit < -CHECK_TOL {
                t.failures.push(format!(
                    "negative-edge profit {} is negative",
                    audit.min_negative_edge_profit
                ));
            }
            t.steps = Some(r.steps.iter().map(StepDump::from).collect());
            t.audit = Some(AuditDump::from(&audit));
            vec![t]
        }
        Mode::General => {
            let m = solution_metric(sol)?;
            (0..trials)
                .into_par_iter()
                .map(|k| -> Result<TrialReport> {
                    let s = derive_seed(seed, k as u64);
                    let r = rounding::round_general(g, sol, q, s)?;
                    let checks = r
                        .general
                        .as_ref()
                        .expect("general rounding reports its checks");
                    let mut t = TrialReport::new(k, Some(s), &r, sol.value);
                    if checks.max_diameter > GENERAL_DELTA {
                        t.failures.push(format!(
                            "cluster diameter {} exceeds {GENERAL_DELTA}",
                            checks.max_diameter
                        ));
                    }
                    if checks.negative_slack > CHECK_TOL {
                        t.failures.push(format!(
                            "negative disagreement exceeds 2 y(u) by {}",
                            checks.negative_slack
                        ));
                    }
                    let fallback = if checks.decomposition.fallback {
                        let cut_norm = cut_vector(g.edges(), &r.clustering)?.norm(q);
                        let bound = fallback_cut_bound(&m, g.edges(), GENERAL_DELTA, q);
                        if cut_norm > bound * (1.0 + CHECK_TOL) + CHECK_TOL {
                            t.failures
                                .push(format!("fallback cut {cut_norm} exceeds its bound {bound}"));
                        }
                        Some(FallbackCheck { cut_norm, bound })
                    } else {
                        None
                    };
                    t.general = Some(GeneralDump {
                        decomposition: TraceDump::from(&checks.decomposition),
                        max_diameter: checks.max_diameter,
                        negative_slack: checks.negative_slack,
                        fallback,
                    });
                    Ok(t)
                })
                .collect::<Result<_>>()?
        }
    };
    let objectives: Vec<f64> = trial_reports.iter().map(|t| t.objective).collect();
    let summary = RoundSummary {
        trials: trial_reports.len(),
        min_objective: objectives.iter().copied().fold(f64::INFINITY, f64::min),
        mean_objective: objectives.iter().sum::<f64>() / objectives.len() as f64,
        max_ratio_to_lp: trial_reports
            .iter()
            .map(|t| t.ratio_to_lp)
            .fold(0.0, f64::max),
        fallbacks: trial_reports
            .iter()
            .filter(|t| t.general.as_ref().is_some_and(|g| g.decomposition.fallback))
            .count(),
    };
    Ok(RoundReport {
        schema: SCHEMA,
        mode: mode.name().into(),
        q: q.into(),
        n: g.n(),
        lp: lp_summary(sol),
        summary,
        passed: trial_reports.iter().all(|t| t.failures.is_empty()),
        trials: trial_reports,
    })
}

fn round_failures(report: &RoundReport) -> Vec<String> {
    report
        .trials
        .iter()
        .flat_map(|t| {
            t.failures
                .iter()
                .map(move |f| format!("trial {}: {f}", t.trial))
        })
        .collect()
}

pub fn cmd_round(a: &RoundArgs) -> Result<()> {
    let g = io::read_graph(&a.solver.input)?;
    let sol = match &a.solution {
        Some(path) => io::read_solution(path, &g)?,
        None => relaxation::solve(&g, a.solver.q, &a.solver.config())?,
    };
    let q = a.solver.q;
    let report = round_report(&g, &sol, q, a.mode, a.seed, a.trials)?;
    eprintln!(
        "{} rounding: objective min {} mean {} (lp {})",
        report.mode, report.summary.min_objective, report.summary.mean_objective, sol.value
    );
    emit(&report, a.output.as_deref())?;
    check(&round_failures(&report))
}

pub fn cmd_exact(a: &ExactArgs) -> Result<()> {
    let g = io::read_graph(&a.input)?;
    let terminals = || {
        g.terminals()
            .ok_or_else(|| CliError::Usage("this kind needs a `terminals` header".into()))
    };
    let (kind, r) = match a.kind {
        ExactKind::Clustering => ("clustering", opt_clustering(&g, a.q, Scope::All)?),
        ExactKind::Left => ("left", opt_clustering(&g, a.q, Scope::Left)?),
        ExactKind::StCut => {
            let (s, t) = terminals()?;
            ("st-cut", opt_st_cut(&g, s, t, a.q)?)
        }
        ExactKind::Separating => {
            let (s, t) = terminals()?;
            ("separating", opt_separating_partition(&g, s, t, a.q)?)
        }
    };
    eprintln!(
        "{kind} optimum {} over {} candidates",
        r.value, r.enumerated
    );
    emit(
        &ExactReport {
            schema: SCHEMA,
            kind: kind.into(),
            q: a.q.into(),
            n: g.n(),
            value: r.value,
            clustering: r.best.assignment().to_vec(),
            enumerated: r.enumerated,
        },
        a.output.as_deref(),
    )
}

pub fn gap_report(a: usize, b: usize, q: Norm, with_oracle: bool) -> Result<GapReport> {
    let p = GapParams::new(a, b)?;
    let g = gen_gap(p);
    let (sol, formula) = gap_fractional(p, q)?;
    let violations = check_feasible(&sol, &g, q).len();
    let (s, t) = g.terminals().expect("gap instances carry terminals");
    let x_st = sol.x(s, t);
    let mut failures = Vec::new();
    if (sol.value - formula).abs() > 1e-9 * formula.max(1.0) {
        failures.push(format!(
            "solution value {} differs from the formula {formula}",
            sol.value
        ));
    }
    if violations > 0 {
        failures.push(format!("{violations} feasibility violations"));
    }
    if (x_st - 1.0).abs() > 1e-12 {
        failures.push(format!("x_st = {x_st}"));
    }
    let opt = if with_oracle {
        Some(opt_st_cut(&g, s, t, q)?.value)
    } else {
        None
    };
    let ratio = opt.map(|o| oracle::ratio_or_one(o, formula));
    if let Some(r) = ratio {
        if r < 1.0 - 1e-9 {
            failures.push(format!("ratio {r} below 1"));
        }
    }
    Ok(GapReport {
        schema: SCHEMA,
        a,
        b,
        q: q.into(),
        vertices: g.n(),
        edges: g.edges().len(),
        lp_formula_value: formula,
        lp_solution_value: sol.value,
        feasibility_violations: violations,
        x_st,
        opt_oracle_value: opt,
        ratio,
        passed: failures.is_empty(),
        failures,
    })
}

pub fn cmd_gap(a: &GapArgs) -> Result<()> {
    let report = gap_report(a.a, a.b, a.q, !a.no_oracle)?;
    eprintln!(
        "gap a={} b={}: formula {} oracle {:?} ratio {:?}",
        a.a, a.b, report.lp_formula_value, report.opt_oracle_value, report.ratio
    );
    emit(&report, a.output.as_deref())?;
    check(&report.failures)
}

pub fn reduce_report(
    f: &instances::CnfFormula,
    g: &SignedGraph,
    verify: bool,
) -> Result<ReduceReport> {
    let (n, m) = (f.num_vars(), f.clauses().len());
    let mut failures = Vec::new();
    let (expected_vertices, expected_edges) = (2 + 4 * n + 5 * m, 6 * n + 8 * m);
    if g.n() != expected_vertices || g.edges().len() != expected_edges {
        failures.push(format!(
            "counts ({}, {}) differ from ({expected_vertices}, {expected_edges})",
            g.n(),
            g.edges().len()
        ));
    }
    let verify = if verify {
        let satisfiable = f.is_satisfiable()?;
        let (s, t) = g.terminals().expect("the reduction sets True and False");
        let cut = opt_st_cut(g, s, t, Norm::Inf)?;
        if satisfiable && (cut.value - 1.0).abs() > CHECK_TOL {
            failures.push(format!("satisfiable but the min cut is {}", cut.value));
        }
        if !satisfiable && cut.value < 2.0 - CHECK_TOL {
            failures.push(format!("unsatisfiable but the min cut is {}", cut.value));
        }
        Some(SatCheck {
            satisfiable,
            cut_value: cut.value,
            cut: cut.best.assignment().to_vec(),
        })
    } else {
        None
    };
    Ok(ReduceReport {
        schema: SCHEMA,
        num_vars: n,
        num_clauses: m,
        vertices: g.n(),
        edges: g.edges().len(),
        infinite_edges: g.edges().iter().filter(|e| e.infinite).count(),
        expected_vertices,
        expected_edges,
        verify,
        passed: failures.is_empty(),
        failures,
    })
}

pub fn cmd_reduce(a: &ReduceArgs) -> Result<()> {
    let f = io::read_dimacs(&a.input)?;
    let g = reduce_3sat(&f)?;
    write_text(&io::format_graph(&g)?, a.output.as_deref())?;
    let report = reduce_report(&f, &g, a.verify)?;
    eprintln!(
        "vertices {} (2+4n+5m = {}) edges {} (6n+8m = {})",
        report.vertices, report.expected_vertices, report.edges, report.expected_edges
    );
    if let Some(v) = &report.verify {
        eprintln!(
            "satisfiable {} min l_inf cut {}",
            v.satisfiable, v.cut_value
        );
    }
    if let Some(path) = &a.report {
        emit(&report, Some(path))?;
    }
    check(&report.failures)
}

pub fn cmd_gen(a: &GenArgs) -> Result<()> {
    let prob = |name: &str, p: f64| {
        if (0.0..=1.0).contains(&p) {
            Ok(())
        } else {
            Err(CliError::Usage(format!(
                "--{name} = {p} is not a probability"
            )))
        }
    };
    prob("p-plus", a.p_plus)?;
    prob("p-edge", a.p_edge)?;
    let g = match a.kind {
        GenKind::Random => instances::gen_random(a.n, a.p_plus, a.p_edge, a.seed),
        GenKind::Weighted => {
            if !(a.max_weight >= 1.0 && a.max_weight.is_finite()) {
                return Err(CliError::Usage(format!(
                    "--max-weight = {} must be at least 1",
                    a.max_weight
                )));
            }
            instances::gen_weighted(a.n, a.p_plus, a.p_edge, a.max_weight, a.seed)
        }
        GenKind::Bipartite => instances::gen_bipartite(a.left, a.right, a.p_plus, a.seed),
        GenKind::Gap => gen_gap(GapParams::new(a.a, a.b)?),
    };
    write_text(&io::format_graph(&g)?, a.output.as_deref())
}

/// The rounding that applies to `g`: bipartite for complete bipartite unit
/// instances, complete for complete unit instances, general otherwise.
pub fn natural_mode(g: &SignedGraph) -> Mode {
    if g.left_side().is_some() && g.is_complete_bipartite_unit() {
        Mode::Bipartite
    } else if g.is_complete_unit() {
        Mode::Complete
    } else {
        Mode::General
    }
}

pub fn verify_report(g: &SignedGraph, a: &VerifyArgs) -> Result<VerifyReport> {
    let q = a.solver.q;
    let mode = a.mode.unwrap_or_else(|| natural_mode(g));
    let sol = relaxation::solve(g, q, &a.solver.config())?;
    let mut failures = Vec::new();
    let violations = check_feasible(&sol, g, q).len();
    if violations > 0 {
        failures.push(format!("{violations} feasibility violations"));
    }
    let rounding = round_report(g, &sol, q, mode, a.seed, a.trials)?;
    failures.extend(round_failures(&rounding));
    let opt = if g.n() <= oracle::MAX_PARTITION_VERTICES && !g.has_infinite_edges() {
        // the relaxation bounds the objective over every vertex, in every mode
        let opt = opt_clustering(g, q, Scope::All)?.value;
        if sol.lower_bound > opt + 1e-7 {
            failures.push(format!(
                "lower bound {} exceeds the optimum {opt}",
                sol.lower_bound
            ));
        }
        Some(opt)
    } else {
        None
    };
    if mode != Mode::General {
        // alg(u) <= 5 y(u) at every vertex implies the same for the norms
        let objective = rounding.trials[0].objective;
        if objective > 5.0 * sol.value + 1e-7 {
            failures.push(format!(
                "objective {objective} exceeds 5 times the relaxation value {}",
                sol.value
            ));
        }
    }
    Ok(VerifyReport {
        schema: SCHEMA,
        n: g.n(),
        q: q.into(),
        mode: mode.name().into(),
        lp: lp_summary(&sol),
        feasibility_violations: violations,
        opt,
        rounding,
        passed: failures.is_empty(),
        failures,
    })
}

pub fn cmd_verify(a: &VerifyArgs) -> Result<()> {
    let g = io::read_graph(&a.solver.input)?;
    let report = verify_report(&g, a)?;
    eprintln!(
        "{} mode: lp {} lower bound {} opt {:?} passed {}",
        report.mode, report.lp.value, report.lp.lower_bound, report.opt, report.passed
    );
    emit(&report, a.output.as_deref())?;
    check(&report.failures)
}
