//! Rounding a fractional solution into a clustering.
//!
//! - [`round_general`]: any graph; padded decomposition of the metric `x` at `delta = 1/2`.
//! - [`round_complete`]: complete unit-weight graphs; ball growing with `r = 1/5`.
//! - [`round_bipartite`]: complete bipartite unit-weight graphs, objective on the L side.
//!
//! The two ball-growing roundings are audited with per-vertex profits:
//! `pft(u) = sum_v LP(u,v) - r sum_v ALG(u,v) = y_u - ALG(u) / 5`, accumulated
//! over the steps at which each edge gets settled.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::decomposition::{decompose, DecompositionTrace, PaddedParams};
use crate::error::{Error, Result};
use crate::graph::{
    disagreement_vector, Clustering, DisagreeVector, Norm, Scope, Sign, SignedGraph,
};
use crate::metric::MetricSpace;
use crate::relaxation::{check_feasible, FractionalSolution};

/// Ball radius of the ball-growing roundings.
pub const BALL_RADIUS: f64 = 0.2;
/// Diameter bound of the clusters produced by [`round_general`].
pub const GENERAL_DELTA: f64 = 0.5;
/// Absolute slack of all runtime checks.
pub const CHECK_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct RoundingReport {
    pub clustering: Clustering,
    pub scope: Scope,
    pub per_vertex_alg: DisagreeVector,
    pub per_vertex_y: Vec<f64>,
    /// `max alg(u) / y(u)` over in-scope vertices, with `0/0 = 0` and `a/0 = inf`.
    pub ratio_per_vertex: f64,
    /// `l_q` norm of the disagreements over the scope.
    pub objective: f64,
    /// Ball-growing steps; empty for [`round_general`].
    pub steps: Vec<BallStep>,
    /// Only for [`round_general`].
    pub general: Option<GeneralChecks>,
}

impl RoundingReport {
    fn new(
        g: &SignedGraph,
        sol: &FractionalSolution,
        q: Norm,
        scope: Scope,
        clustering: Clustering,
    ) -> Result<Self> {
        let alg = disagreement_vector(g, &clustering)?;
        let mask = in_scope(g, scope)?;
        let mut ratio = 0.0_f64;
        for u in (0..g.n()).filter(|&u| mask[u]) {
            let (a, y) = (alg.values[u], sol.y[u]);
            let r = if a == 0.0 {
                0.0
            } else if y <= 0.0 {
                f64::INFINITY
            } else {
                a / y
            };
            ratio = ratio.max(r);
        }
        if alg.infeasible {
            ratio = f64::INFINITY;
        }
        Ok(Self {
            objective: alg.norm_on(q, &mask),
            clustering,
            scope,
            per_vertex_alg: alg,
            per_vertex_y: sol.y.clone(),
            ratio_per_vertex: ratio,
            steps: Vec::new(),
            general: None,
        })
    }

    /// `max_u alg(u) - factor * y(u)` over in-scope vertices (`-inf` if none).
    pub fn worst_excess(&self, g: &SignedGraph, factor: f64) -> f64 {
        let mask = in_scope(g, self.scope).unwrap_or_else(|_| vec![true; g.n()]);
        (0..g.n())
            .filter(|&u| mask[u])
            .map(|u| self.per_vertex_alg.values[u] - factor * self.per_vertex_y[u])
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

fn in_scope(g: &SignedGraph, scope: Scope) -> Result<Vec<bool>> {
    match scope {
        Scope::All => Ok(vec![true; g.n()]),
        Scope::Left => g
            .left_side()
            .map(<[bool]>::to_vec)
            .ok_or_else(|| Error::Contract("one-sided scope needs a bipartition".into())),
    }
}

/// The deterministic guarantees of [`round_general`].
#[derive(Clone, Debug, PartialEq)]
pub struct GeneralChecks {
    pub decomposition: DecompositionTrace,
    /// Largest cluster diameter in `x`.
    pub max_diameter: f64,
    /// `max_u (negative disagreement at u) - 2 y_u`.
    pub negative_slack: f64,
}

impl GeneralChecks {
    pub fn holds(&self) -> bool {
        self.max_diameter <= GENERAL_DELTA && self.negative_slack <= CHECK_TOL
    }
}

fn require_feasible(g: &SignedGraph, sol: &FractionalSolution) -> Result<()> {
    let violations = check_feasible(sol, g, sol.q);
    match violations.first() {
        None => Ok(()),
        Some(v) => Err(Error::Contract(format!(
            "fractional solution is infeasible: {} violations, first {:?} by {}",
            violations.len(),
            v.kind,
            v.magnitude
        ))),
    }
}

/// The metric `x` with the upper triangle mirrored, so symmetry is exact.
pub fn solution_metric(sol: &FractionalSolution) -> Result<MetricSpace> {
    let n = sol.n;
    let mut d = sol.x.clone();
    for u in 0..n {
        d[u * n + u] = 0.0;
        for v in u + 1..n {
            d[v * n + u] = d[u * n + v];
        }
    }
    MetricSpace::new(n, d)
}

/// Padded decomposition of `x` with `delta = 1/2` and default parameters.
pub fn round_general(
    g: &SignedGraph,
    sol: &FractionalSolution,
    q: Norm,
    seed: u64,
) -> Result<RoundingReport> {
    let params = PaddedParams::new(g.n(), GENERAL_DELTA)?;
    round_general_with(g, sol, q, &params, seed)
}

/// As [`round_general`] with explicit decomposition parameters.
pub fn round_general_with(
    g: &SignedGraph,
    sol: &FractionalSolution,
    q: Norm,
    params: &PaddedParams,
    seed: u64,
) -> Result<RoundingReport> {
    require_feasible(g, sol)?;
    let m = solution_metric(sol)?;
    let (clustering, trace) = decompose(&m, params, seed)?;
    let max_diameter = clustering
        .clusters()
        .iter()
        .map(|c| m.diameter(c))
        .fold(0.0, f64::max);
    let mut negative = vec![0.0; g.n()];
    for e in g.neg_edges().filter(|e| !e.infinite) {
        if clustering.together(e.u, e.v) {
            negative[e.u] += e.weight;
            negative[e.v] += e.weight;
        }
    }
    let negative_slack = (0..g.n())
        .map(|u| negative[u] - 2.0 * sol.y[u])
        .fold(f64::NEG_INFINITY, f64::max);
    let mut report = RoundingReport::new(g, sol, q, Scope::All, clustering)?;
    report.general = Some(GeneralChecks {
        decomposition: trace,
        max_diameter,
        negative_slack,
    });
    Ok(report)
}

/// One step of ball growing: `cluster` is carved out of `remaining`.
/// The final leftover cluster of the bipartite rounding has no center.
#[derive(Clone, Debug, PartialEq)]
pub struct BallStep {
    pub center: Option<usize>,
    pub cluster: Vec<usize>,
    pub remaining: Vec<usize>,
}

/// `L(w) = sum_{u in Ball(w, r) ∩ V_t, candidate(u)} (r - x_uw)`.
fn ball_mass(
    sol: &FractionalSolution,
    w: usize,
    alive: &[bool],
    counted: impl Fn(usize) -> bool,
) -> f64 {
    (0..sol.n)
        .filter(|&u| alive[u] && counted(u))
        .map(|u| sol.x(u, w))
        .filter(|&d| d <= BALL_RADIUS)
        .map(|d| BALL_RADIUS - d)
        .sum()
}

fn grow_balls(
    sol: &FractionalSolution,
    centers: impl Fn(usize) -> bool,
    counted: impl Fn(usize) -> bool + Copy,
) -> Vec<BallStep> {
    let n = sol.n;
    let mut alive = vec![true; n];
    let mut steps = Vec::new();
    loop {
        let mut best: Option<(usize, f64)> = None;
        for w in (0..n).filter(|&w| alive[w] && centers(w)) {
            let l = ball_mass(sol, w, &alive, counted);
            // strict comparison: the smallest id wins ties
            if best.is_none_or(|(_, b)| l > b) {
                best = Some((w, l));
            }
        }
        let Some((w, _)) = best else { break };
        let remaining: Vec<usize> = (0..n).filter(|&u| alive[u]).collect();
        let cluster: Vec<usize> = remaining
            .iter()
            .copied()
            .filter(|&u| sol.x(u, w) <= 2.0 * BALL_RADIUS)
            .collect();
        for &u in &cluster {
            alive[u] = false;
        }
        steps.push(BallStep {
            center: Some(w),
            cluster,
            remaining,
        });
    }
    steps
}

fn clustering_of_steps(n: usize, steps: &[BallStep]) -> Result<Clustering> {
    let clusters: Vec<Vec<usize>> = steps.iter().map(|s| s.cluster.clone()).collect();
    Clustering::from_clusters(n, &clusters)
}

fn require_unit_instance(
    g: &SignedGraph,
    sol: &FractionalSolution,
    ok: bool,
    what: &str,
) -> Result<()> {
    if !ok {
        return Err(Error::UnsupportedInstance(format!(
            "ball growing needs a {what} graph with unit weights"
        )));
    }
    if sol.n != g.n() {
        return Err(Error::Contract(format!(
            "solution has {} vertices, graph {}",
            sol.n,
            g.n()
        )));
    }
    require_feasible(g, sol)
}

/// Ball growing on a complete unit-weight graph: repeatedly pick the
/// remaining vertex maximizing `L_t`, cluster `Ball(w, 2r)` among the
/// remaining vertices.
pub fn round_complete(
    g: &SignedGraph,
    sol: &FractionalSolution,
) -> Result<(RoundingReport, ProfitAudit)> {
    require_unit_instance(g, sol, g.is_complete_unit(), "complete")?;
    let steps = grow_balls(sol, |_| true, |_| true);
    let clustering = clustering_of_steps(g.n(), &steps)?;
    let audit = audit_profit(g, sol, &steps, Scope::All)?;
    let mut report = RoundingReport::new(g, sol, sol.q, Scope::All, clustering)?;
    report.steps = steps;
    Ok((report, audit))
}

/// Ball growing on a complete bipartite unit-weight graph: centers come from
/// the remaining L vertices and are ranked by the mass of R vertices in their
/// ball; R vertices left over at the end form one cluster.
pub fn round_bipartite(
    g: &SignedGraph,
    sol: &FractionalSolution,
) -> Result<(RoundingReport, ProfitAudit)> {
    let left = g
        .left_side()
        .ok_or_else(|| Error::Contract("bipartite rounding needs a bipartition".into()))?
        .to_vec();
    require_unit_instance(g, sol, g.is_complete_bipartite_unit(), "complete bipartite")?;
    let mut steps = grow_balls(sol, |w| left[w], |u| !left[u]);
    let placed: Vec<usize> = steps
        .iter()
        .flat_map(|s| s.cluster.iter().copied())
        .collect();
    let rest: Vec<usize> = (0..g.n()).filter(|u| !placed.contains(u)).collect();
    if !rest.is_empty() {
        steps.push(BallStep {
            center: None,
            cluster: rest.clone(),
            remaining: rest,
        });
    }
    let clustering = clustering_of_steps(g.n(), &steps)?;
    let audit = audit_profit(g, sol, &steps, Scope::Left)?;
    let mut report = RoundingReport::new(g, sol, sol.q, Scope::Left, clustering)?;
    report.steps = steps;
    Ok((report, audit))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProfitAudit {
    /// `pft(u)`.
    pub per_vertex_profit: Vec<f64>,
    /// `per_step[t][u] = prft(u, t)`.
    pub per_step: Vec<Vec<f64>>,
    /// Minimum of `pft(u)` over in-scope vertices (`+inf` if none).
    pub min_profit: f64,
    /// Minimum per-step profit of a single negative edge (`+inf` if none).
    pub min_negative_edge_profit: f64,
}

impl ProfitAudit {
    pub fn holds(&self) -> bool {
        self.min_profit >= -CHECK_TOL && self.min_negative_edge_profit >= -CHECK_TOL
    }
}

/// Recomputes the profits of a ball-growing run from its steps.
/// `LP(u,v)` is `x_uv` on positive and `1 - x_uv` on negative edges,
/// `ALG(u,v)` is 1 if the edge disagrees in the final clustering. An edge is
/// settled at the first step where one endpoint is clustered.
pub fn audit_profit(
    g: &SignedGraph,
    sol: &FractionalSolution,
    steps: &[BallStep],
    scope: Scope,
) -> Result<ProfitAudit> {
    let n = g.n();
    if sol.n != n {
        return Err(Error::Contract(format!(
            "solution has {} vertices, graph {n}",
            sol.n
        )));
    }
    let mut alive = vec![true; n];
    for (t, s) in steps.iter().enumerate() {
        let expect: Vec<usize> = (0..n).filter(|&u| alive[u]).collect();
        if s.remaining != expect {
            return Err(Error::Contract(format!(
                "step {t}: remaining set does not match the earlier clusters"
            )));
        }
        for &u in &s.cluster {
            if u >= n || !alive[u] {
                return Err(Error::Contract(format!(
                    "step {t}: vertex {u} is not available"
                )));
            }
            alive[u] = false;
        }
    }
    let clustering = clustering_of_steps(n, steps)?;
    let mask = in_scope(g, scope)?;

    let mut step_of = vec![usize::MAX; n];
    for (t, s) in steps.iter().enumerate() {
        for &u in &s.cluster {
            step_of[u] = t;
        }
    }
    let mut per_step = vec![vec![0.0; n]; steps.len()];
    let mut min_negative_edge_profit = f64::INFINITY;
    for e in g.edges() {
        if e.infinite {
            return Err(Error::Contract(
                "profit audit needs finite unit weights".into(),
            ));
        }
        let t = step_of[e.u].min(step_of[e.v]);
        let d = sol.x(e.u, e.v);
        let lp = match e.sign {
            Sign::Pos => d,
            Sign::Neg => 1.0 - d,
        };
        let alg = if e.disagrees(clustering.together(e.u, e.v)) {
            1.0
        } else {
            0.0
        };
        let p = e.weight * (lp - BALL_RADIUS * alg);
        per_step[t][e.u] += p;
        per_step[t][e.v] += p;
        if e.sign == Sign::Neg {
            min_negative_edge_profit = min_negative_edge_profit.min(p);
        }
    }
    let per_vertex_profit: Vec<f64> = (0..n)
        .map(|u| per_step.iter().map(|s| s[u]).sum())
        .collect();
    let min_profit = (0..n)
        .filter(|&u| mask[u])
        .map(|u| per_vertex_profit[u])
        .fold(f64::INFINITY, f64::min);
    Ok(ProfitAudit {
        per_vertex_profit,
        per_step,
        min_profit,
        min_negative_edge_profit,
    })
}
