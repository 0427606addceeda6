//! JSON reports written by the commands. Every top-level report carries
//! `"schema": 1`.

use corrclust_core::decomposition::DecompositionTrace;
use corrclust_core::rounding::{BallStep, ProfitAudit, RoundingReport};
use serde::Serialize;

use crate::io::QValue;

pub const SCHEMA: u32 = 1;

#[derive(Clone, Debug, Serialize)]
pub struct LpSummary {
    pub value: f64,
    pub lower_bound: f64,
    pub y_branch: f64,
    pub z_branch: Option<f64>,
    pub pivots: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct AttemptDump {
    pub eps: f64,
    /// Largest accepted boundary size.
    #[serde(rename = "M")]
    pub cap: f64,
    pub boundary_size: usize,
    pub success: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceDump {
    pub attempts: Vec<AttemptDump>,
    pub fallback: bool,
}

impl From<&DecompositionTrace> for TraceDump {
    fn from(t: &DecompositionTrace) -> Self {
        Self {
            attempts: t
                .attempts
                .iter()
                .map(|a| AttemptDump {
                    eps: a.eps,
                    cap: a.cap,
                    boundary_size: a.boundary_size,
                    success: a.success,
                })
                .collect(),
            fallback: t.fallback,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FallbackCheck {
    pub cut_norm: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GeneralDump {
    pub decomposition: TraceDump,
    pub max_diameter: f64,
    pub negative_slack: f64,
    /// Present when the threshold fallback produced the clustering.
    pub fallback: Option<FallbackCheck>,
}

#[derive(Clone, Debug, Serialize)]
pub struct StepDump {
    pub center: Option<usize>,
    pub cluster: Vec<usize>,
}

impl From<&BallStep> for StepDump {
    fn from(s: &BallStep) -> Self {
        Self {
            center: s.center,
            cluster: s.cluster.clone(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AuditDump {
    pub per_vertex_profit: Vec<f64>,
    pub per_step: Vec<Vec<f64>>,
    pub min_profit: f64,
    pub min_negative_edge_profit: f64,
}

impl From<&ProfitAudit> for AuditDump {
    fn from(a: &ProfitAudit) -> Self {
        Self {
            per_vertex_profit: a.per_vertex_profit.clone(),
            per_step: a.per_step.clone(),
            min_profit: a.min_profit,
            min_negative_edge_profit: a.min_negative_edge_profit,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TrialReport {
    pub trial: usize,
    pub seed: Option<u64>,
    pub clustering: Vec<usize>,
    pub objective: f64,
    /// `objective / lp value`.
    pub ratio_to_lp: f64,
    pub ratio_per_vertex: f64,
    pub per_vertex_alg: Vec<f64>,
    pub steps: Option<Vec<StepDump>>,
    pub audit: Option<AuditDump>,
    pub general: Option<GeneralDump>,
    pub failures: Vec<String>,
}

impl TrialReport {
    pub fn new(trial: usize, seed: Option<u64>, r: &RoundingReport, lp_value: f64) -> Self {
        Self {
            trial,
            seed,
            clustering: r.clustering.assignment().to_vec(),
            objective: r.objective,
            ratio_to_lp: corrclust_core::oracle::ratio_or_one(r.objective, lp_value),
            ratio_per_vertex: r.ratio_per_vertex,
            per_vertex_alg: r.per_vertex_alg.values.clone(),
            steps: None,
            audit: None,
            general: None,
            failures: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RoundSummary {
    pub trials: usize,
    pub min_objective: f64,
    pub mean_objective: f64,
    pub max_ratio_to_lp: f64,
    pub fallbacks: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct RoundReport {
    pub schema: u32,
    pub mode: String,
    pub q: QValue,
    pub n: usize,
    pub lp: LpSummary,
    pub summary: RoundSummary,
    pub trials: Vec<TrialReport>,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExactReport {
    pub schema: u32,
    pub kind: String,
    pub q: QValue,
    pub n: usize,
    pub value: f64,
    pub clustering: Vec<usize>,
    pub enumerated: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GapReport {
    pub schema: u32,
    pub a: usize,
    pub b: usize,
    pub q: QValue,
    pub vertices: usize,
    pub edges: usize,
    pub lp_formula_value: f64,
    /// Objective of the constructed fractional solution, recomputed from `x`.
    pub lp_solution_value: f64,
    pub feasibility_violations: usize,
    pub x_st: f64,
    pub opt_oracle_value: Option<f64>,
    pub ratio: Option<f64>,
    pub passed: bool,
    pub failures: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SatCheck {
    pub satisfiable: bool,
    pub cut_value: f64,
    pub cut: Vec<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReduceReport {
    pub schema: u32,
    pub num_vars: usize,
    pub num_clauses: usize,
    pub vertices: usize,
    pub edges: usize,
    pub infinite_edges: usize,
    pub expected_vertices: usize,
    pub expected_edges: usize,
    pub verify: Option<SatCheck>,
    pub passed: bool,
    pub failures: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub schema: u32,
    pub n: usize,
    pub q: QValue,
    pub mode: String,
    pub lp: LpSummary,
    pub feasibility_violations: usize,
    pub opt: Option<f64>,
    pub rounding: RoundReport,
    pub passed: bool,
    pub failures: Vec<String>,
}
