//! The metric relaxation for min-`l_q` correlation clustering.
//!
//! Variables `x_uv in [0,1]` form a metric; `y_u` (and, in the full program,
//! `z_u`) are affine in `x`:
//!
//! ```text
//! y_u = sum_{uv in E+} w x_uv + sum_{uv in E-} w (1 - x_uv)
//! z_u = sum_{uv in E+} w^q x_uv + sum_{uv in E-} w^q (1 - x_uv)
//! ```
//!
//! The simple program minimizes `||y||_q`, the full one `max(||y||_q^q, sum z)`.
//! The convex term `y_u^q` is replaced by an epigraph variable `t_u` bounded
//! below by tangent lines, so the linear program under-estimates the convex
//! one and its optimum is a certified lower bound on the integral optimum.
//!
//! Everything is encoded as `max c.v, A v <= b, v >= 0` with `b >= 0`, so the
//! all-slack basis is feasible and no phase one is needed: each epigraph
//! variable is written as `t_u = W_u^q - s_u` where `W_u` is the total weight
//! at `u`, a bound on `y_u`.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::graph::{lq_norm, Clustering, Norm, Sign, SignedGraph};
use crate::math::{self, pair_count, pair_index, FEAS_TOL};
use crate::metric::MetricSpace;
use crate::simplex::{LpError, Tableau};

/// Relative right-hand-side perturbation used against degenerate pivoting.
const PERTURBATION: f64 = 1e-7;

/// Lowest tangent point as a fraction of `W_u`.
const TANGENT_RANGE: f64 = 256.0;

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    /// Number of tangent lines per vertex for `t_u >= y_u^q`.
    pub breakpoints: usize,
    /// Relative weight of `sum_u y_u` in the objective, and the refinement stopping tolerance.
    pub tol: f64,
    /// Solve the full program with `z` instead of the simple one.
    pub use_z: bool,
    /// Separate triangle inequalities lazily instead of generating all of them.
    pub lazy_triangles: bool,
    /// Rounds of adding tangents at the current `y` while
    /// `value > lower_bound * (1 + tol)`. Zero keeps the static tangent set.
    pub refine_rounds: usize,
    pub max_iterations: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            breakpoints: 16,
            tol: 1e-6,
            use_z: false,
            lazy_triangles: false,
            refine_rounds: 0,
            max_iterations: 100_000,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.breakpoints < 2 {
            return Err(Error::UnsupportedConfig(format!(
                "breakpoints = {} must be at least 2",
                self.breakpoints
            )));
        }
        if !(self.tol > 0.0) {
            return Err(Error::UnsupportedConfig(format!(
                "tol = {} must be positive",
                self.tol
            )));
        }
        Ok(())
    }
}

/// Above this size triangles are always separated lazily.
pub const EAGER_TRIANGLE_LIMIT: usize = 12;

#[derive(Clone, Debug, PartialEq)]
pub struct FractionalSolution {
    pub n: usize,
    pub q: Norm,
    /// Row-major symmetric `n x n` distance matrix.
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Option<Vec<f64>>,
    /// True objective at `x`: `||y||_q`, or `max(||y||_q^q, sum z)^(1/q)` when `z` is present.
    pub value: f64,
    /// Optimum of the linearized program, a lower bound on the integral optimum.
    pub lower_bound: f64,
    /// `||y||_q^q` (or `max y` for the max norm).
    pub y_branch: f64,
    /// `sum z` when `z` is present.
    pub z_branch: Option<f64>,
    /// Simplex pivots spent; 0 for solutions not produced by the solver.
    pub pivots: usize,
}

impl FractionalSolution {
    #[inline]
    pub fn x(&self, u: usize, v: usize) -> f64 {
        self.x[u * self.n + v]
    }

    /// Completes a distance matrix into a solution: `y` (and `z` when
    /// `with_z`) from their defining equalities, and the objective value.
    /// `lower_bound` is left at the trivial bound 0.
    pub fn from_metric(g: &SignedGraph, q: Norm, x: Vec<f64>, with_z: bool) -> Result<Self> {
        let n = g.n();
        if x.len() != n * n {
            return Err(Error::Contract(format!(
                "x has {} entries, need {}",
                x.len(),
                n * n
            )));
        }
        if with_z && q.is_inf() {
            return Err(Error::UnsupportedConfig(
                "z variables need a finite q".to_string(),
            ));
        }
        let (y, z) = bounds_from_x(g, q, &x, with_z);
        let (value, y_branch, z_branch) = objective_value(q, &y, z.as_deref());
        Ok(Self {
            n,
            q,
            x,
            y,
            z,
            value,
            lower_bound: 0.0,
            y_branch,
            z_branch,
            pivots: 0,
        })
    }

    pub fn metric(&self) -> Result<MetricSpace> {
        MetricSpace::new(self.n, self.x.clone())
    }
}

fn bounds_from_x(
    g: &SignedGraph,
    q: Norm,
    x: &[f64],
    with_z: bool,
) -> (Vec<f64>, Option<Vec<f64>>) {
    let n = g.n();
    let mut y = vec![0.0; n];
    let mut z = if with_z { Some(vec![0.0; n]) } else { None };
    let qe = q.q();
    for e in g.edges().iter().filter(|e| !e.infinite) {
        let d = x[e.u * n + e.v];
        let cost = match e.sign {
            Sign::Pos => d,
            Sign::Neg => 1.0 - d,
        };
        y[e.u] += e.weight * cost;
        y[e.v] += e.weight * cost;
        if let Some(z) = z.as_mut() {
            let wq = math::powf(e.weight, qe);
            z[e.u] += wq * cost;
            z[e.v] += wq * cost;
        }
    }
    (y, z)
}

/// Returns `(value, y_branch, z_branch)`.
fn objective_value(q: Norm, y: &[f64], z: Option<&[f64]>) -> (f64, f64, Option<f64>) {
    match q {
        Norm::Inf => {
            let v = lq_norm(y, q);
            (v, v, None)
        }
        Norm::Finite(qe) => {
            let y_branch: f64 = y.iter().map(|&v| math::powf(v, qe)).sum();
            match z {
                None => (lq_norm(y, q), y_branch, None),
                Some(z) => {
                    let z_branch: f64 = z.iter().sum();
                    (
                        math::powf(y_branch.max(z_branch), 1.0 / qe),
                        y_branch,
                        Some(z_branch),
                    )
                }
            }
        }
    }
}

/// `constant + sum coef * x_pair`.
#[derive(Clone, Debug, Default, PartialEq)]
struct Affine {
    constant: f64,
    terms: Vec<(usize, f64)>,
}

/// The relaxation for one instance, ready to be solved.
#[derive(Clone, Debug)]
pub struct RelaxationProgram {
    n: usize,
    q: Norm,
    cfg: SolverConfig,
    lazy: bool,
    y_exprs: Vec<Affine>,
    z_exprs: Option<Vec<Affine>>,
    weight_bound: Vec<f64>,
    /// Pairs joined by an infinite positive edge; pinned to distance 0.
    pinned: Vec<usize>,
    graph: SignedGraph,
}

pub fn build_program(g: &SignedGraph, q: Norm, cfg: &SolverConfig) -> Result<RelaxationProgram> {
    cfg.validate()?;
    if let Norm::Finite(qe) = q {
        if !(qe >= 1.0) {
            return Err(Error::UnsupportedConfig(format!("q = {qe} must be >= 1")));
        }
    }
    if cfg.use_z && q.is_inf() {
        return Err(Error::UnsupportedConfig(
            "the program with z variables is defined for finite q only".to_string(),
        ));
    }
    if g.edges().iter().any(|e| e.infinite && e.sign == Sign::Neg) {
        return Err(Error::UnsupportedInstance(
            "infinite negative edges are not supported by the relaxation".to_string(),
        ));
    }
    let n = g.n();
    let qe = q.q();
    let mut y_exprs = vec![Affine::default(); n];
    let mut z_exprs = cfg.use_z.then(|| vec![Affine::default(); n]);
    let mut pinned = Vec::new();
    for e in g.edges() {
        let p = pair_index(n, e.u, e.v);
        if e.infinite {
            pinned.push(p);
            continue;
        }
        let (c, s) = match e.sign {
            Sign::Pos => (0.0, 1.0),
            Sign::Neg => (1.0, -1.0),
        };
        for u in [e.u, e.v] {
            y_exprs[u].constant += e.weight * c;
            y_exprs[u].terms.push((p, e.weight * s));
            if let Some(z) = z_exprs.as_mut() {
                let wq = math::powf(e.weight, qe);
                z[u].constant += wq * c;
                z[u].terms.push((p, wq * s));
            }
        }
    }
    let weight_bound = (0..n).map(|u| g.incident_weight(u)).collect();
    Ok(RelaxationProgram {
        n,
        q,
        cfg: cfg.clone(),
        lazy: cfg.lazy_triangles || n > EAGER_TRIANGLE_LIMIT,
        y_exprs,
        z_exprs,
        weight_bound,
        pinned,
        graph: g.clone(),
    })
}

/// Builds and solves in one step.
pub fn solve(g: &SignedGraph, q: Norm, cfg: &SolverConfig) -> Result<FractionalSolution> {
    build_program(g, q, cfg)?.solve()
}

/// Tangent points `W * 256^{-(K-k)/K}` for `k = 1..=K`; doubling `K` keeps
/// every earlier point.
pub fn tangent_points(weight_bound: f64, breakpoints: usize) -> Vec<f64> {
    let k = breakpoints as f64;
    (1..=breakpoints)
        .map(|i| weight_bound * math::powf(TANGENT_RANGE, -(k - i as f64) / k))
        .collect()
}

/// Tangent counts solved in turn for `breakpoints`: halved while even and at
/// least 2, smallest first. The chain of `2K` is the chain of `K` plus `2K`.
fn breakpoint_chain(breakpoints: usize) -> Vec<usize> {
    let mut levels = vec![breakpoints];
    while levels[levels.len() - 1] % 2 == 0 && levels[levels.len() - 1] >= 4 {
        levels.push(levels[levels.len() - 1] / 2);
    }
    levels.reverse();
    levels
}

/// Divides a row by its largest coefficient magnitude.
fn normalized(mut row: Vec<(usize, f64)>, rhs: f64) -> (Vec<(usize, f64)>, f64) {
    let m = row.iter().fold(0.0, |m: f64, &(_, c)| m.max(c.abs()));
    if m == 0.0 {
        return (row, rhs);
    }
    for (_, c) in &mut row {
        *c /= m;
    }
    (row, rhs / m)
}

/// Worst relative under-estimate of `y^q` by the tangent set between two
/// adjacent tangent points (scale free). Below the lowest point the error is
/// absolute, at most `(W / 256^{1 - 1/K})^q` per vertex.
pub fn tangent_gap(q: f64, breakpoints: usize) -> f64 {
    if q == 1.0 {
        return 0.0;
    }
    let ratio = math::powf(TANGENT_RANGE, 1.0 / breakpoints as f64);
    let tangent = |a: f64, y: f64| math::powf(a, q) + q * math::powf(a, q - 1.0) * (y - a);
    // the worst point is where the two tangents cross
    let (a, b) = (1.0, ratio);
    let cross = ((q - 1.0) * (math::powf(b, q) - math::powf(a, q)))
        / (q * (math::powf(b, q - 1.0) - math::powf(a, q - 1.0)));
    math::powf(cross, q) / tangent(a, cross) - 1.0
}

/// What the linear program's objective measures and how to map it back.
struct Encoding {
    objective: Vec<f64>,
    /// minimized linear objective = offset - max value
    offset: f64,
    /// column of `s_u` for vertices with an epigraph variable
    epigraph: Vec<Option<usize>>,
}

impl RelaxationProgram {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_x_vars(&self) -> usize {
        pair_count(self.n)
    }

    pub fn num_y_vars(&self) -> usize {
        self.n
    }

    pub fn num_z_vars(&self) -> usize {
        if self.z_exprs.is_some() {
            self.n
        } else {
            0
        }
    }

    /// Triangle inequalities of the full program, one per (triple, long side).
    pub fn num_triangle_constraints(&self) -> usize {
        let n = self.n;
        if n < 3 {
            0
        } else {
            3 * (n * (n - 1) * (n - 2) / 6)
        }
    }

    pub fn is_lazy(&self) -> bool {
        self.lazy
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    fn encoding(&self) -> Encoding {
        let px = pair_count(self.n);
        match self.q {
            Norm::Inf => {
                let wmax = self.weight_bound.iter().copied().fold(0.0, f64::max);
                let mut objective = vec![0.0; px + 1];
                objective[px] = 1.0;
                Encoding {
                    objective,
                    offset: wmax,
                    epigraph: vec![None; self.n],
                }
            }
            Norm::Finite(q) if q == 1.0 && self.z_exprs.is_none() => {
                let mut objective = vec![0.0; px];
                let mut offset = 0.0;
                for y in &self.y_exprs {
                    offset += y.constant;
                    for &(p, c) in &y.terms {
                        objective[p] -= c;
                    }
                }
                Encoding {
                    objective,
                    offset,
                    epigraph: vec![None; self.n],
                }
            }
            Norm::Finite(q) => {
                let mut col = px;
                let mut epigraph = vec![None; self.n];
                if q > 1.0 {
                    for (u, slot) in epigraph.iter_mut().enumerate() {
                        if self.weight_bound[u] > 0.0 {
                            *slot = Some(col);
                            col += 1;
                        }
                    }
                }
                let mut objective = vec![0.0; col];
                let offset;
                if self.z_exprs.is_some() {
                    offset = self.sum_cap(q);
                    objective.push(offset);
                } else {
                    for (u, c) in epigraph.iter().enumerate() {
                        if let Some(c) = c {
                            objective[*c] = math::powf(self.weight_bound[u], q);
                        }
                    }
                    offset = self.weight_bound.iter().map(|&w| math::powf(w, q)).sum();
                }
                Encoding {
                    objective,
                    offset,
                    epigraph,
                }
            }
        }
    }

    /// Upper bound on both branches of the full objective.
    fn sum_cap(&self, q: f64) -> f64 {
        let y_cap: f64 = self.weight_bound.iter().map(|&w| math::powf(w, q)).sum();
        let z_cap: f64 = self
            .graph
            .edges()
            .iter()
            .filter(|e| !e.infinite)
            .map(|e| 2.0 * math::powf(e.weight, q))
            .sum();
        y_cap.max(z_cap)
    }

    fn tangent_row(&self, u: usize, col: usize, a: f64, q: f64) -> (Vec<(usize, f64)>, f64) {
        // a^q + g (y - a) <= W^q - s, with s = W^q s' and s' the column
        let w = self.weight_bound[u];
        let slope = q * math::powf(a, q - 1.0);
        let y = &self.y_exprs[u];
        let mut row: Vec<(usize, f64)> = y.terms.iter().map(|&(p, c)| (p, slope * c)).collect();
        row.push((col, math::powf(w, q)));
        let rhs = math::powf(w, q) - math::powf(a, q) - slope * (y.constant - a);
        normalized(row, rhs.max(0.0))
    }

    fn static_rows(&self, enc: &Encoding, breakpoints: usize) -> Vec<(Vec<(usize, f64)>, f64)> {
        let n = self.n;
        let px = pair_count(n);
        let mut rows = Vec::new();
        for p in 0..px {
            rows.push((vec![(p, 1.0)], 1.0));
        }
        for &p in &self.pinned {
            rows.push((vec![(p, 1.0)], 0.0));
        }
        match self.q {
            Norm::Inf => {
                let wmax = enc.offset;
                for y in &self.y_exprs {
                    let mut row = y.terms.clone();
                    row.push((px, 1.0));
                    rows.push((row, (wmax - y.constant).max(0.0)));
                }
                rows.push((vec![(px, 1.0)], wmax));
            }
            Norm::Finite(q) => {
                for (u, col) in enc.epigraph.iter().enumerate() {
                    let Some(col) = *col else { continue };
                    rows.push((vec![(col, 1.0)], 1.0));
                    for a in tangent_points(self.weight_bound[u], breakpoints) {
                        rows.push(self.tangent_row(u, col, a, q));
                    }
                }
                if let Some(z_exprs) = &self.z_exprs {
                    let sigma = enc.objective.len() - 1;
                    let cap = enc.offset;
                    // sum t <= S
                    if q > 1.0 {
                        let mut row = vec![(sigma, cap)];
                        let mut w_sum = 0.0;
                        for (u, col) in enc.epigraph.iter().enumerate() {
                            if let Some(col) = col {
                                let wq = math::powf(self.weight_bound[u], q);
                                row.push((*col, -wq));
                                w_sum += wq;
                            }
                        }
                        rows.push(normalized(row, (cap - w_sum).max(0.0)));
                    } else {
                        rows.push(self.sum_row(&self.y_exprs, sigma, cap));
                    }
                    // sum z <= S
                    rows.push(self.sum_row(z_exprs, sigma, cap));
                    rows.push((vec![(sigma, 1.0)], 1.0));
                }
            }
        }
        if !self.lazy {
            for a in 0..n {
                for b in a + 1..n {
                    for c in b + 1..n {
                        let (ab, ac, bc) = (
                            pair_index(n, a, b),
                            pair_index(n, a, c),
                            pair_index(n, b, c),
                        );
                        rows.push((vec![(ac, 1.0), (ab, -1.0), (bc, -1.0)], 0.0));
                        rows.push((vec![(ab, 1.0), (ac, -1.0), (bc, -1.0)], 0.0));
                        rows.push((vec![(bc, 1.0), (ab, -1.0), (ac, -1.0)], 0.0));
                    }
                }
            }
        }
        rows
    }

    fn sum_row(&self, exprs: &[Affine], sigma: usize, cap: f64) -> (Vec<(usize, f64)>, f64) {
        let mut dense = vec![0.0; pair_count(self.n)];
        let mut constant = 0.0;
        for e in exprs {
            constant += e.constant;
            for &(p, c) in &e.terms {
                dense[p] += c;
            }
        }
        let mut row: Vec<(usize, f64)> = dense
            .into_iter()
            .enumerate()
            .filter(|(_, c)| *c != 0.0)
            .collect();
        row.push((sigma, cap));
        normalized(row, (cap - constant).max(0.0))
    }

    fn distance_matrix(&self, lp_x: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x = vec![0.0; n * n];
        for u in 0..n {
            for v in u + 1..n {
                let d = lp_x[pair_index(n, u, v)].clamp(0.0, 1.0);
                x[u * n + v] = d;
                x[v * n + u] = d;
            }
        }
        x
    }

    /// Violated triangles `x_ac > x_ab + x_bc + FEAS_TOL`, most violated first.
    fn separate(&self, lp_x: &[f64], limit: usize) -> Vec<(Vec<(usize, f64)>, f64)> {
        let n = self.n;
        let mut found: Vec<(f64, [usize; 3])> = Vec::new();
        for a in 0..n {
            for c in a + 1..n {
                let ac = pair_index(n, a, c);
                for b in 0..n {
                    if b == a || b == c {
                        continue;
                    }
                    let ab = pair_index(n, a.min(b), a.max(b));
                    let bc = pair_index(n, b.min(c), b.max(c));
                    let gap = lp_x[ac] - lp_x[ab] - lp_x[bc];
                    if gap > FEAS_TOL {
                        found.push((gap, [ac, ab, bc]));
                    }
                }
            }
        }
        found.sort_by(|a, b| b.0.total_cmp(&a.0));
        found.truncate(limit);
        found
            .into_iter()
            .map(|(_, [ac, ab, bc])| (vec![(ac, 1.0), (ab, -1.0), (bc, -1.0)], 0.0))
            .collect()
    }

    fn finish(&self, lp_x: &[f64], lp_value: f64, enc: &Encoding) -> Result<FractionalSolution> {
        let x = MetricSpace::closure(self.n, self.distance_matrix(lp_x), 1.0);
        let mut sol = FractionalSolution::from_metric(
            &self.graph,
            self.q,
            x.matrix().to_vec(),
            self.z_exprs.is_some(),
        )?;
        let linear_min = (enc.offset - lp_value).max(0.0);
        let lb = match self.q {
            Norm::Inf => linear_min,
            Norm::Finite(q) => math::powf(linear_min, 1.0 / q),
        };
        // a feasible point's true objective can never be below the LP bound
        sol.lower_bound = lb.min(sol.value);
        Ok(sol)
    }

    fn failure(&self, t: &Tableau, enc: &Encoding, err: LpError) -> Error {
        let best = self
            .finish(&t.solution(), f64::NEG_INFINITY, enc)
            .ok()
            .map(|mut s| {
                s.lower_bound = 0.0;
                Box::new(s)
            });
        Error::SolverFailure {
            iterations: t.iterations(),
            reason: format!("{err:?}"),
            best,
        }
    }

    fn separate_until_clean(&self, t: &mut Tableau, enc: &Encoding) -> Result<()> {
        if !self.lazy {
            return Ok(());
        }
        let limit = pair_count(self.n).max(1);
        loop {
            let cuts = self.separate(&t.solution(), limit);
            if cuts.is_empty() {
                return Ok(());
            }
            for (row, rhs) in cuts {
                t.add_row(&row, rhs);
            }
            t.reoptimize().map_err(|e| self.failure(t, enc, e))?;
        }
    }

    /// Solves the linearized program with `tol`-scaled weight on `sum_u y_u`
    /// added to the objective. Tangent cuts leave `t_u` free of charge for
    /// small `y_u`; without the extra term the solver may return an arbitrary
    /// point of that flat region. The lower bound is corrected by the largest
    /// amount the extra term can contribute.
    ///
    /// Tangents are added level by level along [`breakpoint_chain`] and the
    /// point with the smallest true objective is kept, so doubling
    /// `breakpoints` never raises `value` and never lowers `lower_bound`.
    pub fn solve(&self) -> Result<FractionalSolution> {
        let enc = self.encoding();
        let sum_y_is_objective = self.q == Norm::L1 && self.z_exprs.is_none();
        let mut objective = enc.objective.clone();
        let mut correction = 0.0;
        if !sum_y_is_objective {
            let y_cap: f64 = self.weight_bound.iter().sum();
            let eps = self.cfg.tol * enc.offset.max(1.0) / y_cap.max(1.0);
            let constant: f64 = self.y_exprs.iter().map(|y| y.constant).sum();
            for y in &self.y_exprs {
                for &(p, c) in &y.terms {
                    objective[p] -= eps * c;
                }
            }
            // value = c.v - eps (sum y - constant) and sum y <= y_cap
            correction = eps * (y_cap - constant);
        }
        let scale = objective
            .iter()
            .fold(0.0, |m: f64, c| m.max(c.abs()))
            .max(f64::MIN_POSITIVE);
        let scaled: Vec<f64> = objective.iter().map(|c| c / scale).collect();
        let has_tangents = enc.epigraph.iter().any(Option::is_some);
        let levels = if has_tangents {
            breakpoint_chain(self.cfg.breakpoints)
        } else {
            vec![self.cfg.breakpoints]
        };
        let mut t = Tableau::new(&scaled, self.cfg.max_iterations);
        for (row, rhs) in self.static_rows(&enc, levels[0]) {
            t.add_row(&row, rhs);
        }
        t.primal_perturbed(PERTURBATION)
            .map_err(|e| self.failure(&t, &enc, e))?;
        self.separate_until_clean(&mut t, &enc)?;
        let bound = |t: &Tableau| t.value() * scale + correction;
        let mut current = self.finish(&t.solution(), bound(&t), &enc)?;
        let mut best = current.clone();

        if let Norm::Finite(q) = self.q {
            for &level in &levels[1..] {
                // the even-indexed points of `level` are the previous level's
                for (u, col) in enc.epigraph.iter().enumerate() {
                    let Some(col) = *col else { continue };
                    for a in tangent_points(self.weight_bound[u], level)
                        .into_iter()
                        .step_by(2)
                    {
                        let (row, rhs) = self.tangent_row(u, col, a, q);
                        t.add_row(&row, rhs);
                    }
                }
                t.reoptimize().map_err(|e| self.failure(&t, &enc, e))?;
                self.separate_until_clean(&mut t, &enc)?;
                current = self.finish(&t.solution(), bound(&t), &enc)?;
                if current.value < best.value {
                    best = current.clone();
                }
            }
            for _ in 0..self.cfg.refine_rounds {
                if current.value <= current.lower_bound * (1.0 + self.cfg.tol) {
                    break;
                }
                let lp_y = self.lp_y(&t.solution());
                for (u, col) in enc.epigraph.iter().enumerate() {
                    if let Some(col) = *col {
                        if lp_y[u] > 0.0 {
                            let (row, rhs) = self.tangent_row(u, col, lp_y[u], q);
                            t.add_row(&row, rhs);
                        }
                    }
                }
                t.reoptimize().map_err(|e| self.failure(&t, &enc, e))?;
                self.separate_until_clean(&mut t, &enc)?;
                current = self.finish(&t.solution(), bound(&t), &enc)?;
                if current.value < best.value {
                    best = current.clone();
                }
            }
        }
        // the last program is the tightest, so its bound holds for every point
        best.lower_bound = current.lower_bound.min(best.value);
        best.pivots = t.iterations();
        Ok(best)
    }

    /// The linearized objective at a feasible point, on the same scale as
    /// [`FractionalSolution::value`]. Tangents under-estimate `y^q`, so this
    /// never exceeds the true objective.
    pub fn linearized_value(&self, sol: &FractionalSolution) -> f64 {
        match self.q {
            Norm::Inf => sol.y.iter().copied().fold(0.0, f64::max),
            Norm::Finite(q) => {
                let mut total = 0.0;
                for (u, &y) in sol.y.iter().enumerate() {
                    let w = self.weight_bound[u];
                    if w <= 0.0 {
                        continue;
                    }
                    let t = if q == 1.0 {
                        y
                    } else {
                        tangent_points(w, self.cfg.breakpoints)
                            .into_iter()
                            .map(|a| math::powf(a, q) + q * math::powf(a, q - 1.0) * (y - a))
                            .fold(0.0, f64::max)
                    };
                    total += t;
                }
                if let Some(z) = &sol.z {
                    total = total.max(z.iter().sum());
                }
                math::powf(total, 1.0 / q)
            }
        }
    }

    fn lp_y(&self, lp_x: &[f64]) -> Vec<f64> {
        self.y_exprs
            .iter()
            .map(|y| y.constant + y.terms.iter().map(|&(p, c)| c * lp_x[p]).sum::<f64>())
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ViolationKind {
    Shape,
    Diagonal {
        u: usize,
    },
    Symmetry {
        u: usize,
        v: usize,
    },
    /// `x_uv` outside `[0, 1]`.
    Range {
        u: usize,
        v: usize,
    },
    /// `x_ac > x_ab + x_bc`.
    Triangle {
        a: usize,
        b: usize,
        c: usize,
    },
    /// `y_u` differs from its defining expression.
    YBound {
        u: usize,
    },
    /// `z_u` differs from its defining expression.
    ZBound {
        u: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub magnitude: f64,
}

/// Every constraint of the program violated by more than [`FEAS_TOL`].
pub fn check_feasible(sol: &FractionalSolution, g: &SignedGraph, q: Norm) -> Vec<Violation> {
    let n = g.n();
    let mut out = Vec::new();
    let mut push = |kind, magnitude: f64| {
        if magnitude > FEAS_TOL {
            out.push(Violation { kind, magnitude });
        }
    };
    if sol.n != n || sol.x.len() != n * n || sol.y.len() != n {
        push(ViolationKind::Shape, f64::INFINITY);
        return out;
    }
    let x = |u: usize, v: usize| sol.x[u * n + v];
    for u in 0..n {
        push(ViolationKind::Diagonal { u }, x(u, u).abs());
        for v in u + 1..n {
            push(ViolationKind::Symmetry { u, v }, (x(u, v) - x(v, u)).abs());
            let d = x(u, v);
            push(ViolationKind::Range { u, v }, (-d).max(d - 1.0));
        }
    }
    for a in 0..n {
        for c in a + 1..n {
            for b in 0..n {
                if b != a && b != c {
                    push(
                        ViolationKind::Triangle { a, b, c },
                        x(a, c) - x(a, b) - x(b, c),
                    );
                }
            }
        }
    }
    let (y, z) = bounds_from_x(g, q, &sol.x, sol.z.is_some() && !q.is_inf());
    for (u, (have, want)) in sol.y.iter().zip(&y).enumerate() {
        push(ViolationKind::YBound { u }, (have - want).abs());
    }
    if let (Some(have), Some(want)) = (&sol.z, &z) {
        for (u, w) in want.iter().enumerate() {
            let h = have.get(u).copied().unwrap_or(f64::INFINITY);
            push(ViolationKind::ZBound { u }, (h - w).abs());
        }
    }
    out
}

/// The integral solution of a clustering: `x_uv = 0` inside clusters and 1
/// across, `y`, `z` from their defining equalities.
pub fn embed_integral(c: &Clustering, g: &SignedGraph, q: Norm) -> Result<FractionalSolution> {
    let n = g.n();
    if c.len() != n {
        return Err(Error::Contract(format!(
            "clustering covers {} of {n} vertices",
            c.len()
        )));
    }
    let mut x = vec![0.0; n * n];
    for u in 0..n {
        for v in 0..n {
            if !c.together(u, v) {
                x[u * n + v] = 1.0;
            }
        }
    }
    let mut sol = FractionalSolution::from_metric(g, q, x, !q.is_inf())?;
    // z_u <= y_u^q for integral points, so the max is the y branch
    sol.value = lq_norm(&sol.y, q);
    Ok(sol)
}
