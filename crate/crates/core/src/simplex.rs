//! Dense condensed-tableau simplex for `max c.v  s.t.  A v <= b, v >= 0`.
//!
//! Each row stores a basic variable as `basic = rhs - sum_j a_j * nonbasic_j`,
//! so the tableau has one column per structural variable regardless of the
//! number of rows. Rows may be appended after a solve; a violated new row is
//! repaired with dual simplex pivots, which is how lazily separated
//! constraints are handled.
//!
//! Pricing is Dantzig's rule; after a run of degenerate pivots the solver
//! switches to Bland's rule until it makes progress again. Ratio tests are
//! Harris-style two-pass tests. The tableau is rebuilt from the original rows
//! every [`REFACTOR_EVERY`] pivots and before a run reports optimality.

use alloc::vec;
use alloc::vec::Vec;

/// Pivot elements and reduced costs smaller than this are treated as zero.
const PIVOT_EPS: f64 = 1e-9;
/// Primal infeasibility (negative rhs) tolerated at optimality.
const FEAS_EPS: f64 = 1e-9;
/// Consecutive degenerate pivots before switching to Bland's rule.
const DEGENERATE_RUN: usize = 64;
/// Pivots between rebuilds of the tableau from the original rows.
const REFACTOR_EVERY: usize = 1000;
/// Bound relaxation of the first pass of the ratio tests.
const HARRIS_TOL: f64 = 1e-9;
/// Relative size of the cost perturbation in [`Tableau::reoptimize`].
const PERTURBATION: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpError {
    IterationLimit,
    Unbounded,
    Infeasible,
}

#[derive(Clone, Debug)]
pub struct Tableau {
    rows: Vec<Vec<f64>>,
    /// `obj[j] = -reduced cost of nonbasic j`, `obj[width] = objective value`.
    obj: Vec<f64>,
    basic: Vec<usize>,
    nonbasic: Vec<usize>,
    /// Variable label (structural, then one slack per row) -> (is_basic, row or column).
    position: Vec<(bool, usize)>,
    n_struct: usize,
    iterations: usize,
    max_iterations: usize,
    /// Rows as added (with any rhs shifts), for refactorization.
    original: Vec<(Vec<(usize, f64)>, f64)>,
    cost: Vec<f64>,
    since_refactor: usize,
}

impl Tableau {
    /// An empty program over `objective.len()` non-negative variables.
    pub fn new(objective: &[f64], max_iterations: usize) -> Self {
        let n = objective.len();
        let mut obj: Vec<f64> = objective.iter().map(|c| -c).collect();
        obj.push(0.0);
        Self {
            rows: Vec::new(),
            obj,
            basic: Vec::new(),
            nonbasic: (0..n).collect(),
            position: (0..n).map(|j| (false, j)).collect(),
            n_struct: n,
            iterations: 0,
            max_iterations,
            original: Vec::new(),
            cost: objective.to_vec(),
            since_refactor: 0,
        }
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Appends `sum coeffs <= rhs`, re-expressed in the current nonbasic
    /// variables. Returns the new row's slack value at the current point; a
    /// negative value means the row is violated and needs [`Tableau::dual`].
    pub fn add_row(&mut self, coeffs: &[(usize, f64)], rhs: f64) -> f64 {
        let width = self.n_struct;
        let mut row = vec![0.0; width + 1];
        row[width] = rhs;
        for &(var, a) in coeffs {
            match self.position[var] {
                (false, col) => row[col] += a,
                (true, r) => {
                    let src = &self.rows[r];
                    for (dst, &s) in row.iter_mut().zip(src) {
                        *dst -= a * s;
                    }
                }
            }
        }
        let slack = row[width];
        self.original.push((coeffs.to_vec(), rhs));
        self.cost.push(0.0);
        let label = self.n_struct + self.rows.len();
        self.basic.push(label);
        self.position.push((true, self.rows.len()));
        self.rows.push(row);
        slack
    }

    /// Replaces the objective, keeping the current basis. Follow with
    /// [`Tableau::primal`] to reoptimize.
    pub fn set_objective(&mut self, objective: &[f64]) {
        let width = self.n_struct;
        assert_eq!(objective.len(), width);
        self.cost[..width].copy_from_slice(objective);
        self.cost[width..].fill(0.0);
        self.rebuild_objective();
    }

    /// Recomputes the objective row from `cost` (indexed by label).
    fn rebuild_objective(&mut self) {
        let width = self.n_struct;
        let mut obj = vec![0.0; width + 1];
        for (k, &var) in self.nonbasic.iter().enumerate() {
            obj[k] = -self.cost[var];
        }
        for (r, &var) in self.basic.iter().enumerate() {
            let c = self.cost[var];
            if c != 0.0 {
                for (dst, &a) in obj.iter_mut().zip(&self.rows[r]) {
                    *dst += c * a;
                }
            }
        }
        self.obj = obj;
    }

    /// Adds `delta` to the right-hand side of row `row` (in insertion order)
    /// without changing the basis. The basis may become primal infeasible.
    pub fn shift_rhs(&mut self, row: usize, delta: f64) {
        let width = self.n_struct;
        self.original[row].1 += delta;
        match self.position[width + row] {
            (true, r) => self.rows[r][width] += delta,
            (false, k) => {
                for r in self.rows.iter_mut() {
                    r[width] += r[k] * delta;
                }
                self.obj[width] += self.obj[k] * delta;
            }
        }
    }

    /// Primal simplex on a copy of the program whose right-hand sides are
    /// pushed out by tiny distinct amounts, then the exact right-hand sides
    /// are restored and the basis repaired. Programs where many constraints
    /// are tight at the same vertex (rhs 0 rows at the origin) otherwise stall
    /// in long runs of degenerate pivots.
    pub fn primal_perturbed(&mut self, scale: f64) -> Result<(), LpError> {
        let width = self.n_struct;
        let deltas: Vec<f64> = (0..self.rows.len())
            .map(|i| {
                let (_, r) = self.position[width + i];
                let b = if self.position[width + i].0 {
                    self.rows[r][width].abs()
                } else {
                    0.0
                };
                scale * (1.0 + unit_hash(i as u64)) * b.max(1.0)
            })
            .collect();
        for (i, &d) in deltas.iter().enumerate() {
            self.shift_rhs(i, d);
        }
        let run = self.primal();
        for (i, &d) in deltas.iter().enumerate() {
            self.shift_rhs(i, -d);
        }
        run?;
        self.reoptimize()
    }

    /// Objective value at the current basis.
    pub fn value(&self) -> f64 {
        self.obj[self.n_struct]
    }

    /// Values of the structural variables at the current basis.
    pub fn solution(&self) -> Vec<f64> {
        let width = self.n_struct;
        self.position[..width]
            .iter()
            .map(|&(is_basic, idx)| {
                if is_basic {
                    self.rows[idx][width].max(0.0)
                } else {
                    0.0
                }
            })
            .collect()
    }

    fn pivot(&mut self, p: usize, q: usize) {
        self.iterations += 1;
        self.since_refactor += 1;
        let width = self.n_struct;
        let piv = self.rows[p][q];
        let mut prow = core::mem::take(&mut self.rows[p]);
        for (j, a) in prow.iter_mut().enumerate() {
            *a = if j == q { 1.0 / piv } else { *a / piv };
        }
        let nz: Vec<usize> = (0..=width).filter(|&j| prow[j] != 0.0).collect();
        let update = |row: &mut Vec<f64>| {
            let f = row[q];
            if f != 0.0 {
                row[q] = 0.0;
                for &j in &nz {
                    row[j] -= f * prow[j];
                }
            }
        };
        for row in self.rows.iter_mut() {
            if !row.is_empty() {
                update(row);
            }
        }
        update(&mut self.obj);
        self.rows[p] = prow;

        let entering = self.nonbasic[q];
        let leaving = self.basic[p];
        self.basic[p] = entering;
        self.nonbasic[q] = leaving;
        self.position[entering] = (true, p);
        self.position[leaving] = (false, q);
    }

    /// Primal simplex from a primal feasible basis.
    pub fn primal(&mut self) -> Result<(), LpError> {
        let width = self.n_struct;
        let mut degenerate = 0usize;
        loop {
            if self.iterations >= self.max_iterations {
                return Err(LpError::IterationLimit);
            }
            if self.since_refactor >= REFACTOR_EVERY {
                self.refactor();
            }
            let bland = degenerate >= DEGENERATE_RUN;
            let entering = if bland {
                (0..width)
                    .filter(|&j| self.obj[j] < -PIVOT_EPS)
                    .min_by_key(|&j| self.nonbasic[j])
            } else {
                let mut norms = vec![1.0; width];
                for r in &self.rows {
                    for (n, a) in norms.iter_mut().zip(r) {
                        *n += a * a;
                    }
                }
                (0..width)
                    .filter(|&j| self.obj[j] < -PIVOT_EPS)
                    .max_by(|&a, &b| {
                        (self.obj[a] * self.obj[a] / norms[a])
                            .total_cmp(&(self.obj[b] * self.obj[b] / norms[b]))
                    })
            };
            let Some(q) = entering else {
                if self.since_refactor > 0 && self.refactor() {
                    continue;
                }
                return Ok(());
            };

            let candidates = self
                .rows
                .iter()
                .enumerate()
                .filter(|(_, r)| r[q] > PIVOT_EPS);
            let bound = candidates
                .clone()
                .map(|(_, r)| (r[width].max(0.0) + HARRIS_TOL) / r[q])
                .fold(f64::INFINITY, f64::min);
            if bound == f64::INFINITY {
                return Err(LpError::Unbounded);
            }
            let mut best: Option<(usize, f64)> = None;
            for (i, r) in candidates {
                let ratio = r[width].max(0.0) / r[q];
                if ratio > bound {
                    continue;
                }
                let better = match best {
                    None => true,
                    Some((bi, br)) if bland => {
                        ratio < br - 1e-12
                            || (ratio <= br + 1e-12 && self.basic[i] < self.basic[bi])
                    }
                    Some((bi, _)) => r[q] > self.rows[bi][q],
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            let (p, ratio) = best.expect("the bound is attained");
            if ratio <= 1e-12 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            self.pivot(p, q);
        }
    }

    /// Dual simplex from a dual feasible basis; restores primal feasibility.
    pub fn dual(&mut self) -> Result<(), LpError> {
        let width = self.n_struct;
        let mut stalled = 0usize;
        loop {
            if self.iterations >= self.max_iterations {
                return Err(LpError::IterationLimit);
            }
            if self.since_refactor >= REFACTOR_EVERY {
                self.refactor();
            }
            let bland = stalled >= DEGENERATE_RUN;
            let leaving = if bland {
                (0..self.rows.len())
                    .filter(|&i| self.rows[i][width] < -FEAS_EPS)
                    .min_by_key(|&i| self.basic[i])
            } else {
                (0..self.rows.len())
                    .filter(|&i| self.rows[i][width] < -FEAS_EPS)
                    .map(|i| {
                        let r = &self.rows[i];
                        let norm: f64 = 1.0 + r[..width].iter().map(|a| a * a).sum::<f64>();
                        (i, r[width] * r[width] / norm)
                    })
                    .max_by(|a, b| a.1.total_cmp(&b.1))
                    .map(|(i, _)| i)
            };
            let Some(p) = leaving else {
                if self.since_refactor > 0 && self.refactor() {
                    continue;
                }
                return Ok(());
            };
            let row = &self.rows[p];
            let candidates = (0..width).filter(|&j| row[j] < -PIVOT_EPS);
            let bound = candidates
                .clone()
                .map(|j| (self.obj[j].max(0.0) + HARRIS_TOL) / -row[j])
                .fold(f64::INFINITY, f64::min);
            if bound == f64::INFINITY {
                return Err(LpError::Infeasible);
            }
            let mut best: Option<(usize, f64)> = None;
            for j in candidates {
                let ratio = self.obj[j].max(0.0) / -row[j];
                if ratio > bound {
                    continue;
                }
                let better = match best {
                    None => true,
                    Some((bj, br)) if bland => {
                        ratio < br - 1e-12
                            || (ratio <= br + 1e-12 && self.nonbasic[j] < self.nonbasic[bj])
                    }
                    Some((bj, _)) => -row[j] > -row[bj],
                };
                if better {
                    best = Some((j, ratio));
                }
            }
            let (q, ratio) = best.expect("the bound is attained");
            if ratio <= 1e-12 {
                stalled += 1;
            } else {
                stalled = 0;
            }
            self.pivot(p, q);
        }
    }

    /// Recomputes every tableau entry from the original rows for the current
    /// basis, discarding accumulated rounding error. Returns `false` (and
    /// keeps the tableau) if the basis matrix is numerically singular.
    fn refactor(&mut self) -> bool {
        self.since_refactor = 0;
        let width = self.n_struct;
        // basic structurals, and rows whose slack is nonbasic
        let structural: Vec<usize> = self.basic.iter().copied().filter(|&v| v < width).collect();
        let tight: Vec<usize> = self
            .nonbasic
            .iter()
            .filter(|&&v| v >= width)
            .map(|&v| v - width)
            .collect();
        let k = structural.len();
        debug_assert_eq!(k, tight.len());
        let mut slot = vec![usize::MAX; width];
        for (i, &v) in structural.iter().enumerate() {
            slot[v] = i;
        }
        // [B | raw] with B the basis columns of the tight rows
        let cols = k + width + 1;
        let mut aug = vec![0.0; k * cols];
        for (a, &r) in tight.iter().enumerate() {
            let line = &mut aug[a * cols..(a + 1) * cols];
            for &(var, c) in &self.original[r].0 {
                match self.position[var] {
                    (false, col) => line[k + col] += c,
                    (true, _) => line[slot[var]] += c,
                }
            }
            line[k + self.position[width + r].1] = 1.0;
            line[k + width] = self.original[r].1;
        }
        for c in 0..k {
            let piv = (c..k)
                .max_by(|&a, &b| aug[a * cols + c].abs().total_cmp(&aug[b * cols + c].abs()))
                .expect("non-empty range");
            if aug[piv * cols + c].abs() < 1e-11 {
                return false;
            }
            if piv != c {
                for j in 0..cols {
                    aug.swap(piv * cols + j, c * cols + j);
                }
            }
            let inv = 1.0 / aug[c * cols + c];
            for j in c..cols {
                aug[c * cols + j] *= inv;
            }
            let (head, tail) = aug.split_at_mut(c * cols);
            let (pivot_row, tail) = tail.split_at_mut(cols);
            for line in head
                .chunks_exact_mut(cols)
                .chain(tail.chunks_exact_mut(cols))
            {
                let f = line[c];
                if f != 0.0 {
                    for j in c..cols {
                        line[j] -= f * pivot_row[j];
                    }
                }
            }
        }
        let solved = |i: usize| &aug[i * cols + k..(i + 1) * cols];
        for p in 0..self.rows.len() {
            let var = self.basic[p];
            if var < width {
                self.rows[p].copy_from_slice(solved(slot[var]));
            } else {
                let (coeffs, rhs) = &self.original[var - width];
                let row = &mut self.rows[p];
                row.fill(0.0);
                row[width] = *rhs;
                for &(v, c) in coeffs {
                    match self.position[v] {
                        (false, col) => row[col] += c,
                        (true, _) => {
                            for (dst, &s) in row.iter_mut().zip(solved(slot[v])) {
                                *dst -= c * s;
                            }
                        }
                    }
                }
            }
        }
        self.rebuild_objective();
        true
    }

    /// Restores optimality after rows were added: dual pivots to regain
    /// feasibility, then primal pivots to clean up reduced costs that drifted
    /// below zero. The dual phase runs on costs lowered by tiny distinct
    /// amounts, since objectives that ignore most variables leave the dual
    /// ratio test tied almost everywhere.
    pub fn reoptimize(&mut self) -> Result<(), LpError> {
        let scale = PERTURBATION * self.cost.iter().fold(1.0, |m: f64, c| m.max(c.abs()));
        let saved = self.cost.clone();
        for &var in &self.nonbasic {
            self.cost[var] -= scale * (1.0 + unit_hash(var as u64));
        }
        self.rebuild_objective();
        let run = self.dual();
        self.cost = saved;
        self.rebuild_objective();
        run?;
        self.primal()
    }
}

/// A fixed pseudo-random value in `[0, 1)`.
fn unit_hash(i: u64) -> f64 {
    (crate::seed::derive_seed(0x5eed, i) >> 11) as f64 / (1u64 << 53) as f64
}
