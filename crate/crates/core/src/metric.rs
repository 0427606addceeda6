//! Finite metric spaces stored as dense distance matrices.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::FEAS_TOL;

#[derive(Clone, Debug, PartialEq)]
pub struct MetricSpace {
    n: usize,
    d: Vec<f64>,
}

impl MetricSpace {
    /// Validates symmetry (exact), zero diagonal, non-negativity and the
    /// triangle inequality up to [`FEAS_TOL`].
    pub fn new(n: usize, d: Vec<f64>) -> Result<Self> {
        if d.len() != n * n {
            return Err(Error::Contract(format!(
                "distance matrix has {} entries, need {}",
                d.len(),
                n * n
            )));
        }
        for u in 0..n {
            if d[u * n + u] != 0.0 {
                return Err(Error::Contract(format!("d({u},{u}) != 0")));
            }
            for v in 0..n {
                let x = d[u * n + v];
                if !(x.is_finite() && x >= 0.0) {
                    return Err(Error::Contract(format!(
                        "d({u},{v}) = {x} is not a distance"
                    )));
                }
                if x != d[v * n + u] {
                    return Err(Error::Contract(format!("d({u},{v}) is not symmetric")));
                }
            }
        }
        let m = Self { n, d };
        if let Some((a, b, c, gap)) = m.worst_triangle() {
            if gap > FEAS_TOL {
                return Err(Error::Contract(format!(
                    "triangle inequality fails on ({a},{b},{c}) by {gap}"
                )));
            }
        }
        Ok(m)
    }

    /// Shortest-path closure of a symmetric non-negative matrix, iterated to a
    /// floating-point fixpoint so `d(u,v) <= d(u,w) + d(w,v)` holds exactly for
    /// the rounded sums. Entries are capped at `cap` afterwards (a capped
    /// metric is still a metric).
    pub fn closure(n: usize, mut d: Vec<f64>, cap: f64) -> Self {
        assert_eq!(d.len(), n * n);
        for u in 0..n {
            d[u * n + u] = 0.0;
            for v in u + 1..n {
                let m = d[u * n + v].min(d[v * n + u]).max(0.0).min(cap);
                d[u * n + v] = m;
                d[v * n + u] = m;
            }
        }
        loop {
            let mut changed = false;
            for k in 0..n {
                for i in 0..n {
                    let dik = d[i * n + k];
                    for j in 0..n {
                        let via = dik + d[k * n + j];
                        if via < d[i * n + j] {
                            d[i * n + j] = via;
                            changed = true;
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }
        for u in 0..n {
            for v in u + 1..n {
                let m = d[u * n + v].min(d[v * n + u]);
                d[u * n + v] = m;
                d[v * n + u] = m;
            }
        }
        Self { n, d }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn d(&self, u: usize, v: usize) -> f64 {
        self.d[u * self.n + v]
    }

    pub fn matrix(&self) -> &[f64] {
        &self.d
    }

    /// The largest violation `d(a,c) - (d(a,b) + d(b,c))`, if any triple is violated.
    /// The sum is rounded first, matching the comparison [`MetricSpace::closure`] makes.
    pub fn worst_triangle(&self) -> Option<(usize, usize, usize, f64)> {
        let n = self.n;
        let mut worst: Option<(usize, usize, usize, f64)> = None;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let gap = self.d(a, c) - (self.d(a, b) + self.d(b, c));
                    if gap > 0.0 && worst.is_none_or(|w| gap > w.3) {
                        worst = Some((a, b, c, gap));
                    }
                }
            }
        }
        worst
    }

    /// Largest distance within `points`.
    pub fn diameter(&self, points: &[usize]) -> f64 {
        let mut best = 0.0_f64;
        for (i, &u) in points.iter().enumerate() {
            for &v in &points[i + 1..] {
                best = best.max(self.d(u, v));
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn closure_yields_exact_metric() {
        use rand::Rng;
        let mut rng = crate::seed::rng(3);
        for _ in 0..20 {
            let n = rng.random_range(2..12);
            let mut d = vec![0.0; n * n];
            for x in d.iter_mut() {
                *x = rng.random_range(0.0..1.0);
            }
            let m = MetricSpace::closure(n, d, 1.0);
            assert!(m.worst_triangle().is_none());
            assert!(MetricSpace::new(n, m.matrix().to_vec()).is_ok());
        }
    }

    #[test]
    fn rejects_non_metric() {
        let d = vec![0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        assert!(MetricSpace::new(3, d).is_err());
        assert!(MetricSpace::new(2, vec![0.0, 1.0, 2.0, 0.0]).is_err());
    }
}
