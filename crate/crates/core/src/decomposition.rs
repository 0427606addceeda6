//! Padded decompositions of finite metrics.
//!
//! [`sample_padded`] draws one low-diameter partition (a CKR-style ball
//! carving), [`decompose`] keeps only partitions whose `eps`-boundary is small
//! and falls back to threshold components after `max_retries` failures.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{lq_norm, Clustering, Edge, Norm};
use crate::math::{self, ceil_log2};
use crate::metric::MetricSpace;
use crate::seed::sub_rng;

/// Resampling budget when an inexact metric makes a carved ball too wide.
const DIAMETER_RESAMPLES: usize = 64;

#[derive(Clone, Debug, PartialEq)]
pub struct PaddedParams {
    /// Diameter bound of every cluster.
    pub delta: f64,
    /// Padding parameter `D`: a ball of radius `r` is split with probability at most `D r / delta`.
    pub padding: f64,
    /// Boundary width.
    pub eps: f64,
    /// Largest accepted boundary size (compared as `|N| <= floor(cap)`).
    pub cap: f64,
    pub max_retries: usize,
}

impl PaddedParams {
    /// Default parameters for `n` points: `D = 8 (1 + ln n)`,
    /// `eps = delta / sqrt(2 D n)`, `cap = sqrt(2 D n)`, `max(1, ceil(log2 n))` attempts.
    pub fn new(n: usize, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::Contract(format!("delta = {delta} must be positive")));
        }
        let nf = n.max(1) as f64;
        let padding = padding_for(n);
        let scale = math::sqrt(2.0 * padding * nf);
        Ok(Self {
            delta,
            padding,
            eps: delta / scale,
            cap: scale,
            max_retries: ceil_log2(n).max(1),
        })
    }

    pub fn with_retries(mut self, max_retries: usize) -> Self {
        self.max_retries = max_retries;
        self
    }

    pub fn accepts(&self, boundary_size: usize) -> bool {
        boundary_size as f64 <= math::floor(self.cap)
    }
}

/// Padding parameter of [`sample_padded`] on `n` points.
pub fn padding_for(n: usize) -> f64 {
    8.0 * (1.0 + math::ln(n.max(1) as f64))
}

/// One CKR partition: `beta ~ U[delta/4, delta/2)`, a uniform order of the
/// points, and each point joins the first center within distance `beta`.
/// Every cluster has diameter at most `delta`; on metrics that satisfy the
/// triangle inequality only approximately this is enforced by resampling.
pub fn sample_padded<R: Rng + ?Sized>(
    m: &MetricSpace,
    delta: f64,
    rng: &mut R,
) -> Result<Clustering> {
    if !(delta > 0.0) {
        return Err(Error::Contract(format!("delta = {delta} must be positive")));
    }
    let n = m.n();
    for _ in 0..DIAMETER_RESAMPLES {
        let c = carve(m, delta, rng);
        if c.clusters().iter().all(|cl| m.diameter(cl) <= delta) {
            return Ok(c);
        }
    }
    Ok(Clustering::singletons(n))
}

fn carve<R: Rng + ?Sized>(m: &MetricSpace, delta: f64, rng: &mut R) -> Clustering {
    let n = m.n();
    let beta = rng.random_range(delta / 4.0..delta / 2.0);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let assignment: Vec<usize> = (0..n)
        .map(|u| {
            order
                .iter()
                .position(|&c| m.d(u, c) <= beta)
                .expect("a point is within beta of itself")
        })
        .collect();
    Clustering::from_assignment(&assignment)
}

/// Points within `eps` of a point in a different cluster, ascending.
pub fn boundary_neighborhood(m: &MetricSpace, c: &Clustering, eps: f64) -> Vec<usize> {
    let n = m.n();
    (0..n)
        .filter(|&u| (0..n).any(|v| !c.together(u, v) && m.d(u, v) <= eps))
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Attempt {
    pub eps: f64,
    pub cap: f64,
    pub boundary_size: usize,
    pub success: bool,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct DecompositionTrace {
    pub attempts: Vec<Attempt>,
    pub fallback: bool,
}

/// Samples until a partition has an accepted boundary, with attempt `k`
/// driven by the sub-seed `(seed, k)`. Falls back to
/// [`fallback_components`] when every attempt fails.
pub fn decompose(
    m: &MetricSpace,
    params: &PaddedParams,
    seed: u64,
) -> Result<(Clustering, DecompositionTrace)> {
    let mut trace = DecompositionTrace::default();
    for k in 0..params.max_retries {
        let mut rng = sub_rng(seed, k as u64);
        let c = sample_padded(m, params.delta, &mut rng)?;
        let boundary_size = boundary_neighborhood(m, &c, params.eps).len();
        let success = params.accepts(boundary_size);
        trace.attempts.push(Attempt {
            eps: params.eps,
            cap: params.cap,
            boundary_size,
            success,
        });
        if success {
            return Ok((c, trace));
        }
    }
    trace.fallback = true;
    Ok((fallback_components(m, params.delta)?, trace))
}

/// Connected components of the graph joining points at distance `<= delta / n`.
pub fn fallback_components(m: &MetricSpace, delta: f64) -> Result<Clustering> {
    if !(delta > 0.0) {
        return Err(Error::Contract(format!("delta = {delta} must be positive")));
    }
    let n = m.n();
    let threshold = delta / n.max(1) as f64;
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for u in 0..n {
        for v in u + 1..n {
            if m.d(u, v) <= threshold {
                let (a, b) = (find(&mut parent, u), find(&mut parent, v));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let roots: Vec<usize> = (0..n).map(|u| find(&mut parent, u)).collect();
    Ok(Clustering::from_assignment(&roots))
}

/// `n * || (sum_v w_uv d(u,v) / delta)_u ||_q`, which bounds `||cut||_q` of the
/// threshold components for any edge set.
pub fn fallback_cut_bound(m: &MetricSpace, edges: &[Edge], delta: f64, q: Norm) -> f64 {
    let n = m.n();
    let mut load = vec![0.0; n];
    for e in edges.iter().filter(|e| !e.infinite) {
        let s = e.weight * m.d(e.u, e.v) / delta;
        load[e.u] += s;
        load[e.v] += s;
    }
    n as f64 * lq_norm(&load, q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng;

    fn uniform(n: usize, d: f64) -> MetricSpace {
        let mut m = vec![d; n * n];
        for u in 0..n {
            m[u * n + u] = 0.0;
        }
        MetricSpace::new(n, m).unwrap()
    }

    fn line(points: &[f64]) -> MetricSpace {
        let n = points.len();
        let d = (0..n * n)
            .map(|i| (points[i / n] - points[i % n]).abs())
            .collect();
        MetricSpace::new(n, d).unwrap()
    }

    #[test]
    fn sampler_examples() {
        let mut r = rng(1);
        for _ in 0..50 {
            assert_eq!(
                sample_padded(&uniform(6, 0.0), 1.0, &mut r)
                    .unwrap()
                    .num_clusters(),
                1
            );
            assert_eq!(
                sample_padded(&line(&[0.0, 10.0]), 1.0, &mut r)
                    .unwrap()
                    .num_clusters(),
                2
            );
            assert_eq!(
                sample_padded(&uniform(5, 1.0), 0.5, &mut r)
                    .unwrap()
                    .num_clusters(),
                5
            );
        }
        assert!(sample_padded(&uniform(2, 0.0), 0.0, &mut r).is_err());
    }

    #[test]
    fn boundary_examples() {
        let m = line(&[0.0, 10.0]);
        assert!(boundary_neighborhood(&m, &Clustering::single(2), 1.0).is_empty());
        assert!(boundary_neighborhood(&m, &Clustering::singletons(2), 1.0).is_empty());
        let m = line(&[0.0, 0.5]);
        assert_eq!(
            boundary_neighborhood(&m, &Clustering::singletons(2), 1.0),
            vec![0, 1]
        );
    }

    #[test]
    fn parameters_for_one_hundred_points() {
        let p = PaddedParams::new(100, 1.0).unwrap();
        let d = 8.0 * (1.0 + 100f64.ln());
        assert!((p.padding - d).abs() < 1e-12);
        assert!((p.eps - 1.0 / (200.0 * d).sqrt()).abs() < 1e-15);
        assert!((p.cap - (200.0 * d).sqrt()).abs() < 1e-12);
        assert_eq!(p.max_retries, 7);
        assert!(PaddedParams::new(3, -1.0).is_err());
    }

    #[test]
    fn zero_metric_succeeds_first_time() {
        let p = PaddedParams::new(8, 0.5).unwrap();
        let (c, t) = decompose(&uniform(8, 0.0), &p, 9).unwrap();
        assert_eq!(c.num_clusters(), 1);
        assert_eq!(t.attempts.len(), 1);
        assert!(t.attempts[0].success && !t.fallback);
    }

    #[test]
    fn no_retries_forces_fallback() {
        let m = line(&[0.0, 0.001, 0.3, 0.7]);
        let p = PaddedParams::new(4, 0.5).unwrap().with_retries(0);
        let (c, t) = decompose(&m, &p, 0).unwrap();
        assert!(t.fallback && t.attempts.is_empty());
        assert_eq!(c, fallback_components(&m, 0.5).unwrap());
        assert_eq!(c.num_clusters(), 3);
    }

    #[test]
    fn fallback_examples() {
        assert_eq!(
            fallback_components(&uniform(4, 0.0), 1.0)
                .unwrap()
                .num_clusters(),
            1
        );
        // threshold delta / n equals the distance
        assert_eq!(
            fallback_components(&line(&[0.0, 0.5]), 1.0)
                .unwrap()
                .num_clusters(),
            1
        );
        assert_eq!(
            fallback_components(&line(&[0.0, 0.6]), 1.0)
                .unwrap()
                .num_clusters(),
            2
        );
        let chain = line(&[0.0, 0.01, 0.02, 0.03, 0.04]);
        let c = fallback_components(&chain, 1.0).unwrap();
        assert_eq!(c.num_clusters(), 1);
        assert!(chain.diameter(&[0, 1, 2, 3, 4]) < 1.0);
    }

    #[test]
    fn seeds_determine_partitions() {
        let m = line(&[0.0, 0.1, 0.25, 0.4, 0.45, 0.8, 0.95]);
        let p = PaddedParams::new(7, 0.5).unwrap();
        assert_eq!(
            decompose(&m, &p, 42).unwrap(),
            decompose(&m, &p, 42).unwrap()
        );
    }
}
