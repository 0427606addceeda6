//! Correlation clustering with local `l_q` objectives.
//!
//! The crate is `no_std` (it needs `alloc`) and contains only computation:
//!
//! - [`graph`]: signed graphs, clusterings, disagreement and cut vectors, `l_q` norms.
//! - [`relaxation`]: the metric convex relaxation, linearized with tangent cuts and
//!   solved by the dense simplex in [`simplex`].
//! - [`decomposition`]: padded metric decompositions, the boundary-filtered sampler
//!   with retries, and the deterministic threshold fallback.
//! - [`rounding`]: metric-decomposition rounding for arbitrary graphs, ball growing for
//!   complete and complete bipartite graphs, and the per-vertex profit audit.
//! - [`instances`]: random instances, the layered integrality-gap family, and the
//!   3SAT to min `l_inf` s-t cut reduction.
//! - [`oracle`]: exhaustive solvers used to certify all of the above on small inputs.
//!
//! File formats, reports and the command line live in the `corrclust` crate.

#![cfg_attr(not(test), no_std)]
// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod decomposition;
pub mod error;
pub mod graph;
pub mod instances;
pub mod math;
pub mod metric;
pub mod oracle;
pub mod relaxation;
pub mod rounding;
pub mod seed;
pub mod simplex;

pub use error::{Error, Result};
pub use graph::{Clustering, DisagreeVector, Edge, Norm, Scope, Sign, SignedGraph};
pub use relaxation::{FractionalSolution, SolverConfig};
