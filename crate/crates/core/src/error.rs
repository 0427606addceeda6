use alloc::boxed::Box;
use alloc::string::String;

use crate::relaxation::FractionalSolution;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A precondition on the inputs of an operation does not hold.
    #[error("contract violation: {0}")]
    Contract(String),

    /// The graph does not satisfy the structural invariants of [`crate::SignedGraph`].
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("unsupported configuration: {0}")]
    UnsupportedConfig(String),

    /// The instance is outside the class an algorithm is defined for.
    #[error("unsupported instance: {0}")]
    UnsupportedInstance(String),

    /// The LP solver hit its iteration cap. `best` is the last iterate, repaired
    /// into a feasible metric.
    #[error("solver failed after {iterations} iterations: {reason}")]
    SolverFailure {
        iterations: usize,
        reason: String,
        best: Option<Box<FractionalSolution>>,
    },

    #[error("instance too large for exhaustive search: {size} > {limit}")]
    SizeGuard { size: usize, limit: usize },

    /// Every candidate s-t cut crosses an uncuttable edge.
    #[error("no feasible s-t cut: terminals are joined by infinite edges")]
    InfeasibleCut,
}

pub(crate) fn contract(msg: impl Into<String>) -> Error {
    Error::Contract(msg.into())
}
