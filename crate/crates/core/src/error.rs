use thiserror::Error;

use crate::graph::VertexId;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("directed cycle through vertex {0}")]
    Cycle(VertexId),

    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("unknown state `{state}` for variable `{variable}`")]
    UnknownState { variable: String, state: String },

    #[error("invalid structure: {0}")]
    Structure(String),

    #[error("invalid variable `{name}`: {reason}")]
    InvalidVariable { name: String, reason: String },

    #[error("invalid CPT for vertex {vertex}: {reason}")]
    InvalidCpt { vertex: VertexId, reason: String },

    #[error("state {state} out of range for vertex {vertex} with arity {arity}")]
    StateOutOfRange {
        vertex: VertexId,
        state: usize,
        arity: usize,
    },

    #[error("missing assignment for vertex {0}")]
    MissingAssignment(VertexId),

    #[error("enumeration of {count} configurations exceeds the cap of {cap}")]
    Capacity { count: u128, cap: u64 },

    #[error("evidence has zero probability")]
    ImpossibleEvidence,

    #[error("vertex {0} is observed")]
    ObservedVertex(VertexId),

    #[error("vertex {vertex} is not an ancestor of evidence vertex {evidence}")]
    NotAncestor { vertex: VertexId, evidence: VertexId },

    #[error("negative sample weight {0}")]
    NegativeWeight(f64),

    #[error("non-finite sample weight")]
    NonFiniteWeight,

    #[error("all sample weights are zero")]
    DegenerateEstimate,

    #[error("importance function has zero density on a configuration with positive posterior mass")]
    SupportViolation,

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("cannot place {arcs} arcs among {vertices} vertices")]
    InfeasibleArcs { vertices: usize, arcs: usize },

    #[error("no admissible evidence found after {0} attempts")]
    RetryBudget(usize),

    #[error("invalid sampler configuration: {0}")]
    Config(String),
}
