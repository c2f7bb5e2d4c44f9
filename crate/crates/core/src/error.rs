//! Error types shared across the crate.

use thiserror::Error;

use crate::graph::NodeId;

/// Graph construction and query failures.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("graph must contain at least one node")]
    EmptyGraph,
    #[error("self-loop on node {node} is not allowed")]
    SelfLoop { node: NodeId },
    #[error("node {node} is not part of the graph")]
    UnknownNode { node: NodeId },
    #[error("edge {from} -> {to} has non-positive or non-finite weight {weight}")]
    BadWeight { from: NodeId, to: NodeId, weight: f64 },
    #[error("edge {from} -> {to} given twice with different weights")]
    ConflictingWeight { from: NodeId, to: NodeId },
    #[error("subset must be nonempty")]
    EmptySubset,
    #[error("graph with {nodes} nodes exceeds the exhaustive certification limit of {limit}")]
    TooLargeForExhaustive { nodes: usize, limit: usize },
}

/// Eigen-solver failures.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectralError {
    #[error("leader {leader} is not a node of the subgraph")]
    LeaderNotInGraph { leader: NodeId },
    #[error("inverse iteration did not converge within {max_iters} iterations (last residual {residual:.3e})")]
    NoConvergence { max_iters: usize, residual: f64 },
    #[error("eigenvector entry for node {node} is not strictly positive ({value:.3e}); the normal-agent subgraph is likely disconnected")]
    NonPositiveEigenvector { node: NodeId, value: f64 },
    #[error("linear solve failed: matrix is not positive definite (pivot {pivot:.3e} at index {index}); the normal-agent subgraph is likely disconnected")]
    NotPositiveDefinite { index: usize, pivot: f64 },
}

/// Consensus-update failures.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("at step {k}, agent {receiver} has no received value for in-neighbor {sender}")]
    MissingReceivedValue { k: u64, receiver: NodeId, sender: NodeId },
    #[error("state dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("hull requested over an empty normal set")]
    EmptyNormalSet,
}

/// Neighbor-selection (reconstruction) failures. These indicate a violated
/// robustness precondition rather than a programming error, so the harness
/// reports them as defense failures.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SelectionError {
    #[error("candidate set of agent {agent} is empty after ordering; the pre-discriminative graph is not robust enough")]
    EmptyPsi { agent: NodeId },
    #[error("pinned virtual leader {leader} is not in the surviving normal set")]
    LeaderNotNormal { leader: NodeId },
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// Scenario parsing and validation failures.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{0}")]
    Validation(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// A simulation abort: the failing step plus a machine-readable cause.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("step {step}: {cause}")]
pub struct RunError {
    pub step: u64,
    pub cause: String,
}

/// Crate-level error for CLI and FFI surfaces.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Selection(#[from] SelectionError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Run(#[from] RunError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}
