//! Resilient consensus for discrete-time multi-agent systems under F-local
//! Byzantine attacks.
//!
//! The crate simulates networks of agents running a weighted averaging
//! protocol while a scripted subset of agents transmits arbitrary,
//! receiver-specific false values. Three defenses are provided:
//!
//! - **ASNS** (active secure neighbor selection): two-hop misbehavior
//!   detection, isolation of flagged agents, reconstruction of a
//!   pre-discriminative candidate graph, and eigenvector-ordered in-neighbor
//!   selection that rebuilds a directed spanning tree among the surviving
//!   agents after every isolation event.
//! - **W-MSR**: the classical mean-subsequence-reduced filter that discards
//!   up to F extreme neighbor values per coordinate.
//! - **connectivity baseline**: isolation without reconstruction, which fails
//!   once the surviving agents are disconnected.
//!
//! Supporting machinery includes an exact r-robustness certifier for small
//! graphs, a perturbed-Laplacian eigensolver, a scenario file format, and a
//! deterministic round-synchronous harness that emits CSV traces and JSON
//! summaries.

pub mod adversary;
pub mod asns;
pub mod detection;
pub mod dynamics;
pub mod error;
pub mod graph;
pub mod harness;
pub mod msr;
pub mod rng;
pub mod spectral;

pub use error::Error;
pub use graph::{DirectedGraph, LaplacianMatrix, NodeId};
