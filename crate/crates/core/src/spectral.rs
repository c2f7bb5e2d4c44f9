//! Perturbed Laplacian construction and its smallest eigenpair.
//!
//! The neighbor-selection order is derived from the eigenvector of the
//! smallest eigenvalue of `L_B = L + diag(e_leader)`: the Laplacian of the
//! undirected candidate subgraph over surviving normal agents with a unit
//! bump on the virtual leader's diagonal entry. When that subgraph is
//! connected, `L_B` is symmetric positive definite, its smallest eigenvalue
//! is simple, and the eigenvector can be chosen strictly positive.
//!
//! The solver is inverse power iteration with zero shift: each step solves
//! `L_B y = x` through a dense Cholesky factorization computed once. Matrix
//! dimensions here are small (tens at most), so dense is the right tool.

use crate::error::SpectralError;
use crate::graph::{DirectedGraph, LaplacianMatrix, NodeId};

/// Iteration cap for the inverse power method.
pub const MAX_ITERS: usize = 10_000;
/// Residual tolerance on the unit-norm iterate.
pub const RESIDUAL_TOL: f64 = 1e-10;

/// Laplacian of a candidate subgraph plus a unit diagonal bump at the leader.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbedLaplacian {
    base: LaplacianMatrix,
    leader: NodeId,
    // row-major base + diag(e_leader)
    data: Vec<f64>,
}

impl PerturbedLaplacian {
    /// Build `L_B` from the undirected subgraph over surviving normal agents
    /// and the designated virtual leader.
    pub fn build(pre_subgraph: &DirectedGraph, leader: NodeId) -> Result<Self, SpectralError> {
        let base = LaplacianMatrix::build(pre_subgraph);
        let Some(leader_row) = base.index_of(leader) else {
            return Err(SpectralError::LeaderNotInGraph { leader });
        };
        let n = base.dim();
        let mut data = base.as_slice().to_vec();
        data[leader_row * n + leader_row] += 1.0;
        Ok(Self { base, leader, data })
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn node_ids(&self) -> &[NodeId] {
        self.base.node_ids()
    }

    pub fn leader(&self) -> NodeId {
        self.leader
    }

    pub fn base(&self) -> &LaplacianMatrix {
        &self.base
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.dim() + col]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    fn matvec(&self, x: &[f64], out: &mut [f64]) {
        let n = self.dim();
        for (r, slot) in out.iter_mut().enumerate() {
            let row = &self.data[r * n..(r + 1) * n];
            *slot = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }
}

/// Smallest eigenvalue of `L_B` with its strictly positive unit eigenvector.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigenpair {
    pub lambda1: f64,
    /// Unit-norm eigenvector entries, aligned with [`PerturbedLaplacian::node_ids`].
    pub v1: Vec<f64>,
    nodes: Vec<NodeId>,
}

impl Eigenpair {
    pub fn node_ids(&self) -> &[NodeId] {
        &self.nodes
    }

    /// Eigenvector entry for a node id.
    pub fn entry(&self, v: NodeId) -> Option<f64> {
        self.nodes.binary_search(&v).ok().map(|i| self.v1[i])
    }
}

/// Dense Cholesky factorization `A = C Cᵀ` of a symmetric positive definite
/// matrix, kept for repeated solves.
struct Cholesky {
    n: usize,
    // lower triangle, row-major
    factor: Vec<f64>,
}

impl Cholesky {
    fn factor(data: &[f64], n: usize) -> Result<Self, SpectralError> {
        let mut c = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut sum = data[i * n + j];
                for k in 0..j {
                    sum -= c[i * n + k] * c[j * n + k];
                }
                if i == j {
                    if sum <= 1e-14 {
                        return Err(SpectralError::NotPositiveDefinite { index: i, pivot: sum });
                    }
                    c[i * n + i] = sum.sqrt();
                } else {
                    c[i * n + j] = sum / c[j * n + j];
                }
            }
        }
        Ok(Self { n, factor: c })
    }

    // triangular substitution reads earlier solution entries in place
    #[allow(clippy::needless_range_loop)]
    fn solve(&self, b: &[f64], out: &mut [f64]) {
        let n = self.n;
        // forward: C z = b
        for i in 0..n {
            let mut sum = b[i];
            for k in 0..i {
                sum -= self.factor[i * n + k] * out[k];
            }
            out[i] = sum / self.factor[i * n + i];
        }
        // backward: Cᵀ x = z
        for i in (0..n).rev() {
            let mut sum = out[i];
            for k in i + 1..n {
                sum -= self.factor[k * n + i] * out[k];
            }
            out[i] = sum / self.factor[i * n + i];
        }
    }
}

fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Inverse power iteration for the smallest eigenpair of `L_B`.
///
/// Starts from the all-ones vector, which has guaranteed overlap with the
/// positive target eigenvector. The returned eigenvector is oriented
/// strictly positive and scaled to unit Euclidean norm; identical inputs
/// produce identical outputs.
pub fn smallest_eigenpair(m: &PerturbedLaplacian) -> Result<Eigenpair, SpectralError> {
    smallest_eigenpair_with(m, MAX_ITERS, RESIDUAL_TOL)
}

/// [`smallest_eigenpair`] with explicit iteration cap and residual tolerance.
pub fn smallest_eigenpair_with(
    m: &PerturbedLaplacian,
    max_iters: usize,
    tol: f64,
) -> Result<Eigenpair, SpectralError> {
    let n = m.dim();
    let chol = Cholesky::factor(m.as_slice(), n)?;

    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    let mut y = vec![0.0; n];
    let mut av = vec![0.0; n];
    let mut lambda = 0.0;
    let mut residual = f64::INFINITY;

    for _ in 0..max_iters {
        chol.solve(&v, &mut y);
        let len = norm2(&y);
        for (vi, yi) in v.iter_mut().zip(&y) {
            *vi = yi / len;
        }
        m.matvec(&v, &mut av);
        lambda = v.iter().zip(&av).map(|(a, b)| a * b).sum();
        residual = av
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - lambda * b).powi(2))
            .sum::<f64>()
            .sqrt();
        if residual <= tol {
            // Orient positively before the structural check.
            if v.iter().sum::<f64>() < 0.0 {
                for vi in v.iter_mut() {
                    *vi = -*vi;
                }
            }
            for (idx, &vi) in v.iter().enumerate() {
                if vi <= 0.0 {
                    return Err(SpectralError::NonPositiveEigenvector {
                        node: m.node_ids()[idx],
                        value: vi,
                    });
                }
            }
            let nodes = m.node_ids().to_vec();
            return Ok(Eigenpair { lambda1: lambda, v1: v, nodes });
        }
    }
    let _ = lambda;
    Err(SpectralError::NoConvergence { max_iters, residual })
}
