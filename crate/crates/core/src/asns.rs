//! Active secure neighbor selection: pre-discriminative graph
//! reconstruction, virtual-leader choice, eigenvector ordering, and in-edge
//! selection.
//!
//! After every isolation event the candidate graph is rebuilt by dropping all
//! initial candidate edges incident to flagged agents. The surviving normal
//! agents are then totally ordered: the virtual leader first, everyone else
//! by their entry in the smallest-eigenvalue eigenvector of the perturbed
//! Laplacian (ties broken by id). Each agent's candidate list `psi_i` holds
//! its candidate neighbors ranked strictly below it, and the new
//! communication graph takes the lowest-ranked prefix of each list. Every
//! edge points from lower to higher rank, so the normal subgraph is acyclic
//! and rooted at the leader by construction.
//!
//! Ranking the leader strictly lowest also keeps it selectable as an
//! in-neighbor, which is what guarantees nonempty candidate lists on
//! symmetric graphs where eigenvector entries tie.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::SelectionError;
use crate::graph::{DirectedGraph, NodeId};
use crate::spectral::{smallest_eigenpair, Eigenpair, PerturbedLaplacian};

/// Candidate graph of one reconstruction epoch: undirected, over the full
/// node set, with no edge touching a flagged agent.
#[derive(Debug, Clone, PartialEq)]
pub struct PreDiscriminativeGraph {
    pub epoch: u32,
    pub graph: DirectedGraph,
}

/// Keep exactly the initial candidate edges whose endpoints both survive.
/// Flagged agents remain as edgeless vertices.
pub fn build_pre_graph(
    initial_pre: &DirectedGraph,
    normal: &BTreeSet<NodeId>,
    epoch: u32,
) -> PreDiscriminativeGraph {
    let edges = initial_pre
        .edges()
        .filter(|(j, i, _)| normal.contains(j) && normal.contains(i));
    let graph = DirectedGraph::new(initial_pre.node_ids().iter().copied(), edges, true)
        .expect("filtering preserves well-formedness");
    PreDiscriminativeGraph { epoch, graph }
}

/// In-neighbor count policy for the reconstructed graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectionPolicy {
    /// One in-neighbor per non-leader agent: the spanning tree with the
    /// fewest possible edges.
    Minimum,
    /// Up to `degree` in-neighbors per agent.
    Flexible { degree: usize },
}

impl SelectionPolicy {
    fn degree(self) -> usize {
        match self {
            SelectionPolicy::Minimum => 1,
            SelectionPolicy::Flexible { degree } => degree,
        }
    }
}

/// Choose the virtual leader: the pinned agent when given, otherwise the
/// lowest id in the surviving normal set.
pub fn pick_virtual_leader(
    normal: &BTreeSet<NodeId>,
    pinned: Option<NodeId>,
) -> Result<NodeId, SelectionError> {
    match pinned {
        Some(leader) => {
            if normal.contains(&leader) {
                Ok(leader)
            } else {
                Err(SelectionError::LeaderNotNormal { leader })
            }
        }
        None => Ok(*normal.iter().next().expect("normal set is nonempty")),
    }
}

/// Total order used for classification: leader first, then ascending
/// `(eigenvector entry, id)`.
fn rank_map(normal: &BTreeSet<NodeId>, leader: NodeId, eigenpair: &Eigenpair) -> BTreeMap<NodeId, usize> {
    let mut others: Vec<NodeId> = normal.iter().copied().filter(|&v| v != leader).collect();
    others.sort_by(|&a, &b| {
        let va = eigenpair.entry(a).expect("eigenpair covers normal set");
        let vb = eigenpair.entry(b).expect("eigenpair covers normal set");
        va.partial_cmp(&vb).expect("finite entries").then(a.cmp(&b))
    });
    let mut ranks = BTreeMap::new();
    ranks.insert(leader, 0);
    for (idx, v) in others.into_iter().enumerate() {
        ranks.insert(v, idx + 1);
    }
    ranks
}

/// Candidate lists per surviving agent, each sorted ascending by rank.
///
/// `psi_i` holds the candidate neighbors of `i` ranked strictly below `i`;
/// the leader's own list is empty and never consulted. An empty list for a
/// non-leader signals insufficient robustness of the initial candidate graph
/// and is reported as a structure error.
pub fn compute_psi(
    pre: &PreDiscriminativeGraph,
    normal: &BTreeSet<NodeId>,
    leader: NodeId,
    eigenpair: &Eigenpair,
) -> Result<BTreeMap<NodeId, Vec<NodeId>>, SelectionError> {
    let ranks = rank_map(normal, leader, eigenpair);
    let mut psi = BTreeMap::new();
    for &i in normal {
        let my_rank = ranks[&i];
        let mut candidates: Vec<NodeId> = pre
            .graph
            .in_neighbors(i)
            .iter()
            .copied()
            .filter(|j| normal.contains(j) && ranks[j] < my_rank)
            .collect();
        candidates.sort_by_key(|j| ranks[j]);
        if candidates.is_empty() && i != leader {
            return Err(SelectionError::EmptyPsi { agent: i });
        }
        psi.insert(i, candidates);
    }
    Ok(psi)
}

/// Emit the reconstructed communication graph: each non-leader agent takes
/// the lowest-ranked `min(degree, |psi_i|)` candidates as in-neighbors with
/// unit weight. Flagged agents keep their vertices but receive no edges.
pub fn select_in_neighbors(
    psi: &BTreeMap<NodeId, Vec<NodeId>>,
    leader: NodeId,
    policy: SelectionPolicy,
    all_nodes: &[NodeId],
) -> Result<DirectedGraph, SelectionError> {
    let degree = policy.degree().max(1);
    let mut edges = Vec::new();
    for (&i, candidates) in psi {
        if i == leader {
            continue;
        }
        if candidates.is_empty() {
            return Err(SelectionError::EmptyPsi { agent: i });
        }
        for &j in candidates.iter().take(degree.min(candidates.len())) {
            edges.push((j, i));
        }
    }
    Ok(DirectedGraph::unit(all_nodes.iter().copied(), edges, false)
        .expect("selection emits well-formed edges"))
}

/// Everything one reconstruction produces; recorded per epoch in the trace.
#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub epoch: u32,
    pub pre: PreDiscriminativeGraph,
    pub leader: NodeId,
    pub eigenpair: Eigenpair,
    pub psi: BTreeMap<NodeId, Vec<NodeId>>,
    pub graph: DirectedGraph,
}

/// Run one full reconstruction: rebuild the candidate graph, pick the
/// leader, solve the perturbed-Laplacian eigenpair on the normal subgraph,
/// classify candidates, and emit the new communication graph.
pub fn reconstruct(
    initial_pre: &DirectedGraph,
    normal: &BTreeSet<NodeId>,
    pinned_leader: Option<NodeId>,
    policy: SelectionPolicy,
    epoch: u32,
) -> Result<Reconstruction, SelectionError> {
    let pre = build_pre_graph(initial_pre, normal, epoch);
    let leader = pick_virtual_leader(normal, pinned_leader)?;
    let normal_subgraph = pre
        .graph
        .induced_subgraph(normal)
        .expect("normal set is nonempty and within the node set");
    let perturbed = PerturbedLaplacian::build(&normal_subgraph, leader)
        .map_err(SelectionError::Spectral)?;
    let eigenpair = smallest_eigenpair(&perturbed)?;
    let psi = compute_psi(&pre, normal, leader, &eigenpair)?;
    let graph = select_in_neighbors(&psi, leader, policy, pre.graph.node_ids())?;
    Ok(Reconstruction { epoch, pre, leader, eigenpair, psi, graph })
}
