//! Weighted directed/undirected graphs over small agent networks.
//!
//! An edge `j -> i` means agent `i` receives from agent `j`, so `j` is an
//! in-neighbor of `i` and the adjacency weight `a_ij` is attached to that
//! edge. Graphs are immutable after construction; topology changes are
//! modeled by building a new graph.
//!
//! Besides adjacency bookkeeping this module provides the Laplacian
//! construction, rooted-spanning-tree detection, and an exact brute-force
//! r-robustness certifier for graphs up to [`EXHAUSTIVE_LIMIT`] nodes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::GraphError;

/// Agent identifier. Scenario files number agents 1..N.
pub type NodeId = u32;

/// Node count above which the exhaustive robustness certifier refuses to run.
pub const EXHAUSTIVE_LIMIT: usize = 12;

/// Weighted digraph with stable integer node ids.
///
/// When `undirected` is set, every edge is stored together with its reverse
/// at equal weight; construction enforces the mirroring.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectedGraph {
    nodes: Vec<NodeId>,
    // (source j, receiver i) -> a_ij, all weights strictly positive
    weights: BTreeMap<(NodeId, NodeId), f64>,
    // receiver -> sorted in-neighbor list
    in_neighbors: BTreeMap<NodeId, Vec<NodeId>>,
    // source -> sorted out-neighbor list
    out_neighbors: BTreeMap<NodeId, Vec<NodeId>>,
    undirected: bool,
}

impl DirectedGraph {
    /// Build a graph from explicit node ids and weighted `(j, i)` edges,
    /// `j -> i` meaning `i` receives from `j`. For undirected graphs each
    /// edge may be given in either orientation; the reverse is added
    /// automatically.
    pub fn new(
        nodes: impl IntoIterator<Item = NodeId>,
        edges: impl IntoIterator<Item = (NodeId, NodeId, f64)>,
        undirected: bool,
    ) -> Result<Self, GraphError> {
        let node_set: BTreeSet<NodeId> = nodes.into_iter().collect();
        if node_set.is_empty() {
            return Err(GraphError::EmptyGraph);
        }
        let mut weights = BTreeMap::new();
        for (j, i, w) in edges {
            if j == i {
                return Err(GraphError::SelfLoop { node: i });
            }
            if !node_set.contains(&j) {
                return Err(GraphError::UnknownNode { node: j });
            }
            if !node_set.contains(&i) {
                return Err(GraphError::UnknownNode { node: i });
            }
            if w <= 0.0 || !w.is_finite() {
                return Err(GraphError::BadWeight { from: j, to: i, weight: w });
            }
            if let Some(prev) = weights.insert((j, i), w) {
                if prev != w {
                    return Err(GraphError::ConflictingWeight { from: j, to: i });
                }
            }
            if undirected {
                if let Some(prev) = weights.insert((i, j), w) {
                    if prev != w {
                        return Err(GraphError::ConflictingWeight { from: i, to: j });
                    }
                }
            }
        }
        let mut in_neighbors: BTreeMap<NodeId, Vec<NodeId>> =
            node_set.iter().map(|&v| (v, Vec::new())).collect();
        let mut out_neighbors: BTreeMap<NodeId, Vec<NodeId>> =
            node_set.iter().map(|&v| (v, Vec::new())).collect();
        for &(j, i) in weights.keys() {
            in_neighbors.get_mut(&i).unwrap().push(j);
            out_neighbors.get_mut(&j).unwrap().push(i);
        }
        // BTreeMap iteration already yields edges sorted, so the adjacency
        // lists come out sorted per node as well.
        Ok(Self {
            nodes: node_set.into_iter().collect(),
            weights,
            in_neighbors,
            out_neighbors,
            undirected,
        })
    }

    /// Unit-weight convenience constructor.
    pub fn unit(
        nodes: impl IntoIterator<Item = NodeId>,
        edges: impl IntoIterator<Item = (NodeId, NodeId)>,
        undirected: bool,
    ) -> Result<Self, GraphError> {
        Self::new(nodes, edges.into_iter().map(|(j, i)| (j, i, 1.0)), undirected)
    }

    /// Edgeless graph on the given nodes.
    pub fn edgeless(nodes: impl IntoIterator<Item = NodeId>, undirected: bool) -> Self {
        Self::new(nodes, std::iter::empty(), undirected).expect("nodes required")
    }

    /// Complete unit-weight undirected graph on the given nodes.
    pub fn complete(nodes: impl IntoIterator<Item = NodeId>) -> Self {
        let ids: Vec<NodeId> = nodes.into_iter().collect();
        let mut edges = Vec::new();
        for (a, &u) in ids.iter().enumerate() {
            for &v in &ids[a + 1..] {
                edges.push((u, v));
            }
        }
        Self::unit(ids, edges, true).expect("complete graph is well-formed")
    }

    pub fn node_ids(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn contains_node(&self, v: NodeId) -> bool {
        self.nodes.binary_search(&v).is_ok()
    }

    pub fn is_undirected(&self) -> bool {
        self.undirected
    }

    /// Weight `a_ij` of edge `j -> i`, or 0.0 when absent.
    pub fn weight(&self, j: NodeId, i: NodeId) -> f64 {
        self.weights.get(&(j, i)).copied().unwrap_or(0.0)
    }

    pub fn has_edge(&self, j: NodeId, i: NodeId) -> bool {
        self.weights.contains_key(&(j, i))
    }

    /// In-neighbors of `i` (agents `i` receives from), ascending by id.
    pub fn in_neighbors(&self, i: NodeId) -> &[NodeId] {
        self.in_neighbors.get(&i).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Out-neighbors of `j` (agents receiving from `j`), ascending by id.
    pub fn out_neighbors(&self, j: NodeId) -> &[NodeId] {
        self.out_neighbors.get(&j).map(Vec::as_slice).unwrap_or(&[])
    }

    /// All edges `(j, i, a_ij)` in deterministic order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId, f64)> + '_ {
        self.weights.iter().map(|(&(j, i), &w)| (j, i, w))
    }

    /// Number of stored directed edges (an undirected edge counts twice).
    pub fn edge_count(&self) -> usize {
        self.weights.len()
    }

    /// Sum of in-weights of `i`, i.e. the Laplacian diagonal `l_ii`.
    pub fn in_weight_sum(&self, i: NodeId) -> f64 {
        self.in_neighbors(i).iter().map(|&j| self.weight(j, i)).sum()
    }

    /// Largest Laplacian diagonal entry over all nodes.
    pub fn max_in_weight_sum(&self) -> f64 {
        self.nodes
            .iter()
            .map(|&i| self.in_weight_sum(i))
            .fold(0.0, f64::max)
    }

    /// Subgraph induced by `keep`: edges survive iff both endpoints stay.
    pub fn induced_subgraph(&self, keep: &BTreeSet<NodeId>) -> Result<Self, GraphError> {
        for &v in keep {
            if !self.contains_node(v) {
                return Err(GraphError::UnknownNode { node: v });
            }
        }
        if keep.is_empty() {
            return Err(GraphError::EmptyGraph);
        }
        let edges = self
            .weights
            .iter()
            .filter(|(&(j, i), _)| keep.contains(&j) && keep.contains(&i))
            .map(|(&(j, i), &w)| (j, i, w));
        Self::new(keep.iter().copied(), edges, self.undirected)
    }

    /// True iff some node has directed paths to every other node; returns the
    /// lowest-id such root as witness.
    pub fn has_rooted_spanning_tree(&self) -> (bool, Option<NodeId>) {
        for &root in &self.nodes {
            if self.reachable_from(root).len() == self.nodes.len() {
                return (true, Some(root));
            }
        }
        (false, None)
    }

    /// Nodes reachable from `root` following influence direction (`j -> i`
    /// edges walked from `j` to `i`), including `root` itself.
    pub fn reachable_from(&self, root: NodeId) -> BTreeSet<NodeId> {
        let mut seen = BTreeSet::new();
        if !self.contains_node(root) {
            return seen;
        }
        let mut stack = vec![root];
        seen.insert(root);
        while let Some(v) = stack.pop() {
            for &w in self.out_neighbors(v) {
                if seen.insert(w) {
                    stack.push(w);
                }
            }
        }
        seen
    }

    /// Connectivity of the undirected view restricted to `nodes` (an edge in
    /// either direction joins its endpoints). Singleton sets are connected.
    pub fn is_connected_over(&self, nodes: &BTreeSet<NodeId>) -> bool {
        let Some(&start) = nodes.iter().next() else {
            return true;
        };
        let mut seen = BTreeSet::new();
        seen.insert(start);
        let mut stack = vec![start];
        while let Some(v) = stack.pop() {
            let step = self
                .out_neighbors(v)
                .iter()
                .chain(self.in_neighbors(v).iter());
            for &w in step {
                if nodes.contains(&w) && seen.insert(w) {
                    stack.push(w);
                }
            }
        }
        seen.len() == nodes.len()
    }

    /// True iff some member of `subset` has at least `r` in-neighbors outside
    /// the subset.
    pub fn is_r_reachable(&self, subset: &BTreeSet<NodeId>, r: usize) -> Result<bool, GraphError> {
        if subset.is_empty() {
            return Err(GraphError::EmptySubset);
        }
        for &v in subset {
            if !self.contains_node(v) {
                return Err(GraphError::UnknownNode { node: v });
            }
        }
        Ok(self.max_outside_reach(subset) >= r)
    }

    /// max over i in subset of |N_i^+ \ subset|.
    fn max_outside_reach(&self, subset: &BTreeSet<NodeId>) -> usize {
        subset
            .iter()
            .map(|&i| {
                self.in_neighbors(i)
                    .iter()
                    .filter(|j| !subset.contains(j))
                    .count()
            })
            .max()
            .unwrap_or(0)
    }

    /// Largest r such that for every pair of disjoint nonempty node subsets
    /// at least one is r-reachable. Exhaustive over all unordered pairs, so
    /// restricted to graphs of at most [`EXHAUSTIVE_LIMIT`] nodes.
    ///
    /// Returns 0 when the graph is not even 1-robust (e.g. disconnected
    /// undirected graphs).
    pub fn max_robustness(&self) -> Result<usize, GraphError> {
        self.max_robustness_with_limit(EXHAUSTIVE_LIMIT)
    }

    /// [`max_robustness`](Self::max_robustness) with an explicit node-count
    /// cap for callers willing to pay the exponential cost beyond the
    /// default.
    pub fn max_robustness_with_limit(&self, limit: usize) -> Result<usize, GraphError> {
        let n = self.nodes.len();
        if n > limit {
            return Err(GraphError::TooLargeForExhaustive { nodes: n, limit });
        }
        if n == 1 {
            // No disjoint nonempty pair exists; vacuously robust at the
            // trivial cap |V| = 1.
            return Ok(1);
        }
        let ids = &self.nodes;
        let mut best = usize::MAX;
        // Assign each node to {neither, A, B}; enumerating ternary masks and
        // keeping those where the lowest assigned node lands in A visits each
        // unordered pair exactly once.
        let total = 3usize.pow(n as u32);
        'outer: for mask in 0..total {
            let mut m = mask;
            let mut set_a = BTreeSet::new();
            let mut set_b = BTreeSet::new();
            let mut first_assigned = None;
            for &v in ids {
                match m % 3 {
                    1 => {
                        set_a.insert(v);
                        first_assigned.get_or_insert(1);
                    }
                    2 => {
                        set_b.insert(v);
                        first_assigned.get_or_insert(2);
                    }
                    _ => {}
                }
                m /= 3;
            }
            if set_a.is_empty() || set_b.is_empty() || first_assigned != Some(1) {
                continue;
            }
            let pair_value = self
                .max_outside_reach(&set_a)
                .max(self.max_outside_reach(&set_b));
            if pair_value < best {
                best = pair_value;
                if best == 0 {
                    break 'outer;
                }
            }
        }
        Ok(best)
    }
}

impl fmt::Display for DirectedGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "graph({} nodes, {} edges, {})",
            self.nodes.len(),
            self.weights.len(),
            if self.undirected { "undirected" } else { "directed" }
        )
    }
}

/// Dense Laplacian of a [`DirectedGraph`], rows indexed by node order.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplacianMatrix {
    nodes: Vec<NodeId>,
    // row-major, dimension len(nodes)^2
    data: Vec<f64>,
}

impl LaplacianMatrix {
    /// l_ij = -a_ij off the diagonal, l_ii = sum of in-weights of i.
    pub fn build(g: &DirectedGraph) -> Self {
        let nodes = g.node_ids().to_vec();
        let n = nodes.len();
        let mut data = vec![0.0; n * n];
        for (row, &i) in nodes.iter().enumerate() {
            let mut diag = 0.0;
            for &j in g.in_neighbors(i) {
                let w = g.weight(j, i);
                let col = nodes.binary_search(&j).expect("neighbor is a node");
                data[row * n + col] = -w;
                diag += w;
            }
            data[row * n + row] = diag;
        }
        Self { nodes, data }
    }

    pub fn dim(&self) -> usize {
        self.nodes.len()
    }

    pub fn node_ids(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.dim() + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        let n = self.dim();
        &self.data[row * n..(row + 1) * n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Row index of a node id.
    pub fn index_of(&self, v: NodeId) -> Option<usize> {
        self.nodes.binary_search(&v).ok()
    }
}

/// Convenience wrapper mirroring the crate's operation naming.
pub fn build_laplacian(g: &DirectedGraph) -> LaplacianMatrix {
    LaplacianMatrix::build(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3_undirected() -> DirectedGraph {
        DirectedGraph::unit([1, 2, 3], [(1, 2), (2, 3)], true).unwrap()
    }

    #[test]
    fn laplacian_two_node_undirected() {
        let g = DirectedGraph::unit([1, 2], [(1, 2)], true).unwrap();
        let l = build_laplacian(&g);
        assert_eq!(l.as_slice(), &[1.0, -1.0, -1.0, 1.0]);
    }

    #[test]
    fn laplacian_edgeless_is_zero() {
        let g = DirectedGraph::edgeless([1, 2, 3], false);
        let l = build_laplacian(&g);
        assert!(l.as_slice().iter().all(|&x| x == 0.0));
        assert_eq!(l.dim(), 3);
    }

    #[test]
    fn laplacian_directed_path() {
        // 1 -> 2 -> 3: node 1 has no in-neighbors.
        let g = DirectedGraph::unit([1, 2, 3], [(1, 2), (2, 3)], false).unwrap();
        let l = build_laplacian(&g);
        assert_eq!(l.row(0), &[0.0, 0.0, 0.0]);
        assert_eq!(l.row(1), &[-1.0, 1.0, 0.0]);
        assert_eq!(l.row(2), &[0.0, -1.0, 1.0]);
    }

    #[test]
    fn laplacian_rows_sum_to_zero() {
        let g = DirectedGraph::new([1, 2, 3, 4], [(1, 2, 0.5), (3, 2, 1.5), (4, 1, 2.0)], false)
            .unwrap();
        let l = build_laplacian(&g);
        for r in 0..l.dim() {
            assert!(l.row(r).iter().sum::<f64>().abs() <= 1e-12);
        }
    }

    #[test]
    fn reachability_on_triangle() {
        let g = DirectedGraph::complete([1, 2, 3]);
        let subset: BTreeSet<NodeId> = [1].into_iter().collect();
        assert!(g.is_r_reachable(&subset, 2).unwrap());
    }

    #[test]
    fn reachability_on_path_endpoint() {
        let g = path3_undirected();
        let subset: BTreeSet<NodeId> = [1].into_iter().collect();
        assert!(!g.is_r_reachable(&subset, 2).unwrap());
        assert!(g.is_r_reachable(&subset, 1).unwrap());
    }

    #[test]
    fn reachability_full_set_is_zero() {
        let g = DirectedGraph::complete([1, 2, 3, 4]);
        let subset: BTreeSet<NodeId> = [1, 2, 3, 4].into_iter().collect();
        assert!(!g.is_r_reachable(&subset, 1).unwrap());
    }

    #[test]
    fn reachability_rejects_empty_subset() {
        let g = path3_undirected();
        let err = g.is_r_reachable(&BTreeSet::new(), 1).unwrap_err();
        assert!(matches!(err, GraphError::EmptySubset));
    }

    #[test]
    fn robustness_path3_is_one() {
        assert_eq!(path3_undirected().max_robustness().unwrap(), 1);
    }

    #[test]
    fn robustness_k4_is_two() {
        let g = DirectedGraph::complete([1, 2, 3, 4]);
        assert_eq!(g.max_robustness().unwrap(), 2);
    }

    #[test]
    fn robustness_of_complete_graphs_is_half_the_order() {
        // K_n is ceil(n/2)-robust
        for n in 2..=7u32 {
            let g = DirectedGraph::complete(1..=n);
            assert_eq!(g.max_robustness().unwrap(), (n as usize).div_ceil(2), "K_{n}");
        }
    }

    #[test]
    fn robustness_disconnected_is_zero() {
        let g = DirectedGraph::edgeless([1, 2], true);
        assert_eq!(g.max_robustness().unwrap(), 0);
    }

    #[test]
    fn robustness_capacity_error_names_limit() {
        let g = DirectedGraph::edgeless(1..=13, true);
        let err = g.max_robustness().unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("12"), "limit missing from {msg}");
    }

    #[test]
    fn spanning_tree_star() {
        let g = DirectedGraph::unit([1, 2, 3, 4], [(1, 2), (1, 3), (1, 4)], false).unwrap();
        assert_eq!(g.has_rooted_spanning_tree(), (true, Some(1)));
    }

    #[test]
    fn spanning_tree_absent_for_disjoint_edges() {
        let g = DirectedGraph::unit([1, 2, 3, 4], [(1, 2), (3, 4)], false).unwrap();
        assert_eq!(g.has_rooted_spanning_tree(), (false, None));
    }

    #[test]
    fn spanning_tree_cycle_lowest_witness() {
        let g = DirectedGraph::unit([1, 2, 3, 4], [(1, 2), (2, 3), (3, 4), (4, 1)], false).unwrap();
        assert_eq!(g.has_rooted_spanning_tree(), (true, Some(1)));
    }

    #[test]
    fn induced_subgraph_k5_minus_one() {
        let g = DirectedGraph::complete([1, 2, 3, 4, 5]);
        let keep: BTreeSet<NodeId> = [1, 2, 4, 5].into_iter().collect();
        let sub = g.induced_subgraph(&keep).unwrap();
        assert_eq!(sub, DirectedGraph::complete([1, 2, 4, 5]));
    }

    #[test]
    fn induced_subgraph_identity() {
        let g = path3_undirected();
        let keep: BTreeSet<NodeId> = g.node_ids().iter().copied().collect();
        assert_eq!(g.induced_subgraph(&keep).unwrap(), g);
    }

    #[test]
    fn induced_subgraph_drops_bridge() {
        let g = path3_undirected();
        let keep: BTreeSet<NodeId> = [1, 3].into_iter().collect();
        let sub = g.induced_subgraph(&keep).unwrap();
        assert_eq!(sub.edge_count(), 0);
        assert_eq!(sub.node_count(), 2);
    }

    #[test]
    fn rejects_self_loop_and_bad_weight() {
        assert!(matches!(
            DirectedGraph::unit([1, 2], [(1, 1)], false),
            Err(GraphError::SelfLoop { node: 1 })
        ));
        assert!(matches!(
            DirectedGraph::new([1, 2], [(1, 2, 0.0)], false),
            Err(GraphError::BadWeight { .. })
        ));
        assert!(matches!(
            DirectedGraph::new([1, 2], [(1, 2, -3.0)], false),
            Err(GraphError::BadWeight { .. })
        ));
    }

    #[test]
    fn undirected_mirrors_edges() {
        let g = DirectedGraph::new([1, 2], [(1, 2, 0.5)], true).unwrap();
        assert_eq!(g.weight(1, 2), 0.5);
        assert_eq!(g.weight(2, 1), 0.5);
    }

    #[test]
    fn one_robust_implies_spanning_tree_small_sample() {
        // Exhaustive over all directed graphs on 3 nodes.
        let ids = [1u32, 2, 3];
        let all_edges: Vec<(NodeId, NodeId)> = ids
            .iter()
            .flat_map(|&a| ids.iter().filter(move |&&b| b != a).map(move |&b| (a, b)))
            .collect();
        for mask in 0..(1u32 << all_edges.len()) {
            let edges: Vec<_> = all_edges
                .iter()
                .enumerate()
                .filter(|(k, _)| mask & (1 << k) != 0)
                .map(|(_, &e)| e)
                .collect();
            let g = DirectedGraph::unit(ids, edges, false).unwrap();
            if g.max_robustness().unwrap() >= 1 {
                assert!(g.has_rooted_spanning_tree().0, "1-robust graph without root: {g}");
            }
        }
    }
}
