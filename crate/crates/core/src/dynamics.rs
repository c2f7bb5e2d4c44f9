//! Discrete-time consensus dynamics and hull bookkeeping.
//!
//! Every agent, honest or not, advances its stored state by the same
//! first-order update
//!
//! ```text
//! x_i(k+1) = x_i(k) + eps * sum_{j in N_i+} a_ij * (r_ij(k) - x_i(k))
//! ```
//!
//! where `r_ij(k)` is the value agent `i` received from in-neighbor `j` at
//! step `k`. Byzantine agents lie outbound only; their internal state evolves
//! honestly on whatever they received, which keeps replay-style attack
//! signals well defined.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::DynamicsError;
use crate::graph::{DirectedGraph, NodeId};

/// Behavioral role of an agent at a given step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Normal,
    /// Attack-admissible but not currently transmitting false values.
    ByzantineDormant,
    /// Actively transmitting false values to at least one receiver.
    ByzantineActive,
}

impl Role {
    pub fn is_byzantine(self) -> bool {
        !matches!(self, Role::Normal)
    }
}

/// Per-agent state vector plus its one-step history for packet relay.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentState {
    pub id: NodeId,
    pub x: Vec<f64>,
    /// Value at the previous step, relayed inside two-hop packets.
    pub x_prev: Vec<f64>,
    pub role: Role,
}

impl AgentState {
    pub fn new(id: NodeId, x: Vec<f64>, role: Role) -> Self {
        let x_prev = x.clone();
        Self { id, x, x_prev, role }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }
}

/// All agent states keyed by id.
pub type StateMap = BTreeMap<NodeId, AgentState>;

/// Values delivered at one step, keyed `(receiver, sender)`.
pub type ReceivedMap = BTreeMap<(NodeId, NodeId), Vec<f64>>;

/// Step-size admissibility against the uniform bound `eps < 1 / max_i l_ii`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSizeCheck {
    pub valid: bool,
    /// The exclusive upper bound; `f64::INFINITY` on edgeless graphs.
    pub bound: f64,
}

/// Check `0 < eps < 1 / max_i l_ii` and report the bound for diagnostics.
pub fn validate_step_size(g: &DirectedGraph, epsilon: f64) -> StepSizeCheck {
    let max_lii = g.max_in_weight_sum();
    let bound = if max_lii > 0.0 { 1.0 / max_lii } else { f64::INFINITY };
    StepSizeCheck { valid: epsilon > 0.0 && epsilon < bound, bound }
}

/// Advance every agent one step using the delivered values. `k` is only used
/// to label protocol errors.
pub fn consensus_step(
    states: &StateMap,
    g: &DirectedGraph,
    epsilon: f64,
    received: &ReceivedMap,
    k: u64,
) -> Result<StateMap, DynamicsError> {
    let mut next = StateMap::new();
    for (&id, agent) in states {
        let mut x_new = agent.x.clone();
        for &j in g.in_neighbors(id) {
            let value = received
                .get(&(id, j))
                .ok_or(DynamicsError::MissingReceivedValue { k, receiver: id, sender: j })?;
            if value.len() != agent.x.len() {
                return Err(DynamicsError::DimensionMismatch {
                    expected: agent.x.len(),
                    got: value.len(),
                });
            }
            let a_ij = g.weight(j, id);
            for (coord, (xn, (&v, &xi))) in
                x_new.iter_mut().zip(value.iter().zip(&agent.x)).enumerate()
            {
                let _ = coord;
                *xn += epsilon * a_ij * (v - xi);
            }
        }
        next.insert(
            id,
            AgentState { id, x: x_new, x_prev: agent.x.clone(), role: agent.role },
        );
    }
    Ok(next)
}

/// Component-wise interval hull of the states of `normal` agents.
#[derive(Debug, Clone, PartialEq)]
pub struct HullBounds {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl HullBounds {
    /// Largest per-coordinate extent.
    pub fn width(&self) -> f64 {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| h - l)
            .fold(0.0, f64::max)
    }

    /// True iff `self` is contained in `outer` with `slack` tolerance.
    pub fn contained_in(&self, outer: &HullBounds, slack: f64) -> bool {
        self.lo
            .iter()
            .zip(&outer.lo)
            .all(|(inner, out)| *inner >= *out - slack)
            && self
                .hi
                .iter()
                .zip(&outer.hi)
                .all(|(inner, out)| *inner <= *out + slack)
    }
}

/// Per-coordinate min/max over the given normal agents.
pub fn hull_of(states: &StateMap, normal: &BTreeSet<NodeId>) -> Result<HullBounds, DynamicsError> {
    let mut iter = normal.iter().filter_map(|id| states.get(id));
    let Some(first) = iter.next() else {
        return Err(DynamicsError::EmptyNormalSet);
    };
    let mut lo = first.x.clone();
    let mut hi = first.x.clone();
    for agent in iter {
        for ((l, h), &v) in lo.iter_mut().zip(hi.iter_mut()).zip(&agent.x) {
            if v < *l {
                *l = v;
            }
            if v > *h {
                *h = v;
            }
        }
    }
    Ok(HullBounds { lo, hi })
}

/// Truthful delivery over every edge of `g`: each receiver gets its
/// in-neighbors' current states.
pub fn truthful_received(states: &StateMap, g: &DirectedGraph) -> ReceivedMap {
    let mut received = ReceivedMap::new();
    for &id in states.keys() {
        for &j in g.in_neighbors(id) {
            if let Some(sender) = states.get(&j) {
                received.insert((id, j), sender.x.clone());
            }
        }
    }
    received
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_agents() -> (StateMap, DirectedGraph) {
        let g = DirectedGraph::unit([1, 2], [(1, 2)], true).unwrap();
        let mut states = StateMap::new();
        states.insert(1, AgentState::new(1, vec![0.0], Role::Normal));
        states.insert(2, AgentState::new(2, vec![1.0], Role::Normal));
        (states, g)
    }

    #[test]
    fn step_size_k3_bounds() {
        let g = DirectedGraph::complete([1, 2, 3]);
        assert!(validate_step_size(&g, 0.25).valid);
        let at_bound = validate_step_size(&g, 0.5);
        assert!(!at_bound.valid);
        assert!((at_bound.bound - 0.5).abs() < 1e-15);
    }

    #[test]
    fn step_size_edgeless_is_unbounded() {
        let g = DirectedGraph::edgeless([1, 2, 3], false);
        let check = validate_step_size(&g, 123.0);
        assert!(check.valid);
        assert!(check.bound.is_infinite());
    }

    #[test]
    fn symmetric_averaging_step() {
        let (states, g) = two_agents();
        let received = truthful_received(&states, &g);
        let next = consensus_step(&states, &g, 0.25, &received, 0).unwrap();
        assert_eq!(next[&1].x, vec![0.25]);
        assert_eq!(next[&2].x, vec![0.75]);
        assert_eq!(next[&1].x_prev, vec![0.0]);
    }

    #[test]
    fn equal_states_are_a_fixed_point() {
        let g = DirectedGraph::complete([1, 2, 3]);
        let mut states = StateMap::new();
        for id in 1..=3 {
            states.insert(id, AgentState::new(id, vec![4.0, -1.0], Role::Normal));
        }
        let received = truthful_received(&states, &g);
        let next = consensus_step(&states, &g, 0.1, &received, 0).unwrap();
        for id in 1..=3 {
            assert_eq!(next[&id].x, vec![4.0, -1.0]);
        }
    }

    #[test]
    fn weighted_sum_of_received_offsets() {
        let g = DirectedGraph::unit([1, 2, 3], [(1, 3), (2, 3)], false).unwrap();
        let mut states = StateMap::new();
        states.insert(1, AgentState::new(1, vec![2.0], Role::Normal));
        states.insert(2, AgentState::new(2, vec![4.0], Role::Normal));
        states.insert(3, AgentState::new(3, vec![0.0], Role::Normal));
        let received = truthful_received(&states, &g);
        let next = consensus_step(&states, &g, 0.1, &received, 0).unwrap();
        assert!((next[&3].x[0] - 0.6).abs() < 1e-15);
    }

    #[test]
    fn missing_received_value_is_a_protocol_error() {
        let (states, g) = two_agents();
        let received = ReceivedMap::new();
        let err = consensus_step(&states, &g, 0.25, &received, 7).unwrap_err();
        assert_eq!(
            err,
            DynamicsError::MissingReceivedValue { k: 7, receiver: 1, sender: 2 }
        );
    }

    #[test]
    fn hull_component_extremes() {
        let mut states = StateMap::new();
        states.insert(1, AgentState::new(1, vec![0.0, 5.0], Role::Normal));
        states.insert(2, AgentState::new(2, vec![2.0, 1.0], Role::Normal));
        let normal: BTreeSet<NodeId> = [1, 2].into_iter().collect();
        let hull = hull_of(&states, &normal).unwrap();
        assert_eq!(hull.lo, vec![0.0, 1.0]);
        assert_eq!(hull.hi, vec![2.0, 5.0]);
        assert!((hull.width() - 4.0).abs() < 1e-15);
    }

    #[test]
    fn hull_single_agent_degenerate() {
        let mut states = StateMap::new();
        states.insert(4, AgentState::new(4, vec![3.0], Role::Normal));
        let normal: BTreeSet<NodeId> = [4].into_iter().collect();
        let hull = hull_of(&states, &normal).unwrap();
        assert_eq!(hull.lo, hull.hi);
    }

    #[test]
    fn hull_empty_normal_set_rejected() {
        let states = StateMap::new();
        assert_eq!(
            hull_of(&states, &BTreeSet::new()).unwrap_err(),
            DynamicsError::EmptyNormalSet
        );
    }

    #[test]
    fn truthful_step_shrinks_hull() {
        let g = DirectedGraph::complete([1, 2, 3, 4]);
        let mut states = StateMap::new();
        states.insert(1, AgentState::new(1, vec![0.0], Role::Normal));
        states.insert(2, AgentState::new(2, vec![1.0], Role::Normal));
        states.insert(3, AgentState::new(3, vec![5.0], Role::Normal));
        states.insert(4, AgentState::new(4, vec![-2.0], Role::Normal));
        let normal: BTreeSet<NodeId> = [1, 2, 3, 4].into_iter().collect();
        let mut hull = hull_of(&states, &normal).unwrap();
        let mut current = states;
        for k in 0..50 {
            let received = truthful_received(&current, &g);
            current = consensus_step(&current, &g, 0.2, &received, k).unwrap();
            let next_hull = hull_of(&current, &normal).unwrap();
            assert!(next_hull.contained_in(&hull, 1e-12));
            hull = next_hull;
        }
        assert!(hull.width() < 1e-3);
    }

    #[test]
    fn sum_conserved_on_balanced_undirected_network() {
        let g = DirectedGraph::complete([1, 2, 3, 4, 5]);
        let mut states = StateMap::new();
        for id in 1..=5 {
            states.insert(id, AgentState::new(id, vec![id as f64, -(id as f64)], Role::Normal));
        }
        let total0: f64 = states.values().map(|a| a.x[0]).sum();
        let mut current = states;
        for k in 0..200 {
            let received = truthful_received(&current, &g);
            current = consensus_step(&current, &g, 0.15, &received, k).unwrap();
        }
        let total: f64 = current.values().map(|a| a.x[0]).sum();
        assert!((total - total0).abs() < 1e-9);
    }
}
