//! W-MSR baseline: trim up to F extreme neighbor values per coordinate, then
//! average the survivors.
//!
//! Applied coordinate-wise to vector states. Among received values strictly
//! greater than the agent's own entry, the `min(F, count)` with the largest
//! excess are discarded (ties discard higher ids first); symmetrically below.
//! Survivors are averaged with equal weights scaled so the update stays a
//! convex combination: each survivor gets `W / |S|` where `W` is the agent's
//! total in-weight. With `F = 0` the raw weights are used unchanged, which
//! makes the update bit-identical to the plain consensus step.
//!
//! Byzantine agents do not filter; their stored states evolve by the plain
//! update on whatever they received.

use crate::error::DynamicsError;
use crate::graph::{DirectedGraph, NodeId};
use crate::dynamics::{AgentState, ReceivedMap, StateMap};

/// W-MSR parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MsrConfig {
    pub f: usize,
    pub epsilon: f64,
}

/// Ids of the surviving senders for one coordinate, in ascending id order.
pub fn msr_survivors(own: f64, received: &[(NodeId, f64)], f: usize) -> Vec<NodeId> {
    let mut above: Vec<(NodeId, f64)> =
        received.iter().copied().filter(|&(_, v)| v > own).collect();
    let mut below: Vec<(NodeId, f64)> =
        received.iter().copied().filter(|&(_, v)| v < own).collect();
    // Largest excess first; ties resolved by discarding higher ids first.
    above.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(b.0.cmp(&a.0)));
    below.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(b.0.cmp(&a.0)));
    let dropped: Vec<NodeId> = above
        .iter()
        .take(f.min(above.len()))
        .chain(below.iter().take(f.min(below.len())))
        .map(|&(id, _)| id)
        .collect();
    received
        .iter()
        .filter(|(id, _)| !dropped.contains(id))
        .map(|&(id, _)| id)
        .collect()
}

/// Advance every agent one step; normal agents filter per coordinate,
/// Byzantine agents run the plain update.
pub fn wmsr_step(
    states: &StateMap,
    g: &DirectedGraph,
    received: &ReceivedMap,
    cfg: &MsrConfig,
    k: u64,
) -> Result<StateMap, DynamicsError> {
    let mut next = StateMap::new();
    for (&id, agent) in states {
        let in_neighbors = g.in_neighbors(id);
        let mut values: Vec<(NodeId, &Vec<f64>)> = Vec::with_capacity(in_neighbors.len());
        for &j in in_neighbors {
            let value = received
                .get(&(id, j))
                .ok_or(DynamicsError::MissingReceivedValue { k, receiver: id, sender: j })?;
            if value.len() != agent.x.len() {
                return Err(DynamicsError::DimensionMismatch {
                    expected: agent.x.len(),
                    got: value.len(),
                });
            }
            values.push((j, value));
        }

        let plain = cfg.f == 0 || agent.role.is_byzantine();
        let mut x_new = agent.x.clone();
        if plain {
            for &(j, value) in &values {
                let a_ij = g.weight(j, id);
                for (xn, (&v, &xi)) in x_new.iter_mut().zip(value.iter().zip(&agent.x)) {
                    *xn += cfg.epsilon * a_ij * (v - xi);
                }
            }
        } else {
            let total_weight: f64 = in_neighbors.iter().map(|&j| g.weight(j, id)).sum();
            for coord in 0..agent.x.len() {
                let own = agent.x[coord];
                let scalar: Vec<(NodeId, f64)> =
                    values.iter().map(|&(j, v)| (j, v[coord])).collect();
                let survivors = msr_survivors(own, &scalar, cfg.f);
                if survivors.is_empty() {
                    continue;
                }
                let w = total_weight / survivors.len() as f64;
                let mut acc = own;
                for &j in &survivors {
                    let v = scalar.iter().find(|&&(id2, _)| id2 == j).unwrap().1;
                    acc += cfg.epsilon * w * (v - own);
                }
                x_new[coord] = acc;
            }
        }
        next.insert(
            id,
            AgentState { id, x: x_new, x_prev: agent.x.clone(), role: agent.role },
        );
    }
    Ok(next)
}
