//! Two-hop packet exchange and the consistency detector.
//!
//! At every step each agent sends its out-neighbors a packet carrying its
//! claimed current state plus a relay of the values it received from its own
//! in-neighbors one step earlier. An observer can therefore recompute the
//! nominal update its neighbor should have performed and flag the neighbor
//! when the claimed state deviates from the prediction.
//!
//! The prediction replays the consensus update bit for bit (same weights,
//! same accumulation order), so honest senders produce a residual of exactly
//! zero and the flag tolerance only has to absorb scripted lies, not float
//! noise.
//!
//! Flags are broadcast and merged into a global, monotonically growing
//! flagged set; the surviving normal set shrinks with it. A packet whose
//! consistency check needs the post-attack state claim is only comparable one
//! step after the lie is transmitted, so the harness raises flags with a
//! one-round latency relative to the attack instant.

use std::collections::{BTreeMap, BTreeSet};

use crate::graph::{DirectedGraph, NodeId};

/// Default infinity-norm residual above which a sender is flagged.
pub const DETECTION_TOL: f64 = 1e-9;

/// Packet from `sender` at time `k`, materialized per receiver.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoHopPacket {
    pub sender: NodeId,
    pub k: u64,
    /// Claimed current state; a lying sender substitutes its scripted value
    /// per receiver.
    pub x_now: Vec<f64>,
    /// `(h, value received from h at k-1)` for every in-neighbor h at k-1,
    /// ascending by id.
    pub relayed: Vec<(NodeId, Vec<f64>)>,
}

impl TwoHopPacket {
    /// Copy of the packet with a per-receiver claimed state.
    pub fn with_claim(&self, x_now: Vec<f64>) -> Self {
        Self { sender: self.sender, k: self.k, x_now, relayed: self.relayed.clone() }
    }

    fn relayed_value(&self, h: NodeId) -> Option<&Vec<f64>> {
        self.relayed
            .binary_search_by_key(&h, |(id, _)| *id)
            .ok()
            .map(|idx| &self.relayed[idx].1)
    }
}

/// Assemble the packet of `sender` at time `k`.
///
/// `prev_graph` is the topology in force at `k - 1`; `prev_received` maps
/// each of the sender's previous in-neighbors to the value received from it.
pub fn build_packet(
    sender: NodeId,
    k: u64,
    x_now: Vec<f64>,
    prev_graph: &DirectedGraph,
    prev_received: &BTreeMap<NodeId, Vec<f64>>,
) -> TwoHopPacket {
    let relayed = prev_graph
        .in_neighbors(sender)
        .iter()
        .filter_map(|&h| prev_received.get(&h).map(|v| (h, v.clone())))
        .collect();
    TwoHopPacket { sender, k, x_now, relayed }
}

/// Outcome of one observer-side consistency check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionOutcome {
    pub flagged: bool,
    /// Infinity-norm residual; infinite for malformed packets.
    pub residual: f64,
}

/// Check sender `j`'s claimed state against the nominal update recomputed
/// from its packet.
///
/// `prev_claim` is the state `j` claimed to this observer at `k - 1`;
/// `prev_graph` supplies `j`'s in-edge weights at `k - 1` (common-knowledge
/// topology). A relayed entry missing for one of `j`'s previous in-neighbors
/// counts as misbehavior and flags `j` outright.
pub fn detect_neighbor(
    pkt: &TwoHopPacket,
    prev_claim: &[f64],
    prev_graph: &DirectedGraph,
    epsilon: f64,
    tolerance: f64,
) -> DetectionOutcome {
    let j = pkt.sender;
    // Accumulate exactly like the consensus update: ascending in-neighbor
    // order, one fused multiply-add per coordinate and neighbor.
    let mut predicted = prev_claim.to_vec();
    for &h in prev_graph.in_neighbors(j) {
        let Some(value) = pkt.relayed_value(h) else {
            return DetectionOutcome { flagged: true, residual: f64::INFINITY };
        };
        if value.len() != prev_claim.len() {
            return DetectionOutcome { flagged: true, residual: f64::INFINITY };
        }
        let a_jh = prev_graph.weight(h, j);
        for (p, (&v, &xj)) in predicted.iter_mut().zip(value.iter().zip(prev_claim)) {
            *p += epsilon * a_jh * (v - xj);
        }
    }
    let residual = pkt
        .x_now
        .iter()
        .zip(&predicted)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    DetectionOutcome { flagged: residual > tolerance, residual }
}

/// One raised flag, kept for the trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlagEvent {
    pub k: u64,
    pub observer: NodeId,
    pub flagged: NodeId,
    pub residual: f64,
}

/// Cumulative flagged set `B(0,k)` and the derived normal set `A(0,k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionState {
    all_nodes: BTreeSet<NodeId>,
    flagged: BTreeSet<NodeId>,
}

impl DetectionState {
    pub fn new(all_nodes: impl IntoIterator<Item = NodeId>) -> Self {
        Self { all_nodes: all_nodes.into_iter().collect(), flagged: BTreeSet::new() }
    }

    /// `B(0,k)`: every agent flagged so far.
    pub fn flagged(&self) -> &BTreeSet<NodeId> {
        &self.flagged
    }

    /// `A(0,k)`: the surviving normal set.
    pub fn normal(&self) -> BTreeSet<NodeId> {
        self.all_nodes.difference(&self.flagged).copied().collect()
    }

    pub fn is_flagged(&self, v: NodeId) -> bool {
        self.flagged.contains(&v)
    }

    /// Union the broadcast per-observer flag sets into the cumulative set.
    /// Returns true iff the normal set shrank, which triggers reconstruction.
    pub fn merge_broadcasts(&mut self, flags: impl IntoIterator<Item = NodeId>) -> bool {
        let before = self.flagged.len();
        self.flagged.extend(flags);
        self.flagged.len() != before
    }
}
