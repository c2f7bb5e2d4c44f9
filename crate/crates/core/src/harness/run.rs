//! Round-synchronous simulation loop.
//!
//! Within one step the phases follow the protocol order: packets are
//! exchanged on the standing topology, the detector is evaluated, flag
//! broadcasts are merged, the topology is reconstructed when the surviving
//! normal set shrank, and only then does the state update run on the freshly
//! installed graph. Reconstruction never touches states, so topology swaps
//! cannot introduce jumps.
//!
//! Packet consistency checks compare a claimed state against the update
//! recomputed from one-step-older data, so a lie transmitted at step `k` is
//! flagged at `k + 1`; the lying value enters exactly one update before its
//! sender is isolated. Oracle detection removes even that single step: it
//! flags an attacker the moment a scripted rule fires on a live out-edge,
//! before the update consumes anything.
//!
//! A run is fully deterministic: map iteration orders are fixed, and the
//! scenario seed is only consumed by generators, never by the loop.

use std::collections::{BTreeMap, BTreeSet};
use std::rc::Rc;

use serde::Serialize;

use crate::adversary::{transmitted_value, StateHistory};
use crate::asns::reconstruct;
use crate::detection::{
    build_packet, detect_neighbor, DetectionState, FlagEvent, DETECTION_TOL,
};
use crate::dynamics::{
    consensus_step, hull_of, AgentState, HullBounds, ReceivedMap, Role, StateMap,
};
use crate::error::RunError;
use crate::graph::{DirectedGraph, NodeId};
use crate::msr::{wmsr_step, MsrConfig};

use super::scenario::{Defense, DetectionMode, Scenario};

/// Steps the normal hull must stay below tolerance before a run counts as
/// converged.
pub const CONVERGENCE_WINDOW: u64 = 10;

/// Reference sets for the relative-error metric.
#[derive(Debug, Clone, PartialEq)]
pub struct RefSpec {
    /// Agents measured against the whole truly-normal set.
    pub normal: BTreeSet<NodeId>,
    /// Attack-admissible agents measured against their initial in-neighbors.
    pub byzantine_inputs: BTreeMap<NodeId, Vec<NodeId>>,
}

impl RefSpec {
    pub fn of_scenario(s: &Scenario) -> Self {
        let normal = s.truly_normal();
        let byzantine_inputs = s
            .admissible
            .iter()
            .map(|&b| (b, s.graph0.in_neighbors(b).to_vec()))
            .collect();
        Self { normal, byzantine_inputs }
    }
}

/// Per-agent relative error: the Euclidean norm of the summed differences to
/// the agent's reference set (the truly-normal agents, or for an
/// attack-admissible agent its initial in-neighbors).
pub fn relative_error(states: &StateMap, refs: &RefSpec) -> BTreeMap<NodeId, f64> {
    let mut sigma = BTreeMap::new();
    for (&id, agent) in states {
        let references: Vec<NodeId> = if let Some(inputs) = refs.byzantine_inputs.get(&id) {
            inputs.clone()
        } else {
            refs.normal.iter().copied().collect()
        };
        let mut sum = vec![0.0; agent.x.len()];
        for j in references {
            if let Some(other) = states.get(&j) {
                for (acc, (&xi, &xj)) in sum.iter_mut().zip(agent.x.iter().zip(&other.x)) {
                    *acc += xi - xj;
                }
            }
        }
        sigma.insert(id, sum.iter().map(|v| v * v).sum::<f64>().sqrt());
    }
    sigma
}

/// One recorded step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRow {
    pub k: u64,
    pub states: BTreeMap<NodeId, Vec<f64>>,
    pub roles: BTreeMap<NodeId, Role>,
    pub sigma: BTreeMap<NodeId, f64>,
    pub flags: Vec<FlagEvent>,
    /// Cumulative isolated set B(0,k).
    pub isolated: BTreeSet<NodeId>,
    pub epoch: u32,
    /// Interval hull over the currently unflagged agents.
    pub hull: HullBounds,
}

/// Everything one reconstruction installed, for the trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpochRecord {
    pub epoch: u32,
    pub k: u64,
    pub normal: Vec<NodeId>,
    pub leader: Option<NodeId>,
    pub lambda1: Option<f64>,
    pub v1: Vec<(NodeId, f64)>,
    pub psi: BTreeMap<NodeId, Vec<NodeId>>,
    pub edges: Vec<(NodeId, NodeId)>,
}

/// Run outcome digest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub name: String,
    pub defense: String,
    pub converged: bool,
    /// First step at which the truly-normal hull had been below tolerance
    /// for [`CONVERGENCE_WINDOW`] consecutive steps.
    pub convergence_step: Option<u64>,
    pub final_hull_width: f64,
    pub last_step: u64,
    pub horizon: u64,
    pub epoch_count: u32,
    pub edges_per_epoch: Vec<usize>,
    pub total_flags: usize,
    pub first_flag_step: Option<u64>,
    pub defense_failure: Option<String>,
    pub replay_clamp_warnings: u64,
}

/// Full record of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimTrace {
    pub rows: Vec<StepRow>,
    pub epochs: Vec<EpochRecord>,
    pub summary: Summary,
}

fn role_at(s: &Scenario, id: NodeId, k: u64) -> Role {
    if !s.admissible.contains(&id) {
        Role::Normal
    } else if s.scripts.get(&id).is_some_and(|sc| sc.active_at(k)) {
        Role::ByzantineActive
    } else {
        Role::ByzantineDormant
    }
}

/// Deliver transmissions at step `k` over every edge of `g`, appending to
/// `claims`. Returns the number of clamped look-backs.
fn deliver(
    s: &Scenario,
    g: &DirectedGraph,
    k: u64,
    history: &StateHistory,
    claims: &mut ReceivedMap,
) -> u64 {
    let mut clamps = 0;
    for (j, i, _) in g.edges() {
        if claims.contains_key(&(i, j)) {
            continue;
        }
        let t = transmitted_value(&s.scripts, j, i, k, history);
        if t.clamped {
            clamps += 1;
        }
        claims.insert((i, j), t.value);
    }
    clamps
}

/// Execute a scenario. Selection failures during reconstruction are reported
/// inside the summary as defense failures; hard protocol violations abort
/// with the failing step.
pub fn run_scenario(s: &Scenario) -> Result<SimTrace, RunError> {
    s.validate()
        .map_err(|e| RunError { step: 0, cause: e.to_string() })?;

    let refs = RefSpec::of_scenario(s);
    let last_activation = s
        .scripts
        .values()
        .flat_map(|sc| sc.rules.iter().map(|r| r.window.start))
        .max()
        .unwrap_or(0);

    // states at time 0
    let mut states: StateMap = s
        .initial_states
        .iter()
        .map(|(&id, x)| (id, AgentState::new(id, x.clone(), role_at(s, id, 0))))
        .collect();

    let mut history = StateHistory::new();
    history.push(states.iter().map(|(&id, a)| (id, a.x.clone())).collect());

    let mut det_state = DetectionState::new(s.graph0.node_ids().iter().copied());
    let mut g_cur: Rc<DirectedGraph> = Rc::new(s.graph0.clone());
    let mut g_prev: Rc<DirectedGraph> = Rc::clone(&g_cur);
    let mut epoch: u32 = 0;

    let mut rows: Vec<StepRow> = Vec::new();
    let mut epochs: Vec<EpochRecord> = Vec::new();
    let mut clamp_warnings = 0u64;
    let mut defense_failure: Option<String> = None;
    let mut total_flags = 0usize;
    let mut first_flag_step: Option<u64> = None;

    let mut convergence_streak = 0u64;
    let mut convergence_step: Option<u64> = None;

    // Records row k and returns the truly-normal hull width driving the
    // convergence declaration.
    let record_row = |rows: &mut Vec<StepRow>,
                      states: &StateMap,
                      det_state: &DetectionState,
                      flags: Vec<FlagEvent>,
                      epoch: u32,
                      k: u64|
     -> Result<f64, RunError> {
        let hull = hull_of(states, &det_state.normal())
            .map_err(|e| RunError { step: k, cause: e.to_string() })?;
        let normal_hull = hull_of(states, &refs.normal)
            .map_err(|e| RunError { step: k, cause: e.to_string() })?;
        let sigma = relative_error(states, &refs);
        rows.push(StepRow {
            k,
            states: states.iter().map(|(&id, a)| (id, a.x.clone())).collect(),
            roles: states.iter().map(|(&id, a)| (id, a.role)).collect(),
            sigma,
            flags,
            isolated: det_state.flagged().clone(),
            epoch,
            hull,
        });
        Ok(normal_hull.width())
    };

    // row 0
    let width0 = record_row(&mut rows, &states, &det_state, Vec::new(), epoch, 0)?;
    let mut final_width = width0;
    if width0 < s.tolerance {
        convergence_streak = 1;
    }

    // claims at time 0 are truthful by construction (no window opens at 0)
    let mut claims_cur: ReceivedMap = ReceivedMap::new();
    clamp_warnings += deliver(s, &g_cur, 0, &history, &mut claims_cur);
    let mut claims_prev: ReceivedMap = ReceivedMap::new();

    // x(1)
    let advance = |states: &StateMap,
                       g: &DirectedGraph,
                       claims: &ReceivedMap,
                       k: u64|
     -> Result<StateMap, RunError> {
        let next = match s.defense {
            Defense::Wmsr => wmsr_step(
                states,
                g,
                claims,
                &MsrConfig { f: s.f_local, epsilon: s.epsilon },
                k,
            ),
            _ => consensus_step(states, g, s.epsilon, claims, k),
        };
        next.map_err(|e| RunError { step: k, cause: e.to_string() })
    };

    states = advance(&states, &g_cur, &claims_cur, 0)?;
    history.push(states.iter().map(|(&id, a)| (id, a.x.clone())).collect());

    let mut last_step = 0u64;
    for k in 1..=s.horizon {
        last_step = k;
        for agent in states.values_mut() {
            agent.role = role_at(s, agent.id, k);
        }

        // --- detection ---
        let mut flags: Vec<FlagEvent> = Vec::new();
        if s.defense.detects() {
            match s.detection {
                DetectionMode::TwoHop if k >= 2 => {
                    // Packets sent at k-1 travelled on the graph standing at
                    // k-2; their consistency is checkable now.
                    let observers = det_state.normal();
                    for &j in g_prev.node_ids() {
                        if det_state.is_flagged(j) {
                            continue;
                        }
                        let prev_received: BTreeMap<NodeId, Vec<f64>> = g_prev
                            .in_neighbors(j)
                            .iter()
                            .filter_map(|&h| {
                                claims_prev.get(&(j, h)).map(|v| (h, v.clone()))
                            })
                            .collect();
                        let base_packet =
                            build_packet(j, k - 1, Vec::new(), &g_prev, &prev_received);
                        for &i in g_prev.out_neighbors(j) {
                            if !observers.contains(&i) || i == j {
                                continue;
                            }
                            let (Some(x_now), Some(prev_claim)) =
                                (claims_cur.get(&(i, j)), claims_prev.get(&(i, j)))
                            else {
                                continue;
                            };
                            let pkt = base_packet.with_claim(x_now.clone());
                            let outcome =
                                detect_neighbor(&pkt, prev_claim, &g_prev, s.epsilon, DETECTION_TOL);
                            if outcome.flagged {
                                flags.push(FlagEvent {
                                    k,
                                    observer: i,
                                    flagged: j,
                                    residual: outcome.residual,
                                });
                            }
                        }
                    }
                }
                DetectionMode::Oracle => {
                    for (&attacker, script) in &s.scripts {
                        if det_state.is_flagged(attacker) {
                            continue;
                        }
                        let fires = g_cur
                            .out_neighbors(attacker)
                            .iter()
                            .any(|&r| script.active_rule(r, k).is_some());
                        if fires {
                            flags.push(FlagEvent { k, observer: 0, flagged: attacker, residual: 0.0 });
                        }
                    }
                }
                _ => {}
            }
        }
        total_flags += flags.len();
        if !flags.is_empty() && first_flag_step.is_none() {
            first_flag_step = Some(k);
        }

        // --- broadcast merge + reconstruction ---
        let trigger = det_state.merge_broadcasts(flags.iter().map(|f| f.flagged));
        let mut g_next = Rc::clone(&g_cur);
        if trigger {
            epoch += 1;
            let normal = det_state.normal();
            match s.defense {
                Defense::Asns => {
                    let pin = s.leader_pins.get(epoch as usize - 1).copied();
                    match reconstruct(&s.pre_graph0, &normal, pin, s.policy, epoch) {
                        Ok(rec) => {
                            epochs.push(EpochRecord {
                                epoch,
                                k,
                                normal: normal.iter().copied().collect(),
                                leader: Some(rec.leader),
                                lambda1: Some(rec.eigenpair.lambda1),
                                v1: rec
                                    .eigenpair
                                    .node_ids()
                                    .iter()
                                    .copied()
                                    .zip(rec.eigenpair.v1.iter().copied())
                                    .collect(),
                                psi: rec.psi.clone(),
                                edges: rec.graph.edges().map(|(j, i, _)| (j, i)).collect(),
                            });
                            g_next = Rc::new(rec.graph);
                        }
                        Err(e) => {
                            defense_failure = Some(format!("step {k}: {e}"));
                        }
                    }
                }
                Defense::ConnectivityBaseline => {
                    let kept: Vec<(NodeId, NodeId, f64)> = g_cur
                        .edges()
                        .filter(|(j, i, _)| normal.contains(j) && normal.contains(i))
                        .collect();
                    let pruned = DirectedGraph::new(
                        g_cur.node_ids().iter().copied(),
                        kept,
                        false,
                    )
                    .expect("pruning preserves well-formedness");
                    epochs.push(EpochRecord {
                        epoch,
                        k,
                        normal: normal.iter().copied().collect(),
                        leader: None,
                        lambda1: None,
                        v1: Vec::new(),
                        psi: BTreeMap::new(),
                        edges: pruned.edges().map(|(j, i, _)| (j, i)).collect(),
                    });
                    g_next = Rc::new(pruned);
                }
                Defense::Wmsr | Defense::NoDefense => unreachable!("no detection without defense"),
            }
        }
        if defense_failure.is_some() {
            // record the aborting row, then stop; the caller sees a
            // non-converged trace, not a crash
            record_row(&mut rows, &states, &det_state, flags, epoch, k)?;
            break;
        }

        // step-size stays valid on every installed topology
        if trigger {
            let check = crate::dynamics::validate_step_size(&g_next, s.epsilon);
            if !check.valid {
                return Err(RunError {
                    step: k,
                    cause: format!(
                        "reconstructed topology violates the step-size bound 1/max l_ii = {}",
                        check.bound
                    ),
                });
            }
        }

        // --- deliver claims at k over both the packet and update graphs ---
        let mut claims_k = ReceivedMap::new();
        clamp_warnings += deliver(s, &g_cur, k, &history, &mut claims_k);
        if trigger {
            clamp_warnings += deliver(s, &g_next, k, &history, &mut claims_k);
        }

        // --- record row k ---
        let width = record_row(&mut rows, &states, &det_state, flags, epoch, k)?;
        final_width = width;
        if width < s.tolerance {
            convergence_streak += 1;
            if convergence_streak == CONVERGENCE_WINDOW {
                convergence_step = Some(k);
            }
        } else {
            // a later disturbance voids any earlier convergence claim
            convergence_streak = 0;
            convergence_step = None;
        }
        // Stop once converged and past every activation instant: the last
        // possible flag lands one step after the last window opens, so no
        // further topology event can disturb the hull.
        if convergence_step.is_some() && k > last_activation {
            break;
        }

        // --- state update x(k) -> x(k+1) on the installed graph ---
        if k < s.horizon {
            states = advance(&states, &g_next, &claims_k, k)?;
            history.push(states.iter().map(|(&id, a)| (id, a.x.clone())).collect());
        }

        g_prev = g_cur;
        g_cur = g_next;
        claims_prev = claims_cur;
        claims_cur = claims_k;
    }

    let summary = Summary {
        name: s.name.clone(),
        defense: s.defense.name().to_string(),
        converged: convergence_step.is_some() && defense_failure.is_none(),
        convergence_step,
        final_hull_width: final_width,
        last_step,
        horizon: s.horizon,
        epoch_count: epoch,
        edges_per_epoch: epochs.iter().map(|e| e.edges.len()).collect(),
        total_flags,
        first_flag_step,
        defense_failure,
        replay_clamp_warnings: clamp_warnings,
    };
    Ok(SimTrace { rows, epochs, summary })
}
