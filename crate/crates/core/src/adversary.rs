//! Byzantine transmission scripts and the F-local admissibility check.
//!
//! An attacker transmits, per receiver and per step, either its true state
//! (dormant) or the value of a matching scripted rule. Rules are windowed in
//! time and select receivers either specifically or by wildcard; a specific
//! rule beats a wildcard when both match, which is how one attacker sends
//! different values to different neighbors at the same step.
//!
//! Three function families cover the usual attack shapes: a constant vector,
//! a replay of the attacker's own past state, and an affine map of a
//! (possibly delayed) own state with per-entry sinusoidal modulation of gains
//! and offsets.

use std::collections::{BTreeMap, BTreeSet};

use crate::graph::{DirectedGraph, NodeId};

/// Per-entry sinusoidal modulation, evaluated at integer step k in radians.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Modulation {
    None,
    Sin,
    Cos,
}

/// Coefficient with optional modulation: `c`, `c*sin(k)` or `c*cos(k)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModulatedScalar {
    pub coefficient: f64,
    pub modulation: Modulation,
}

impl ModulatedScalar {
    pub fn constant(c: f64) -> Self {
        Self { coefficient: c, modulation: Modulation::None }
    }

    pub fn eval(&self, k: u64) -> f64 {
        match self.modulation {
            Modulation::None => self.coefficient,
            Modulation::Sin => self.coefficient * (k as f64).sin(),
            Modulation::Cos => self.coefficient * (k as f64).cos(),
        }
    }
}

/// The value an active rule produces.
#[derive(Debug, Clone, PartialEq)]
pub enum AttackFunction {
    /// Transmit exactly this vector.
    ConstantBias { value: Vec<f64> },
    /// Transmit the attacker's own state `delay` steps ago.
    Replay { delay: u64 },
    /// Transmit `diag(gains(k)) * x_self(k - delay) + offset(k)`.
    Affine {
        gains: Vec<ModulatedScalar>,
        offset: Vec<ModulatedScalar>,
        delay: u64,
    },
}

/// Receiver selector of a rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReceiverSelector {
    Any,
    Node(NodeId),
}

impl ReceiverSelector {
    fn matches(self, receiver: NodeId) -> bool {
        match self {
            ReceiverSelector::Any => true,
            ReceiverSelector::Node(v) => v == receiver,
        }
    }
}

/// Half-open activity window `[start, end)`; `end = None` means unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimeWindow {
    pub start: u64,
    pub end: Option<u64>,
}

impl TimeWindow {
    pub fn contains(&self, k: u64) -> bool {
        k >= self.start && self.end.is_none_or(|e| k < e)
    }

    pub fn overlaps(&self, other: &TimeWindow) -> bool {
        let self_end = self.end.unwrap_or(u64::MAX);
        let other_end = other.end.unwrap_or(u64::MAX);
        self.start < other_end && other.start < self_end
    }
}

/// One scripted transmission rule.
#[derive(Debug, Clone, PartialEq)]
pub struct AttackRule {
    pub receiver: ReceiverSelector,
    pub window: TimeWindow,
    pub function: AttackFunction,
}

/// All rules of one attacker.
#[derive(Debug, Clone, PartialEq)]
pub struct AttackScript {
    pub attacker: NodeId,
    pub rules: Vec<AttackRule>,
}

impl AttackScript {
    /// Rule in effect toward `receiver` at step `k`. Specific-receiver rules
    /// take precedence over wildcards; within each class the first matching
    /// rule wins (windows of rules with an identical selector are disjoint).
    pub fn active_rule(&self, receiver: NodeId, k: u64) -> Option<&AttackRule> {
        let specific = self.rules.iter().find(|r| {
            r.receiver != ReceiverSelector::Any
                && r.receiver.matches(receiver)
                && r.window.contains(k)
        });
        specific.or_else(|| {
            self.rules
                .iter()
                .find(|r| r.receiver == ReceiverSelector::Any && r.window.contains(k))
        })
    }

    /// True iff any rule window covers `k`.
    pub fn active_at(&self, k: u64) -> bool {
        self.rules.iter().any(|r| r.window.contains(k))
    }
}

/// Scripts keyed by attacker id.
pub type ScriptSet = BTreeMap<NodeId, AttackScript>;

/// Full per-agent state history of a run, indexed by step.
#[derive(Debug, Clone, Default)]
pub struct StateHistory {
    steps: Vec<BTreeMap<NodeId, Vec<f64>>>,
}

impl StateHistory {
    pub fn new() -> Self {
        Self::default()
    }

    /// Record the states at step `len()`.
    pub fn push(&mut self, states: BTreeMap<NodeId, Vec<f64>>) {
        self.steps.push(states);
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn get(&self, k: u64, id: NodeId) -> Option<&Vec<f64>> {
        self.steps.get(k as usize).and_then(|m| m.get(&id))
    }
}

/// Result of evaluating one transmission.
#[derive(Debug, Clone, PartialEq)]
pub struct Transmission {
    pub value: Vec<f64>,
    /// True iff a scripted rule produced the value.
    pub fired: bool,
    /// True iff a replay or delayed affine reached before step 0 and was
    /// clamped to the initial state.
    pub clamped: bool,
}

/// Value delivered from `attacker` to `receiver` at step `k`.
///
/// `history` must contain the attacker's states up to and including step `k`;
/// delayed lookups reaching before step 0 clamp to the initial state and set
/// the `clamped` marker. Without a matching active rule the attacker's true
/// current state is returned (dormant behavior). Pure in all arguments.
pub fn transmitted_value(
    scripts: &ScriptSet,
    attacker: NodeId,
    receiver: NodeId,
    k: u64,
    history: &StateHistory,
) -> Transmission {
    let own = |at: u64| -> Vec<f64> {
        history
            .get(at, attacker)
            .unwrap_or_else(|| panic!("state history missing step {at} for agent {attacker}"))
            .clone()
    };
    // look-backs preceding the start of the run clamp to the initial state
    let delayed = |delay: u64| -> (Vec<f64>, bool) {
        if delay > k {
            (own(0), true)
        } else {
            (own(k - delay), false)
        }
    };

    let rule = scripts
        .get(&attacker)
        .and_then(|script| script.active_rule(receiver, k));
    match rule {
        None => Transmission { value: own(k), fired: false, clamped: false },
        Some(rule) => match &rule.function {
            AttackFunction::ConstantBias { value } => {
                Transmission { value: value.clone(), fired: true, clamped: false }
            }
            AttackFunction::Replay { delay } => {
                let (value, clamped) = delayed(*delay);
                Transmission { value, fired: true, clamped }
            }
            AttackFunction::Affine { gains, offset, delay } => {
                let (base, clamped) = delayed(*delay);
                let value = base
                    .iter()
                    .zip(gains)
                    .zip(offset)
                    .map(|((x, g), b)| g.eval(k) * x + b.eval(k))
                    .collect();
                Transmission { value, fired: true, clamped }
            }
        },
    }
}

/// True iff every node has at most `F` members of `active` among its
/// in-neighbors.
pub fn check_f_local(g: &DirectedGraph, active: &BTreeSet<NodeId>, f_bound: usize) -> bool {
    g.node_ids().iter().all(|&i| {
        g.in_neighbors(i)
            .iter()
            .filter(|j| active.contains(j))
            .count()
            <= f_bound
    })
}

/// Activation timeline derived from an admissible set and its scripts.
#[derive(Debug, Clone, PartialEq)]
pub struct AttackSchedule {
    pub admissible: BTreeSet<NodeId>,
    /// Strictly increasing instants, each with the attackers whose windows
    /// open there.
    pub activations: Vec<(u64, BTreeSet<NodeId>)>,
}

impl AttackSchedule {
    /// Collect window starts per attacker. Fails with a message when a window
    /// opens at step 0 (the network cannot be attacked at the initial time)
    /// or a script belongs to an agent outside the admissible set.
    pub fn from_scripts(
        admissible: &BTreeSet<NodeId>,
        scripts: &ScriptSet,
    ) -> Result<Self, String> {
        let mut by_instant: BTreeMap<u64, BTreeSet<NodeId>> = BTreeMap::new();
        for (&attacker, script) in scripts {
            if !admissible.contains(&attacker) {
                return Err(format!(
                    "attack script for agent {attacker} which is not in the admissible set"
                ));
            }
            for rule in &script.rules {
                if rule.window.start == 0 {
                    return Err(format!(
                        "agent {attacker} has an attack window opening at step 0; the initial time cannot be attacked"
                    ));
                }
                by_instant.entry(rule.window.start).or_default().insert(attacker);
            }
        }
        Ok(Self {
            admissible: admissible.clone(),
            activations: by_instant.into_iter().collect(),
        })
    }

    /// Attackers with at least one window covering `k`.
    pub fn active_at(&self, scripts: &ScriptSet, k: u64) -> BTreeSet<NodeId> {
        scripts
            .iter()
            .filter(|(_, s)| s.active_at(k))
            .map(|(&id, _)| id)
            .collect()
    }
}

/// Validate per-script invariants: disjoint windows per identical receiver
/// selector and replay delays of at least one step.
pub fn validate_script(script: &AttackScript) -> Result<(), String> {
    for rule in &script.rules {
        if let AttackFunction::Replay { delay } = rule.function {
            if delay == 0 {
                return Err(format!(
                    "agent {}: replay delay must be at least 1",
                    script.attacker
                ));
            }
        }
        if let Some(end) = rule.window.end {
            if end <= rule.window.start {
                return Err(format!(
                    "agent {}: empty attack window [{}, {})",
                    script.attacker, rule.window.start, end
                ));
            }
        }
    }
    for (a, ra) in script.rules.iter().enumerate() {
        for rb in script.rules.iter().skip(a + 1) {
            if ra.receiver == rb.receiver && ra.window.overlaps(&rb.window) {
                return Err(format!(
                    "agent {}: overlapping windows for the same receiver selector",
                    script.attacker
                ));
            }
        }
    }
    Ok(())
}
