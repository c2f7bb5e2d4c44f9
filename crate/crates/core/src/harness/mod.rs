//! Scenario parsing, the round-synchronous simulation loop, and trace
//! emission.

mod gen;
mod run;
mod scenario;
mod trace;

pub use gen::{random_robust_graph, random_scenario, GeneratorConfig};
pub use run::{relative_error, run_scenario, EpochRecord, RefSpec, SimTrace, StepRow, Summary};
pub use scenario::{
    parse_graph_literal, parse_scenario, serialize_graph_literal, serialize_scenario, Defense,
    DetectionMode, Scenario,
};
pub use trace::{events_csv, states_csv, summary_json, write_trace, TracePaths};
