//! Trace files: a per-step-per-agent CSV, a flag-event CSV, and a JSON
//! summary with the per-epoch reconstruction records.
//!
//! Column layout of `states.csv` (n = state dimension):
//!
//! ```text
//! k,agent,role,x_0..x_{n-1},sigma,flagged,epoch,hull_lo_0..hull_lo_{n-1},hull_hi_0..hull_hi_{n-1}
//! ```
//!
//! `role` is one of `normal`, `byzantine-dormant`, `byzantine-active`;
//! `flagged` marks membership in the cumulative isolated set; the hull
//! columns repeat the per-step interval hull of the unflagged agents on each
//! agent row of that step.
//!
//! `events.csv` holds one row per raised flag:
//!
//! ```text
//! k,observer,flagged,residual
//! ```
//!
//! Observer 0 denotes the attack oracle; residuals are infinity-norm values
//! and `inf` marks a malformed packet.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::dynamics::Role;

use super::run::{EpochRecord, SimTrace, Summary};

/// Locations written by [`write_trace`].
#[derive(Debug, Clone, PartialEq)]
pub struct TracePaths {
    pub states_csv: PathBuf,
    pub events_csv: PathBuf,
    pub summary_json: PathBuf,
}

fn role_name(role: Role) -> &'static str {
    match role {
        Role::Normal => "normal",
        Role::ByzantineDormant => "byzantine-dormant",
        Role::ByzantineActive => "byzantine-active",
    }
}

/// Render the states CSV.
pub fn states_csv(trace: &SimTrace) -> String {
    let n = trace
        .rows
        .first()
        .and_then(|r| r.states.values().next())
        .map(Vec::len)
        .unwrap_or(0);
    let mut out = String::new();
    out.push_str("k,agent,role");
    for c in 0..n {
        let _ = write!(out, ",x_{c}");
    }
    out.push_str(",sigma,flagged,epoch");
    for c in 0..n {
        let _ = write!(out, ",hull_lo_{c}");
    }
    for c in 0..n {
        let _ = write!(out, ",hull_hi_{c}");
    }
    out.push('\n');
    for row in &trace.rows {
        for (id, x) in &row.states {
            let _ = write!(out, "{},{},{}", row.k, id, role_name(row.roles[id]));
            for v in x {
                let _ = write!(out, ",{v}");
            }
            let _ = write!(
                out,
                ",{},{},{}",
                row.sigma[id],
                u8::from(row.isolated.contains(id)),
                row.epoch
            );
            for v in &row.hull.lo {
                let _ = write!(out, ",{v}");
            }
            for v in &row.hull.hi {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
    }
    out
}

/// Render the flag-event CSV.
pub fn events_csv(trace: &SimTrace) -> String {
    let mut out = String::from("k,observer,flagged,residual\n");
    for row in &trace.rows {
        for event in &row.flags {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                event.k, event.observer, event.flagged, event.residual
            );
        }
    }
    out
}

#[derive(Serialize)]
struct SummaryDoc<'a> {
    #[serde(flatten)]
    summary: &'a Summary,
    epochs: &'a [EpochRecord],
}

/// Render the JSON summary document.
pub fn summary_json(trace: &SimTrace) -> String {
    let doc = SummaryDoc { summary: &trace.summary, epochs: &trace.epochs };
    let mut text = serde_json::to_string_pretty(&doc).expect("summary serializes");
    text.push('\n');
    text
}

/// Write `states.csv`, `events.csv` and `summary.json` under `dir`,
/// creating the directory if needed.
pub fn write_trace(trace: &SimTrace, dir: &Path) -> io::Result<TracePaths> {
    fs::create_dir_all(dir)?;
    let paths = TracePaths {
        states_csv: dir.join("states.csv"),
        events_csv: dir.join("events.csv"),
        summary_json: dir.join("summary.json"),
    };
    fs::write(&paths.states_csv, states_csv(trace))?;
    fs::write(&paths.events_csv, events_csv(trace))?;
    fs::write(&paths.summary_json, summary_json(trace))?;
    Ok(paths)
}
