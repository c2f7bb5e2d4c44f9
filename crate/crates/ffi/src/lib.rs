//! C ABI for the resilient consensus simulator.
//!
//! All functions follow the same conventions: objects are opaque handles
//! created by `*_parse` functions and released by the matching `*_free`;
//! every fallible call returns an [`AsnsStatus`] code and writes its result
//! through an out-pointer; the message for the most recent failure on the
//! current thread is available from [`asns_last_error`].
//!
//! # Safety
//!
//! Pointer arguments must be valid for the duration of the call: handle
//! pointers must originate from this library and must not have been freed,
//! text pointers must be NUL-terminated, and out-pointers must reference
//! writable memory. Passing null where a value is required yields
//! `ASNS_STATUS_NULL_ARGUMENT` instead of undefined behavior.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::ptr;

use asns_core::graph::DirectedGraph;
use asns_core::harness::{
    parse_graph_literal, parse_scenario, run_scenario, summary_json, write_trace, Scenario,
    SimTrace,
};

/// Result code of a C API call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AsnsStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    RunError = 4,
    IoError = 5,
}

/// Opaque parsed scenario.
pub struct AsnsScenario(Scenario);

/// Opaque completed simulation trace.
pub struct AsnsTrace(SimTrace);

/// Opaque parsed graph literal.
pub struct AsnsGraph(DirectedGraph);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let text = CString::new(message)
        .unwrap_or_else(|_| CString::new("error message contained NUL").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(text));
}

fn fail(status: AsnsStatus, message: String) -> AsnsStatus {
    set_error(message);
    status
}

unsafe fn read_text<'a>(text: *const c_char) -> Result<&'a str, AsnsStatus> {
    if text.is_null() {
        return Err(fail(AsnsStatus::NullArgument, "text pointer is null".into()));
    }
    CStr::from_ptr(text)
        .to_str()
        .map_err(|_| fail(AsnsStatus::InvalidUtf8, "text is not valid UTF-8".into()))
}

/// Message of the most recent failure on this thread, or null when the last
/// call succeeded. The pointer stays valid until the next failing call on
/// the same thread.
#[no_mangle]
pub extern "C" fn asns_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map_or(ptr::null(), |message| message.as_ptr())
    })
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn asns_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Parse a scenario file's text into a handle.
///
/// # Safety
/// `text` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn asns_scenario_parse(
    text: *const c_char,
    out: *mut *mut AsnsScenario,
) -> AsnsStatus {
    if out.is_null() {
        return fail(AsnsStatus::NullArgument, "out pointer is null".into());
    }
    let text = match read_text(text) {
        Ok(t) => t,
        Err(status) => return status,
    };
    match parse_scenario(text) {
        Ok(scenario) => {
            *out = Box::into_raw(Box::new(AsnsScenario(scenario)));
            AsnsStatus::Ok
        }
        Err(e) => fail(AsnsStatus::ParseError, e.to_string()),
    }
}

/// Release a scenario handle. Null is ignored.
///
/// # Safety
/// `scenario` must come from [`asns_scenario_parse`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn asns_scenario_free(scenario: *mut AsnsScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Execute a scenario, producing a trace handle.
///
/// # Safety
/// `scenario` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn asns_scenario_run(
    scenario: *const AsnsScenario,
    out: *mut *mut AsnsTrace,
) -> AsnsStatus {
    if scenario.is_null() || out.is_null() {
        return fail(AsnsStatus::NullArgument, "scenario or out pointer is null".into());
    }
    match run_scenario(&(*scenario).0) {
        Ok(trace) => {
            *out = Box::into_raw(Box::new(AsnsTrace(trace)));
            AsnsStatus::Ok
        }
        Err(e) => fail(AsnsStatus::RunError, e.to_string()),
    }
}

/// Release a trace handle. Null is ignored.
///
/// # Safety
/// `trace` must come from [`asns_scenario_run`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn asns_trace_free(trace: *mut AsnsTrace) {
    if !trace.is_null() {
        drop(Box::from_raw(trace));
    }
}

unsafe fn with_trace<T>(
    trace: *const AsnsTrace,
    out: *mut T,
    read: impl FnOnce(&SimTrace) -> T,
) -> AsnsStatus {
    if trace.is_null() || out.is_null() {
        return fail(AsnsStatus::NullArgument, "trace or out pointer is null".into());
    }
    *out = read(&(*trace).0);
    AsnsStatus::Ok
}

/// Whether the run converged.
///
/// # Safety
/// `trace` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn asns_trace_converged(
    trace: *const AsnsTrace,
    out: *mut bool,
) -> AsnsStatus {
    with_trace(trace, out, |t| t.summary.converged)
}

/// Step at which convergence was declared, or -1.
///
/// # Safety
/// `trace` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn asns_trace_convergence_step(
    trace: *const AsnsTrace,
    out: *mut i64,
) -> AsnsStatus {
    with_trace(trace, out, |t| {
        t.summary.convergence_step.map_or(-1, |k| k as i64)
    })
}

/// Final hull width over the truly-normal agents.
///
/// # Safety
/// `trace` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn asns_trace_final_hull_width(
    trace: *const AsnsTrace,
    out: *mut f64,
) -> AsnsStatus {
    with_trace(trace, out, |t| t.summary.final_hull_width)
}

/// Number of reconstruction epochs.
///
/// # Safety
/// `trace` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn asns_trace_epoch_count(
    trace: *const AsnsTrace,
    out: *mut u32,
) -> AsnsStatus {
    with_trace(trace, out, |t| t.summary.epoch_count)
}

/// Last simulated step.
///
/// # Safety
/// `trace` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn asns_trace_last_step(
    trace: *const AsnsTrace,
    out: *mut u64,
) -> AsnsStatus {
    with_trace(trace, out, |t| t.summary.last_step)
}

/// JSON summary document as a newly allocated string; free with
/// [`asns_string_free`]. Null on failure.
///
/// # Safety
/// `trace` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn asns_trace_summary_json(trace: *const AsnsTrace) -> *mut c_char {
    if trace.is_null() {
        set_error("trace pointer is null".into());
        return ptr::null_mut();
    }
    let json = summary_json(&(*trace).0);
    CString::new(json).map_or(ptr::null_mut(), CString::into_raw)
}

/// Write states.csv, events.csv and summary.json under `dir`.
///
/// # Safety
/// `trace` must be a live handle; `dir` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn asns_trace_write(
    trace: *const AsnsTrace,
    dir: *const c_char,
) -> AsnsStatus {
    if trace.is_null() {
        return fail(AsnsStatus::NullArgument, "trace pointer is null".into());
    }
    let dir = match read_text(dir) {
        Ok(d) => d,
        Err(status) => return status,
    };
    match write_trace(&(*trace).0, Path::new(dir)) {
        Ok(_) => AsnsStatus::Ok,
        Err(e) => fail(AsnsStatus::IoError, e.to_string()),
    }
}

/// Release a string returned by this library. Null is ignored.
///
/// # Safety
/// `text` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn asns_string_free(text: *mut c_char) {
    if !text.is_null() {
        drop(CString::from_raw(text));
    }
}

/// Parse a standalone graph literal.
///
/// # Safety
/// `text` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn asns_graph_parse(
    text: *const c_char,
    out: *mut *mut AsnsGraph,
) -> AsnsStatus {
    if out.is_null() {
        return fail(AsnsStatus::NullArgument, "out pointer is null".into());
    }
    let text = match read_text(text) {
        Ok(t) => t,
        Err(status) => return status,
    };
    match parse_graph_literal(text) {
        Ok(graph) => {
            *out = Box::into_raw(Box::new(AsnsGraph(graph)));
            AsnsStatus::Ok
        }
        Err(e) => fail(AsnsStatus::ParseError, e.to_string()),
    }
}

/// Release a graph handle. Null is ignored.
///
/// # Safety
/// `graph` must come from [`asns_graph_parse`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn asns_graph_free(graph: *mut AsnsGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// Exact robustness of the graph (exhaustive; limited to small graphs).
///
/// # Safety
/// `graph` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn asns_graph_max_robustness(
    graph: *const AsnsGraph,
    out: *mut u32,
) -> AsnsStatus {
    if graph.is_null() || out.is_null() {
        return fail(AsnsStatus::NullArgument, "graph or out pointer is null".into());
    }
    match (*graph).0.max_robustness() {
        Ok(r) => {
            *out = r as u32;
            AsnsStatus::Ok
        }
        Err(e) => fail(AsnsStatus::RunError, e.to_string()),
    }
}

/// Lowest-id node with directed paths to every other node, or -1.
///
/// # Safety
/// `graph` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn asns_graph_spanning_tree_root(
    graph: *const AsnsGraph,
    out: *mut i64,
) -> AsnsStatus {
    if graph.is_null() || out.is_null() {
        return fail(AsnsStatus::NullArgument, "graph or out pointer is null".into());
    }
    let (_, root) = (*graph).0.has_rooted_spanning_tree();
    *out = root.map_or(-1, |r| r as i64);
    AsnsStatus::Ok
}
