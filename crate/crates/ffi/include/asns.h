#ifndef ASNS_H
#define ASNS_H

/* Generated by cbindgen from the asns-ffi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of a C API call.
 */
typedef enum {
  ASNS_STATUS_OK = 0,
  ASNS_STATUS_NULL_ARGUMENT = 1,
  ASNS_STATUS_INVALID_UTF8 = 2,
  ASNS_STATUS_PARSE_ERROR = 3,
  ASNS_STATUS_RUN_ERROR = 4,
  ASNS_STATUS_IO_ERROR = 5,
} AsnsStatus;

/**
 * Opaque parsed graph literal.
 */
typedef struct AsnsGraph AsnsGraph;

/**
 * Opaque parsed scenario.
 */
typedef struct AsnsScenario AsnsScenario;

/**
 * Opaque completed simulation trace.
 */
typedef struct AsnsTrace AsnsTrace;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the most recent failure on this thread, or null when the last
 * call succeeded. The pointer stays valid until the next failing call on
 * the same thread.
 */
const char *asns_last_error(void);

/**
 * Library version as a static string.
 */
const char *asns_version(void);

/**
 * Parse a scenario file's text into a handle.
 *
 * # Safety
 * `text` must be NUL-terminated; `out` must be writable.
 */
AsnsStatus asns_scenario_parse(const char *text, AsnsScenario **out);

/**
 * Release a scenario handle. Null is ignored.
 *
 * # Safety
 * `scenario` must come from [`asns_scenario_parse`] and not be freed twice.
 */
void asns_scenario_free(AsnsScenario *scenario);

/**
 * Execute a scenario, producing a trace handle.
 *
 * # Safety
 * `scenario` must be a live handle; `out` must be writable.
 */
AsnsStatus asns_scenario_run(const AsnsScenario *scenario, AsnsTrace **out);

/**
 * Release a trace handle. Null is ignored.
 *
 * # Safety
 * `trace` must come from [`asns_scenario_run`] and not be freed twice.
 */
void asns_trace_free(AsnsTrace *trace);

/**
 * Whether the run converged.
 *
 * # Safety
 * `trace` must be a live handle; `out` must be writable.
 */
AsnsStatus asns_trace_converged(const AsnsTrace *trace, bool *out);

/**
 * Step at which convergence was declared, or -1.
 *
 * # Safety
 * `trace` must be a live handle; `out` must be writable.
 */
AsnsStatus asns_trace_convergence_step(const AsnsTrace *trace, int64_t *out);

/**
 * Final hull width over the truly-normal agents.
 *
 * # Safety
 * `trace` must be a live handle; `out` must be writable.
 */
AsnsStatus asns_trace_final_hull_width(const AsnsTrace *trace, double *out);

/**
 * Number of reconstruction epochs.
 *
 * # Safety
 * `trace` must be a live handle; `out` must be writable.
 */
AsnsStatus asns_trace_epoch_count(const AsnsTrace *trace, uint32_t *out);

/**
 * Last simulated step.
 *
 * # Safety
 * `trace` must be a live handle; `out` must be writable.
 */
AsnsStatus asns_trace_last_step(const AsnsTrace *trace, uint64_t *out);

/**
 * JSON summary document as a newly allocated string; free with
 * [`asns_string_free`]. Null on failure.
 *
 * # Safety
 * `trace` must be a live handle.
 */
char *asns_trace_summary_json(const AsnsTrace *trace);

/**
 * Write states.csv, events.csv and summary.json under `dir`.
 *
 * # Safety
 * `trace` must be a live handle; `dir` must be NUL-terminated.
 */
AsnsStatus asns_trace_write(const AsnsTrace *trace, const char *dir);

/**
 * Release a string returned by this library. Null is ignored.
 *
 * # Safety
 * `text` must come from this library and not be freed twice.
 */
void asns_string_free(char *text);

/**
 * Parse a standalone graph literal.
 *
 * # Safety
 * `text` must be NUL-terminated; `out` must be writable.
 */
AsnsStatus asns_graph_parse(const char *text, AsnsGraph **out);

/**
 * Release a graph handle. Null is ignored.
 *
 * # Safety
 * `graph` must come from [`asns_graph_parse`] and not be freed twice.
 */
void asns_graph_free(AsnsGraph *graph);

/**
 * Exact robustness of the graph (exhaustive; limited to small graphs).
 *
 * # Safety
 * `graph` must be a live handle; `out` must be writable.
 */
AsnsStatus asns_graph_max_robustness(const AsnsGraph *graph, uint32_t *out);

/**
 * Lowest-id node with directed paths to every other node, or -1.
 *
 * # Safety
 * `graph` must be a live handle; `out` must be writable.
 */
AsnsStatus asns_graph_spanning_tree_root(const AsnsGraph *graph, int64_t *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ASNS_H */
