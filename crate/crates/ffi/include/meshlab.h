#ifndef MESHLAB_H
#define MESHLAB_H

/* Generated from the meshlab-ffi crate by its build script; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code returned by every fallible function.
 */
typedef enum MeshlabStatus {
  MESHLAB_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  MESHLAB_STATUS_NULL_ARGUMENT = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  MESHLAB_STATUS_INVALID_UTF8 = 2,
  /**
   * The name is not a packaged scenario.
   */
  MESHLAB_STATUS_UNKNOWN_SCENARIO = 3,
  /**
   * Scenario file failed to load or validate.
   */
  MESHLAB_STATUS_SCENARIO_ERROR = 4,
  /**
   * No admissible route between the endpoints.
   */
  MESHLAB_STATUS_NO_ROUTE = 5,
  /**
   * Every candidate route contained a depleted node mid-run; the
   * report out-parameter still carries the truncated run.
   */
  MESHLAB_STATUS_ROUTES_EXHAUSTED = 6,
  /**
   * Any other engine failure (bad config, invalid layout).
   */
  MESHLAB_STATUS_ENGINE_ERROR = 7,
  /**
   * Node id not present in the layout.
   */
  MESHLAB_STATUS_UNKNOWN_NODE = 8,
  /**
   * Index or count argument outside the valid range.
   */
  MESHLAB_STATUS_OUT_OF_RANGE = 9,
  /**
   * Filesystem failure while writing outputs.
   */
  MESHLAB_STATUS_IO_ERROR = 10,
  /**
   * Unexpected internal failure.
   */
  MESHLAB_STATUS_INTERNAL = 11,
} MeshlabStatus;

/**
 * Opaque finished run, with the scenario's label and notes attached.
 */
typedef struct MeshlabReport MeshlabReport;

/**
 * Opaque loaded scenario.
 */
typedef struct MeshlabScenario MeshlabScenario;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Text of the most recent error on this thread, or null if the last
 * call succeeded. The pointer stays valid until the next call into this
 * library from the same thread.
 */
const char *meshlab_last_error(void);

/**
 * Library version as a static string; do not free.
 */
const char *meshlab_version(void);

/**
 * Materialize a packaged scenario by name: center-v1, center-v2,
 * corner-v1, or corner-v2.
 */
enum MeshlabStatus meshlab_scenario_builtin(const char *name, struct MeshlabScenario **out);

/**
 * Load and validate a scenario file (JSON, layout resolved relative to
 * the file).
 */
enum MeshlabStatus meshlab_scenario_load(const char *path, struct MeshlabScenario **out);

void meshlab_scenario_free(struct MeshlabScenario *scenario);

/**
 * The scenario's label; free with `meshlab_string_free`.
 */
enum MeshlabStatus meshlab_scenario_label(const struct MeshlabScenario *scenario, char **out);

enum MeshlabStatus meshlab_scenario_node_count(const struct MeshlabScenario *scenario,
                                               uint32_t *out);

/**
 * The scenario's `k` shortest routes as CSV
 * (`rank,path,links,intermediates,total_distance_m`); free the string
 * with `meshlab_string_free`.
 */
enum MeshlabStatus meshlab_scenario_routes_csv(const struct MeshlabScenario *scenario,
                                               uint32_t k,
                                               char **out);

/**
 * Run the scenario. On `OK` the report is complete; on
 * `ROUTES_EXHAUSTED` the report is still written to `out` and covers
 * the ticks up to the exhaustion. Other statuses leave `out` untouched.
 */
enum MeshlabStatus meshlab_run(const struct MeshlabScenario *scenario, struct MeshlabReport **out);

void meshlab_report_free(struct MeshlabReport *report);

/**
 * Whether the run delivered every scheduled transmission.
 */
enum MeshlabStatus meshlab_report_completed(const struct MeshlabReport *report, bool *out);

/**
 * Tick at which the run exhausted its routes, or -1 if it completed.
 */
enum MeshlabStatus meshlab_report_exhausted_tick(const struct MeshlabReport *report, int64_t *out);

/**
 * Tick of the first route failure, or -1 if none occurred.
 */
enum MeshlabStatus meshlab_report_first_failover_tick(const struct MeshlabReport *report,
                                                      int64_t *out);

enum MeshlabStatus meshlab_report_delivered_packets(const struct MeshlabReport *report,
                                                    uint64_t *out);

/**
 * Number of routes activated over the run (initial plus failovers).
 */
enum MeshlabStatus meshlab_report_route_count(const struct MeshlabReport *report, uint32_t *out);

/**
 * Dash-joined node path of the `index`-th activated route; free with
 * `meshlab_string_free`.
 */
enum MeshlabStatus meshlab_report_route_path(const struct MeshlabReport *report,
                                             uint32_t index,
                                             char **out);

/**
 * Total length in meters of the `index`-th activated route.
 */
enum MeshlabStatus meshlab_report_route_distance(const struct MeshlabReport *report,
                                                 uint32_t index,
                                                 double *out);

/**
 * Final battery voltage of one node.
 */
enum MeshlabStatus meshlab_report_final_voltage(const struct MeshlabReport *report,
                                                uint32_t node,
                                                double *out);

/**
 * Final battery charge of one node as percent of the reference voltage.
 */
enum MeshlabStatus meshlab_report_energy_percent(const struct MeshlabReport *report,
                                                 uint32_t node,
                                                 double *out);

/**
 * Mean final voltage across battery-powered nodes.
 */
enum MeshlabStatus meshlab_report_mean_final_voltage(const struct MeshlabReport *report,
                                                     double *out);

/**
 * The run's activated routes as CSV; free with `meshlab_string_free`.
 */
enum MeshlabStatus meshlab_report_routes_csv(const struct MeshlabReport *report, char **out);

/**
 * The run summary as a JSON document; free with `meshlab_string_free`.
 */
enum MeshlabStatus meshlab_report_summary_json(const struct MeshlabReport *report, char **out);

/**
 * Write the full report directory (voltages, energy map, routes,
 * events, neighbors, summary) into `dir`, creating it if needed.
 */
enum MeshlabStatus meshlab_report_write_directory(const struct MeshlabReport *report,
                                                  const char *dir);

/**
 * Free a string returned through any `char **` out-parameter.
 */
void meshlab_string_free(char *s);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* MESHLAB_H */
