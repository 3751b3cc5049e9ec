/* Generated by cbindgen from src/lib.rs; do not edit. */

#ifndef OPTOMECH_H
#define OPTOMECH_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum OmStatus {
  OM_STATUS_OK = 0,
  OM_STATUS_NULL_POINTER = 1,
  OM_STATUS_INVALID_ARGUMENT = 2,
  OM_STATUS_CONFIG = 3,
  OM_STATUS_PHYSICS = 4,
  OM_STATUS_NUMERICAL = 5,
  OM_STATUS_IO = 6,
  OM_STATUS_PANIC = 7,
} OmStatus;

/**
 * Values accepted by the `method` arguments.
 */
typedef enum OmMethod {
  OM_METHOD_NUMERIC = 0,
  OM_METHOD_CLOSED = 1,
  OM_METHOD_LOW_T = 2,
} OmMethod;

/**
 * Opaque scenario handle.
 */
typedef struct OmScenario OmScenario;

typedef struct OmCouplingResult {
  double displacement_m;
  double v_j;
  double dvdx0_j_per_m;
  double x_disp_m;
  double carrier_phase_rad;
} OmCouplingResult;

typedef struct OmHoleEdges {
  double left_hz;
  double right_hz;
} OmHoleEdges;

typedef struct OmDetectionBudget {
  double photon_rate_per_s;
  double overburn_time_s;
  double integration_time_s;
  double shot_noise_phase_rad;
} OmDetectionBudget;

/**
 * `relative_excess` is NaN at zero occupancy.
 */
typedef struct OmSidebands {
  double thermal_phase_rad;
  double zeropoint_phase_rad;
  double total_phase_rad;
  double classical_phase_rad;
  double relative_excess;
} OmSidebands;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or NULL. Valid until the next
 * failing call on the same thread; do not free.
 */
const char *om_last_error(void);

/**
 * Parse a `key = value` scenario text.
 *
 * # Safety
 * `cfg` must be a NUL-terminated string and `out_scenario` writable.
 */
enum OmStatus om_scenario_from_cfg(const char *cfg, struct OmScenario **out_scenario);

/**
 * The bundled worked example.
 *
 * # Safety
 * `out_scenario` must be writable.
 */
enum OmStatus om_scenario_paper_example(struct OmScenario **out_scenario);

/**
 * Override one key. The handle is unchanged when the result is invalid.
 *
 * # Safety
 * `s` must come from this library and `key` be NUL-terminated.
 */
enum OmStatus om_scenario_set(struct OmScenario *s, const char *key, double value);

/**
 * # Safety
 * `s` must come from this library, or be NULL.
 */
void om_scenario_free(struct OmScenario *s);

/**
 * `V`, `dV/dX` at 0, static displacement and carrier phase. A non-finite
 * `displacement_m` evaluates `V` at the static displacement.
 *
 * # Safety
 * `s` must come from this library and `result` be writable.
 */
enum OmStatus om_coupling(const struct OmScenario *s,
                          int32_t method_id,
                          double displacement_m,
                          struct OmCouplingResult *result);

/**
 * Interaction energy `V(X)` in joules.
 *
 * # Safety
 * `s` must come from this library and `v_j` be writable.
 */
enum OmStatus om_interaction_energy(const struct OmScenario *s,
                                    int32_t method_id,
                                    double tip_displacement_m,
                                    double *v_j);

/**
 * Hole edges at height `x_m` with the tip displaced by `tip_displacement_m`.
 *
 * # Safety
 * `s` must come from this library and `edges` be writable.
 */
enum OmStatus om_hole_edges(const struct OmScenario *s,
                            double x_m,
                            double tip_displacement_m,
                            struct OmHoleEdges *edges);

/**
 * Photon rate, overburn time and shot-noise phase. A non-finite
 * `integration_time_s` integrates for the overburn time.
 *
 * # Safety
 * `s` must come from this library and `budget` be writable.
 */
enum OmStatus om_detection_budget(const struct OmScenario *s,
                                  double integration_time_s,
                                  struct OmDetectionBudget *budget);

/**
 * Sideband phases at the scenario temperature, using `dV/dX` from `method_id`.
 *
 * # Safety
 * `s` must come from this library and `sidebands` be writable.
 */
enum OmStatus om_sideband_phases(const struct OmScenario *s,
                                 int32_t method_id,
                                 struct OmSidebands *sidebands);

/**
 * Periodic steady-state coherence at time `t_s` for the scenario drive.
 *
 * # Safety
 * `s` must come from this library; `re` and `im` must be writable.
 */
enum OmStatus om_pss_coherence(const struct OmScenario *s, double t_s, double *re, double *im);

/**
 * Full JSON report for all methods; free with `om_string_free`.
 *
 * # Safety
 * `s` must come from this library and `json` be writable.
 */
enum OmStatus om_report_json(const struct OmScenario *s, char **json);

/**
 * # Safety
 * `p` must come from this library, or be NULL.
 */
void om_string_free(char *p);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* OPTOMECH_H */
