/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#ifndef UAV_RELAY_H
#define UAV_RELAY_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum UavrStatus {
  UAVR_STATUS_OK = 0,
  UAVR_STATUS_NULL_POINTER = 1,
  UAVR_STATUS_INVALID_ARGUMENT = 2,
  UAVR_STATUS_CONFIG = 3,
  UAVR_STATUS_NUMERICAL = 4,
  UAVR_STATUS_PLACEMENT = 5,
  UAVR_STATUS_BUFFER_TOO_SMALL = 6,
  UAVR_STATUS_PANIC = 7,
} UavrStatus;

/**
 * Opaque, validated scenario.
 */
typedef struct UavrScenario UavrScenario;

typedef struct UavrAnalysis {
  double theta_phase1;
  double theta_phase2;
  double p_head;
  double p_member;
  double expected_phase1;
  double k_effective;
  double p_phase2;
  double eta;
  /**
   * Nonzero when fewer than one phase-I decoder is expected.
   */
  int32_t out_of_regime;
} UavrAnalysis;

typedef struct UavrEstimate {
  double eta_mean;
  /**
   * NaN for a single trial.
   */
  double std_err;
  double phase1_mean;
  uint64_t trials;
  uint64_t seed;
} UavrEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null after a
 * success. Valid until the next call on the same thread.
 */
const char *uavr_last_error_message(void);

/**
 * Reference scenario. Free with `uavr_scenario_free`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum UavrStatus uavr_scenario_default(struct UavrScenario **out);

/**
 * Parses and validates a TOML scenario. Absent keys take reference values.
 *
 * # Safety
 * `toml` must be a NUL-terminated string; `out` must be valid for writes.
 */
enum UavrStatus uavr_scenario_from_toml(const char *toml, struct UavrScenario **out);

/**
 * # Safety
 * `scn` must be null or a handle from this library not yet freed.
 */
void uavr_scenario_free(struct UavrScenario *scn);

/**
 * Sets one field by config key and revalidates. On failure the handle is
 * left unchanged.
 *
 * # Safety
 * `scn` must be a live handle; `key` a NUL-terminated string.
 */
enum UavrStatus uavr_scenario_set(struct UavrScenario *scn, const char *key, double value);

/**
 * Closed-form reliability.
 *
 * # Safety
 * `scn` must be a live handle; `out` valid for writes.
 */
enum UavrStatus uavr_analyze(const struct UavrScenario *scn, struct UavrAnalysis *out);

/**
 * Monte Carlo reliability. `protocol` uses the CLI spelling, e.g.
 * `"proposed"`, `"all-gbs"` or `"multi-round:4:no-head"`.
 *
 * # Safety
 * `scn` must be a live handle; `protocol` a NUL-terminated string; `out`
 * valid for writes.
 */
enum UavrStatus uavr_simulate(const struct UavrScenario *scn,
                              const char *protocol,
                              uint64_t trials,
                              uint64_t seed,
                              struct UavrEstimate *out);

/**
 * Empirical mass function of the phase-I decoder count, written to
 * `pmf[0..=n_uavs]`. `len` must be at least `n_uavs + 1`; `*written`
 * receives the number of entries used.
 *
 * # Safety
 * `scn` must be a live handle; `pmf` valid for `len` writes; `written`
 * valid for writes.
 */
enum UavrStatus uavr_phase1_distribution(const struct UavrScenario *scn,
                                         uint64_t trials,
                                         uint64_t seed,
                                         double *pmf,
                                         size_t len,
                                         size_t *written);

/**
 * Decode threshold for `bits` in `duration_s` over `bandwidth_hz`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum UavrStatus uavr_sinr_threshold(double bits,
                                    double duration_s,
                                    double bandwidth_hz,
                                    double gap,
                                    double *out);

/**
 * Copies the handle. Free the copy separately.
 *
 * # Safety
 * `scn` must be a live handle; `out` valid for writes.
 */
enum UavrStatus uavr_scenario_clone(const struct UavrScenario *scn, struct UavrScenario **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* UAV_RELAY_H */
