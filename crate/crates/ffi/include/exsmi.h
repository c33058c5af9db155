#ifndef EXSMI_H
#define EXSMI_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ExsmiStatus {
  EXSMI_STATUS_OK = 0,
  EXSMI_STATUS_NULL_POINTER = 1,
  EXSMI_STATUS_PARSE = 2,
  EXSMI_STATUS_CONFIG = 3,
  EXSMI_STATUS_INSUFFICIENT_DATA = 4,
  EXSMI_STATUS_SEQUENCING = 5,
  EXSMI_STATUS_VALUE = 6,
  EXSMI_STATUS_REPORT = 7,
  EXSMI_STATUS_IO = 8,
  EXSMI_STATUS_PANIC = 9,
} ExsmiStatus;

/**
 * Values of `ExsmiPredictorSpec::model`.
 */
typedef enum ExsmiModel {
  EXSMI_MODEL_PP = 0,
  EXSMI_MODEL_LE = 1,
  EXSMI_MODEL_MULIN = 2,
  EXSMI_MODEL_ES1 = 3,
  EXSMI_MODEL_ES2 = 4,
  EXSMI_MODEL_ES3 = 5,
} ExsmiModel;

/**
 * Values of `ExsmiSessionConfig::scoring_mode`.
 */
typedef enum ExsmiScoringMode {
  EXSMI_SCORING_MODE_CONSISTENT = 0,
  EXSMI_SCORING_MODE_LAGGED_BASELINE = 1,
} ExsmiScoringMode;

/**
 * Values of `ExsmiSessionConfig::selection`.
 */
typedef enum ExsmiSelection {
  EXSMI_SELECTION_ADAPTIVE = 0,
  EXSMI_SELECTION_FORCE_MAIN = 1,
  EXSMI_SELECTION_FORCE_BASELINE = 2,
} ExsmiSelection;

/**
 * Values of `ExsmiStepResult::source`.
 */
typedef enum ExsmiSource {
  EXSMI_SOURCE_MAIN = 0,
  EXSMI_SOURCE_BASELINE = 1,
  EXSMI_SOURCE_HOLD = 2,
  EXSMI_SOURCE_WARMING_UP = 3,
} ExsmiSource;

/**
 * Opaque streaming predictor.
 */
typedef struct ExsmiPredictor ExsmiPredictor;

/**
 * Opaque ExSmi session.
 */
typedef struct ExsmiSession ExsmiSession;

/**
 * Predictor choice. Fields a model does not use are ignored.
 */
typedef struct ExsmiPredictorSpec {
  /**
   * One of `ExsmiModel`.
   */
  uint32_t model;
  /**
   * ES smoothing factor, or the MULIN blend factor.
   */
  double alpha;
  double beta;
  double gamma;
  uint32_t mulin_k;
  uint32_t period_samples;
} ExsmiPredictorSpec;

typedef struct ExsmiPrediction {
  uint64_t target_index;
  double pos[3];
} ExsmiPrediction;

typedef struct ExsmiSessionConfig {
  uint32_t horizon;
  uint32_t warmup_samples;
  double decay;
  /**
   * Gate threshold in mm; use infinity to disable the gate.
   */
  double gate_mm;
  uint32_t max_consecutive_rejects;
  /**
   * One of `ExsmiScoringMode`.
   */
  uint32_t scoring_mode;
  /**
   * One of `ExsmiSelection`.
   */
  uint32_t selection;
  struct ExsmiPredictorSpec baseline;
} ExsmiSessionConfig;

typedef struct ExsmiStepResult {
  uint64_t index;
  struct ExsmiPrediction prediction;
  /**
   * One of `ExsmiSource`.
   */
  uint32_t source;
  bool rejected;
  /**
   * 0 for the main model, 1 for the baseline.
   */
  uint32_t active;
  double error_main;
  double error_base;
  double jitter_main;
  double jitter_base;
} ExsmiStepResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Short name of a status code. The string is static.
 */
const char *exsmi_status_name(enum ExsmiStatus status);

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len`). Returns the size needed including the terminator.
 */
size_t exsmi_last_error_message(char *buf, size_t len);

/**
 * Fills `out` with the default parameters of `model` at grid spacing `delta_s`.
 */
enum ExsmiStatus exsmi_predictor_spec_default(uint32_t model,
                                              double delta_s,
                                              struct ExsmiPredictorSpec *out);

enum ExsmiStatus exsmi_predictor_new(const struct ExsmiPredictorSpec *spec,
                                     uint32_t horizon,
                                     struct ExsmiPredictor **out);

/**
 * Feeds sample `index` at `pos` (three values, mm) and writes the prediction
 * for `index + horizon`.
 */
enum ExsmiStatus exsmi_predictor_step(struct ExsmiPredictor *predictor,
                                      uint64_t index,
                                      const double *pos,
                                      struct ExsmiPrediction *out);

/**
 * True once the predictor has seen enough samples to leave its fallback.
 */
bool exsmi_predictor_is_primed(const struct ExsmiPredictor *predictor);

void exsmi_predictor_free(struct ExsmiPredictor *predictor);

enum ExsmiStatus exsmi_session_config_default(struct ExsmiSessionConfig *out);

enum ExsmiStatus exsmi_session_new(const struct ExsmiSessionConfig *config,
                                   const struct ExsmiPredictorSpec *main,
                                   struct ExsmiSession **out);

enum ExsmiStatus exsmi_session_step(struct ExsmiSession *session,
                                    uint64_t index,
                                    const double *pos,
                                    struct ExsmiStepResult *out);

void exsmi_session_free(struct ExsmiSession *session);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EXSMI_H */
