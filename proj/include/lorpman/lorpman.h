/* Copyright 2026 The lorpman Authors.
 * SPDX-License-Identifier: Apache-2.0
 *
 * C interface to liblorpman.
 *
 * Every fallible call returns an lpm_status. On failure, lpm_last_error()
 * describes the problem; the text is thread-local and stays valid until the
 * next failing call on the same thread. Objects are opaque handles released
 * with their matching *_destroy function; strings handed out by the library
 * are released with lpm_string_free. Handles are not thread-safe; distinct
 * handles may be used from distinct threads.
 */

#ifndef LORPMAN_LORPMAN_H_
#define LORPMAN_LORPMAN_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define LPM_API __declspec(dllexport)
#else
#define LPM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lpm_status {
  LPM_OK = 0,
  LPM_ERR_INVALID_ARGUMENT = 1, /* bad parameter value or null pointer */
  LPM_ERR_CONTRACT = 2,         /* shape or precondition violated */
  LPM_ERR_DEGENERATE = 3,       /* input has no defined answer (e.g. zero vector) */
  LPM_ERR_NUMERIC = 4,          /* non-finite value during computation */
  LPM_ERR_UNSUPPORTED = 5,      /* valid request this build cannot serve */
  LPM_ERR_IO = 6,
  LPM_ERR_PARSE = 7,
  LPM_ERR_INTERNAL = 8
} lpm_status;

LPM_API const char* lpm_version(void);
/* Content hash of the library sources this binary was built from. */
LPM_API const char* lpm_source_hash(void);
LPM_API const char* lpm_status_name(lpm_status status);
/* Message for the last failure on this thread, "" if none. */
LPM_API const char* lpm_last_error(void);
LPM_API void lpm_string_free(char* s);

/* ------------------------------------------------------------------ */
/* Objective-space fronts                                              */
/* ------------------------------------------------------------------ */

typedef enum lpm_orientation { LPM_MINIMIZE = 0, LPM_MAXIMIZE = 1 } lpm_orientation;

typedef struct lpm_front lpm_front;

/* dim 0 lets the first added point fix the dimension. */
LPM_API lpm_status lpm_front_create(size_t dim, lpm_orientation orientation, lpm_front** out);
/* Parses CSV text. Columns named obj_* are used when present, otherwise all
 * columns; a header row is optional. */
LPM_API lpm_status lpm_front_from_csv(const char* text, size_t length, lpm_orientation orientation,
                                      lpm_front** out);
LPM_API lpm_status lpm_front_add(lpm_front* front, const double* point, size_t dim);
LPM_API size_t lpm_front_size(const lpm_front* front);
LPM_API size_t lpm_front_dim(const lpm_front* front);
LPM_API lpm_status lpm_front_point(const lpm_front* front, size_t index, double* out, size_t dim);
/* New front holding the nondominated points. */
LPM_API lpm_status lpm_front_nondominated(const lpm_front* front, lpm_front** out);
LPM_API void lpm_front_destroy(lpm_front* front);

typedef struct lpm_hv_method {
  int monte_carlo; /* 0: exact (m <= 3), nonzero: Monte Carlo */
  uint64_t samples;
  uint64_t seed;
} lpm_hv_method;

/* method may be NULL for exact. stderr_out may be NULL; it receives NaN for
 * the exact method. */
LPM_API lpm_status lpm_front_hypervolume(const lpm_front* front, const double* ref, size_t dim,
                                         const lpm_hv_method* method, double* value,
                                         double* stderr_out);

/* ------------------------------------------------------------------ */
/* Experiments                                                         */
/* ------------------------------------------------------------------ */

typedef enum lpm_experiment_kind {
  LPM_EXPERIMENT_TOY = 0,
  LPM_EXPERIMENT_SYNTH = 1,
  LPM_EXPERIMENT_ABLATE = 2
} lpm_experiment_kind;

typedef struct lpm_experiment lpm_experiment;

/* config_json: JSON object (see README); NULL or "" for defaults. */
LPM_API lpm_status lpm_experiment_create(lpm_experiment_kind kind, const char* config_json,
                                         lpm_experiment** out);
/* Resolved configuration with every default filled in. */
LPM_API lpm_status lpm_experiment_config(const lpm_experiment* experiment, char** json_out);
LPM_API lpm_status lpm_experiment_run(lpm_experiment* experiment);
/* The following need a successful run. */
LPM_API lpm_status lpm_experiment_write(const lpm_experiment* experiment, const char* out_dir);
LPM_API lpm_status lpm_experiment_summary(const lpm_experiment* experiment, char** out);
LPM_API lpm_status lpm_experiment_manifest(const lpm_experiment* experiment, char** out);
LPM_API size_t lpm_experiment_artifact_count(const lpm_experiment* experiment);
LPM_API lpm_status lpm_experiment_artifact(const lpm_experiment* experiment, size_t index,
                                           char** name, char** contents);
LPM_API void lpm_experiment_destroy(lpm_experiment* experiment);

/* ------------------------------------------------------------------ */
/* Misc                                                                */
/* ------------------------------------------------------------------ */

/* Weight counts for one d x k layer, m tasks, rank r. */
LPM_API lpm_status lpm_parameter_count(size_t d, size_t k, size_t m, size_t r, size_t* lorpman,
                                       size_t* pamal);

/* Runs the construction checks; report gets one "PASS|FAIL name: detail"
 * line per check. */
LPM_API lpm_status lpm_run_checks(uint64_t seed, char** report, int* all_passed);

#ifdef __cplusplus
}
#endif

#endif /* LORPMAN_LORPMAN_H_ */
