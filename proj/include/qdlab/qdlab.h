/* Copyright 2026 The qdlab Authors
 * SPDX-License-Identifier: Apache-2.0 */

/* C interface to the qdlab experiment engine.
 *
 * Objects are opaque handles released with the matching *_free function.
 * Every call that can fail returns a qdlab_status; the message of the last
 * failure on the calling thread is available from qdlab_last_error().
 * Strings returned through char** are owned by the caller and released with
 * qdlab_string_free(). */

#ifndef QDLAB_QDLAB_H_
#define QDLAB_QDLAB_H_

#include <stddef.h>

#if defined(_WIN32)
#  if defined(QDLAB_BUILDING_LIBRARY)
#    define QDLAB_API __declspec(dllexport)
#  else
#    define QDLAB_API __declspec(dllimport)
#  endif
#else
#  define QDLAB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum qdlab_status {
  QDLAB_OK = 0,
  QDLAB_ERR_INVALID_ARGUMENT = 1,
  QDLAB_ERR_CONFIG_INVALID = 2,
  QDLAB_ERR_EMPTY_SHELL = 3,
  QDLAB_ERR_TOLERANCE_EXCEEDED = 4,
  QDLAB_ERR_QUADRATURE_DIVERGENCE = 5,
  QDLAB_ERR_CFL_VIOLATION = 6,
  QDLAB_ERR_EXTRAPOLATION_UNSTABLE = 7,
  QDLAB_ERR_BOUND_VIOLATED = 8,
  QDLAB_ERR_INSUFFICIENT_SAMPLES = 9,
  QDLAB_ERR_RESOURCE_EXCEEDED = 10,
  QDLAB_ERR_GRID_MISMATCH = 11,
  QDLAB_ERR_IO = 12,
  QDLAB_ERR_INTERNAL = 13
} qdlab_status;

typedef struct qdlab_config qdlab_config;
typedef struct qdlab_result qdlab_result;

QDLAB_API const char* qdlab_version(void);
QDLAB_API const char* qdlab_status_string(qdlab_status status);
/* Empty string when the last call on this thread succeeded. */
QDLAB_API const char* qdlab_last_error(void);

/* Worker count for ensemble loops; 0 restores the QDLAB_WORKERS default. */
QDLAB_API qdlab_status qdlab_set_workers(int workers);
QDLAB_API int qdlab_get_workers(void);

QDLAB_API qdlab_status qdlab_config_load(const char* path, qdlab_config** out);
QDLAB_API qdlab_status qdlab_config_parse(const char* json_text, qdlab_config** out);
QDLAB_API qdlab_status qdlab_config_set_output(qdlab_config* config, const char* dir);
/* Resolved configuration with all defaults and derived fields, as JSON. */
QDLAB_API qdlab_status qdlab_config_json(const qdlab_config* config, char** out);
QDLAB_API qdlab_status qdlab_config_hash(const qdlab_config* config, char** out);
QDLAB_API void qdlab_config_free(qdlab_config* config);

/* persist != 0 writes records and exports under the configured output. */
QDLAB_API qdlab_status qdlab_run(const qdlab_config* config, int persist, qdlab_result** out);
/* axis is one of "lambda", "L", "kappa", "t". count may be zero. */
QDLAB_API qdlab_status qdlab_sweep(const qdlab_config* config, const char* axis,
                                   const double* values, size_t count, int persist,
                                   qdlab_result** out);
QDLAB_API qdlab_status qdlab_validate(qdlab_result** out);
QDLAB_API qdlab_status qdlab_report(const char* dir, qdlab_result** out);

/* 1 when every asserted invariant passed. */
QDLAB_API int qdlab_result_passed(const qdlab_result* result);
QDLAB_API qdlab_status qdlab_result_json(const qdlab_result* result, char** out);
/* Human-readable summary table. */
QDLAB_API qdlab_status qdlab_result_summary(const qdlab_result* result, char** out);
QDLAB_API void qdlab_result_free(qdlab_result* result);

QDLAB_API void qdlab_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* QDLAB_QDLAB_H_ */
