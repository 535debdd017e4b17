#ifndef WLC_WLC_H
#define WLC_WLC_H

/* C interface to the winnerless-competition library.
 *
 * Every function returns a status (WLC_OK or an error code). On failure the
 * message is available from wlc_last_error() on the same thread. Handles are
 * opaque and released with their *_free function; free(NULL) is a no-op.
 * Strings returned by accessors live as long as the handle they came from. */

#include <stddef.h>
#include <stdint.h>

#if defined(WLC_BUILDING_LIBRARY)
#define WLC_API __attribute__((visibility("default")))
#else
#define WLC_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

enum {
  WLC_OK = 0,
  WLC_ERR_INVALID_SEQUENCE = 1,
  WLC_ERR_SIZE = 2,
  WLC_ERR_INVALID_MATRIX = 3,
  WLC_ERR_NUMERIC = 4,
  WLC_ERR_DIVERGENCE = 5,
  WLC_ERR_NO_PERIOD = 6,
  WLC_ERR_CALIBRATION_RANGE = 7,
  WLC_ERR_CALIBRATION_FAILURE = 8,
  WLC_ERR_DEGENERATE_REGRESSION = 9,
  WLC_ERR_INTERNAL = 10,
  WLC_ERR_NON_CONVERGENCE = 11,
  WLC_ERR_DEGENERATE_PATH = 12,
  WLC_ERR_WINDOW = 13,
  WLC_ERR_INVALID_CONFIG = 14,
  WLC_ERR_UNKNOWN_PRESET = 15,
  WLC_ERR_IO = 16,
  WLC_ERR_NULL_ARGUMENT = 100,
  WLC_ERR_BUFFER_TOO_SMALL = 101,
  WLC_ERR_UNEXPECTED = 102
};

typedef struct wlc_config wlc_config;
typedef struct wlc_result wlc_result;
typedef struct wlc_network wlc_network;
typedef struct wlc_trajectory wlc_trajectory;

WLC_API const char* wlc_version(void);
WLC_API const char* wlc_last_error(void);
WLC_API const char* wlc_status_name(int status);

/* configuration documents (JSON) */
WLC_API int wlc_config_create(wlc_config** out);
WLC_API int wlc_config_preset(const char* name, wlc_config** out);
WLC_API int wlc_config_from_json(const char* json, wlc_config** out);
WLC_API int wlc_config_load(const char* path, wlc_config** out);
/* dotted key ("dynamics.dt"), value as JSON text ("0.005", "[1,2,3]", "\"literal\"") */
WLC_API int wlc_config_set(wlc_config* cfg, const char* key, const char* json_value);
WLC_API int wlc_config_merge(wlc_config* cfg, const char* json_patch);
WLC_API int wlc_config_validate(const wlc_config* cfg);
/* writes NUL-terminated JSON; *needed gets the required size including NUL */
WLC_API int wlc_config_to_json(const wlc_config* cfg, char* buf, size_t cap, size_t* needed);
WLC_API void wlc_config_free(wlc_config* cfg);

WLC_API int wlc_preset_count(void);
WLC_API const char* wlc_preset_name(int index);

/* runs; each yields a result holding the embedded checks */
typedef void (*wlc_progress_fn)(int n, int trial, int recovered, int iterations, void* user);

/* overrides: NULL, or a document from wlc_config_preset(name) with changes */
WLC_API int wlc_run_preset(const char* name, const wlc_config* overrides, wlc_result** out);
WLC_API int wlc_run_teacher(const wlc_config* cfg, wlc_result** out);
WLC_API int wlc_run_learn(const wlc_config* cfg, wlc_result** out);
WLC_API int wlc_run_sweep(const wlc_config* cfg, wlc_progress_fn progress, void* user, wlc_result** out);
/* t_first may be NaN (two periods after the path start) */
WLC_API int wlc_run_metric(const char* teacher_csv, const char* learner_csv, double period, double t_first,
                           double tau_step, double smoothing, const char* out_dir, wlc_result** out);

WLC_API int wlc_result_passed(const wlc_result* r);
WLC_API const char* wlc_result_name(const wlc_result* r);
WLC_API const char* wlc_result_summary(const wlc_result* r);
WLC_API int wlc_result_check_count(const wlc_result* r);
WLC_API int wlc_result_check(const wlc_result* r, int index, const char** name, int* passed, const char** detail);
WLC_API int wlc_result_file_count(const wlc_result* r);
WLC_API const char* wlc_result_file(const wlc_result* r, int index);
WLC_API void wlc_result_free(wlc_result* r);

/* primitives */

/* (n-1)! as a decimal string */
WLC_API int wlc_count_behaviors(int n, char* buf, size_t cap, size_t* needed);

/* sequence: activation order, 1-based, length n. alpha: n couplings in (0,1). */
WLC_API int wlc_network_create(int n, const int* sequence, const double* alpha, double epsilon, wlc_network** out);
WLC_API int wlc_network_size(const wlc_network* net);
/* x0 may be NULL (seeded random start) */
WLC_API int wlc_network_simulate(const wlc_network* net, const double* x0, uint64_t seed, double duration,
                                 double dt, wlc_trajectory** out);
/* settles on the limit cycle and reports its period */
WLC_API int wlc_network_period(const wlc_network* net, uint64_t seed, double dt, double* period);
WLC_API void wlc_network_free(wlc_network* net);

WLC_API int wlc_trajectory_shape(const wlc_trajectory* tr, int* n, size_t* samples, double* t0, double* dt);
/* copies column-major n x samples values; cap counts doubles */
WLC_API int wlc_trajectory_copy(const wlc_trajectory* tr, double* buf, size_t cap);
WLC_API void wlc_trajectory_free(wlc_trajectory* tr);

/* Structure learning against a live teacher. learned_successors gets n
 * entries (succ(j) at index j-1). */
WLC_API int wlc_learn_structure(const wlc_network* teacher, const int* learner_sequence, const double* gamma0,
                                uint64_t seed, double dt, int* learned_successors, int* iterations);

#ifdef __cplusplus
}
#endif

#endif
