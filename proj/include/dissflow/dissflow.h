#ifndef DISSFLOW_DISSFLOW_H
#define DISSFLOW_DISSFLOW_H

/* C interface to the dissflow library. Objects are opaque handles released
 * with the matching *_free function. Every fallible call returns a status
 * code; on failure dsf_last_error() describes the cause for the calling
 * thread. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define DSF_API __declspec(dllexport)
#elif defined(__GNUC__)
#define DSF_API __attribute__((visibility("default")))
#else
#define DSF_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

enum dsf_status {
  DSF_OK = 0,
  DSF_ERR_INVALID_MEASURE = 1,
  DSF_ERR_DIMENSION = 2,
  DSF_ERR_INVALID_ARGUMENT = 3,
  DSF_ERR_SOLVER = 4,
  DSF_ERR_STABILITY = 5,
  DSF_ERR_CONFIG = 6,
  DSF_ERR_IO = 7,
  DSF_ERR_NULL = 8,
  DSF_ERR_BUFFER_TOO_SMALL = 9,
  DSF_ERR_ATOM_BUDGET = 10,
  DSF_ERR_INTERNAL = 99
};

enum dsf_side { DSF_RIGHT = 0, DSF_LEFT = 1 };
enum dsf_interpolation { DSF_AFFINE = 0, DSF_PIECEWISE = 1 };

typedef struct dsf_measure dsf_measure;
typedef struct dsf_velocity dsf_velocity;
typedef struct dsf_field dsf_field;
typedef struct dsf_trajectory dsf_trajectory;
typedef struct dsf_run dsf_run;

DSF_API const char* dsf_version(void);
DSF_API const char* dsf_status_name(int status);
/* Message of the last failed call on this thread; "" when none. */
DSF_API const char* dsf_last_error(void);
DSF_API void dsf_string_free(char* s);

/* Measures. coords holds n * dim values, atom-major. */
DSF_API int dsf_measure_create(size_t dim, size_t n, const double* coords, const double* weights,
                               dsf_measure** out);
DSF_API int dsf_measure_from_csv(const char* text, dsf_measure** out);
DSF_API int dsf_measure_to_csv(const dsf_measure* m, char** out);
DSF_API void dsf_measure_free(dsf_measure* m);
DSF_API int dsf_measure_dim(const dsf_measure* m, size_t* out);
DSF_API int dsf_measure_size(const dsf_measure* m, size_t* out);
/* Copies atoms into caller buffers of capacity atoms (coords: capacity * dim). */
DSF_API int dsf_measure_atoms(const dsf_measure* m, double* coords, double* weights,
                              size_t capacity);
DSF_API int dsf_second_moment(const dsf_measure* m, double* out);
/* Squared Wasserstein distance. */
DSF_API int dsf_w2sq(const dsf_measure* a, const dsf_measure* b, double* out);

/* Velocity measures: atoms (x_i, v_i) with weights w_i. */
DSF_API int dsf_velocity_create(size_t dim, size_t n, const double* xs, const double* vs,
                                const double* weights, dsf_velocity** out);
DSF_API void dsf_velocity_free(dsf_velocity* phi);
DSF_API int dsf_velocity_norm(const dsf_velocity* phi, double* out);
DSF_API int dsf_pairing(const dsf_velocity* phi0, const dsf_velocity* phi1, int side, double* out);
DSF_API int dsf_pairing_measure(const dsf_velocity* phi, const dsf_measure* nu, int side,
                                double* out);

/* Fields from their JSON description. */
DSF_API int dsf_field_from_json(const char* json, dsf_field** out);
DSF_API void dsf_field_free(dsf_field* f);
DSF_API int dsf_field_evaluate(const dsf_field* f, const dsf_measure* mu, dsf_velocity** out);
DSF_API int dsf_certify(const dsf_field* f, size_t dim, uint64_t seed, double lambda,
                        size_t n_pairs, int weak, double* max_residual, int* passed);

/* Explicit Euler scheme. DSF_ERR_STABILITY when a step exceeds L. */
DSF_API int dsf_euler_run(const dsf_field* f, const dsf_measure* mu0, double tau, double T,
                          double L, dsf_trajectory** out);
DSF_API void dsf_trajectory_free(dsf_trajectory* t);
/* Number of nodes N + 1. */
DSF_API int dsf_trajectory_nodes(const dsf_trajectory* t, size_t* out);
DSF_API int dsf_trajectory_node(const dsf_trajectory* t, size_t n, dsf_measure** out);
DSF_API int dsf_trajectory_interpolate(const dsf_trajectory* t, double time, int mode,
                                       dsf_measure** out);

/* Experiments. A run that executes returns DSF_OK; its outcome is read from
 * dsf_run_exit_code (0 ok, 1 config, 2 stability, 3 check failed, 4 internal). */
typedef struct dsf_run_options {
  int has_seed;
  uint64_t seed;
  const char* output_dir; /* NULL keeps the config's output_dir */
} dsf_run_options;

DSF_API int dsf_validate_config(const char* json);
DSF_API int dsf_run_config(const char* json, const dsf_run_options* options, dsf_run** out);
DSF_API int dsf_run_config_file(const char* path, const dsf_run_options* options, dsf_run** out);
DSF_API void dsf_run_free(dsf_run* r);
DSF_API int dsf_run_exit_code(const dsf_run* r);
DSF_API const char* dsf_run_message(const dsf_run* r);
DSF_API const char* dsf_run_summary(const dsf_run* r);
DSF_API const char* dsf_run_output_dir(const dsf_run* r);
DSF_API size_t dsf_run_file_count(const dsf_run* r);
DSF_API const char* dsf_run_file(const dsf_run* r, size_t i);

DSF_API size_t dsf_preset_count(void);
DSF_API const char* dsf_preset_name(size_t i);
DSF_API const char* dsf_preset_description(size_t i);
DSF_API int dsf_preset_config(const char* name, char** out);

/* Pinned tolerance table. */
DSF_API size_t dsf_tolerance_count(void);
DSF_API int dsf_tolerance(size_t i, const char** name, double* value);

#ifdef __cplusplus
}
#endif

#endif
