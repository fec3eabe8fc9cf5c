/* Copyright 2026 pdmp-axon developers.
 * SPDX-License-Identifier: Apache-2.0
 *
 * C interface to the pdmp-axon library. Objects are opaque handles released
 * with the matching *_free function. Every call returns a pdmp_status; on
 * failure pdmp_last_error() describes the problem (thread-local, valid until
 * the next failing call on the same thread).
 */
#ifndef PDMPAXON_H
#define PDMPAXON_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define PDMP_API __declspec(dllexport)
#else
#define PDMP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pdmp_status {
  PDMP_OK = 0,
  PDMP_ERR_INVALID_ARGUMENT = 1,
  PDMP_ERR_INVALID_CONFIG = 2,
  PDMP_ERR_REDUCIBLE = 3,
  PDMP_ERR_IO = 4,
  PDMP_ERR_RUNTIME = 5
} pdmp_status;

typedef struct pdmp_scheme pdmp_scheme;
typedef struct pdmp_config pdmp_config;
typedef struct pdmp_trajectory pdmp_trajectory;

PDMP_API const char* pdmp_version(void);
PDMP_API const char* pdmp_last_error(void);

/* Reads PDMP_AXON_SEED. *found is 0 when the variable is unset. */
PDMP_API pdmp_status pdmp_seed_from_env(uint64_t* seed, int* found);

/* ---- kinetic schemes --------------------------------------------------- */

/* Built-in name (na8, na4m, toy2, flat2) or path to a scheme file. */
PDMP_API pdmp_status pdmp_scheme_open(const char* name_or_path, pdmp_scheme** out);
PDMP_API void pdmp_scheme_free(pdmp_scheme* scheme);

/* Returned strings live as long as the scheme. */
PDMP_API pdmp_status pdmp_scheme_id(const pdmp_scheme* scheme, const char** id);
PDMP_API pdmp_status pdmp_scheme_num_states(const pdmp_scheme* scheme, size_t* count);
PDMP_API pdmp_status pdmp_scheme_num_classes(const pdmp_scheme* scheme, size_t* count);
PDMP_API pdmp_status pdmp_scheme_state_name(const pdmp_scheme* scheme, size_t state, const char** name);
PDMP_API pdmp_status pdmp_scheme_class_of(const pdmp_scheme* scheme, size_t state, size_t* cls);
/* State indices of class `cls`, in quasi-stationary order. */
PDMP_API pdmp_status pdmp_scheme_class_members(const pdmp_scheme* scheme, size_t cls, size_t* states, size_t capacity,
                                               size_t* count);

/* Rate expression ("a_m", "3*b_m", "0.5") evaluated at voltage v. */
PDMP_API pdmp_status pdmp_eval_rate(const char* rate, double v, double* value);

/* Distributions and generators are written into caller buffers. `*len`
 * (or `*dim`) receives the size needed; PDMP_ERR_INVALID_ARGUMENT is returned
 * when the capacity is too small. Matrices are row-major dim x dim. */
PDMP_API pdmp_status pdmp_quasi_stationary(const pdmp_scheme* scheme, size_t cls, double v, double* probs,
                                           size_t capacity, size_t* len);
PDMP_API pdmp_status pdmp_full_generator(const pdmp_scheme* scheme, double v, double eps, double* entries,
                                         size_t capacity, size_t* dim);
PDMP_API pdmp_status pdmp_class_generator(const pdmp_scheme* scheme, size_t cls, double v, double* entries,
                                          size_t capacity, size_t* dim);
PDMP_API pdmp_status pdmp_aggregated_generator(const pdmp_scheme* scheme, double v, double* entries,
                                               size_t capacity, size_t* dim);

/* ---- run configuration ------------------------------------------------- */

PDMP_API pdmp_status pdmp_config_new(pdmp_config** out);
PDMP_API pdmp_status pdmp_config_load(const char* path, pdmp_config** out);
PDMP_API void pdmp_config_free(pdmp_config* cfg);
/* Keys as in the config file / CLI flag names: model, scheme, eps, N, M, dt,
 * T, k-diff, input, input-lo, input-hi, clamp-input, u0, seed,
 * snapshot-stride, frozen-voltage, q0. */
PDMP_API pdmp_status pdmp_config_set(pdmp_config* cfg, const char* key, const char* value);
/* Copies the "key = value" text (NUL-terminated) into buf; *needed gets the
 * size including the terminator. */
PDMP_API pdmp_status pdmp_config_format(const pdmp_config* cfg, char* buf, size_t capacity, size_t* needed);
PDMP_API pdmp_status pdmp_config_validate(const pdmp_config* cfg, const pdmp_scheme* scheme);
PDMP_API pdmp_status pdmp_config_admissible_dt(const pdmp_config* cfg, const pdmp_scheme* scheme, double* dt);

/* ---- simulation -------------------------------------------------------- */

PDMP_API pdmp_status pdmp_simulate(const pdmp_scheme* scheme, const pdmp_config* cfg, pdmp_trajectory** out);
PDMP_API void pdmp_trajectory_free(pdmp_trajectory* traj);
PDMP_API pdmp_status pdmp_trajectory_counts(const pdmp_trajectory* traj, size_t* snapshots, size_t* jumps);
/* Node values of snapshot k (M + 1 values) and its time. */
PDMP_API pdmp_status pdmp_trajectory_snapshot(const pdmp_trajectory* traj, size_t k, double* time, double* values,
                                              size_t capacity, size_t* len);
/* Writes snapshots.csv, jumps.csv and manifest.json into out_dir (created if
 * missing). */
PDMP_API pdmp_status pdmp_trajectory_write(const pdmp_trajectory* traj, const pdmp_scheme* scheme,
                                           const char* out_dir);

/* Snapshot CSV to 8-bit PGM with gray = 255 * clamp(u / v_Na, 0, 1). */
PDMP_API pdmp_status pdmp_heatmap(const char* csv_path, const char* pgm_path);

/* Returns in *ok whether every hash in the manifest verifies. */
PDMP_API pdmp_status pdmp_manifest_verify(const char* manifest_path, int* ok);

/* ---- analysis ---------------------------------------------------------- */

typedef struct pdmp_sweep_row {
  double eps;
  double mean_sq;
  double std_error;
  size_t n;
} pdmp_sweep_row;

typedef struct pdmp_sweep_result {
  double slope;
  double slope_se;
  int degenerate;
} pdmp_sweep_result;

/* Defect sweep with phi = sin(pi x); `rows` must hold n_eps entries. When
 * out_dir is non-NULL, sweep.csv and summary.txt are written there.
 * threads = 0 uses the hardware concurrency. */
PDMP_API pdmp_status pdmp_sweep(const pdmp_scheme* scheme, const pdmp_config* base, const double* ladder, size_t n_eps,
                                size_t ensemble, size_t threads, const char* out_dir, pdmp_sweep_row* rows,
                                pdmp_sweep_result* result);

typedef struct pdmp_poisson_result {
  size_t dim;
  size_t kernel_dim;
  double residual;
  double max_centering;
  double max_orthogonality;
  double uniqueness_gap;
} pdmp_poisson_result;

/* Poisson equation on E^(N-1) at the frozen field u0 of cfg (grid N, M),
 * phi = sin(pi x). When out_path is non-NULL a diagnostics report is written. */
PDMP_API pdmp_status pdmp_poisson(const pdmp_scheme* scheme, const pdmp_config* cfg, const char* out_path,
                                  pdmp_poisson_result* result);

#ifdef __cplusplus
}
#endif

#endif /* PDMPAXON_H */
