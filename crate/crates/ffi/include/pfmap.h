#ifndef PFMAP_H
#define PFMAP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result code of every fallible call.
 */
typedef enum PfmapStatus {
  PFMAP_STATUS_OK = 0,
  PFMAP_STATUS_NULL_POINTER = 1,
  PFMAP_STATUS_INVALID_UTF8 = 2,
  PFMAP_STATUS_PARSE_ERROR = 3,
  PFMAP_STATUS_INVALID_ARGUMENT = 4,
  PFMAP_STATUS_IO_ERROR = 5,
  PFMAP_STATUS_VERIFICATION_FAILED = 6,
  PFMAP_STATUS_TOO_LARGE = 7,
  PFMAP_STATUS_PANIC = 99,
} PfmapStatus;

typedef enum PfmapObjective {
  PFMAP_OBJECTIVE_COVERAGE = 0,
  PFMAP_OBJECTIVE_REVENUE = 1,
} PfmapObjective;

/*
 Opaque network instance.
 */
typedef struct PfmapInstance PfmapInstance;

/*
 Opaque solver result: a power vector and its verified coverage plan.
 */
typedef struct PfmapSolution PfmapSolution;

typedef struct PfmapDims {
  size_t transmitters;
  size_t receivers;
  size_t frequencies;
  size_t burst_profiles;
} PfmapDims;

/*
 Genetic algorithm parameters. Arrest fields set to 0 are disabled; at
 least one must be non-zero.
 */
typedef struct PfmapGaConfig {
  size_t k;
  double alpha;
  size_t m;
  double gamma;
  uint64_t max_generations;
  uint64_t time_limit_ms;
  uint64_t stagnation;
  uint64_t seed;
  enum PfmapObjective objective;
} PfmapGaConfig;

typedef struct PfmapLpSummary {
  size_t continuous;
  size_t binary;
  size_t sir_rows;
  size_t assignment_rows;
  size_t capacity_rows;
} PfmapLpSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failed call on this thread, or an empty string.
 Valid until the next call into this library from the same thread.
 */
const char *pfmap_last_error_message(void);

/*
 Parses WND1 text into a new instance handle.

 # Safety
 `text` must be a NUL-terminated string; `out` must be writable.
 */
enum PfmapStatus pfmap_instance_parse(const char *text_ptr, struct PfmapInstance **out);

/*
 Generates a synthetic instance with the dimensions of a reference preset
 (`"S1"` ... `"Q4"`) and default propagation parameters.

 # Safety
 `preset` must be a NUL-terminated string; `out` must be writable.
 */
enum PfmapStatus pfmap_instance_generate(const char *preset,
                                         uint64_t seed,
                                         struct PfmapInstance **out);

/*
 Canonical WND1 text of an instance. Free with [`pfmap_string_free`].

 # Safety
 `instance` must be a live handle; `out` must be writable.
 */
enum PfmapStatus pfmap_instance_serialize(const struct PfmapInstance *instance, char **out);

/*
 # Safety
 `instance` must be a live handle; `out` must be writable.
 */
enum PfmapStatus pfmap_instance_dims(const struct PfmapInstance *instance, struct PfmapDims *out);

/*
 Number of discrete power levels, including switched off.

 # Safety
 `instance` must be null or a live handle.
 */
size_t pfmap_instance_num_power_levels(const struct PfmapInstance *instance);

/*
 # Safety
 `instance` must be null or a handle not yet freed.
 */
void pfmap_instance_free(struct PfmapInstance *instance);

/*
 # Safety
 `s` must be null or a string returned by this library.
 */
void pfmap_string_free(char *s);

/*
 Coverage of a power vector under the deterministic assignment rules.

 # Safety
 `levels` must point to `len` readable values; out pointers must be
 writable.
 */
enum PfmapStatus pfmap_evaluate(const struct PfmapInstance *instance,
                                const uint32_t *levels,
                                size_t len,
                                size_t *covered_out,
                                double *revenue_out);

/*
 Fills `out` with the default parameters (k=20, alpha=0.05, m=8,
 gamma=0.1, one hour time limit, seed 0).

 # Safety
 `out` must be writable.
 */
enum PfmapStatus pfmap_ga_config_default(struct PfmapGaConfig *out);

/*
 Runs the genetic algorithm. The returned plan is verified before it is
 handed out.

 # Safety
 `instance` and `config` must be valid; `out` must be writable.
 */
enum PfmapStatus pfmap_solve(const struct PfmapInstance *instance,
                             const struct PfmapGaConfig *config,
                             struct PfmapSolution **out);

/*
 Exhaustive optimum; fails with `TOO_LARGE` when the search space exceeds
 `max_enumeration` power vectors.

 # Safety
 `instance` must be a live handle; `out` must be writable.
 */
enum PfmapStatus pfmap_oracle(const struct PfmapInstance *instance,
                              uint64_t max_enumeration,
                              struct PfmapSolution **out);

/*
 # Safety
 `solution` must be null or a live handle.
 */
size_t pfmap_solution_covered(const struct PfmapSolution *solution);

/*
 # Safety
 `solution` must be null or a live handle.
 */
double pfmap_solution_revenue(const struct PfmapSolution *solution);

/*
 # Safety
 `solution` must be null or a live handle.
 */
uint64_t pfmap_solution_generations(const struct PfmapSolution *solution);

/*
 Copies the level indices into `buffer`. `required` always receives the
 genome length; a null `buffer` only queries it. Fails with
 `INVALID_ARGUMENT` when `capacity` is too small.

 # Safety
 `buffer` must be null or hold `capacity` writable values.
 */
enum PfmapStatus pfmap_solution_levels(const struct PfmapSolution *solution,
                                       uint32_t *buffer,
                                       size_t capacity,
                                       size_t *required);

/*
 Coverage plan in the text format read by `pfmap verify`.

 # Safety
 `solution` must be a live handle; `out` must be writable.
 */
enum PfmapStatus pfmap_solution_plan(const struct PfmapSolution *solution, char **out);

/*
 Per-generation log (`generation,best_fitness,mean_fitness`) of a solve.

 # Safety
 `solution` must be a live handle; `out` must be writable.
 */
enum PfmapStatus pfmap_solution_log(const struct PfmapSolution *solution, char **out);

/*
 # Safety
 `solution` must be null or a handle not yet freed.
 */
void pfmap_solution_free(struct PfmapSolution *solution);

/*
 Verifies plan text against an instance. Returns `OK` and writes the
 violation count (zero for a valid plan) unless the plan cannot be read.

 # Safety
 `plan` must be NUL-terminated; `violations_out` must be writable.
 */
enum PfmapStatus pfmap_verify_plan(const struct PfmapInstance *instance,
                                   const char *plan,
                                   size_t *violations_out);

/*
 Writes the LP file of the big-M formulation.

 # Safety
 `path` must be NUL-terminated; `out` must be null or writable.
 */
enum PfmapStatus pfmap_export_lp(const struct PfmapInstance *instance,
                                 const char *path,
                                 struct PfmapLpSummary *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PFMAP_H */
