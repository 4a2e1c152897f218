#ifndef CUTRANK_H
#define CUTRANK_H

#include <stddef.h>
#include <stdint.h>

#define CR_OK 0

#define CR_ERR_NULL -1

#define CR_ERR_IO -2

#define CR_ERR_PARSE -3

#define CR_ERR_INVALID -4

#define CR_ERR_NUMERICAL -5

#define CR_ERR_INFEASIBLE -6

#define CR_ERR_UNBOUNDED -7

#define CR_ERR_PANIC -99

#define CR_POLICY_NONE 0

#define CR_POLICY_RANDOM 1

#define CR_POLICY_VIOLATION 2

#define CR_POLICY_NORM_VIOLATION 3

#define CR_POLICY_DISTANCE 4

#define CR_POLICY_PARALLELISM 5

#define CR_POLICY_CUT_RANKING 6

#define CR_STATUS_OPTIMAL 0

#define CR_STATUS_FEASIBLE 1

#define CR_STATUS_INFEASIBLE 2

#define CR_NUM_FEATURES 14

/**
 * Opaque MIP instance.
 */
typedef struct CrInstance CrInstance;

/**
 * Opaque trained scoring model.
 */
typedef struct CrModel CrModel;

typedef struct CrSolveOptions {
  /**
   * One of the `CR_POLICY_*` constants.
   */
  int policy;
  double k_percent;
  uint64_t node_limit;
  /**
   * Seconds.
   */
  double time_limit;
  uint64_t seed;
  /**
   * Nonzero selects wall-clock feedback; zero keeps runs deterministic.
   */
  int wall_clock;
} CrSolveOptions;

typedef struct CrSolveReport {
  /**
   * One of the `CR_STATUS_*` constants.
   */
  int status;
  int limit_hit;
  /**
   * NaN when no incumbent was found.
   */
  double objective;
  uint64_t nodes_visited;
  uint64_t simplex_iterations;
  /**
   * NaN unless wall-clock feedback was requested.
   */
  double wall_time;
  uint64_t cuts_generated;
  uint64_t cuts_added;
} CrSolveReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. The pointer
 * stays valid until the next `cr_*` call on the same thread.
 */
const char *cr_last_error_message(void);

/**
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
int cr_instance_read(const char *path, struct CrInstance **out);

/**
 * # Safety
 * `out` must be a valid pointer.
 */
int cr_instance_generate_knapsack(size_t n_items,
                                  uint32_t max_number,
                                  uint32_t max_value,
                                  uint32_t max_weight,
                                  uint64_t seed,
                                  struct CrInstance **out);

/**
 * # Safety
 * `out` must be a valid pointer.
 */
int cr_instance_generate_set_cover(size_t n_elements,
                                   size_t n_sets,
                                   double density,
                                   uint64_t seed,
                                   struct CrInstance **out);

/**
 * # Safety
 * `out` must be a valid pointer.
 */
int cr_instance_generate_planning(size_t n_factories,
                                  size_t n_demands,
                                  uint64_t seed,
                                  struct CrInstance **out);

/**
 * # Safety
 * `out` must be a valid pointer.
 */
int cr_instance_generate_general(size_t n_vars,
                                 size_t n_cons,
                                 uint64_t seed,
                                 struct CrInstance **out);

/**
 * # Safety
 * `inst` must come from a `cr_instance_*` constructor and `path` must be a
 * NUL-terminated string.
 */
int cr_instance_write(const struct CrInstance *inst, const char *path);

/**
 * # Safety
 * `inst` must come from a `cr_instance_*` constructor; the out pointers may
 * be null.
 */
int cr_instance_size(const struct CrInstance *inst, size_t *rows, size_t *cols);

/**
 * # Safety
 * `inst` must be null or come from a `cr_instance_*` constructor, and must
 * not be used afterwards.
 */
void cr_instance_free(struct CrInstance *inst);

/**
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
int cr_model_load(const char *path, struct CrModel **out);

/**
 * Positive-class probability for one raw 14-value feature vector.
 *
 * # Safety
 * `features` must point to `len` doubles and `score` must be valid.
 */
int cr_model_score(const struct CrModel *model, const double *features, size_t len, double *score);

/**
 * # Safety
 * `model` must be null or come from [`cr_model_load`], and must not be used
 * afterwards.
 */
void cr_model_free(struct CrModel *model);

struct CrSolveOptions cr_solve_options_default(void);

/**
 * Solve with root cuts chosen by `opts.policy`. `model` is only read for
 * `CR_POLICY_CUT_RANKING`. When `x` is non-null and an incumbent exists,
 * its first `min(x_len, n)` entries are copied out.
 *
 * # Safety
 * Handles must come from their constructors, `opts` and `report` must be
 * valid, and `x` must be null or point to `x_len` doubles.
 */
int cr_solve(const struct CrInstance *inst,
             const struct CrModel *model,
             const struct CrSolveOptions *opts,
             struct CrSolveReport *report,
             double *x,
             size_t x_len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CUTRANK_H */
