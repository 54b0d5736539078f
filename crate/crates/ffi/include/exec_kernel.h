/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef EXEC_KERNEL_H
#define EXEC_KERNEL_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Memoryless impact.
 */
#define EK_KERNEL_DELTA 0

/**
 * Exponential resilience with rate `beta`.
 */
#define EK_KERNEL_EXPONENTIAL 1

#define EK_DRIFT_ZERO 0

/**
 * `alpha0` until `t1` (may be infinite), zero afterwards.
 */
#define EK_DRIFT_CONSTANT 1

/**
 * `alpha0 * exp(-gamma t)`.
 */
#define EK_DRIFT_EXP_DECAY 2

/**
 * Result of every fallible call.
 */
typedef enum ExecKernelStatus {
  EXEC_KERNEL_STATUS_OK = 0,
  EXEC_KERNEL_STATUS_NULL_POINTER = 1,
  EXEC_KERNEL_STATUS_INVALID_ARGUMENT = 2,
  EXEC_KERNEL_STATUS_NO_CLOSED_FORM = 3,
  EXEC_KERNEL_STATUS_UNBOUNDED = 4,
  EXEC_KERNEL_STATUS_NUMERIC_FAILURE = 5,
  EXEC_KERNEL_STATUS_BUFFER_TOO_SMALL = 6,
  EXEC_KERNEL_STATUS_PANIC = 7,
} ExecKernelStatus;

/**
 * Opaque execution problem.
 */
typedef struct ExecKernelProblem ExecKernelProblem;

/**
 * Opaque closed-form trajectory.
 */
typedef struct ExecKernelSolution ExecKernelSolution;

typedef struct ExecKernelMarket {
  double s0;
  double sigma;
  double adv;
  double eta;
} ExecKernelMarket;

typedef struct ExecKernelDrift {
  /**
   * One of the `EK_DRIFT_*` codes.
   */
  uint32_t kind;
  double alpha0;
  double gamma;
  double t1;
} ExecKernelDrift;

/**
 * Boundary block trades: `start = X0 - x(0+)`, `end = x(T-) - XT`.
 */
typedef struct ExecKernelJumps {
  double start;
  double end;
} ExecKernelJumps;

/**
 * Shape constants of a closed-form solution.
 */
typedef struct ExecKernelConstants {
  /**
   * Urgency rate, 1/time.
   */
  double k;
  /**
   * Boundary-layer shift `A`.
   */
  double shift;
  /**
   * Amplitude `B`.
   */
  double amplitude;
} ExecKernelConstants;

typedef struct ExecKernelObjective {
  double alpha_gain;
  double impact_cost;
  double risk_penalty;
  double total;
} ExecKernelObjective;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the last failure on this thread, or null. The pointer
 * stays valid until the next `ek_*` call on the same thread.
 */
const char *ek_last_error_message(void);

/**
 * Static name of a status code; unknown codes map to "unknown status".
 */
const char *ek_status_name(uint32_t status);

/**
 * Builds a validated problem. `kernel` is an `EK_KERNEL_*` code, `drift`
 * may be null for zero drift and `beta` is ignored for the delta kernel.
 *
 * # Safety
 * `market` must point to a valid market, `drift` must be null or valid, and
 * `out` must be valid for a write.
 */
enum ExecKernelStatus ek_problem_new(double x0,
                                     double x_t,
                                     double horizon,
                                     const struct ExecKernelMarket *market,
                                     const struct ExecKernelDrift *drift,
                                     uint32_t kernel,
                                     double beta,
                                     double lambda,
                                     struct ExecKernelProblem **out);

/**
 * Releases a problem. Null is ignored.
 *
 * # Safety
 * `problem` must be null or come from [`ek_problem_new`], and not be freed twice.
 */
void ek_problem_free(struct ExecKernelProblem *problem);

/**
 * Urgency rate `k` of a problem.
 *
 * # Safety
 * `problem` must be a live handle and `out` valid for a write.
 */
enum ExecKernelStatus ek_problem_urgency(const struct ExecKernelProblem *problem, double *out);

/**
 * Closed-form optimal trajectory.
 *
 * # Safety
 * `problem` must be a live handle and `out` valid for a write.
 */
enum ExecKernelStatus ek_solve(const struct ExecKernelProblem *problem,
                               struct ExecKernelSolution **out);

/**
 * Releases a solution. Null is ignored.
 *
 * # Safety
 * `solution` must be null or come from [`ek_solve`], and not be freed twice.
 */
void ek_solution_free(struct ExecKernelSolution *solution);

/**
 * Contractual holding at `t` in `[0, T]`: `X0` at 0, `XT` at `T`.
 *
 * # Safety
 * `solution` must be a live handle and `out` valid for a write.
 */
enum ExecKernelStatus ek_solution_value(const struct ExecKernelSolution *solution,
                                        double t,
                                        double *out);

/**
 * Samples the solution at `n` strictly increasing times starting at 0 and
 * ending at `T`. Endpoint samples are post- and pre-block holdings.
 *
 * # Safety
 * `times` and `holdings` must be valid for `n` elements.
 */
enum ExecKernelStatus ek_solution_sample(const struct ExecKernelSolution *solution,
                                         const double *times,
                                         uintptr_t n,
                                         double *holdings);

/**
 * # Safety
 * `solution` must be a live handle and `out` valid for a write.
 */
enum ExecKernelStatus ek_solution_jumps(const struct ExecKernelSolution *solution,
                                        struct ExecKernelJumps *out);

/**
 * # Safety
 * `solution` must be a live handle and `out` valid for a write.
 */
enum ExecKernelStatus ek_solution_constants(const struct ExecKernelSolution *solution,
                                            struct ExecKernelConstants *out);

/**
 * Grid oracle on `n_cells` uniform cells. Writes `n_cells + 1` node
 * holdings into `holdings` (post-block at 0, pre-block at `T`) and, if
 * `jumps` is non-null, the extrapolated block sizes.
 *
 * # Safety
 * `holdings` must be valid for `capacity` elements; `jumps` must be null or
 * valid for a write.
 */
enum ExecKernelStatus ek_oracle_solve(const struct ExecKernelProblem *problem,
                                      uintptr_t n_cells,
                                      double *holdings,
                                      uintptr_t capacity,
                                      struct ExecKernelJumps *jumps);

/**
 * Utility of a sampled schedule with optional boundary blocks.
 *
 * # Safety
 * `times` and `holdings` must be valid for `n` elements, `jumps` null or
 * valid, `out` valid for a write.
 */
enum ExecKernelStatus ek_evaluate(const struct ExecKernelProblem *problem,
                                  const double *times,
                                  const double *holdings,
                                  uintptr_t n,
                                  const struct ExecKernelJumps *jumps,
                                  struct ExecKernelObjective *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EXEC_KERNEL_H */
