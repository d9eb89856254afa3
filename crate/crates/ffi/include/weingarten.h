#ifndef WEINGARTEN_H
#define WEINGARTEN_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>

// Status codes. Values below 20 equal the exit codes of the command-line
// tool.
typedef enum WwStatus {
  WW_STATUS_OK = 0,
  WW_STATUS_CONFIG = 2,
  WW_STATUS_VALIDATION = 3,
  WW_STATUS_GAUGE = 4,
  WW_STATUS_BISECT = 5,
  WW_STATUS_DOMAIN = 6,
  WW_STATUS_IO = 7,
  WW_STATUS_NEWTON_STALL = 10,
  WW_STATUS_CONTINUATION_STALL = 11,
  WW_STATUS_BARRIER_VIOLATION = 12,
  WW_STATUS_CONE = 13,
  WW_STATUS_NULL_POINTER = 20,
  WW_STATUS_BUFFER_TOO_SMALL = 21,
  WW_STATUS_INVALID_UTF8 = 22,
  WW_STATUS_PANIC = 23,
} WwStatus;

// A configured homotopy problem.
typedef struct WwProblem WwProblem;

// Final height field and its continuation report.
typedef struct WwSolution WwSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message describing the most recent failure on this thread, or an empty
// string. The pointer stays valid until the next failing call on the
// same thread.
const char *ww_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *ww_version(void);

// Parses a configuration (TOML, or JSON when `is_json` is nonzero) and
// builds the validated homotopy problem.
//
// # Safety
// `text` must be a NUL-terminated string and `out` a writable pointer.
enum WwStatus ww_problem_from_config(const char *text, int is_json, struct WwProblem **out);

// # Safety
// `problem` must be NULL or a handle from [`ww_problem_from_config`] not
// yet freed.
void ww_problem_free(struct WwProblem *problem);

// Number of grid nodes, or 0 for NULL.
//
// # Safety
// `problem` must be NULL or a live handle.
size_t ww_problem_nodes(const struct WwProblem *problem);

// Runs the continuation from `s = 0` to `s = 1`.
//
// # Safety
// `problem` must be a live handle and `out` a writable pointer.
enum WwStatus ww_solve(const struct WwProblem *problem, struct WwSolution **out);

// Runs every verification check; `passed` receives 1 when all pass.
//
// # Safety
// `problem` must be a live handle and `passed` a writable pointer.
enum WwStatus ww_verify(const struct WwProblem *problem, int *passed);

// Number of nodes in the solution, or 0 for NULL.
//
// # Safety
// `solution` must be NULL or a live handle.
size_t ww_solution_len(const struct WwSolution *solution);

// Copies the heights into `buf`, which must hold `len` doubles with
// `len >= ww_solution_len(solution)`.
//
// # Safety
// `solution` must be a live handle and `buf` valid for `len` writes.
enum WwStatus ww_solution_copy(const struct WwSolution *solution, double *buf, size_t len);

// Final residual sup-norm, or NaN for NULL.
//
// # Safety
// `solution` must be NULL or a live handle.
double ww_solution_residual(const struct WwSolution *solution);

// Accepted continuation states including `s = 0`, or 0 for NULL.
//
// # Safety
// `solution` must be NULL or a live handle.
size_t ww_solution_steps(const struct WwSolution *solution);

// Newton iterations summed over all states, or 0 for NULL.
//
// # Safety
// `solution` must be NULL or a live handle.
size_t ww_solution_newton_total(const struct WwSolution *solution);

// # Safety
// `solution` must be NULL or a handle from [`ww_solve`] not yet freed.
void ww_solution_free(struct WwSolution *solution);

// Normalized curvature function `(S_r / C(n, r))^(1/r)` of the `n`
// values at `lambda`.
//
// # Safety
// `lambda` must be valid for `n` reads and `out` writable.
enum WwStatus ww_curvature_f(size_t n, size_t r, const double *lambda, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WEINGARTEN_H */
