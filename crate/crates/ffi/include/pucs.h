#ifndef PUCS_H
#define PUCS_H

/* Generated by cbindgen from crates/ffi. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum PucsStatus {
  PUCS_STATUS_OK = 0,
  PUCS_STATUS_NULL_POINTER = 1,
  PUCS_STATUS_INVALID_UTF8 = 2,
  PUCS_STATUS_PARSE = 3,
  PUCS_STATUS_VALIDATION = 4,
  PUCS_STATUS_DIMENSION_MISMATCH = 5,
  PUCS_STATUS_UNSUPPORTED_SAMPLING = 6,
  PUCS_STATUS_BUDGET_EXCEEDED = 7,
  PUCS_STATUS_IO = 8,
  PUCS_STATUS_OUT_OF_RANGE = 9,
  PUCS_STATUS_PANIC = 10,
} PucsStatus;

typedef enum PucsOrbitStatus {
  PUCS_ORBIT_STATUS_ACTIVE = 0,
  PUCS_ORBIT_STATUS_PRUNED = 1,
  PUCS_ORBIT_STATUS_CONVERGED = 2,
  PUCS_ORBIT_STATUS_INCONSISTENT_STALL = 3,
  PUCS_ORBIT_STATUS_EXHAUSTED = 4,
} PucsOrbitStatus;

// A parsed problem file.
typedef struct PucsProblem PucsProblem;

// The outcome of one solver run.
typedef struct PucsReport PucsReport;

// Solver settings. Start from `pucs_solver_config_default`.
typedef struct PucsSolverConfig {
  double eps_residual;
  uintptr_t max_sweeps;
  double tie_tol;
  uintptr_t stall_window;
  double feasibility_tol;
} PucsSolverConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent failure on this thread, or null if none.
// The pointer stays valid until the next failing call on the same thread.
const char *pucs_last_error_message(void);

// Parses a nul-terminated problem file. On success `*out` receives a new handle.
//
// # Safety
// `text` must be null or a valid nul-terminated string; `out` must be null
// or point to writable storage for one pointer.
enum PucsStatus pucs_problem_parse(const char *text, struct PucsProblem **out);

// Releases a problem handle. Null is ignored.
//
// # Safety
// `problem` must be null or a handle from `pucs_problem_parse` not yet freed.
void pucs_problem_free(struct PucsProblem *problem);

// Space dimension, or 0 for a null handle.
//
// # Safety
// `problem` must be null or a live handle.
uintptr_t pucs_problem_dimension(const struct PucsProblem *problem);

// Number of sets, or 0 for a null handle.
//
// # Safety
// `problem` must be null or a live handle.
uintptr_t pucs_problem_set_count(const struct PucsProblem *problem);

// Number of pieces in set `set` (1-based), or 0 when out of range.
//
// # Safety
// `problem` must be null or a live handle.
uintptr_t pucs_problem_piece_count(const struct PucsProblem *problem, uintptr_t set);

// Number of disjointness warnings raised while parsing.
//
// # Safety
// `problem` must be null or a live handle.
uintptr_t pucs_problem_warning_count(const struct PucsProblem *problem);

struct PucsSolverConfig pucs_solver_config_default(void);

// Runs the solver using the problem's own initial points. A null `config`
// means defaults. On success `*out` receives a new report handle.
//
// # Safety
// `problem` must be a live handle, `config` null or valid, `out` writable.
enum PucsStatus pucs_solve(const struct PucsProblem *problem,
                           const struct PucsSolverConfig *config,
                           struct PucsReport **out);

// Releases a report handle. Null is ignored.
//
// # Safety
// `report` must be null or a handle from `pucs_solve` not yet freed.
void pucs_report_free(struct PucsReport *report);

// Number of orbits (pieces of the first set), or 0 for a null handle.
//
// # Safety
// `report` must be null or a live handle.
uintptr_t pucs_report_orbit_count(const struct PucsReport *report);

// Number of converged orbits, or 0 for a null handle.
//
// # Safety
// `report` must be null or a live handle.
uintptr_t pucs_report_solution_count(const struct PucsReport *report);

// # Safety
// `report` must be a live handle and `status` writable.
enum PucsStatus pucs_report_orbit_status(const struct PucsReport *report,
                                         uintptr_t r,
                                         enum PucsOrbitStatus *status);

// Copies the final iterate of orbit `r` into `coords`, which must hold
// exactly `len` = dimension values.
//
// # Safety
// `report` must be a live handle and `coords` valid for `len` writes.
enum PucsStatus pucs_report_orbit_point(const struct PucsReport *report,
                                        uintptr_t r,
                                        double *coords,
                                        uintptr_t len);

// Residual of the last sweep of orbit `r`.
//
// # Safety
// `report` must be a live handle and `residual` writable.
enum PucsStatus pucs_report_orbit_residual(const struct PucsReport *report,
                                           uintptr_t r,
                                           double *residual);

// Sweeps performed by orbit `r` after the pruning sweep.
//
// # Safety
// `report` must be a live handle and `sweeps` writable.
enum PucsStatus pucs_report_orbit_sweeps(const struct PucsReport *report,
                                         uintptr_t r,
                                         uintptr_t *sweeps);

// The full report as JSON, or null for a null handle. Release with
// `pucs_string_free`.
//
// # Safety
// `report` must be null or a live handle.
char *pucs_report_to_json(const struct PucsReport *report);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must be null or a string from `pucs_report_to_json` not yet freed.
void pucs_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PUCS_H */
