#ifndef MIURA_H
#define MIURA_H

/* Generated by cbindgen from crates/ffi/src; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every exported function.
typedef enum MiuraStatus {
  MIURA_STATUS_OK = 0,
  // A required pointer argument was null.
  MIURA_STATUS_NULL_POINTER = 1,
  // A string argument was not valid UTF-8.
  MIURA_STATUS_INVALID_UTF8 = 2,
  // Rejected input: bad rank, malformed JSON, open loop, degenerate chart.
  MIURA_STATUS_INVALID_ARGUMENT = 3,
  // The computation itself failed: pole too close, step underflow,
  // path leaving the big cell, branch cut.
  MIURA_STATUS_NUMERIC_FAILURE = 4,
  // A Rust panic was caught at the boundary.
  MIURA_STATUS_PANIC = 5,
} MiuraStatus;

// Square-root branch for the rank-2 transition matrix.
typedef enum MiuraBranch {
  MIURA_BRANCH_PRINCIPAL = 0,
  MIURA_BRANCH_NEGATED = 1,
} MiuraBranch;

// Miura foliation of one rank together with its graph check.
typedef struct MiuraFoliation MiuraFoliation;

// Rational potential `w_2(z), ..., w_n(z)`.
typedef struct MiuraPotential MiuraPotential;

// Symbolic Miura data for one rank.
typedef struct MiuraSymbolic MiuraSymbolic;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null if it succeeded.
// Free the result with [`miura_string_free`].
char *miura_last_error(void);

// # Safety
// `s` must be null or a string returned by this library, not yet freed.
void miura_string_free(char *s);

// Runs the symbolic elimination for rank `n`.
//
// # Safety
// `out` must be a valid pointer.
enum MiuraStatus miura_symbolic_new(size_t n, struct MiuraSymbolic **out);

// # Safety
// `h` must be null or a handle from [`miura_symbolic_new`], not yet freed.
void miura_symbolic_free(struct MiuraSymbolic *h);

// `{"n", "w", "N_minus"}` as a JSON string.
//
// # Safety
// `h` must be a live handle and `out` a valid pointer.
enum MiuraStatus miura_symbolic_to_json(const struct MiuraSymbolic *h, char **out);

// `w_i` in text form, for `2 <= i <= n`.
//
// # Safety
// `h` must be a live handle and `out` a valid pointer.
enum MiuraStatus miura_symbolic_w(const struct MiuraSymbolic *h, size_t i, char **out);

// Builds the foliation for rank `n` and checks the Miura graph.
//
// # Safety
// `out` must be a valid pointer.
enum MiuraStatus miura_foliation_new(size_t n, struct MiuraFoliation **out);

// # Safety
// `h` must be null or a handle from [`miura_foliation_new`], not yet freed.
void miura_foliation_free(struct MiuraFoliation *h);

// The 1-forms and coordinate layout as a JSON string.
//
// # Safety
// `h` must be a live handle and `out` a valid pointer.
enum MiuraStatus miura_foliation_to_json(const struct MiuraFoliation *h, char **out);

// Whether every form vanishes on the Miura graph.
//
// # Safety
// `h` must be a live handle and `out` a valid pointer.
enum MiuraStatus miura_foliation_graph_exact(const struct MiuraFoliation *h, bool *out);

// Parses a potential from its JSON description.
//
// # Safety
// `json` must be a nul-terminated string and `out` a valid pointer.
enum MiuraStatus miura_potential_from_json(const char *json, struct MiuraPotential **out);

// # Safety
// `h` must be null or a handle from [`miura_potential_from_json`], not yet freed.
void miura_potential_free(struct MiuraPotential *h);

// Rank of the potential, 0 for a null handle.
//
// # Safety
// `h` must be null or a live handle.
size_t miura_potential_rank(const struct MiuraPotential *h);

// # Safety
// `h` must be a live handle and `out` a valid pointer.
enum MiuraStatus miura_potential_to_json(const struct MiuraPotential *h, char **out);

// Gauss factorization `M = N₋ B₊` of an `n × n` complex matrix.
//
// `m` holds `2n²` doubles. `n_minus` and `b_plus` receive `2n²` doubles
// each and are left untouched off the big cell; either may be null.
// `minors` receives the `2n` leading principal minors and may be null.
//
// # Safety
// Non-null pointers must address buffers of the stated sizes.
enum MiuraStatus miura_gauss_factorize(size_t n,
                                       const double *m,
                                       double tol,
                                       double *n_minus,
                                       double *b_plus,
                                       double *minors,
                                       bool *in_big_cell);

// Monodromy of the potential around a closed loop given as path JSON.
//
// `matrix` receives `2n²` doubles and `det` two.
//
// # Safety
// `pot` must be a live handle, `loop_json` a nul-terminated string, and
// the output buffers valid for the stated sizes.
enum MiuraStatus miura_monodromy(const struct MiuraPotential *pot,
                                 const char *loop_json,
                                 double rtol,
                                 double *matrix,
                                 double *det);

// Residuals of the numeric Miura check along a path, as a JSON report.
//
// `m0` is the `2n²`-double initial frame, or null for the identity.
//
// # Safety
// `pot` must be a live handle, `path_json` a nul-terminated string, `m0`
// null or a buffer of `2n²` doubles and `out` a valid pointer.
enum MiuraStatus miura_numeric_report_json(const struct MiuraPotential *pot,
                                           const char *path_json,
                                           const double *m0,
                                           double rtol,
                                           double minor_tol,
                                           char **out);

// Transition matrix of rank 2 or 3 for the chart `z ↦ (az+b)/(cz+d)`.
//
// `coeffs` holds `a, b, c, d` as 8 doubles; `out` receives `2·rank²`.
// `branch` only matters for rank 2.
//
// # Safety
// `coeffs` and `out` must address buffers of the stated sizes.
enum MiuraStatus miura_transition(size_t rank,
                                  const double *coeffs,
                                  double z_re,
                                  double z_im,
                                  enum MiuraBranch branch,
                                  double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MIURA_H */
