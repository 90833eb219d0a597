#ifndef PEPSBOUND_H
#define PEPSBOUND_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PbStatus {
  PB_STATUS_OK = 0,
  // Null pointer, bad enum value or undersized buffer.
  PB_STATUS_INVALID_ARGUMENT = 1,
  // Malformed fixture or inconsistent dimensions.
  PB_STATUS_INPUT = 2,
  // A numerical routine failed or a matrix was singular.
  PB_STATUS_NUMERICAL = 3,
  // A dense size cap would be exceeded.
  PB_STATUS_CAP_EXCEEDED = 4,
  // A theorem hypothesis does not hold.
  PB_STATUS_HYPOTHESIS = 5,
  // An internal panic was caught.
  PB_STATUS_PANIC = 6,
} PbStatus;

typedef enum PbMethod {
  PB_METHOD_DENSE = 0,
  PB_METHOD_MATRIX_FREE = 1,
} PbMethod;

typedef enum PbSource {
  PB_SOURCE_GIBBS = 0,
  PB_SOURCE_IDENTITY = 1,
} PbSource;

typedef enum PbMode {
  PB_MODE_INJECTIVE = 0,
  PB_MODE_MPO = 1,
} PbMode;

// Translation-invariant matrix product state.
typedef struct PbMps PbMps;

// Dense square complex matrix.
typedef struct PbOperator PbOperator;

// Finite PEPS on a rectangular lattice.
typedef struct PbPeps PbPeps;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the last error message of this thread into `buf` (NUL terminated,
// truncated to `len`). Returns the full message length without the NUL.
//
// # Safety
// `buf` must be null or point to `len` writable bytes.
size_t pb_last_error_message(char *buf, size_t len);

// Library version as a static NUL-terminated string.
const char *pb_version(void);

// MPS from `d` matrices of size `bond × bond`, given as `d·bond·bond`
// interleaved complex entries, matrix by matrix, each row-major.
//
// # Safety
// `entries` must point to `2·d·bond·bond` doubles; `out` must be writable.
enum PbStatus pb_mps_new(size_t d, size_t bond, const double *entries, struct PbMps **out);

// MPS from a `pepsbound.fixture.v1` JSON document of kind `mps`.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum PbStatus pb_mps_from_json(const char *json, struct PbMps **out);

// Built-in MPS fixture by name (`aklt`, `gapped`, `isometric`).
//
// # Safety
// `name` must be a NUL-terminated string; `out` must be writable.
enum PbStatus pb_mps_builtin(const char *name, struct PbMps **out);

// # Safety
// `m` must be null or a handle from this library, not used afterwards.
void pb_mps_free(struct PbMps *m);

// Leading transfer eigenvalue `λ` and the ratio `γ = |λ₂|/λ`.
//
// # Safety
// `m` must be a valid handle; outputs must be writable.
enum PbStatus pb_mps_transfer_gap(const struct PbMps *m, double *lambda, double *gamma);

// Open chain of `length` sites as a one-row PEPS.
//
// # Safety
// `m` must be a valid handle; `out` must be writable.
enum PbStatus pb_mps_to_peps(const struct PbMps *m, size_t length, struct PbPeps **out);

// PEPS from a `pepsbound.fixture.v1` JSON document of kind `peps`.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum PbStatus pb_peps_from_json(const char *json, struct PbPeps **out);

// Built-in PEPS fixture by name (`product`, `z2`, `z3`, `random-peps`).
//
// # Safety
// `name` must be a NUL-terminated string; `out` must be writable.
enum PbStatus pb_peps_builtin(const char *name, struct PbPeps **out);

// # Safety
// `p` must be null or a handle from this library, not used afterwards.
void pb_peps_free(struct PbPeps *p);

// Lattice shape and physical dimension.
//
// # Safety
// `p` must be a valid handle; outputs must be writable.
enum PbStatus pb_peps_shape(const struct PbPeps *p, size_t *rows, size_t *cols, size_t *phys_dim);

// Boundary state `ρ_∂A` of the rectangle with corner `(row, col)`.
//
// # Safety
// `p` must be a valid handle; `out` must be writable.
enum PbStatus pb_peps_boundary_state(const struct PbPeps *p,
                                     size_t row,
                                     size_t col,
                                     size_t height,
                                     size_t width,
                                     struct PbOperator **out);

// Row (and column) count of an operator.
//
// # Safety
// `op` must be null or a valid handle.
size_t pb_operator_dim(const struct PbOperator *op);

// Copies the operator into `buf` as `2·dim²` interleaved doubles, row-major.
//
// # Safety
// `op` must be a valid handle; `buf` must point to `len` writable doubles.
enum PbStatus pb_operator_entries(const struct PbOperator *op, double *buf, size_t len);

// # Safety
// `op` must be null or a handle from this library, not used afterwards.
void pb_operator_free(struct PbOperator *op);

// `‖P_AB P_BC − P_ABC‖` for the split of rows `row..row+height` into column
// blocks of widths `wa, wb, wc` starting at column 0; `method` is a [`PbMethod`].
//
// # Safety
// `p` must be a valid handle; `norm` must be writable.
enum PbStatus pb_martingale_norm(const struct PbPeps *p,
                                 size_t row,
                                 size_t height,
                                 size_t wa,
                                 size_t wb,
                                 size_t wc,
                                 int32_t method,
                                 double *norm);

// Builds a certificate on the split and checks `‖P_AB P_BC − P_ABC‖ ≤ 8ε`.
// `source` is a [`PbSource`], `mode` a [`PbMode`]. `pass` is 1 or 0, and −1
// when `ε > 1` and the inequality is not asserted.
//
// # Safety
// `p` must be a valid handle; outputs must be writable.
enum PbStatus pb_factorize(const struct PbPeps *p,
                           size_t row,
                           size_t height,
                           size_t wa,
                           size_t wb,
                           size_t wc,
                           int32_t source,
                           int32_t mode,
                           double *epsilon,
                           double *martingale,
                           int32_t *pass);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PEPSBOUND_H */
