#ifndef SZWALK_H
#define SZWALK_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Operators that can be copied out of a walk.
typedef enum SzwOperator {
  // Evolution `U = S C`.
  SZW_OPERATOR_EVOLUTION = 0,
  SZW_OPERATOR_COIN = 1,
  SZW_OPERATOR_SHIFT = 2,
  // `d_A`, of shape `dim_k x dim_h`.
  SZW_OPERATOR_BOUNDARY = 3,
  // Discriminant `T`, of shape `dim_k x dim_k`.
  SZW_OPERATOR_DISCRIMINANT = 4,
  // Generator `H` with `exp(iH) = U`.
  SZW_OPERATOR_GENERATOR = 5,
} SzwOperator;

// Origin of a spectral line of `U`.
typedef enum SzwProvenance {
  SZW_PROVENANCE_MAPPED_FROM_LAMBDA = 0,
  SZW_PROVENANCE_PLUS_CORRECTION = 1,
  SZW_PROVENANCE_MINUS_CORRECTION = 2,
} SzwProvenance;

// Result of every fallible call. Zero is success.
typedef enum SzwStatus {
  SZW_STATUS_OK = 0,
  SZW_STATUS_NULL_POINTER = 1,
  SZW_STATUS_INVALID_ARGUMENT = 2,
  SZW_STATUS_DIMENSION = 3,
  SZW_STATUS_DOMAIN = 4,
  SZW_STATUS_STRUCTURAL = 5,
  SZW_STATUS_CONSISTENCY = 6,
  SZW_STATUS_JSON = 7,
  SZW_STATUS_BUFFER_TOO_SMALL = 8,
  SZW_STATUS_VALIDATION_FAILED = 9,
  SZW_STATUS_PANIC = 10,
} SzwStatus;

// A walk together with its spectral analysis.
typedef struct SzwWalk SzwWalk;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *szw_version(void);

// Copies the calling thread's last error message into `buf` (truncated,
// always NUL-terminated when `cap > 0`) and returns the full message
// length in bytes excluding the terminator.
//
// # Safety
// `buf` must be null or valid for `cap` writes.
size_t szw_last_error(char *buf, size_t cap);

// Grover walk on a built-in graph (`single-edge`, `cycle:N`, `complete:N`,
// `path-loops:N`, `star:N`) or a seeded abstract walk (`random:H,K,SEED`).
//
// # Safety
// `name` must be a NUL-terminated string and `out` valid for one write.
enum SzwStatus szw_walk_from_fixture(const char *name, struct SzwWalk **out);

// Seeded abstract walk with `1 <= dim_k <= dim_h`.
//
// # Safety
// `out` must be valid for one write.
enum SzwStatus szw_walk_from_random(size_t dim_h,
                                    size_t dim_k,
                                    uint64_t seed,
                                    struct SzwWalk **out);

// Walk from serialized `d_A` and `S` (the `validate` output's `walk` field).
//
// # Safety
// `json` must be a NUL-terminated string and `out` valid for one write.
enum SzwStatus szw_walk_from_json(const char *json, struct SzwWalk **out);

// Twisted Szegedy walk from graph JSON. With `explicit_weights` false the
// Grover weight is used; otherwise the file must carry weights. A missing
// 1-form means zero.
//
// # Safety
// `json` must be a NUL-terminated string and `out` valid for one write.
enum SzwStatus szw_walk_from_graph_json(const char *json,
                                        bool explicit_weights,
                                        struct SzwWalk **out);

// Releases a handle. Null is ignored.
//
// # Safety
// `w` must be null or a handle not yet freed.
void szw_walk_free(struct SzwWalk *w);

// `dim H` (arcs) and `dim K` (vertices).
//
// # Safety
// `w` must be a live handle; the outputs must be valid for one write.
enum SzwStatus szw_walk_dims(const struct SzwWalk *w, size_t *dim_h, size_t *dim_k);

// Copies an operator as row-major `re` and `im` buffers of `cap` entries
// each; `rows` and `cols` receive its shape even when the buffers are
// too small.
//
// # Safety
// `w` must be a live handle; `rows`/`cols` valid for one write; `re`/`im`
// null or valid for `cap` writes.
enum SzwStatus szw_walk_operator(const struct SzwWalk *w,
                                 enum SzwOperator which,
                                 double *re,
                                 double *im,
                                 size_t cap,
                                 size_t *rows,
                                 size_t *cols);

// Number of lines in the predicted spectrum of `U`.
//
// # Safety
// `w` must be a live handle and `len` valid for one write.
enum SzwStatus szw_spectrum_len(const struct SzwWalk *w, size_t *len);

// Copies the predicted spectrum: angle in `[0, 2pi)`, multiplicity and
// provenance per line, each buffer holding `cap` entries.
//
// # Safety
// `w` must be a live handle; the buffers must be valid for `cap` writes.
enum SzwStatus szw_spectrum(const struct SzwWalk *w,
                            double *angles,
                            size_t *multiplicities,
                            enum SzwProvenance *provenance,
                            size_t cap);

// Runs every invariant check. Returns `ValidationFailed` (with the report
// as the last error) when any check fails; the counts are written either way.
//
// # Safety
// `w` must be a live handle; `checks`/`violations` null or valid for one write.
enum SzwStatus szw_validate(const struct SzwWalk *w, size_t *checks, size_t *violations);

// Number of blocks in the walk's partition (vertices, or coordinates for
// abstract walks).
//
// # Safety
// `w` must be a live handle and `len` valid for one write.
enum SzwStatus szw_num_blocks(const struct SzwWalk *w, size_t *len);

// Finding probabilities for `n = 0..=steps`, row-major `(steps + 1) x blocks`.
// `init` uses the CLI syntax: `arc:<i>`, `vertex-uniform:<label>`,
// `random:<seed>` or a JSON array of `[re, im]` pairs.
//
// # Safety
// `w` must be a live handle, `init` a NUL-terminated string and `out`
// valid for `cap` writes.
enum SzwStatus szw_simulate(const struct SzwWalk *w,
                            const char *init,
                            size_t steps,
                            double *out,
                            size_t cap);

// Limit of the Cesàro averages of the finding probabilities, one value
// per block.
//
// # Safety
// `w` must be a live handle, `init` a NUL-terminated string and `out`
// valid for `cap` writes.
enum SzwStatus szw_limit_distribution(const struct SzwWalk *w,
                                      const char *init,
                                      double *out,
                                      size_t cap);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SZWALK_H */
