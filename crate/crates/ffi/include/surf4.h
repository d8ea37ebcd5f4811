#ifndef SURF4_H
#define SURF4_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/**
 * Status codes; the non-zero values match the command-line exit codes.
 */
typedef enum Surf4Status {
  SURF4_STATUS_OK = 0,
  SURF4_STATUS_NULL_ARGUMENT = 1,
  SURF4_STATUS_INPUT = 2,
  SURF4_STATUS_THRESHOLD = 3,
  SURF4_STATUS_NUMERICAL = 4,
  SURF4_STATUS_PANIC = 5,
} Surf4Status;

typedef struct Surf4Grid Surf4Grid;

typedef struct Surf4Patch Surf4Patch;

typedef struct Surf4Surface Surf4Surface;

/**
 * Pointwise invariants; `point_class` is 0 flat, 1 elliptic, 2 parabolic,
 * 3 hyperbolic.
 */
typedef struct Surf4Invariants {
  double k;
  double kappa;
  double gauss_k;
  double h_norm;
  double nu_prime;
  double nu_doubleprime;
  int32_t point_class;
} Surf4Invariants;

/**
 * The geometric frame `x, y, b, l` and its eight invariants.
 */
typedef struct Surf4Frame {
  double x[4];
  double y[4];
  double b[4];
  double l[4];
  double gamma1;
  double gamma2;
  double nu1;
  double nu2;
  double lambda;
  double mu;
  double beta1;
  double beta2;
} Surf4Frame;

/**
 * Summary of the compatibility equations on a grid.
 */
typedef struct Surf4CheckSummary {
  double max_residual;
  /**
   * Index of the worst equation, 0..6.
   */
  uint32_t worst_equation;
  size_t worst_i;
  size_t worst_j;
  bool general_class;
} Surf4CheckSummary;

/**
 * Message of the last failure on this thread, or NULL. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *surf4_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *surf4_version(void);

/**
 * Create a catalog surface.
 *
 * # Safety
 * `name` must be a NUL-terminated string, `params` must point to
 * `nparams` doubles (or be NULL when `nparams` is 0) and `out` must be
 * writable.
 */
enum Surf4Status surf4_surface_new(const char *name,
                                   const double *params,
                                   size_t nparams,
                                   struct Surf4Surface **out);

/**
 * Load a sampled surface from a patch file (or a grid file with positions).
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` writable.
 */
enum Surf4Status surf4_surface_load(const char *path, struct Surf4Surface **out);

/**
 * # Safety
 * `surface` must come from this library and not be used afterwards.
 */
void surf4_surface_free(struct Surf4Surface *surface);

/**
 * Pointwise invariants at `(u, v)` from a jet of the given order (2 or 3).
 *
 * # Safety
 * `surface` must be a live handle and `out` writable.
 */
enum Surf4Status surf4_point_invariants(const struct Surf4Surface *surface,
                                        double u,
                                        double v,
                                        uint8_t order,
                                        struct Surf4Invariants *out);

/**
 * Geometric frame at `(u, v)`; fails at minimal and flat points.
 *
 * # Safety
 * `surface` must be a live handle and `out` writable.
 */
enum Surf4Status surf4_geometric_frame(const struct Surf4Surface *surface,
                                       double u,
                                       double v,
                                       struct Surf4Frame *out);

/**
 * Build a curvature-line net with node (0, 0) at `(seed_u, seed_v)`.
 *
 * # Safety
 * `surface` must be a live handle and `out` writable.
 */
enum Surf4Status surf4_net_build(const struct Surf4Surface *surface,
                                 double seed_u,
                                 double seed_v,
                                 size_t nu,
                                 size_t nv,
                                 double du,
                                 double dv,
                                 struct Surf4Grid **out);

/**
 * # Safety
 * `path` must be a NUL-terminated string and `out` writable.
 */
enum Surf4Status surf4_grid_load(const char *path, struct Surf4Grid **out);

/**
 * # Safety
 * `grid` must be a live handle and `path` a NUL-terminated string.
 */
enum Surf4Status surf4_grid_save(const struct Surf4Grid *grid, const char *path);

/**
 * # Safety
 * `grid` must come from this library and not be used afterwards.
 */
void surf4_grid_free(struct Surf4Grid *grid);

/**
 * # Safety
 * `grid` must be a live handle; `nu` and `nv` writable.
 */
enum Surf4Status surf4_grid_dims(const struct Surf4Grid *grid, size_t *nu, size_t *nv);

/**
 * Copy field `field` (0 sqrtE, 1 sqrtG, 2 gamma1, 3 gamma2, 4 nu1, 5 nu2,
 * 6 lambda, 7 mu, 8 beta1, 9 beta2) into `buf`, node `(i, j)` at
 * `i * nv + j`. `len` must be at least `nu * nv`.
 *
 * # Safety
 * `grid` must be a live handle and `buf` must hold `len` doubles.
 */
enum Surf4Status surf4_grid_field(const struct Surf4Grid *grid,
                                  uint32_t field,
                                  double *buf,
                                  size_t len);

/**
 * Overwrite field `field` from `values` (`nu * nv` doubles).
 *
 * # Safety
 * `grid` must be a live handle and `values` must hold `len` doubles.
 */
enum Surf4Status surf4_grid_set_field(struct Surf4Grid *grid,
                                      uint32_t field,
                                      const double *values,
                                      size_t len);

/**
 * Evaluate the compatibility equations.
 *
 * # Safety
 * `grid` must be a live handle and `out` writable.
 */
enum Surf4Status surf4_grid_check(const struct Surf4Grid *grid, struct Surf4CheckSummary *out);

/**
 * Integrate a patch from the grid, starting from the standard frame at the
 * origin. `threshold <= 0` disables the compatibility gate.
 *
 * # Safety
 * `grid` must be a live handle and `out` writable.
 */
enum Surf4Status surf4_reconstruct(const struct Surf4Grid *grid,
                                   double threshold,
                                   struct Surf4Patch **out);

/**
 * # Safety
 * `patch` must come from this library and not be used afterwards.
 */
void surf4_patch_free(struct Surf4Patch *patch);

/**
 * Number of nodes of a patch.
 *
 * # Safety
 * `patch` must be a live handle or NULL.
 */
size_t surf4_patch_len(const struct Surf4Patch *patch);

/**
 * Largest deviation of a reconstructed frame from orthonormality.
 *
 * # Safety
 * `patch` must be a live handle or NULL (which yields NaN).
 */
double surf4_patch_gram_drift(const struct Surf4Patch *patch);

/**
 * Copy the positions, four doubles per node, into `buf` (`len >= 4 n`).
 *
 * # Safety
 * `patch` must be a live handle and `buf` must hold `len` doubles.
 */
enum Surf4Status surf4_patch_positions(const struct Surf4Patch *patch, double *buf, size_t len);

/**
 * Proper rigid motion with `candidate ≈ R reference + t` for two sets of
 * `npoints` points stored as four doubles each. `rotation` receives 16
 * doubles in row-major order, `translation` 4.
 *
 * # Safety
 * The point buffers must hold `4 * npoints` doubles, `rotation` 16,
 * `translation` 4, and `rms` must be writable.
 */
enum Surf4Status surf4_rigid_align(const double *candidate,
                                   const double *reference,
                                   size_t npoints,
                                   double *rotation,
                                   double *translation,
                                   double *rms);

/**
 * Name of compatibility equation `index` as a static string, or NULL.
 */
const char *surf4_equation_name(uint32_t index);

#endif  /* SURF4_H */
