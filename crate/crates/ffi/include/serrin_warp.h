#ifndef SERRIN_WARP_H
#define SERRIN_WARP_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SwStatus {
  SW_STATUS_OK = 0,
  SW_STATUS_NULL_POINTER = 1,
  SW_STATUS_INVALID_ARGUMENT = 2,
  SW_STATUS_DOMAIN = 3,
  SW_STATUS_PRECONDITION = 4,
  SW_STATUS_CONSTRUCTION = 5,
  SW_STATUS_NO_SOLUTION = 6,
  SW_STATUS_INADMISSIBLE_RADIUS = 7,
  SW_STATUS_SINGULAR = 8,
  SW_STATUS_DEGENERATE_RECOVERY = 9,
  SW_STATUS_CHART_OVERFLOW = 10,
  SW_STATUS_SOLVER = 11,
  SW_STATUS_INSUFFICIENT_RESOLUTION = 12,
  SW_STATUS_NOT_FOUND = 13,
  SW_STATUS_CONFIG = 14,
  SW_STATUS_IO = 15,
  SW_STATUS_PANIC = 99,
} SwStatus;

/**
 * A warped product built from a catalog entry.
 */
typedef struct SwManifold SwManifold;

/**
 * A solved radial profile.
 */
typedef struct SwRadialProfile SwRadialProfile;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread; empty after a success.
 * The pointer stays valid until the next call on this thread.
 */
const char *sw_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *sw_version(void);

/**
 * Builds the catalog entry `entry` (e.g. `space_form:k=-1`) in dimension `n`.
 *
 * # Safety
 * `entry` must be a NUL-terminated string; `out` must be writable.
 */
enum SwStatus sw_manifold_new(const char *entry, size_t n, struct SwManifold **out);

/**
 * # Safety
 * `m` must come from [`sw_manifold_new`] and not be freed twice. Null is ignored.
 */
void sw_manifold_free(struct SwManifold *m);

/**
 * Curvature constant the entry is built around.
 *
 * # Safety
 * Pointers must be valid.
 */
enum SwStatus sw_manifold_curvature_constant(const struct SwManifold *m, double *out);

/**
 * Minimum over `samples` radii of `Ric − (n−1)k` on unit vectors; the bound
 * holds when the margin is nonnegative.
 *
 * # Safety
 * Pointers must be valid.
 */
enum SwStatus sw_check_ricci_bound(const struct SwManifold *m,
                                   double k,
                                   size_t samples,
                                   double *margin);

/**
 * `kσ′ + Δσ′/n` at radius `r`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum SwStatus sw_serrin_coefficient(const struct SwManifold *m, double k, double r, double *out);

/**
 * Solves the radial torsion problem on the ball of `radius` about the pole.
 *
 * # Safety
 * Pointers must be valid; release the profile with [`sw_profile_free`].
 */
enum SwStatus sw_solve_radial(const struct SwManifold *m,
                              double k,
                              double radius,
                              double step,
                              struct SwRadialProfile **out);

/**
 * # Safety
 * `p` must come from [`sw_solve_radial`] and not be freed twice. Null is ignored.
 */
void sw_profile_free(struct SwRadialProfile *p);

/**
 * Number of nodes; 0 for a null handle.
 *
 * # Safety
 * `p` must be valid or null.
 */
size_t sw_profile_len(const struct SwRadialProfile *p);

/**
 * # Safety
 * Pointers must be valid.
 */
enum SwStatus sw_profile_center_value(const struct SwRadialProfile *p, double *out);

/**
 * `|u′|` on the boundary sphere.
 *
 * # Safety
 * Pointers must be valid.
 */
enum SwStatus sw_profile_boundary_gradient(const struct SwRadialProfile *p, double *out);

/**
 * Node `index` as `(r, u, u′)`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum SwStatus sw_profile_node(const struct SwRadialProfile *p,
                              size_t index,
                              double *r,
                              double *u,
                              double *du);

/**
 * Closed-form solution on a geodesic ball of a space form of curvature `k`.
 *
 * # Safety
 * `out` must be writable.
 */
enum SwStatus sw_closed_form_solution(double k,
                                      size_t n,
                                      double ball_radius,
                                      double r,
                                      double *out);

/**
 * Riemannian distance between `(r1, θ1)` and `(r2, θ2)` by geodesic shooting.
 *
 * # Safety
 * Pointers must be valid.
 */
enum SwStatus sw_geodesic_distance(const struct SwManifold *m,
                                   double r1,
                                   double theta1,
                                   double r2,
                                   double theta2,
                                   double tol,
                                   double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SERRIN_WARP_H */
