/* C interface to bijmap: certified bijective mappings of
   triangle meshes onto polygons. All functions are thread-safe;
   error text is thread-local. */

#ifndef BIJMAP_H
#define BIJMAP_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum BijmapStatus {
  /**
   * Success.
   */
  BijmapOk = 0,
  /**
   * A required pointer argument was null.
   */
  BijmapNullArgument = 1,
  /**
   * An argument was structurally invalid (bad size, unknown enum value).
   */
  BijmapInvalidArgument = 2,
  /**
   * Reading or parsing an input file failed.
   */
  BijmapParseError = 3,
  /**
   * The solve failed (infeasible assignment, solver breakdown).
   */
  BijmapSolveError = 4,
  /**
   * A certifier could not run on these inputs.
   */
  BijmapCertifyError = 5,
  /**
   * A degree query failed (no generic direction, query on the cycle image).
   */
  BijmapDegreeError = 6,
  /**
   * A panic was caught at the boundary; state may be stale but memory is safe.
   */
  BijmapPanic = 7,
} BijmapStatus;

/**
 * Which sufficient condition to certify.
 */
typedef enum BijmapCondition {
  /**
   * Necessary only: non-degenerate, orientation preserving.
   */
  BijmapConditionNecessary = 0,
  /**
   * Boundary maps bijectively onto the polygon boundary.
   */
  BijmapConditionBoundaryBijection = 1,
  /**
   * Boundary edges on assigned hull lines, corner pins met.
   */
  BijmapConditionBoundaryLines = 2,
  /**
   * Line conditions plus strictly monotone boundary advance.
   */
  BijmapConditionMonotoneBoundary = 3,
} BijmapCondition;

/**
 * An opaque planar map: a mesh plus one image point per vertex.
 */
typedef struct BijmapMap BijmapMap;

/**
 * An opaque parsed problem: mesh, target polygon, assignment, parameters.
 */
typedef struct BijmapProblem BijmapProblem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread. Never null; empty
 * when nothing failed yet. Valid until the next failing call here.
 */
const char *bijmap_last_error(void);

/**
 * Library version as a static string.
 */
const char *bijmap_version(void);

/**
 * Parses a problem file (mesh, polygon, assignment, parameters). On
 * success, stores a new handle in `out`; free it with
 * [`bijmap_problem_free`].
 */
enum BijmapStatus bijmap_problem_load(const char *path, struct BijmapProblem **out);

/**
 * Frees a problem handle. Null is a no-op.
 */
void bijmap_problem_free(struct BijmapProblem *problem);

/**
 * Number of mesh vertices in a problem, or 0 for null.
 */
uintptr_t bijmap_problem_vertex_count(const struct BijmapProblem *problem);

/**
 * Runs the solve the problem's mode asks for and stores a new map handle
 * in `out`; free it with [`bijmap_map_free`].
 */
enum BijmapStatus bijmap_solve(const struct BijmapProblem *problem, struct BijmapMap **out);

/**
 * Loads vertex images from an OBJ/OFF written by the solver, checked
 * against the problem's mesh. Stores a new map handle in `out`.
 */
enum BijmapStatus bijmap_map_load(const struct BijmapProblem *problem,
                                  const char *path,
                                  struct BijmapMap **out);

/**
 * Frees a map handle. Null is a no-op.
 */
void bijmap_map_free(struct BijmapMap *map);

/**
 * Number of vertices in a map, or 0 for null.
 */
uintptr_t bijmap_map_vertex_count(const struct BijmapMap *map);

/**
 * Copies the vertex images as interleaved x, y pairs into `out_xy`, which
 * must hold at least `2 * vertex_count` doubles.
 */
enum BijmapStatus bijmap_map_images(const struct BijmapMap *map, double *out_xy, uintptr_t len);

/**
 * Dirichlet energy of a map.
 */
enum BijmapStatus bijmap_map_dirichlet_energy(const struct BijmapMap *map, double *out);

/**
 * Runs one certifier on a map against the problem's polygon and
 * assignment. `out_certified` receives 1 when the certificate is granted,
 * 0 when it is refuted; a non-Ok status means the check could not run.
 */
enum BijmapStatus bijmap_certify(const struct BijmapProblem *problem,
                                 const struct BijmapMap *map,
                                 enum BijmapCondition condition,
                                 uint8_t *out_certified);

/**
 * Boundary degree of the map at the target point (x, y).
 */
enum BijmapStatus bijmap_boundary_degree(const struct BijmapMap *map,
                                         double x,
                                         double y,
                                         uint64_t seed,
                                         int64_t *out);

/**
 * Number of distinct pre-images of the target point (x, y).
 */
enum BijmapStatus bijmap_preimage_count(const struct BijmapMap *map,
                                        double x,
                                        double y,
                                        uintptr_t *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BIJMAP_H */
