#ifndef JOINTPATH_H
#define JOINTPATH_H

/* Generated by cbindgen from jointpath-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status code returned by every fallible call.
typedef enum JpStatus {
  // Success.
  JP_STATUS_OK = 0,
  // A required pointer argument was null.
  JP_STATUS_NULL_POINTER = 1,
  // A string argument was not valid UTF-8.
  JP_STATUS_INVALID_UTF8 = 2,
  // An argument was out of range or otherwise invalid.
  JP_STATUS_INVALID_ARGUMENT = 3,
  // JSON input failed to parse or validate.
  JP_STATUS_PARSE_ERROR = 4,
  // The requested index does not exist.
  JP_STATUS_INDEX_OUT_OF_RANGE = 5,
  // A via-point has no inverse-kinematics solution, so no path exists.
  JP_STATUS_DISCONNECTED_LAYER = 6,
  // An internal invariant failed (a panic was caught at the boundary).
  JP_STATUS_INTERNAL_ERROR = 7,
} JpStatus;

// Opaque robot geometry handle.
typedef struct JpGeometry JpGeometry;

// Opaque planned trajectory: one solution layer per via-point.
typedef struct JpPlan JpPlan;

// Opaque set of inverse-kinematics solutions for one pose.
typedef struct JpSolutions JpSolutions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Creates the bundled myCobot-280 geometry. Never fails.
struct JpGeometry *jp_geometry_default(void);

// Parses a geometry JSON document (same schema as the bundled
// `geometry/mycobot280.json`).
//
// # Safety
// `json` must be a valid NUL-terminated string and `out` a valid pointer.
enum JpStatus jp_geometry_from_json(const char *json, struct JpGeometry **out);

// Releases a geometry handle. Null is ignored.
//
// # Safety
// `geometry` must come from this library and not have been freed before.
void jp_geometry_free(struct JpGeometry *geometry);

// Forward kinematics: joint angles to end-effector pose and wrist center.
//
// Any of the out-pointers may be null to skip that output.
//
// # Safety
// `angles` must point to 6 doubles; non-null out-pointers must point to
// buffers of 3 (`out_position`, `out_wrist`) or 9 (`out_orientation`)
// doubles.
enum JpStatus jp_forward_kinematics(const struct JpGeometry *geometry,
                                    const double *angles,
                                    double *out_position,
                                    double *out_orientation,
                                    double *out_wrist);

// Solves the inverse kinematics for one pose, producing the canonical
// ordered solution set (possibly empty).
//
// # Safety
// `position` points to 3 doubles, `orientation` to 9 doubles (row-major),
// `out` must be valid.
enum JpStatus jp_solve_ik(const struct JpGeometry *geometry,
                          const double *position,
                          const double *orientation,
                          struct JpSolutions **out);

// Number of solutions in the set.
//
// # Safety
// `solutions` must be a live handle from [`jp_solve_ik`].
size_t jp_solutions_count(const struct JpSolutions *solutions);

// True when the pose sat on a wrist singularity.
//
// # Safety
// `solutions` must be a live handle from [`jp_solve_ik`].
bool jp_solutions_wrist_singular(const struct JpSolutions *solutions);

// Copies solution `index` into `out_angles[6]`.
//
// # Safety
// `solutions` must be live and `out_angles` point to 6 doubles.
enum JpStatus jp_solutions_get(const struct JpSolutions *solutions,
                               size_t index,
                               double *out_angles);

// Releases a solution set handle. Null is ignored.
//
// # Safety
// `solutions` must come from this library and not have been freed before.
void jp_solutions_free(struct JpSolutions *solutions);

// Plans a trajectory from a scenario description.
//
// `scenario` is either a bundled name (`test1`..`test7`) or a full scenario
// JSON document (the same schema as `scenarios/*.json`).
//
// # Safety
// `geometry` live handle, `scenario` NUL-terminated string, `out` valid.
enum JpStatus jp_plan_scenario(const struct JpGeometry *geometry,
                               const char *scenario,
                               struct JpPlan **out);

// Number of via-point layers in the plan.
//
// # Safety
// `plan` must be a live handle from [`jp_plan_scenario`].
size_t jp_plan_layer_count(const struct JpPlan *plan);

// Number of IK solutions at one layer.
//
// # Safety
// `plan` live handle; `out_count` valid pointer.
enum JpStatus jp_plan_solution_count(const struct JpPlan *plan, size_t layer, size_t *out_count);

// Minimum-cost joint sequence through the plan's layered solution graph.
//
// `cost_id` is `"f1"`..`"f6"`. On success writes the total cost to
// `out_total_cost` and, when `out_angles` is non-null, one 6-angle row per
// layer (a buffer of `6 * jp_plan_layer_count(plan)` doubles).
//
// # Safety
// Handles must be live; `out_angles`, when non-null, must be large enough.
enum JpStatus jp_plan_shortest_path(const struct JpPlan *plan,
                                    const struct JpGeometry *geometry,
                                    const char *cost_id,
                                    double *out_total_cost,
                                    double *out_angles);

// Releases a plan handle. Null is ignored.
//
// # Safety
// `plan` must come from this library and not have been freed before.
void jp_plan_free(struct JpPlan *plan);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* JOINTPATH_H */
