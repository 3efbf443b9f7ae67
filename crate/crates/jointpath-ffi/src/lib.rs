//! C ABI for the jointpath motion-planning toolkit.
//!
//! All objects cross the boundary as opaque handles created and destroyed by
//! this library; every fallible call returns a [`JpStatus`] and writes its
//! results through out-pointers. Orientations are 3x3 row-major `double[9]`
//! with columns l, m, n; positions are `double[3]` in millimeters; joint
//! angles are `double[6]` in radians.
//!
//! The companion header `include/jointpath.h` is generated by cbindgen at
//! build time and committed.

use jointpath::cli::DEFAULT_T_STEPS;
use jointpath::geometry::RobotGeometry;
use jointpath::ik::inverse_kinematics;
use jointpath::kinematics::{forward_kinematics, JointConfig, Pose};
use jointpath::pathopt::{build_graph, shortest_path, CostKind, CostSpec, PathError};
use jointpath::trajectory::{bundled, plan_trajectory, MotionProfile, Scenario, SolutionLayer};
use nalgebra_glue::{matrix_from_row_major, matrix_to_row_major};
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};

mod nalgebra_glue {
    pub use jointpath::nalgebra::{Matrix3, Vector3};

    pub fn matrix_from_row_major(data: &[f64; 9]) -> Matrix3<f64> {
        Matrix3::from_row_slice(data)
    }

    pub fn matrix_to_row_major(m: &Matrix3<f64>) -> [f64; 9] {
        let mut out = [0.0; 9];
        for r in 0..3 {
            for c in 0..3 {
                out[r * 3 + c] = m[(r, c)];
            }
        }
        out
    }
}

/// Status code returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JpStatus {
    /// Success.
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// An argument was out of range or otherwise invalid.
    InvalidArgument = 3,
    /// JSON input failed to parse or validate.
    ParseError = 4,
    /// The requested index does not exist.
    IndexOutOfRange = 5,
    /// A via-point has no inverse-kinematics solution, so no path exists.
    DisconnectedLayer = 6,
    /// An internal invariant failed (a panic was caught at the boundary).
    InternalError = 7,
}

/// Opaque robot geometry handle.
pub struct JpGeometry {
    inner: RobotGeometry,
}

/// Opaque set of inverse-kinematics solutions for one pose.
pub struct JpSolutions {
    angles: Vec<[f64; 6]>,
    wrist_singular: bool,
}

/// Opaque planned trajectory: one solution layer per via-point.
pub struct JpPlan {
    layers: Vec<SolutionLayer>,
}

fn guard<F: FnOnce() -> JpStatus>(f: F) -> JpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => JpStatus::InternalError,
    }
}

unsafe fn cstr<'a>(ptr: *const c_char) -> Result<&'a str, JpStatus> {
    if ptr.is_null() {
        return Err(JpStatus::NullPointer);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| JpStatus::InvalidUtf8)
}

/// Creates the bundled myCobot-280 geometry. Never fails.
#[no_mangle]
pub extern "C" fn jp_geometry_default() -> *mut JpGeometry {
    Box::into_raw(Box::new(JpGeometry { inner: RobotGeometry::mycobot280() }))
}

/// Parses a geometry JSON document (same schema as the bundled
/// `geometry/mycobot280.json`).
///
/// # Safety
/// `json` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn jp_geometry_from_json(
    json: *const c_char,
    out: *mut *mut JpGeometry,
) -> JpStatus {
    guard(|| {
        if out.is_null() {
            return JpStatus::NullPointer;
        }
        let text = match cstr(json) {
            Ok(t) => t,
            Err(status) => return status,
        };
        match RobotGeometry::from_json_str(text) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(JpGeometry { inner }));
                JpStatus::Ok
            }
            Err(_) => JpStatus::ParseError,
        }
    })
}

/// Releases a geometry handle. Null is ignored.
///
/// # Safety
/// `geometry` must come from this library and not have been freed before.
#[no_mangle]
pub unsafe extern "C" fn jp_geometry_free(geometry: *mut JpGeometry) {
    if !geometry.is_null() {
        drop(Box::from_raw(geometry));
    }
}

/// Forward kinematics: joint angles to end-effector pose and wrist center.
///
/// Any of the out-pointers may be null to skip that output.
///
/// # Safety
/// `angles` must point to 6 doubles; non-null out-pointers must point to
/// buffers of 3 (`out_position`, `out_wrist`) or 9 (`out_orientation`)
/// doubles.
#[no_mangle]
pub unsafe extern "C" fn jp_forward_kinematics(
    geometry: *const JpGeometry,
    angles: *const f64,
    out_position: *mut f64,
    out_orientation: *mut f64,
    out_wrist: *mut f64,
) -> JpStatus {
    guard(|| {
        if geometry.is_null() || angles.is_null() {
            return JpStatus::NullPointer;
        }
        let geom = &(*geometry).inner;
        let q = JointConfig::new(std::slice::from_raw_parts(angles, 6).try_into().unwrap());
        let (pose, wrist) = forward_kinematics(geom, &q);
        if !out_position.is_null() {
            for (i, v) in [pose.position.x, pose.position.y, pose.position.z].iter().enumerate() {
                *out_position.add(i) = *v;
            }
        }
        if !out_orientation.is_null() {
            for (i, v) in matrix_to_row_major(&pose.orientation).iter().enumerate() {
                *out_orientation.add(i) = *v;
            }
        }
        if !out_wrist.is_null() {
            for (i, v) in [wrist.0.x, wrist.0.y, wrist.0.z].iter().enumerate() {
                *out_wrist.add(i) = *v;
            }
        }
        JpStatus::Ok
    })
}

/// Solves the inverse kinematics for one pose, producing the canonical
/// ordered solution set (possibly empty).
///
/// # Safety
/// `position` points to 3 doubles, `orientation` to 9 doubles (row-major),
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn jp_solve_ik(
    geometry: *const JpGeometry,
    position: *const f64,
    orientation: *const f64,
    out: *mut *mut JpSolutions,
) -> JpStatus {
    guard(|| {
        if geometry.is_null() || position.is_null() || orientation.is_null() || out.is_null() {
            return JpStatus::NullPointer;
        }
        let geom = &(*geometry).inner;
        let p = std::slice::from_raw_parts(position, 3);
        let r: [f64; 9] = std::slice::from_raw_parts(orientation, 9).try_into().unwrap();
        let pose = Pose::new(
            nalgebra_glue::Vector3::new(p[0], p[1], p[2]),
            matrix_from_row_major(&r),
        );
        if !pose.is_orthonormal(1e-6) {
            return JpStatus::InvalidArgument;
        }
        let set = inverse_kinematics(&pose, geom);
        *out = Box::into_raw(Box::new(JpSolutions {
            angles: set.solutions.iter().map(|q| q.angles()).collect(),
            wrist_singular: set.diagnostics.wrist_singular,
        }));
        JpStatus::Ok
    })
}

/// Number of solutions in the set.
///
/// # Safety
/// `solutions` must be a live handle from [`jp_solve_ik`].
#[no_mangle]
pub unsafe extern "C" fn jp_solutions_count(solutions: *const JpSolutions) -> usize {
    if solutions.is_null() {
        return 0;
    }
    (*solutions).angles.len()
}

/// True when the pose sat on a wrist singularity.
///
/// # Safety
/// `solutions` must be a live handle from [`jp_solve_ik`].
#[no_mangle]
pub unsafe extern "C" fn jp_solutions_wrist_singular(solutions: *const JpSolutions) -> bool {
    if solutions.is_null() {
        return false;
    }
    (*solutions).wrist_singular
}

/// Copies solution `index` into `out_angles[6]`.
///
/// # Safety
/// `solutions` must be live and `out_angles` point to 6 doubles.
#[no_mangle]
pub unsafe extern "C" fn jp_solutions_get(
    solutions: *const JpSolutions,
    index: usize,
    out_angles: *mut f64,
) -> JpStatus {
    guard(|| {
        if solutions.is_null() || out_angles.is_null() {
            return JpStatus::NullPointer;
        }
        let set = &*solutions;
        let Some(angles) = set.angles.get(index) else {
            return JpStatus::IndexOutOfRange;
        };
        for (i, v) in angles.iter().enumerate() {
            *out_angles.add(i) = *v;
        }
        JpStatus::Ok
    })
}

/// Releases a solution set handle. Null is ignored.
///
/// # Safety
/// `solutions` must come from this library and not have been freed before.
#[no_mangle]
pub unsafe extern "C" fn jp_solutions_free(solutions: *mut JpSolutions) {
    if !solutions.is_null() {
        drop(Box::from_raw(solutions));
    }
}

/// Plans a trajectory from a scenario description.
///
/// `scenario` is either a bundled name (`test1`..`test7`) or a full scenario
/// JSON document (the same schema as `scenarios/*.json`).
///
/// # Safety
/// `geometry` live handle, `scenario` NUL-terminated string, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn jp_plan_scenario(
    geometry: *const JpGeometry,
    scenario: *const c_char,
    out: *mut *mut JpPlan,
) -> JpStatus {
    guard(|| {
        if geometry.is_null() || out.is_null() {
            return JpStatus::NullPointer;
        }
        let text = match cstr(scenario) {
            Ok(t) => t,
            Err(status) => return status,
        };
        let parsed = if let Some(s) = bundled::by_name(text, DEFAULT_T_STEPS, MotionProfile::Uniform)
        {
            Ok(s)
        } else {
            Scenario::from_json_str(text)
        };
        let scenario = match parsed {
            Ok(s) => s,
            Err(_) => return JpStatus::ParseError,
        };
        match plan_trajectory(&scenario, &(*geometry).inner) {
            Ok(layers) => {
                *out = Box::into_raw(Box::new(JpPlan { layers }));
                JpStatus::Ok
            }
            Err(_) => JpStatus::InvalidArgument,
        }
    })
}

/// Number of via-point layers in the plan.
///
/// # Safety
/// `plan` must be a live handle from [`jp_plan_scenario`].
#[no_mangle]
pub unsafe extern "C" fn jp_plan_layer_count(plan: *const JpPlan) -> usize {
    if plan.is_null() {
        return 0;
    }
    (*plan).layers.len()
}

/// Number of IK solutions at one layer.
///
/// # Safety
/// `plan` live handle; `out_count` valid pointer.
#[no_mangle]
pub unsafe extern "C" fn jp_plan_solution_count(
    plan: *const JpPlan,
    layer: usize,
    out_count: *mut usize,
) -> JpStatus {
    guard(|| {
        if plan.is_null() || out_count.is_null() {
            return JpStatus::NullPointer;
        }
        let plan_ref = &*plan;
        let Some(l) = plan_ref.layers.get(layer) else {
            return JpStatus::IndexOutOfRange;
        };
        *out_count = l.solutions.solutions.len();
        JpStatus::Ok
    })
}

/// Minimum-cost joint sequence through the plan's layered solution graph.
///
/// `cost_id` is `"f1"`..`"f6"`. On success writes the total cost to
/// `out_total_cost` and, when `out_angles` is non-null, one 6-angle row per
/// layer (a buffer of `6 * jp_plan_layer_count(plan)` doubles).
///
/// # Safety
/// Handles must be live; `out_angles`, when non-null, must be large enough.
#[no_mangle]
pub unsafe extern "C" fn jp_plan_shortest_path(
    plan: *const JpPlan,
    geometry: *const JpGeometry,
    cost_id: *const c_char,
    out_total_cost: *mut f64,
    out_angles: *mut f64,
) -> JpStatus {
    guard(|| {
        if plan.is_null() || geometry.is_null() || out_total_cost.is_null() {
            return JpStatus::NullPointer;
        }
        let kind = match cstr(cost_id).map(|s| s.parse::<CostKind>()) {
            Ok(Ok(kind)) => kind,
            Ok(Err(_)) => return JpStatus::InvalidArgument,
            Err(status) => return status,
        };
        let graph = match build_graph(&(*plan).layers) {
            Ok(graph) => graph,
            Err(PathError::DisconnectedLayer { .. }) => return JpStatus::DisconnectedLayer,
            Err(_) => return JpStatus::InvalidArgument,
        };
        let spec = CostSpec::new(kind);
        let result = match shortest_path(&graph, &spec, &(*geometry).inner) {
            Ok(result) => result,
            Err(PathError::DisconnectedLayer { .. }) => return JpStatus::DisconnectedLayer,
            Err(_) => return JpStatus::InvalidArgument,
        };
        *out_total_cost = result.total_cost;
        if !out_angles.is_null() {
            for (layer, config) in result.configs(&graph).iter().enumerate() {
                for (j, v) in config.angles().iter().enumerate() {
                    *out_angles.add(layer * 6 + j) = *v;
                }
            }
        }
        JpStatus::Ok
    })
}

/// Releases a plan handle. Null is ignored.
///
/// # Safety
/// `plan` must come from this library and not have been freed before.
#[no_mangle]
pub unsafe extern "C" fn jp_plan_free(plan: *mut JpPlan) {
    if !plan.is_null() {
        drop(Box::from_raw(plan));
    }
}
