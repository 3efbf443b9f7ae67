//! Enumeration of all real inverse-kinematics solutions for a target pose.
//!
//! The wrist-center system is solved by case split on the hand z-axis
//! component `n3`: closed forms for the vertical (`|n3| = 1`) and horizontal
//! (`n3 = 0`) orientations, and plane/sphere circle parametrization with 1-D
//! root isolation plus Newton polishing otherwise. Joint angles then follow
//! from a triangular solve with branch enumeration. Every candidate is
//! verified against forward kinematics before it is emitted; rejected
//! branches are recorded in the diagnostics instead of being silently
//! dropped.

use crate::geometry::RobotGeometry;
use crate::kinematics::{
    dh_transform, forward_kinematics, wrap_angle, JointConfig, Pose, WristCenter,
};
use nalgebra::{Matrix3, Vector2, Vector3};
use std::f64::consts::PI;
use thiserror::Error;

/// Consistency tolerance for the derived `(sin, cos)` pairs.
pub const UNIT_CIRCLE_TOL: f64 = 1e-6;
/// Forward-kinematics position residual for accepting a solution [mm].
pub const FK_POS_TOL: f64 = 1e-6;
/// Forward-kinematics orientation residual (Frobenius) for accepting a solution.
pub const FK_ORI_TOL: f64 = 1e-9;
/// Two solutions closer than this in every joint are duplicates [rad].
pub const DEDUP_TOL: f64 = 1e-6;
/// Nondimensionalized wrist-center residual bound.
pub const WRIST_RESIDUAL_TOL: f64 = 1e-8;
/// Orientation components this close to a closed-form case are snapped to it.
pub const CASE_EPS: f64 = 1e-9;
/// Below this norm a direction is treated as degenerate.
pub const AXIS_EPS: f64 = 1e-9;

const CIRCLE_SAMPLES: usize = 720;
const BISECT_TOL: f64 = 1e-12;
const NEWTON_MAX_ITER: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum IkError {
    /// `p1 = p2 = 0` with a vertical hand axis: the wrist-center system is
    /// unsatisfiable for every joint assignment.
    #[error("degenerate pose: p1 = p2 = 0 with |n3| = 1 has no wrist center")]
    DegeneratePose,
}

/// Why a candidate branch was discarded during the triangular solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RejectReason {
    /// `s6^2 + c6^2` from the hand-frame offset deviates from 1.
    HandFrameInconsistent,
    /// `s1^2 + c1^2` derived from the orientation deviates from 1.
    BaseAngleInconsistent,
    /// `|cos(theta3)|` exceeds 1: wrist center outside the reachable annulus.
    ElbowOutOfReach,
    /// The shoulder line misses the unit circle.
    ShoulderLineMiss,
    /// `|cos(theta2 + theta3 + theta4)|` exceeds 1.
    WristAngleOutOfRange,
    /// Wrist center closer to the base axis than the lateral offset d4.
    LateralOffsetUnreachable,
    /// Assembled candidate failed forward-kinematics verification.
    FkMismatch,
}

/// One rejected branch, attributed to the wrist-center candidate it came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rejection {
    pub wrist_index: usize,
    pub reason: RejectReason,
}

#[derive(Debug, Clone, Default)]
pub struct IkDiagnostics {
    /// Wrist-center candidates that passed the residual filter.
    pub wrist_center_count: usize,
    /// Pose was degenerate (no wrist center can exist).
    pub degenerate_pose: bool,
    /// At least one wrist center had a degenerate wrist axis (`v = n3 = 0`).
    pub wrist_singular: bool,
    pub rejections: Vec<Rejection>,
}

/// All real inverse-kinematics solutions for one pose, FK-verified,
/// deduplicated and in canonical order.
#[derive(Debug, Clone)]
pub struct IkSolutionSet {
    pub pose: Pose,
    pub solutions: Vec<JointConfig>,
    pub diagnostics: IkDiagnostics,
}

/// Result of the triangular joint-angle solve for one wrist center.
#[derive(Debug, Clone, Default)]
pub struct JointSolve {
    pub solutions: Vec<JointConfig>,
    pub rejections: Vec<RejectReason>,
    /// Wrist axis was degenerate; solutions came from the remainder
    /// extraction path.
    pub singular: bool,
}

/// Residuals of the wrist-center system, nondimensionalized so that all three
/// are O(1): the plane equation by d5, the sphere by d5^2, the offset
/// equation by d5^4.
pub fn wrist_residuals(
    wrist: &Vector3<f64>,
    position: &Vector3<f64>,
    n: &Vector3<f64>,
    geom: &RobotGeometry,
) -> [f64; 3] {
    let lk = &geom.links;
    let (x, y, z) = (wrist.x, wrist.y, wrist.z);
    let (p1, p2, p3) = (position.x, position.y, position.z);
    let (n1, n2, n3) = (n.x, n.y, n.z);
    let (dx, dy, dz) = (p1 - x, p2 - y, p3 - z);

    let e1 = n1 * dx + n2 * dy + n3 * dz - lk.d6;
    let e2 = dx * dx + dy * dy + dz * dz - (lk.d5 * lk.d5 + lk.d6 * lk.d6);
    let g = (n1 * n2 * x + (1.0 - n1 * n1) * y) * dx
        - (n1 * n2 * y + (1.0 - n2 * n2) * x) * dy
        - n3 * (n1 * y - n2 * x) * dz;
    let h = lk.d4 * lk.d4 * (lk.d5 * lk.d5 * n3 * n3 + (n2 * dx - n1 * dy).powi(2));
    let e3 = g * g - h;

    let d5 = lk.d5;
    [e1 / d5, e2 / (d5 * d5), e3 / d5.powi(4)]
}

/// Analytic Jacobian of [`wrist_residuals`] with respect to the wrist center.
fn wrist_residual_jacobian(
    wrist: &Vector3<f64>,
    position: &Vector3<f64>,
    n: &Vector3<f64>,
    geom: &RobotGeometry,
) -> Matrix3<f64> {
    let lk = &geom.links;
    let (x, y, z) = (wrist.x, wrist.y, wrist.z);
    let (p1, p2, p3) = (position.x, position.y, position.z);
    let (n1, n2, n3) = (n.x, n.y, n.z);
    let (dx, dy, dz) = (p1 - x, p2 - y, p3 - z);

    let g = (n1 * n2 * x + (1.0 - n1 * n1) * y) * dx
        - (n1 * n2 * y + (1.0 - n2 * n2) * x) * dy
        - n3 * (n1 * y - n2 * x) * dz;
    let gx = n1 * n2 * dx - (n1 * n2 * x + (1.0 - n1 * n1) * y) - (1.0 - n2 * n2) * dy
        + n3 * n2 * dz;
    let gy = (1.0 - n1 * n1) * dx - n1 * n2 * dy + (n1 * n2 * y + (1.0 - n2 * n2) * x)
        - n3 * n1 * dz;
    let gz = n3 * (n1 * y - n2 * x);
    let k = n2 * dx - n1 * dy;
    let hx = lk.d4 * lk.d4 * 2.0 * k * (-n2);
    let hy = lk.d4 * lk.d4 * 2.0 * k * n1;

    let d5 = lk.d5;
    let d52 = d5 * d5;
    let d54 = d52 * d52;
    Matrix3::new(
        -n1 / d5,
        -n2 / d5,
        -n3 / d5,
        -2.0 * dx / d52,
        -2.0 * dy / d52,
        -2.0 * dz / d52,
        (2.0 * g * gx - hx) / d54,
        (2.0 * g * gy - hy) / d54,
        (2.0 * g * gz) / d54,
    )
}

fn max_abs3(r: &[f64; 3]) -> f64 {
    r.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
}

/// Damped Newton iteration on the full wrist-center system.
fn polish_wrist_center(
    mut wrist: Vector3<f64>,
    position: &Vector3<f64>,
    n: &Vector3<f64>,
    geom: &RobotGeometry,
) -> Vector3<f64> {
    for _ in 0..NEWTON_MAX_ITER {
        let res = wrist_residuals(&wrist, position, n, geom);
        let base = max_abs3(&res);
        if base < 1e-14 {
            break;
        }
        let jac = wrist_residual_jacobian(&wrist, position, n, geom);
        let rhs = -Vector3::new(res[0], res[1], res[2]);
        let Some(step) = jac.lu().solve(&rhs) else {
            break;
        };
        let mut t = 1.0;
        let mut improved = false;
        for _ in 0..30 {
            let cand = wrist + step * t;
            if max_abs3(&wrist_residuals(&cand, position, n, geom)) < base {
                wrist = cand;
                improved = true;
                break;
            }
            t *= 0.5;
        }
        if !improved {
            break;
        }
    }
    wrist
}

fn dedup_and_sort_points(mut points: Vec<Vector3<f64>>) -> Vec<Vector3<f64>> {
    let mut out: Vec<Vector3<f64>> = Vec::with_capacity(points.len());
    points.sort_by(|a, b| {
        let ka = [a.x, a.y, a.z].map(|v| (v / 1e-9).round() as i64);
        let kb = [b.x, b.y, b.z].map(|v| (v / 1e-9).round() as i64);
        ka.cmp(&kb)
    });
    for p in points {
        if !out.iter().any(|q| (p - q).amax() < 1e-6) {
            out.push(p);
        }
    }
    out
}

/// Quadratic roots of `aa x^2 + bb x + cc = 0`, real ones only.
fn quadratic_roots(aa: f64, bb: f64, cc: f64) -> Vec<f64> {
    let disc = bb * bb - 4.0 * aa * cc;
    if disc < 0.0 {
        return Vec::new();
    }
    let sq = disc.sqrt();
    vec![(-bb + sq) / (2.0 * aa), (-bb - sq) / (2.0 * aa)]
}

/// Closed form for a vertical hand axis (`n` snapped to `(0, 0, sign)`).
///
/// Both signs of the `d4 d5` offset and both `z = p3 -/+ d6` layers are
/// enumerated; the residual filter against the snapped system keeps the
/// consistent ones.
fn wrist_centers_vertical(
    position: &Vector3<f64>,
    n3_sign: f64,
    geom: &RobotGeometry,
) -> Result<Vec<Vector3<f64>>, IkError> {
    let lk = &geom.links;
    let (p1, p2, p3) = (position.x, position.y, position.z);
    if p1 * p1 + p2 * p2 < AXIS_EPS * AXIS_EPS {
        return Err(IkError::DegeneratePose);
    }
    let n_snap = Vector3::new(0.0, 0.0, n3_sign);
    let mut raw = Vec::new();
    for sign in [1.0, -1.0] {
        let k = sign * lk.d4 * lk.d5;
        // y p1 - x p2 = k intersected with (p1-x)^2 + (p2-y)^2 = d5^2,
        // eliminating whichever of y or x has the better-conditioned pivot.
        if p1.abs() >= p2.abs() {
            let aa = 1.0 + p2 * p2 / (p1 * p1);
            let bb = -2.0 * (p2 * p2 / p1 - k * p2 / (p1 * p1) + p1);
            let cc = -lk.d5 * lk.d5 + k * k / (p1 * p1) + p1 * p1 - 2.0 * k * p2 / p1 + p2 * p2;
            for x in quadratic_roots(aa, bb, cc) {
                let y = (k + x * p2) / p1;
                for z_sign in [1.0, -1.0] {
                    raw.push(Vector3::new(x, y, p3 - z_sign * lk.d6));
                }
            }
        } else {
            let aa = 1.0 + p1 * p1 / (p2 * p2);
            let bb = -2.0 * (p1 * p1 / p2 + k * p1 / (p2 * p2) + p2);
            let cc = -lk.d5 * lk.d5 + k * k / (p2 * p2) + p2 * p2 + 2.0 * k * p1 / p2 + p1 * p1;
            for y in quadratic_roots(aa, bb, cc) {
                let x = (y * p1 - k) / p2;
                for z_sign in [1.0, -1.0] {
                    raw.push(Vector3::new(x, y, p3 - z_sign * lk.d6));
                }
            }
        }
    }
    raw.retain(|w| max_abs3(&wrist_residuals(w, position, &n_snap, geom)) < WRIST_RESIDUAL_TOL);
    Ok(dedup_and_sort_points(raw))
}

/// Closed form for a horizontal hand axis (`n3` snapped to zero).
fn wrist_centers_horizontal(
    position: &Vector3<f64>,
    n: &Vector3<f64>,
    geom: &RobotGeometry,
) -> Vec<Vector3<f64>> {
    let lk = &geom.links;
    let planar = (n.x * n.x + n.y * n.y).sqrt();
    let n_snap = Vector3::new(n.x / planar, n.y / planar, 0.0);
    let mut raw = Vec::new();
    for z_sign in [1.0, -1.0] {
        raw.push(Vector3::new(
            position.x - n_snap.x * lk.d6,
            position.y - n_snap.y * lk.d6,
            position.z - z_sign * lk.d5,
        ));
    }
    raw.retain(|w| max_abs3(&wrist_residuals(w, position, &n_snap, geom)) < WRIST_RESIDUAL_TOL);
    dedup_and_sort_points(raw)
}

/// General orientation: the plane and sphere equations intersect in a circle
/// of radius d5 around `p - d6 n`; the remaining equation becomes a scalar
/// function of the circle angle whose roots are isolated by dense sampling
/// and bisection, then polished on the full system.
fn wrist_centers_general(
    position: &Vector3<f64>,
    n: &Vector3<f64>,
    geom: &RobotGeometry,
) -> Vec<Vector3<f64>> {
    let lk = &geom.links;
    let center = position - n * lk.d6;
    let planar = (n.x * n.x + n.y * n.y).sqrt();
    let e1 = Vector3::new(n.y / planar, -n.x / planar, 0.0);
    let e2 = n.cross(&e1);
    let point_at = |phi: f64| -> Vector3<f64> {
        center + (e1 * phi.cos() + e2 * phi.sin()) * lk.d5
    };
    let g = |phi: f64| -> f64 { wrist_residuals(&point_at(phi), position, n, geom)[2] };

    let step = 2.0 * PI / CIRCLE_SAMPLES as f64;
    let samples: Vec<f64> = (0..CIRCLE_SAMPLES).map(|i| g(i as f64 * step)).collect();
    let mut roots = Vec::new();
    for i in 0..CIRCLE_SAMPLES {
        let a = i as f64 * step;
        let fa = samples[i];
        let fb = samples[(i + 1) % CIRCLE_SAMPLES];
        if fa == 0.0 {
            roots.push(a);
            continue;
        }
        if fa * fb < 0.0 {
            let (mut lo, mut hi, mut flo) = (a, a + step, fa);
            while hi - lo > BISECT_TOL {
                let mid = 0.5 * (lo + hi);
                let fm = g(mid);
                if flo * fm <= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                    flo = fm;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
    }

    let mut raw: Vec<Vector3<f64>> = roots
        .into_iter()
        .map(|phi| polish_wrist_center(point_at(phi), position, n, geom))
        .collect();
    raw.retain(|w| max_abs3(&wrist_residuals(w, position, n, geom)) < WRIST_RESIDUAL_TOL);
    dedup_and_sort_points(raw)
}

/// All real wrist centers for a pose.
///
/// Dispatches on `n3`: within [`CASE_EPS`] of `+-1` or `0` the corresponding
/// closed form is used (with the hand axis snapped to the exact case), the
/// circle solver otherwise. An empty list means the system has no real
/// solution; [`IkError::DegeneratePose`] flags the unsatisfiable
/// `p1 = p2 = 0` vertical configuration.
pub fn solve_wrist_center(
    pose: &Pose,
    geom: &RobotGeometry,
) -> Result<Vec<WristCenter>, IkError> {
    let n = pose.n();
    let points = if (n.z.abs() - 1.0).abs() < CASE_EPS {
        wrist_centers_vertical(&pose.position, n.z.signum(), geom)?
    } else if n.z.abs() < CASE_EPS {
        wrist_centers_horizontal(&pose.position, &n, geom)
    } else {
        wrist_centers_general(&pose.position, &n, geom)
    };
    Ok(points.into_iter().map(WristCenter).collect())
}

fn fk_verifies(geom: &RobotGeometry, q: &JointConfig, pose: &Pose) -> bool {
    let (fk_pose, _) = forward_kinematics(geom, q);
    (fk_pose.position - pose.position).norm() < FK_POS_TOL
        && (fk_pose.orientation - pose.orientation).norm() < FK_ORI_TOL
}

/// `(sin, cos)` pairs solving `A cos(t) + B sin(t) = E` on the unit circle.
fn line_circle_intersection(a: f64, b: f64, e: f64) -> Option<[(f64, f64); 2]> {
    let r = a.hypot(b);
    if r < 1e-12 || e.abs() > r * (1.0 + CASE_EPS) {
        return None;
    }
    let phi0 = b.atan2(a);
    let delta = (e / r).clamp(-1.0, 1.0).acos();
    let t1 = phi0 + delta;
    let t2 = phi0 - delta;
    Some([(t1.sin(), t1.cos()), (t2.sin(), t2.cos())])
}

/// Elbow candidates `(theta2, theta3)` for a wrist center whose `cos(theta3)`
/// is already known to be in range.
fn elbow_candidates(
    c3: f64,
    z: f64,
    geom: &RobotGeometry,
    rejections: &mut Vec<RejectReason>,
) -> Vec<(f64, f64)> {
    let lk = &geom.links;
    let mut out = Vec::new();
    for s3_sign in [1.0, -1.0] {
        let s3 = s3_sign * (1.0 - c3 * c3).max(0.0).sqrt();
        let theta3 = s3.atan2(c3);
        let a = lk.a2 + lk.a3 * c3;
        let b = -lk.a3 * s3;
        let e = z - lk.d1;
        match line_circle_intersection(a, b, e) {
            Some(pairs) => {
                for (s2, c2) in pairs {
                    out.push((s2.atan2(c2), theta3));
                }
            }
            None => rejections.push(RejectReason::ShoulderLineMiss),
        }
    }
    out
}

/// Rotation block of the fixed tail of a D-H row: `Rx(alpha) * Rz(delta)`.
fn fixed_block(row: &crate::geometry::DhRow) -> Matrix3<f64> {
    dh_transform(&crate::geometry::DhRow { a: 0.0, alpha: row.alpha, d: 0.0, delta: row.delta }, 0.0)
        .fixed_view::<3, 3>(0, 0)
        .into()
}

fn rot_z3(t: f64) -> Matrix3<f64> {
    let (s, c) = t.sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

/// Solve `Rz(t) * u = w` for `t`, using the planar part of `u`.
fn solve_rotation_left(u: &Vector3<f64>, w: &Vector2<f64>) -> Option<f64> {
    let den = u.x * u.x + u.y * u.y;
    if den < AXIS_EPS * AXIS_EPS {
        return None;
    }
    let c = (u.x * w.x + u.y * w.y) / den;
    let s = (-u.y * w.x + u.x * w.y) / den;
    Some(s.atan2(c))
}

/// Solve `v^t * Rz(t) = w^t` for `t`, using the planar part of `v`.
fn solve_rotation_right(v: &Vector3<f64>, w: &Vector2<f64>) -> Option<f64> {
    let den = v.x * v.x + v.y * v.y;
    if den < AXIS_EPS * AXIS_EPS {
        return None;
    }
    let c = (v.x * w.x + v.y * w.y) / den;
    let s = (v.y * w.x - v.x * w.y) / den;
    Some(s.atan2(c))
}

/// Degenerate-wrist path: with `v = n3 = 0` the orientation no longer pins
/// the base angle, so `theta1` comes from the wrist-center position instead
/// (two lateral branches), and `(theta4, theta5)` are extracted exactly from
/// the orientation remainder.
fn solve_joints_singular(
    pose: &Pose,
    wrist: &Vector3<f64>,
    theta6: f64,
    geom: &RobotGeometry,
    result: &mut JointSolve,
) {
    let lk = &geom.links;
    let (x, y, z) = (wrist.x, wrist.y, wrist.z);

    let c3 = (x * x + y * y + (z - lk.d1).powi(2)
        - (lk.a2 * lk.a2 + lk.a3 * lk.a3 + lk.d4 * lk.d4))
        / (2.0 * lk.a2 * lk.a3);
    if c3.abs() > 1.0 + CASE_EPS {
        result.rejections.push(RejectReason::ElbowOutOfReach);
        return;
    }
    let c3 = c3.clamp(-1.0, 1.0);
    let radial2 = x * x + y * y - lk.d4 * lk.d4;
    if radial2 < -1e-9 {
        result.rejections.push(RejectReason::LateralOffsetUnreachable);
        return;
    }
    let radial = radial2.max(0.0).sqrt();

    // Fixed rotation tails of rows 4 and 5, and the frame-6 block.
    let x_block = fixed_block(&geom.dh[3]);
    let y_block = fixed_block(&geom.dh[4]);
    let b6 = fixed_block(&geom.dh[5]);
    let u = x_block * Vector3::z();
    let v = x_block.transpose() * Vector3::z();

    for r_sign in [1.0, -1.0] {
        let r = r_sign * radial;
        // (x, y) = Rz(theta1) * (-r, -d4)
        let theta1 = y.atan2(x) - (-lk.d4).atan2(-r);
        for s3_sign in [1.0, -1.0] {
            let s3 = s3_sign * (1.0 - c3 * c3).max(0.0).sqrt();
            let theta3 = s3.atan2(c3);
            // Linear system from the height and radial equations.
            let a = lk.a2 + lk.a3 * c3;
            let b = lk.a3 * s3;
            let det = a * a + b * b;
            let c2 = (a * (z - lk.d1) + b * r) / det;
            let s2 = (-b * (z - lk.d1) + a * r) / det;
            let theta2 = s2.atan2(c2);

            let mut r123: Matrix3<f64> = Matrix3::identity();
            for (i, t) in [theta1, theta2, theta3].iter().enumerate() {
                let m4 = dh_transform(&geom.dh[i], *t);
                let block: Matrix3<f64> = m4.fixed_view::<3, 3>(0, 0).into();
                r123 *= block;
            }
            // Remainder Rz(theta4) * X * Rz(theta5) * Y.
            let w: Matrix3<f64> = r123.transpose()
                * pose.orientation
                * b6.transpose()
                * rot_z3(theta6).transpose()
                * y_block.transpose();
            let Some(theta4) = solve_rotation_left(&u, &Vector2::new(w[(0, 2)], w[(1, 2)])) else {
                result.rejections.push(RejectReason::WristAngleOutOfRange);
                continue;
            };
            let Some(theta5) = solve_rotation_right(&v, &Vector2::new(w[(2, 0)], w[(2, 1)])) else {
                result.rejections.push(RejectReason::WristAngleOutOfRange);
                continue;
            };

            let q = JointConfig::new([theta1, theta2, theta3, theta4, theta5, theta6]);
            if fk_verifies(geom, &q, pose) {
                result.solutions.push(q);
            } else {
                result.rejections.push(RejectReason::FkMismatch);
            }
        }
    }
}

/// Triangular joint-angle solve for one wrist-center candidate, enumerating
/// every branch and keeping the FK-verified ones.
pub fn solve_joint_angles(
    pose: &Pose,
    wrist: &WristCenter,
    geom: &RobotGeometry,
) -> JointSolve {
    let lk = &geom.links;
    let mut result = JointSolve::default();
    let l = pose.l();
    let m = pose.m();
    let n = pose.n();
    let offset = wrist.0 - pose.position;

    let s6 = l.dot(&offset) / lk.d5;
    let c6 = m.dot(&offset) / lk.d5;
    let r6 = s6.hypot(c6);
    if (r6 * r6 - 1.0).abs() > UNIT_CIRCLE_TOL {
        result.rejections.push(RejectReason::HandFrameInconsistent);
        return result;
    }
    let (s6, c6) = (s6 / r6, c6 / r6);
    let theta6 = s6.atan2(c6);

    let v = l.z * c6 - m.z * s6;
    let axis_norm = v.hypot(n.z);
    if axis_norm < AXIS_EPS {
        result.singular = true;
        solve_joints_singular(pose, &wrist.0, theta6, geom, &mut result);
        finish(&mut result);
        return result;
    }

    let (x, y, z) = (wrist.0.x, wrist.0.y, wrist.0.z);
    let c3 = (x * x + y * y + (z - lk.d1).powi(2)
        - (lk.a2 * lk.a2 + lk.a3 * lk.a3 + lk.d4 * lk.d4))
        / (2.0 * lk.a2 * lk.a3);
    if c3.abs() > 1.0 + CASE_EPS {
        result.rejections.push(RejectReason::ElbowOutOfReach);
        return result;
    }
    let c3 = c3.clamp(-1.0, 1.0);

    for branch5 in [1.0, -1.0] {
        let s5 = branch5 * v / axis_norm;
        let c5 = branch5 * n.z / axis_norm;
        let theta5 = s5.atan2(c5);

        let s1 = c5 * (l.x * c6 - m.x * s6) - n.x * s5;
        let c1 = n.y * s5 - c5 * (l.y * c6 - m.y * s6);
        let r1 = s1.hypot(c1);
        if (r1 * r1 - 1.0).abs() > UNIT_CIRCLE_TOL {
            result.rejections.push(RejectReason::BaseAngleInconsistent);
            continue;
        }
        let theta1 = (s1 / r1).atan2(c1 / r1);

        let c234 = -(m.z * c6 + l.z * s6);
        if c234.abs() > 1.0 + CASE_EPS {
            result.rejections.push(RejectReason::WristAngleOutOfRange);
            continue;
        }
        let half4 = c234.clamp(-1.0, 1.0).acos();

        for (theta2, theta3) in elbow_candidates(c3, z, geom, &mut result.rejections) {
            for sign4 in [1.0, -1.0] {
                let theta4 = sign4 * half4 - theta2 - theta3;
                let q = JointConfig::new([theta1, theta2, theta3, theta4, theta5, theta6]);
                if fk_verifies(geom, &q, pose) {
                    result.solutions.push(q);
                } else {
                    result.rejections.push(RejectReason::FkMismatch);
                }
            }
        }
    }
    finish(&mut result);
    result
}

fn sort_key(q: &JointConfig) -> [i64; 6] {
    q.angles().map(|a| (a / 1e-9).round() as i64)
}

/// Wrapped per-joint distance, treating the branch cut as contiguous.
fn circle_close(a: &JointConfig, b: &JointConfig, tol: f64) -> bool {
    (0..6).all(|i| wrap_angle(a[i] - b[i]).abs() < tol)
}

fn dedup_sorted(solutions: &mut Vec<JointConfig>) {
    solutions.sort_by(|a, b| sort_key(a).cmp(&sort_key(b)));
    let mut out: Vec<JointConfig> = Vec::with_capacity(solutions.len());
    for q in solutions.iter() {
        if !out.iter().any(|u| circle_close(u, q, DEDUP_TOL)) {
            out.push(*q);
        }
    }
    *solutions = out;
}

fn finish(result: &mut JointSolve) {
    dedup_sorted(&mut result.solutions);
}

/// Union of the joint solutions over all wrist-center candidates,
/// deduplicated globally and canonically ordered. Degenerate and
/// no-solution poses yield an empty set plus diagnostics.
pub fn inverse_kinematics(pose: &Pose, geom: &RobotGeometry) -> IkSolutionSet {
    let mut diagnostics = IkDiagnostics::default();
    let wrists = match solve_wrist_center(pose, geom) {
        Ok(w) => w,
        Err(IkError::DegeneratePose) => {
            diagnostics.degenerate_pose = true;
            Vec::new()
        }
    };
    diagnostics.wrist_center_count = wrists.len();

    let mut solutions = Vec::new();
    for (idx, wrist) in wrists.iter().enumerate() {
        let branch = solve_joint_angles(pose, wrist, geom);
        diagnostics.wrist_singular |= branch.singular;
        diagnostics.rejections.extend(
            branch
                .rejections
                .into_iter()
                .map(|reason| Rejection { wrist_index: idx, reason }),
        );
        solutions.extend(branch.solutions);
    }
    dedup_sorted(&mut solutions);
    IkSolutionSet { pose: *pose, solutions, diagnostics }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::RobotGeometry;
    use nalgebra::Matrix3;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn geom() -> RobotGeometry {
        RobotGeometry::mycobot280()
    }

    fn identity_pose(p: [f64; 3]) -> Pose {
        Pose::new(Vector3::new(p[0], p[1], p[2]), Matrix3::identity())
    }

    fn random_config(rng: &mut StdRng) -> JointConfig {
        JointConfig::new(std::array::from_fn(|_| rng.gen_range(-PI..PI)))
    }

    #[test]
    fn degenerate_on_axis() {
        let err = solve_wrist_center(&identity_pose([0.0, 0.0, 300.0]), &geom());
        assert_eq!(err.unwrap_err(), IkError::DegeneratePose);
        let set = inverse_kinematics(&identity_pose([0.0, 0.0, 300.0]), &geom());
        assert!(set.solutions.is_empty());
        assert!(set.diagnostics.degenerate_pose);
    }

    #[test]
    fn vertical_candidates_satisfy_case_equations() {
        let g = geom();
        let pose = identity_pose([100.0, 200.0, 300.0]);
        let wrists = solve_wrist_center(&pose, &g).unwrap();
        assert!(!wrists.is_empty());
        let lk = &g.links;
        for w in &wrists {
            let (x, y, z) = (w.0.x, w.0.y, w.0.z);
            let offs = (y * 100.0 - x * 200.0).powi(2) - (lk.d4 * lk.d5).powi(2);
            assert!(offs.abs() < 1e-8 * (lk.d4 * lk.d5).powi(2));
            let circ = (100.0 - x).powi(2) + (200.0 - y).powi(2) - lk.d5 * lk.d5;
            assert!(circ.abs() < 1e-8 * lk.d5 * lk.d5);
            assert!((z - (300.0 - lk.d6)).abs() < 1e-9);
        }
    }

    #[test]
    fn horizontal_candidates_match_closed_form() {
        let g = geom();
        let lk = g.links;
        // n = (1, 0, 0): columns chosen right-handed with n horizontal.
        let orient = Matrix3::new(0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0);
        let pose = Pose::new(Vector3::new(100.0, 0.0, 100.0), orient);
        assert!(pose.is_orthonormal(1e-12));
        let wrists = solve_wrist_center(&pose, &g).unwrap();
        assert_eq!(wrists.len(), 2);
        for w in &wrists {
            assert!((w.0.x - (100.0 - lk.d6)).abs() < 1e-9);
            assert!(w.0.y.abs() < 1e-9);
            assert!(
                (w.0.z - (100.0 - lk.d5)).abs() < 1e-9 || (w.0.z - (100.0 + lk.d5)).abs() < 1e-9
            );
        }
    }

    #[test]
    fn round_trip_contains_original() {
        let g = geom();
        let mut rng = StdRng::seed_from_u64(21);
        for _ in 0..50 {
            let q = random_config(&mut rng);
            let (pose, _) = forward_kinematics(&g, &q);
            let set = inverse_kinematics(&pose, &g);
            assert!(
                set.solutions.iter().any(|s| s.max_abs_diff(&q) < 1e-6),
                "missing original config {:?}",
                q.angles()
            );
            for s in &set.solutions {
                let (fk, _) = forward_kinematics(&g, s);
                assert!((fk.position - pose.position).norm() < FK_POS_TOL);
                assert!((fk.orientation - pose.orientation).norm() < FK_ORI_TOL);
            }
        }
    }

    #[test]
    fn out_of_annulus_wrist_center_rejected() {
        let g = geom();
        let pose = identity_pose([100.0, 200.0, 300.0]);
        let far = WristCenter(Vector3::new(400.0, 0.0, 200.0));
        let solve = solve_joint_angles(&pose, &far, &g);
        assert!(solve.solutions.is_empty());
        assert!(solve
            .rejections
            .iter()
            .any(|r| matches!(r, RejectReason::ElbowOutOfReach | RejectReason::HandFrameInconsistent)));
    }

    #[test]
    fn solutions_reproduce_hand_frame_offset() {
        let g = geom();
        let mut rng = StdRng::seed_from_u64(22);
        for _ in 0..20 {
            let q = random_config(&mut rng);
            let (pose, _) = forward_kinematics(&g, &q);
            let set = inverse_kinematics(&pose, &g);
            for s in &set.solutions {
                let (_, wrist) = forward_kinematics(&g, s);
                let s6 = pose.l().dot(&(wrist.0 - pose.position)) / g.links.d5;
                assert!((s6 - s[5].sin()).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn empty_inside_cylinder() {
        let set = inverse_kinematics(&identity_pose([30.0, 30.0, 100.0]), &geom());
        assert!(set.solutions.is_empty());
        assert_eq!(set.diagnostics.wrist_center_count, 0);
    }

    #[test]
    fn deterministic_repeat() {
        let g = geom();
        let pose = identity_pose([100.0, 200.0, 300.0]);
        let a = inverse_kinematics(&pose, &g);
        let b = inverse_kinematics(&pose, &g);
        assert_eq!(a.solutions.len(), b.solutions.len());
        for (x, y) in a.solutions.iter().zip(b.solutions.iter()) {
            assert_eq!(x.angles(), y.angles());
        }
    }

    #[test]
    fn canonical_order_is_sorted() {
        let g = geom();
        let set = inverse_kinematics(&identity_pose([-50.0, 100.0, 100.0]), &g);
        assert!(set.solutions.len() >= 2);
        for pair in set.solutions.windows(2) {
            assert!(sort_key(&pair[0]) <= sort_key(&pair[1]));
        }
    }

    fn tilted_n(one_minus_n3: f64) -> Vector3<f64> {
        let beta = (1.0 - one_minus_n3).acos();
        let orient = crate::kinematics::rpy_to_orientation(0.0, beta, 0.0, &Matrix3::identity());
        orient.column(2).into()
    }

    fn closed_versus_general_gap(g: &RobotGeometry, one_minus_n3: f64) -> (usize, usize, f64) {
        let p = Vector3::new(100.0, 200.0, 300.0);
        let general = wrist_centers_general(&p, &tilted_n(one_minus_n3), g);
        let closed = wrist_centers_vertical(&p, 1.0, g).unwrap();
        let gap = general
            .iter()
            .map(|w| {
                closed
                    .iter()
                    .map(|c| (w - c).norm())
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0f64, f64::max);
        (general.len(), closed.len(), gap)
    }

    #[test]
    fn near_vertical_general_matches_closed_form() {
        // The exact solution set for a tilted axis is offset from the snapped
        // vertical one by about (d6 + lever) * sqrt(2 eps) where eps = 1 - n3,
        // so the attainable agreement scales with the tilt: at eps = 1e-14
        // the two solvers coincide to well under 1e-5 mm, and at the 1e-9
        // case boundary the gap stays inside the derived bound.
        let g = geom();
        let (n_general, n_closed, gap) = closed_versus_general_gap(&g, 1e-14);
        assert_eq!(n_general, n_closed);
        assert!(gap < 1e-5, "eps = 1e-14 disagrees by {gap} mm");

        let (n_general, n_closed, gap) = closed_versus_general_gap(&g, 1e-9);
        assert_eq!(n_general, n_closed);
        let lever = g.links.d6 + g.links.d4 + g.links.d5;
        let bound = lever * (2e-9f64).sqrt() * 2.0;
        assert!(gap < bound, "eps = 1e-9 disagrees by {gap} mm, bound {bound}");
    }

    #[test]
    fn wrist_singular_pose_solved_by_remainder_extraction() {
        let g = geom();
        // Hand axis horizontal with the hand x-axis vertical: v = n3 = 0.
        let orient = Matrix3::new(0.0, 0.0, 1.0, 0.0, 1.0, 0.0, -1.0, 0.0, 0.0);
        let pose = Pose::new(Vector3::new(100.0, 100.0, 150.0), orient);
        assert!(pose.is_orthonormal(1e-12));
        let set = inverse_kinematics(&pose, &g);
        assert!(set.diagnostics.wrist_singular);
        assert_eq!(set.solutions.len(), 8);
        for s in &set.solutions {
            let (fk, _) = forward_kinematics(&g, s);
            assert!((fk.position - pose.position).norm() < FK_POS_TOL);
            assert!((fk.orientation - pose.orientation).norm() < FK_ORI_TOL);
        }
    }

    #[test]
    fn wrist_residual_jacobian_matches_finite_differences() {
        let g = geom();
        let mut rng = StdRng::seed_from_u64(23);
        for _ in 0..20 {
            let w = Vector3::new(
                rng.gen_range(-200.0..200.0),
                rng.gen_range(-200.0..200.0),
                rng.gen_range(0.0..400.0),
            );
            let p = Vector3::new(
                rng.gen_range(-200.0..200.0),
                rng.gen_range(-200.0..200.0),
                rng.gen_range(0.0..400.0),
            );
            let n = Vector3::new(rng.gen(), rng.gen(), rng.gen::<f64>()).normalize();
            let jac = wrist_residual_jacobian(&w, &p, &n, &g);
            let h = 1e-6;
            for col in 0..3 {
                let mut hi = w;
                let mut lo = w;
                hi[col] += h;
                lo[col] -= h;
                let rh = wrist_residuals(&hi, &p, &n, &g);
                let rl = wrist_residuals(&lo, &p, &n, &g);
                for row in 0..3 {
                    let fd = (rh[row] - rl[row]) / (2.0 * h);
                    assert!(
                        (jac[(row, col)] - fd).abs() < 1e-5 * (1.0 + fd.abs()),
                        "jacobian ({row},{col}): {} vs {fd}",
                        jac[(row, col)]
                    );
                }
            }
        }
    }
}
