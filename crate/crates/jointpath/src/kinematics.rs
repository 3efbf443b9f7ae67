//! Forward kinematics, Jacobian, manipulability and consistency residuals.

use crate::geometry::{DhRow, RobotGeometry};
use nalgebra::{Matrix3, Matrix4, SMatrix, Vector3};
use std::f64::consts::PI;

/// Normalizes an angle to `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    let r = -((-a + PI).rem_euclid(2.0 * PI) - PI);
    if r == -PI {
        PI
    } else {
        r
    }
}

/// Six joint angles [rad], each normalized to `(-pi, pi]` on construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointConfig {
    theta: [f64; 6],
}

impl JointConfig {
    pub fn new(theta: [f64; 6]) -> Self {
        JointConfig {
            theta: theta.map(wrap_angle),
        }
    }

    pub fn zeros() -> Self {
        JointConfig { theta: [0.0; 6] }
    }

    pub fn angles(&self) -> [f64; 6] {
        self.theta
    }

    /// Largest per-joint absolute difference, using raw angle values.
    pub fn max_abs_diff(&self, other: &JointConfig) -> f64 {
        self.theta
            .iter()
            .zip(other.theta.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl std::ops::Index<usize> for JointConfig {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.theta[i]
    }
}

/// End-effector pose: position [mm] plus the orientation matrix whose columns
/// are the hand frame axes `l`, `m`, `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub position: Vector3<f64>,
    pub orientation: Matrix3<f64>,
}

impl Pose {
    pub fn new(position: Vector3<f64>, orientation: Matrix3<f64>) -> Self {
        Pose { position, orientation }
    }

    pub fn l(&self) -> Vector3<f64> {
        self.orientation.column(0).into()
    }

    pub fn m(&self) -> Vector3<f64> {
        self.orientation.column(1).into()
    }

    pub fn n(&self) -> Vector3<f64> {
        self.orientation.column(2).into()
    }

    /// Max absolute entry of `R^t R - I`.
    pub fn orthonormality_error(&self) -> f64 {
        let r = self.orientation;
        let e = r.transpose() * r - Matrix3::identity();
        e.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
    }

    /// Orthonormal and right-handed within `tol`.
    pub fn is_orthonormal(&self, tol: f64) -> bool {
        let handed = (self.l().cross(&self.m()) - self.n()).norm();
        self.orthonormality_error() < tol && handed < tol.sqrt().max(tol * 1e3)
    }
}

/// Intersection point of the joint-4 and joint-5 axes (frame-5 origin) [mm].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WristCenter(pub Vector3<f64>);

fn rot_z(q: f64) -> Matrix4<f64> {
    let (s, c) = q.sin_cos();
    Matrix4::new(
        c, -s, 0.0, 0.0, //
        s, c, 0.0, 0.0, //
        0.0, 0.0, 1.0, 0.0, //
        0.0, 0.0, 0.0, 1.0,
    )
}

fn rot_x(q: f64) -> Matrix4<f64> {
    let (s, c) = q.sin_cos();
    Matrix4::new(
        1.0, 0.0, 0.0, 0.0, //
        0.0, c, -s, 0.0, //
        0.0, s, c, 0.0, //
        0.0, 0.0, 0.0, 1.0,
    )
}

fn trans_z(d: f64) -> Matrix4<f64> {
    let mut m = Matrix4::identity();
    m[(2, 3)] = d;
    m
}

fn trans_x(a: f64) -> Matrix4<f64> {
    let mut m = Matrix4::identity();
    m[(0, 3)] = a;
    m
}

/// Frame-(i+1) to frame-i transform for one D-H row:
/// `Rz(theta) * Tz(d) * Tx(a) * Rx(alpha) * Rz(delta)`.
pub fn dh_transform(row: &DhRow, theta: f64) -> Matrix4<f64> {
    rot_z(theta) * trans_z(row.d) * trans_x(row.a) * rot_x(row.alpha) * rot_z(row.delta)
}

/// End-effector pose and wrist center in the base frame.
///
/// The pose is the ordered product of the six per-joint transforms; the wrist
/// center is the translation of the partial product through joint 4.
pub fn forward_kinematics(geom: &RobotGeometry, q: &JointConfig) -> (Pose, WristCenter) {
    let mut m = Matrix4::identity();
    let mut wrist = Vector3::zeros();
    for i in 0..6 {
        m *= dh_transform(&geom.dh[i], q[i]);
        if i == 3 {
            wrist = m.fixed_view::<3, 1>(0, 3).into();
        }
    }
    let pose = Pose {
        position: m.fixed_view::<3, 1>(0, 3).into(),
        orientation: m.fixed_view::<3, 3>(0, 0).into(),
    };
    (pose, WristCenter(wrist))
}

/// `home * Rz(gamma) * Ry(beta) * Rx(alpha)`.
///
/// The `home` matrix anchors the roll-pitch-yaw triple to a reference
/// orientation; pass the identity for plain extrinsic x-y-z angles.
pub fn rpy_to_orientation(alpha: f64, beta: f64, gamma: f64, home: &Matrix3<f64>) -> Matrix3<f64> {
    let (sa, ca) = alpha.sin_cos();
    let (sb, cb) = beta.sin_cos();
    let (sg, cg) = gamma.sin_cos();
    let rx = Matrix3::new(1.0, 0.0, 0.0, 0.0, ca, -sa, 0.0, sa, ca);
    let ry = Matrix3::new(cb, 0.0, sb, 0.0, 1.0, 0.0, -sb, 0.0, cb);
    let rz = Matrix3::new(cg, -sg, 0.0, sg, cg, 0.0, 0.0, 0.0, 1.0);
    home * rz * ry * rx
}

/// Geometric position Jacobian: column j is `z_j x (p - o_j)` for the
/// revolute joint j with axis `z_j` and frame origin `o_j`.
pub fn position_jacobian(geom: &RobotGeometry, q: &JointConfig) -> SMatrix<f64, 3, 6> {
    let mut axes = [Vector3::zeros(); 6];
    let mut origins = [Vector3::zeros(); 6];
    let mut m = Matrix4::identity();
    for i in 0..6 {
        axes[i] = m.fixed_view::<3, 1>(0, 2).into();
        origins[i] = m.fixed_view::<3, 1>(0, 3).into();
        m *= dh_transform(&geom.dh[i], q[i]);
    }
    let p: Vector3<f64> = m.fixed_view::<3, 1>(0, 3).into();
    let mut jac = SMatrix::<f64, 3, 6>::zeros();
    for j in 0..6 {
        jac.set_column(j, &axes[j].cross(&(p - origins[j])));
    }
    jac
}

/// Manipulability `sqrt(det(J J^t))` of a position Jacobian.
///
/// The Gram matrix is positive semidefinite, so determinants in
/// `[-1e-12, 0)` are round-off and clamp to zero.
pub fn manipulability(jac: &SMatrix<f64, 3, 6>) -> f64 {
    let gram = jac * jac.transpose();
    let det = gram.determinant();
    if det < 0.0 {
        debug_assert!(det > -1e-12, "Gram determinant {det} below round-off band");
        0.0
    } else {
        det.sqrt()
    }
}

/// The twelve consistency residuals tying joint angles, pose and wrist center
/// together.
///
/// Residuals are expressed with positions scaled by 100 (F1-F2, F9) and 10^4
/// (F8), so for the bundled geometry the coefficients are the integers
/// 7318, 13156, 11040, 9600, 255799044 and 211968000. All twelve vanish on
/// forward-kinematics output; a residual above ~1e-6 signals an inconsistent
/// (q, pose, wrist) triple.
pub fn consistency_residuals(
    geom: &RobotGeometry,
    q: &JointConfig,
    pose: &Pose,
    wrist: &WristCenter,
) -> [f64; 12] {
    let lk = &geom.links;
    let (s, c): (Vec<f64>, Vec<f64>) = (0..6).map(|i| q[i].sin_cos()).unzip();
    let l = pose.l();
    let m = pose.m();
    let n = pose.n();
    let p = pose.position;
    let w = wrist.0;
    let (x, y, z) = (w.x, w.y, w.z);

    let c23 = c[1] * c[2] - s[1] * s[2];
    let s23 = s[1] * c[2] + c[1] * s[2];

    [
        100.0 * lk.d5 * s[5] - 100.0 * (l.x * (x - p.x) + l.y * (y - p.y) + l.z * (z - p.z)),
        100.0 * lk.d5 * c[5] - 100.0 * (m.x * (x - p.x) + m.y * (y - p.y) + m.z * (z - p.z)),
        -n.z * s[4] + c[4] * (l.z * c[5] - m.z * s[5]),
        s[4] * s[4] + c[4] * c[4] - 1.0,
        s[0] + n.x * s[4] - c[4] * (l.x * c[5] - m.x * s[5]),
        c[0] - n.y * s[4] + c[4] * (l.y * c[5] - m.y * s[5]),
        s[2] * s[2] + c[2] * c[2] - 1.0,
        1e4 * x * x + 1e4 * y * y + (100.0 * z - 100.0 * lk.d1).powi(2)
            - 1e4 * (lk.a2 * lk.a2 + lk.a3 * lk.a3 + lk.d4 * lk.d4)
            - 1e4 * 2.0 * lk.a2 * lk.a3 * c[2],
        100.0 * lk.d1 + 100.0 * lk.a2 * c[1] + 100.0 * lk.a3 * c23 - 100.0 * z,
        s[1] * s[1] + c[1] * c[1] - 1.0,
        s[3] * s[3] + c[3] * c[3] - 1.0,
        c23 * c[3] - s23 * s[3] + m.z * c[5] + l.z * s[5],
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3};

    fn random_config(rng: &mut StdRng) -> JointConfig {
        JointConfig::new(std::array::from_fn(|_| rng.gen_range(-PI..PI)))
    }

    #[test]
    fn wrap_angle_to_half_open_interval() {
        assert_eq!(wrap_angle(0.0), 0.0);
        assert_eq!(wrap_angle(PI), PI);
        assert_eq!(wrap_angle(-PI), PI);
        assert_abs_diff_eq!(wrap_angle(3.0 * PI), PI, epsilon = 1e-12);
        assert_abs_diff_eq!(wrap_angle(-2.5 * PI), -0.5 * PI, epsilon = 1e-12);
    }

    #[test]
    fn dh_identity_row() {
        let row = DhRow { a: 0.0, alpha: 0.0, d: 0.0, delta: 0.0 };
        assert_eq!(dh_transform(&row, 0.0), Matrix4::identity());
    }

    #[test]
    fn dh_pure_translation() {
        let row = DhRow { a: 0.0, alpha: 0.0, d: 131.56, delta: 0.0 };
        let mut want = Matrix4::identity();
        want[(2, 3)] = 131.56;
        assert_eq!(dh_transform(&row, 0.0), want);
    }

    #[test]
    fn dh_matches_elementary_product() {
        // Row (a = 110.4, alpha = pi/2, d = 0, delta = 0) at theta = pi/3,
        // multiplied out by hand from the elementary matrices.
        let row = DhRow { a: 110.4, alpha: FRAC_PI_2, d: 0.0, delta: 0.0 };
        let got = dh_transform(&row, FRAC_PI_3);
        let (s, c) = FRAC_PI_3.sin_cos();
        let (sa, ca) = FRAC_PI_2.sin_cos();
        #[rustfmt::skip]
        let want = Matrix4::new(
            c, -s * ca,  s * sa, 110.4 * c,
            s,  c * ca, -c * sa, 110.4 * s,
            0.0,    sa,      ca, 0.0,
            0.0,   0.0,     0.0, 1.0,
        );
        assert_abs_diff_eq!(got, want, epsilon = 1e-15);
    }

    #[test]
    fn home_wrist_height() {
        let geom = RobotGeometry::mycobot280();
        let (_, wrist) = forward_kinematics(&geom, &JointConfig::zeros());
        assert_abs_diff_eq!(wrist.0.z, 337.96, epsilon = 1e-12);
    }

    #[test]
    fn home_f8_vanishes() {
        let geom = RobotGeometry::mycobot280();
        let q = JointConfig::zeros();
        let (pose, wrist) = forward_kinematics(&geom, &q);
        let f = consistency_residuals(&geom, &q, &pose, &wrist);
        // F8 carries 1e4-scaled squares (~4e8), so its floating-point floor
        // is ~1e-8; 1e-6 is the shared consistency tolerance.
        assert!(f[7].abs() < 1e-6, "F8 = {}", f[7]);
        assert!(f[8].abs() < 1e-9, "F9 = {}", f[8]);
    }

    #[test]
    fn fk_equals_chain_product() {
        let geom = RobotGeometry::mycobot280();
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..20 {
            let q = random_config(&mut rng);
            let (pose, _) = forward_kinematics(&geom, &q);
            let mut m = Matrix4::identity();
            for i in 0..6 {
                m *= dh_transform(&geom.dh[i], q[i]);
            }
            let pos: Vector3<f64> = m.fixed_view::<3, 1>(0, 3).into();
            let rot: Matrix3<f64> = m.fixed_view::<3, 3>(0, 0).into();
            assert_eq!(pose.position, pos);
            assert_eq!(pose.orientation, rot);
        }
    }

    #[test]
    fn fk_orientation_is_orthonormal() {
        let geom = RobotGeometry::mycobot280();
        let mut rng = StdRng::seed_from_u64(12);
        for _ in 0..200 {
            let (pose, _) = forward_kinematics(&geom, &random_config(&mut rng));
            assert!(pose.orthonormality_error() < 1e-9);
            assert!(pose.is_orthonormal(1e-9));
        }
    }

    #[test]
    fn rpy_zero_is_home() {
        let home = Matrix3::identity();
        assert_eq!(rpy_to_orientation(0.0, 0.0, 0.0, &home), home);
    }

    #[test]
    fn rpy_matches_manual_composition() {
        let got = rpy_to_orientation(FRAC_PI_2, FRAC_PI_2, FRAC_PI_2, &Matrix3::identity());
        // Rz(pi/2) Ry(pi/2) Rx(pi/2) composed by hand.
        let rx = Matrix3::new(1.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 1.0, 0.0);
        let ry = Matrix3::new(0.0, 0.0, 1.0, 0.0, 1.0, 0.0, -1.0, 0.0, 0.0);
        let rz = Matrix3::new(0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0);
        assert_abs_diff_eq!(got, rz * ry * rx, epsilon = 1e-15);
    }

    #[test]
    fn rpy_is_orthonormal() {
        let mut rng = StdRng::seed_from_u64(13);
        for _ in 0..100 {
            let r = rpy_to_orientation(
                rng.gen_range(-PI..PI),
                rng.gen_range(-PI..PI),
                rng.gen_range(-PI..PI),
                &Matrix3::identity(),
            );
            let err = (r.transpose() * r - Matrix3::identity())
                .iter()
                .fold(0.0f64, |acc, v| acc.max(v.abs()));
            assert!(err < 1e-12);
        }
    }

    fn finite_difference_jacobian(geom: &RobotGeometry, q: &JointConfig) -> SMatrix<f64, 3, 6> {
        let h = 1e-6;
        let mut jac = SMatrix::<f64, 3, 6>::zeros();
        let a = q.angles();
        for j in 0..6 {
            let mut hi = a;
            let mut lo = a;
            hi[j] += h;
            lo[j] -= h;
            let (ph, _) = forward_kinematics(geom, &JointConfig { theta: hi });
            let (pl, _) = forward_kinematics(geom, &JointConfig { theta: lo });
            jac.set_column(j, &((ph.position - pl.position) / (2.0 * h)));
        }
        jac
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let geom = RobotGeometry::mycobot280();
        let mut rng = StdRng::seed_from_u64(14);
        for _ in 0..50 {
            let q = random_config(&mut rng);
            let jac = position_jacobian(&geom, &q);
            let fd = finite_difference_jacobian(&geom, &q);
            let err = (jac - fd).iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
            assert!(err < 1e-5, "max elementwise error {err}");
        }
    }

    #[test]
    fn jacobian_last_column_vanishes_on_axis() {
        // The end-effector origin lies on the joint-6 axis, so rotating
        // joint 6 does not move it.
        let geom = RobotGeometry::mycobot280();
        let jac = position_jacobian(&geom, &JointConfig::zeros());
        assert!(jac.column(5).norm() < 1e-9);
        let fd = finite_difference_jacobian(&geom, &JointConfig::zeros());
        assert!(fd.column(5).norm() < 1e-4);
    }

    #[test]
    fn manipulability_of_zero_jacobian() {
        assert_eq!(manipulability(&SMatrix::<f64, 3, 6>::zeros()), 0.0);
    }

    #[test]
    fn manipulability_scales_cubically() {
        let geom = RobotGeometry::mycobot280();
        let mut rng = StdRng::seed_from_u64(15);
        for _ in 0..20 {
            let jac = position_jacobian(&geom, &random_config(&mut rng));
            let w = manipulability(&jac);
            let w2 = manipulability(&(jac * 2.0));
            assert_abs_diff_eq!(w2, 8.0 * w, epsilon = 1e-6 * w.max(1.0));
        }
    }

    /// Cofactor-expansion determinant, independent of nalgebra's LU path.
    fn det3(m: &Matrix3<f64>) -> f64 {
        m[(0, 0)] * (m[(1, 1)] * m[(2, 2)] - m[(1, 2)] * m[(2, 1)])
            - m[(0, 1)] * (m[(1, 0)] * m[(2, 2)] - m[(1, 2)] * m[(2, 0)])
            + m[(0, 2)] * (m[(1, 0)] * m[(2, 1)] - m[(1, 1)] * m[(2, 0)])
    }

    #[test]
    fn manipulability_matches_cofactor_oracle() {
        let geom = RobotGeometry::mycobot280();
        let mut rng = StdRng::seed_from_u64(16);
        for _ in 0..50 {
            let jac = position_jacobian(&geom, &random_config(&mut rng));
            let w = manipulability(&jac);
            let gram: Matrix3<f64> = jac * jac.transpose();
            let oracle = det3(&gram).max(0.0).sqrt();
            assert!((w - oracle).abs() <= 1e-9 * oracle.max(1.0), "{w} vs {oracle}");
        }
    }

    #[test]
    fn residuals_vanish_on_fk_output() {
        let geom = RobotGeometry::mycobot280();
        let mut rng = StdRng::seed_from_u64(17);
        for _ in 0..200 {
            let q = random_config(&mut rng);
            let (pose, wrist) = forward_kinematics(&geom, &q);
            let f = consistency_residuals(&geom, &q, &pose, &wrist);
            let worst = f.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
            assert!(worst < 1e-6, "max |F| = {worst}");
        }
    }

    #[test]
    fn residuals_detect_perturbation() {
        let geom = RobotGeometry::mycobot280();
        let q = JointConfig::new([0.3, -0.5, 0.8, 0.2, 1.0, -0.4]);
        let (pose, wrist) = forward_kinematics(&geom, &q);
        let mut bumped = q.angles();
        bumped[1] += 0.1;
        let f = consistency_residuals(&geom, &JointConfig::new(bumped), &pose, &wrist);
        let worst = f.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        assert!(worst > 1e-3, "perturbation went undetected, max |F| = {worst}");
    }

    #[test]
    fn bundled_geometry_reproduces_integer_coefficients() {
        let lk = RobotGeometry::mycobot280().links;
        assert!((100.0 * lk.d5 - 7318.0).abs() < 1e-6);
        assert!((100.0 * lk.d1 - 13156.0).abs() < 1e-6);
        assert!((100.0 * lk.a2 - 11040.0).abs() < 1e-6);
        assert!((100.0 * lk.a3 - 9600.0).abs() < 1e-6);
        assert!((1e4 * (lk.a2 * lk.a2 + lk.a3 * lk.a3 + lk.d4 * lk.d4) - 255799044.0).abs() < 1e-4);
        assert!((1e4 * 2.0 * lk.a2 * lk.a3 - 211968000.0).abs() < 1e-4);
    }
}
