//! Straight-line via-point generation under uniform or quintic time scaling.
//!
//! A scenario is a polyline of waypoints with one fixed orientation per
//! segment. Each segment is subdivided into `T + 1` via-points (endpoints
//! included, so consecutive segments duplicate the shared waypoint), the path
//! parameter `s` comes from the selected motion profile, and the full inverse
//! kinematics runs at every via-point. Empty solution sets are recorded in
//! the layer, never skipped.

use crate::geometry::RobotGeometry;
use crate::ik::{inverse_kinematics, IkSolutionSet};
use crate::kinematics::{rpy_to_orientation, Pose};
use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MotionProfile {
    /// Constant speed: `s = t / T`.
    Uniform,
    /// Degree-5 polynomial with zero velocity and acceleration at both ends:
    /// `s = 6 (t/T)^5 - 15 (t/T)^4 + 10 (t/T)^3`.
    Quintic,
}

#[derive(Debug, Error)]
pub enum TrajectoryError {
    #[error("step {t} outside [0, {t_max}]")]
    OutOfRange { t: u32, t_max: u32 },
    #[error("scenario needs at least two waypoints, got {0}")]
    TooFewWaypoints(usize),
    #[error("got {orientations} orientations for {segments} segments")]
    OrientationCountMismatch { orientations: usize, segments: usize },
    #[error("subdivision count T must be >= 1")]
    ZeroSubdivisions,
    #[error("orientation {index} is not an orthonormal right-handed matrix")]
    BadOrientation { index: usize },
    #[error("failed to read scenario file: {0}")]
    Io(#[from] std::io::Error),
    #[error("failed to parse scenario file: {0}")]
    Parse(#[from] serde_json::Error),
}

/// The quintic coefficients `(a3, a4, a5)` solving the boundary system
///
/// ```text
/// a3 +   a4 +   a5 = 1
/// 3 a3 + 4 a4 + 5 a5 = 0
/// 3 a3 + 6 a4 + 10 a5 = 0
/// ```
///
/// by Cramer's rule. The system determinant is exactly 1 and all entries are
/// small integers, so the result is exact in floating point: `(10, -15, 6)`.
pub fn solve_quintic_boundary_system() -> (f64, f64, f64) {
    let m = [[1.0, 1.0, 1.0], [3.0, 4.0, 5.0], [3.0, 6.0, 10.0]];
    let rhs = [1.0, 0.0, 0.0];
    let det3 = |a: [[f64; 3]; 3]| -> f64 {
        a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
            - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
            + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
    };
    let det = det3(m);
    let mut cols = [0.0; 3];
    for (j, col) in cols.iter_mut().enumerate() {
        let mut mj = m;
        for i in 0..3 {
            mj[i][j] = rhs[i];
        }
        *col = det3(mj) / det;
    }
    (cols[0], cols[1], cols[2])
}

/// Path parameter for step `t` of `t_max` under the given profile.
pub fn profile_s(profile: MotionProfile, t: u32, t_max: u32) -> Result<f64, TrajectoryError> {
    if t_max == 0 {
        return Err(TrajectoryError::ZeroSubdivisions);
    }
    if t > t_max {
        return Err(TrajectoryError::OutOfRange { t, t_max });
    }
    let u = t as f64 / t_max as f64;
    Ok(match profile {
        MotionProfile::Uniform => u,
        MotionProfile::Quintic => ((6.0 * u - 15.0) * u + 10.0) * u * u * u,
    })
}

/// First derivative `ds/dt` of the profile at step `t`.
pub fn profile_s_dot(profile: MotionProfile, t: u32, t_max: u32) -> Result<f64, TrajectoryError> {
    if t_max == 0 {
        return Err(TrajectoryError::ZeroSubdivisions);
    }
    if t > t_max {
        return Err(TrajectoryError::OutOfRange { t, t_max });
    }
    let big_t = t_max as f64;
    let u = t as f64 / big_t;
    Ok(match profile {
        MotionProfile::Uniform => 1.0 / big_t,
        MotionProfile::Quintic => ((30.0 * u - 60.0) * u + 30.0) * u * u / big_t,
    })
}

/// Second derivative `d^2 s / dt^2` of the profile at step `t`.
pub fn profile_s_ddot(profile: MotionProfile, t: u32, t_max: u32) -> Result<f64, TrajectoryError> {
    if t_max == 0 {
        return Err(TrajectoryError::ZeroSubdivisions);
    }
    if t > t_max {
        return Err(TrajectoryError::OutOfRange { t, t_max });
    }
    let big_t = t_max as f64;
    let u = t as f64 / big_t;
    Ok(match profile {
        MotionProfile::Uniform => 0.0,
        MotionProfile::Quintic => ((120.0 * u - 180.0) * u + 60.0) * u / (big_t * big_t),
    })
}

/// One straight-line segment with a fixed orientation.
#[derive(Debug, Clone)]
pub struct Segment {
    pub start: Vector3<f64>,
    pub end: Vector3<f64>,
    pub orientation: Matrix3<f64>,
    pub t_steps: u32,
    pub profile: MotionProfile,
}

/// Affine interpolation between the segment endpoints at parameter `s`.
pub fn interpolate(seg: &Segment, s: f64) -> Vector3<f64> {
    seg.start * (1.0 - s) + seg.end * s
}

/// Orientation of one segment: either an explicit column matrix `(l m n)` or
/// a roll-pitch-yaw triple applied on top of an optional `home` matrix.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OrientationSpec {
    Matrix { matrix: [[f64; 3]; 3] },
    Rpy {
        rpy: [f64; 3],
        #[serde(default, skip_serializing_if = "Option::is_none")]
        home: Option<[[f64; 3]; 3]>,
    },
}

fn matrix_from_rows(rows: &[[f64; 3]; 3]) -> Matrix3<f64> {
    Matrix3::from_row_slice(&[
        rows[0][0], rows[0][1], rows[0][2], //
        rows[1][0], rows[1][1], rows[1][2], //
        rows[2][0], rows[2][1], rows[2][2],
    ])
}

impl OrientationSpec {
    pub fn resolve(&self) -> Matrix3<f64> {
        match self {
            OrientationSpec::Matrix { matrix } => matrix_from_rows(matrix),
            OrientationSpec::Rpy { rpy, home } => {
                let home = home
                    .as_ref()
                    .map(matrix_from_rows)
                    .unwrap_or_else(Matrix3::identity);
                rpy_to_orientation(rpy[0], rpy[1], rpy[2], &home)
            }
        }
    }
}

/// A named polyline task: `N` waypoints, `N - 1` per-segment orientations,
/// a subdivision count and a motion profile.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub waypoints: Vec<[f64; 3]>,
    pub orientations: Vec<OrientationSpec>,
    #[serde(rename = "T")]
    pub t_steps: u32,
    pub profile: MotionProfile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<String>,
}

impl Scenario {
    pub fn validate(&self) -> Result<(), TrajectoryError> {
        if self.waypoints.len() < 2 {
            return Err(TrajectoryError::TooFewWaypoints(self.waypoints.len()));
        }
        let segments = self.waypoints.len() - 1;
        if self.orientations.len() != segments {
            return Err(TrajectoryError::OrientationCountMismatch {
                orientations: self.orientations.len(),
                segments,
            });
        }
        if self.t_steps == 0 {
            return Err(TrajectoryError::ZeroSubdivisions);
        }
        for (index, spec) in self.orientations.iter().enumerate() {
            let m = spec.resolve();
            let pose = Pose::new(Vector3::zeros(), m);
            if !pose.is_orthonormal(1e-9) {
                return Err(TrajectoryError::BadOrientation { index });
            }
        }
        Ok(())
    }

    pub fn segments(&self) -> Vec<Segment> {
        self.waypoints
            .windows(2)
            .zip(self.orientations.iter())
            .map(|(pair, spec)| Segment {
                start: Vector3::from_row_slice(&pair[0]),
                end: Vector3::from_row_slice(&pair[1]),
                orientation: spec.resolve(),
                t_steps: self.t_steps,
                profile: self.profile,
            })
            .collect()
    }

    pub fn from_json_str(text: &str) -> Result<Self, TrajectoryError> {
        let scenario: Scenario = serde_json::from_str(text)?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, TrajectoryError> {
        Self::from_json_str(&fs::read_to_string(path)?)
    }
}

/// One interpolated pose along a segment.
#[derive(Debug, Clone)]
pub struct ViaPoint {
    pub segment: usize,
    pub step: u32,
    pub s: f64,
    pub position: Vector3<f64>,
    pub orientation: Matrix3<f64>,
}

/// A via-point together with its full IK solution set. `solutions` may be
/// empty; infeasible via-points stay in the plan.
#[derive(Debug, Clone)]
pub struct SolutionLayer {
    pub via: ViaPoint,
    pub solutions: IkSolutionSet,
}

/// Runs the scenario: for every segment and every step `t in 0..=T`, compute
/// `s`, interpolate the position, and solve the inverse kinematics. The
/// result has exactly `(N - 1) * (T + 1)` layers in `(segment, t)` order.
pub fn plan_trajectory(
    scenario: &Scenario,
    geom: &RobotGeometry,
) -> Result<Vec<SolutionLayer>, TrajectoryError> {
    scenario.validate()?;
    let mut layers = Vec::with_capacity((scenario.waypoints.len() - 1) * (scenario.t_steps as usize + 1));
    for (segment_index, segment) in scenario.segments().iter().enumerate() {
        for t in 0..=segment.t_steps {
            let s = profile_s(segment.profile, t, segment.t_steps)?;
            let position = interpolate(segment, s);
            let pose = Pose::new(position, segment.orientation);
            let solutions = inverse_kinematics(&pose, geom);
            layers.push(SolutionLayer {
                via: ViaPoint {
                    segment: segment_index,
                    step: t,
                    s,
                    position,
                    orientation: segment.orientation,
                },
                solutions,
            });
        }
    }
    Ok(layers)
}

/// Bundled scenarios matching the shipped `scenarios/*.json` files.
pub mod bundled {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    const WAYPOINT_A: [f64; 3] = [100.0, 200.0, 300.0];
    const WAYPOINT_B: [f64; 3] = [-50.0, 100.0, 100.0];
    const WAYPOINT_C: [f64; 3] = [-150.0, -200.0, 100.0];
    const WAYPOINT_D: [f64; 3] = [100.0, -50.0, 0.0];

    fn identity_orientation() -> OrientationSpec {
        OrientationSpec::Matrix {
            matrix: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        }
    }

    fn polyline(name: &str, waypoints: Vec<[f64; 3]>, t_steps: u32, profile: MotionProfile) -> Scenario {
        let segments = waypoints.len() - 1;
        Scenario {
            name: name.to_string(),
            waypoints,
            orientations: (0..segments).map(|_| identity_orientation()).collect(),
            t_steps,
            profile,
            notes: None,
        }
    }

    pub fn test1(t_steps: u32, profile: MotionProfile) -> Scenario {
        polyline("test1", vec![WAYPOINT_A, WAYPOINT_B], t_steps, profile)
    }

    pub fn test2(t_steps: u32, profile: MotionProfile) -> Scenario {
        polyline("test2", vec![WAYPOINT_B, WAYPOINT_C], t_steps, profile)
    }

    pub fn test3(t_steps: u32, profile: MotionProfile) -> Scenario {
        polyline("test3", vec![WAYPOINT_C, WAYPOINT_D], t_steps, profile)
    }

    pub fn test4(t_steps: u32, profile: MotionProfile) -> Scenario {
        polyline("test4", vec![WAYPOINT_D, WAYPOINT_A], t_steps, profile)
    }

    /// Straight run A to C; part of it leaves the feasible region.
    pub fn test5(t_steps: u32, profile: MotionProfile) -> Scenario {
        polyline("test5", vec![WAYPOINT_A, WAYPOINT_C], t_steps, profile)
    }

    /// Quadrilateral A-B-C-D-A.
    pub fn test6(t_steps: u32, profile: MotionProfile) -> Scenario {
        polyline(
            "test6",
            vec![WAYPOINT_A, WAYPOINT_B, WAYPOINT_C, WAYPOINT_D, WAYPOINT_A],
            t_steps,
            profile,
        )
    }

    /// Pentagon with a different orientation per segment, given as RPY
    /// triples over a `Ry(pi/2)` home matrix.
    ///
    /// The home matrix tips the reference hand axis into the horizontal
    /// plane, so the zero triple on the closing segment has `n3 = 0` while
    /// the four other segments keep `|n3| = 1`. It is a convention choice:
    /// any home works as long as scenario files state it explicitly.
    pub fn test7(t_steps: u32, profile: MotionProfile) -> Scenario {
        let home = [[0.0, 0.0, 1.0], [0.0, 1.0, 0.0], [-1.0, 0.0, 0.0]];
        let rpy = |a: f64, b: f64, c: f64| OrientationSpec::Rpy {
            rpy: [a, b, c],
            home: Some(home),
        };
        Scenario {
            name: "test7".to_string(),
            waypoints: vec![
                [100.0, 100.0, 200.0],
                [-100.0, 100.0, 100.0],
                [-100.0, -100.0, 0.0],
                [100.0, -100.0, 0.0],
                [100.0, 100.0, 100.0],
                [100.0, 100.0, 200.0],
            ],
            orientations: vec![
                rpy(FRAC_PI_2, FRAC_PI_2, FRAC_PI_2),
                rpy(-FRAC_PI_2, 0.0, -FRAC_PI_2),
                rpy(-FRAC_PI_2, -FRAC_PI_2, -FRAC_PI_2),
                rpy(FRAC_PI_2, 0.0, FRAC_PI_2),
                rpy(0.0, 0.0, 0.0),
            ],
            t_steps,
            profile,
            notes: Some(
                "RPY triples are composed as home * Rz(gamma) * Ry(beta) * Rx(alpha) with \
                 home = Ry(pi/2), which puts the zero triple at n3 = 0."
                    .to_string(),
            ),
        }
    }

    /// Bundled scenario by name, with the given subdivision and profile.
    pub fn by_name(name: &str, t_steps: u32, profile: MotionProfile) -> Option<Scenario> {
        match name {
            "test1" => Some(test1(t_steps, profile)),
            "test2" => Some(test2(t_steps, profile)),
            "test3" => Some(test3(t_steps, profile)),
            "test4" => Some(test4(t_steps, profile)),
            "test5" => Some(test5(t_steps, profile)),
            "test6" => Some(test6(t_steps, profile)),
            "test7" => Some(test7(t_steps, profile)),
            _ => None,
        }
    }
}
