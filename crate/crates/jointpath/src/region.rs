//! Feasible-region predicates for a fixed end-effector orientation.
//!
//! The analytic check answers only the orientations it can: a vertical hand
//! axis is feasible iff the target stays outside the cylinder of radius d4
//! around the base axis, a horizontal hand axis is feasible everywhere, and
//! every other orientation is `Unknown`. The verdict is a necessary condition
//! on the existence of real wrist centers, not on a complete joint solution —
//! use [`empirical_feasibility`] when an actual answer is required.

use crate::geometry::RobotGeometry;
use crate::ik::{inverse_kinematics, CASE_EPS};
use crate::kinematics::Pose;
use nalgebra::{Matrix3, Vector3};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionStatus {
    Feasible,
    Infeasible,
    Unknown,
}

/// Analytic region verdict. For the vertical case `margin` carries the
/// signed boundary distance `p1^2 + p2^2 - d4^2` [mm^2].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionVerdict {
    pub status: RegionStatus,
    pub margin: Option<f64>,
}

#[derive(Debug, Error)]
pub enum RegionError {
    #[error("direction must be a unit vector, |n| = {norm}")]
    InvalidDirection { norm: f64 },
}

/// Analytic feasibility of position `p` for hand-axis direction `n`.
pub fn region_check(
    p: &Vector3<f64>,
    n: &Vector3<f64>,
    geom: &RobotGeometry,
) -> Result<RegionVerdict, RegionError> {
    let norm = n.norm();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(RegionError::InvalidDirection { norm });
    }
    if (n.z.abs() - 1.0).abs() < CASE_EPS {
        let margin = p.x * p.x + p.y * p.y - geom.links.d4 * geom.links.d4;
        let status = if margin >= 0.0 {
            RegionStatus::Feasible
        } else {
            RegionStatus::Infeasible
        };
        Ok(RegionVerdict { status, margin: Some(margin) })
    } else if n.z.abs() < CASE_EPS {
        Ok(RegionVerdict { status: RegionStatus::Feasible, margin: None })
    } else {
        Ok(RegionVerdict { status: RegionStatus::Unknown, margin: None })
    }
}

/// Sampling fallback: true iff the full inverse kinematics returns at least
/// one solution at this pose. This is a point check, not a proof about any
/// neighborhood.
pub fn empirical_feasibility(
    p: &Vector3<f64>,
    orientation: &Matrix3<f64>,
    geom: &RobotGeometry,
) -> bool {
    let pose = Pose::new(*p, *orientation);
    !inverse_kinematics(&pose, geom).solutions.is_empty()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::RobotGeometry;

    fn geom() -> RobotGeometry {
        RobotGeometry::mycobot280()
    }

    #[test]
    fn vertical_feasible_with_margin() {
        let v = region_check(
            &Vector3::new(100.0, 200.0, 300.0),
            &Vector3::new(0.0, 0.0, 1.0),
            &geom(),
        )
        .unwrap();
        assert_eq!(v.status, RegionStatus::Feasible);
        let want = 50000.0 - 64.62f64 * 64.62;
        assert!((v.margin.unwrap() - want).abs() < 1e-9);
    }

    #[test]
    fn vertical_infeasible_inside_cylinder() {
        let v = region_check(
            &Vector3::new(30.0, 30.0, 100.0),
            &Vector3::new(0.0, 0.0, 1.0),
            &geom(),
        )
        .unwrap();
        assert_eq!(v.status, RegionStatus::Infeasible);
        let want = 1800.0 - 64.62f64 * 64.62;
        assert!((v.margin.unwrap() - want).abs() < 1e-9);
    }

    #[test]
    fn horizontal_is_feasible_everywhere() {
        for p in [[0.0, 0.0, 0.0], [500.0, 0.0, -100.0], [1.0, 2.0, 3.0]] {
            let v = region_check(
                &Vector3::new(p[0], p[1], p[2]),
                &Vector3::new(1.0, 0.0, 0.0),
                &geom(),
            )
            .unwrap();
            assert_eq!(v.status, RegionStatus::Feasible);
        }
    }

    #[test]
    fn tilted_axis_is_unknown() {
        let v = region_check(
            &Vector3::new(100.0, 50.0, 100.0),
            &Vector3::new(0.0, 0.6, 0.8),
            &geom(),
        )
        .unwrap();
        assert_eq!(v.status, RegionStatus::Unknown);
    }

    #[test]
    fn rejects_non_unit_direction() {
        assert!(region_check(
            &Vector3::new(0.0, 0.0, 0.0),
            &Vector3::new(0.0, 0.0, 2.0),
            &geom()
        )
        .is_err());
    }

    #[test]
    fn infeasible_implies_empirically_infeasible() {
        // Necessary-condition soundness on a radial sweep of the cylinder.
        let g = geom();
        let id = Matrix3::identity();
        for i in 0..40 {
            let angle = i as f64 * 0.157;
            let radius = 2.0 + (i as f64) * 1.5;
            let p = Vector3::new(radius * angle.cos(), radius * angle.sin(), 120.0);
            let verdict = region_check(&p, &Vector3::new(0.0, 0.0, 1.0), &g).unwrap();
            if verdict.status == RegionStatus::Infeasible {
                assert!(!empirical_feasibility(&p, &id, &g));
            }
        }
    }

    #[test]
    fn margin_changes_sign_exactly_at_boundary() {
        let g = geom();
        let d4 = g.links.d4;
        let n = Vector3::new(0.0, 0.0, 1.0);
        let below = region_check(&Vector3::new(d4 - 1e-6, 0.0, 50.0), &n, &g).unwrap();
        let above = region_check(&Vector3::new(d4 + 1e-6, 0.0, 50.0), &n, &g).unwrap();
        assert_eq!(below.status, RegionStatus::Infeasible);
        assert_eq!(above.status, RegionStatus::Feasible);
        assert!(below.margin.unwrap() < 0.0 && above.margin.unwrap() > 0.0);
        // Continuity: margins shrink to zero together with the offset.
        assert!(below.margin.unwrap().abs() < 1e-3);
        assert!(above.margin.unwrap().abs() < 1e-3);
    }

    #[test]
    fn empirical_true_outside_cylinder() {
        let g = geom();
        let id = Matrix3::identity();
        assert!(empirical_feasibility(&Vector3::new(100.0, 200.0, 300.0), &id, &g));
        assert!(!empirical_feasibility(&Vector3::new(0.0, 0.0, 300.0), &id, &g));
    }
}
