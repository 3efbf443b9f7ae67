//! Motion-planning toolkit for a 6-DOF serial manipulator (myCobot-280 geometry).
//!
//! The crate is organized as a pipeline:
//!
//! 1. [`geometry`] — the Denavit-Hartenberg table and link constants,
//!    loadable from JSON or taken from the bundled myCobot-280 defaults.
//! 2. [`kinematics`] — forward kinematics, Jacobian, manipulability and the
//!    consistency residuals used to validate solutions.
//! 3. [`ik`] — enumeration of all real inverse-kinematics solutions for a
//!    target pose, by case-split closed forms plus 1-D root isolation, with
//!    forward-kinematics verification as the correctness filter.
//! 4. [`region`] — analytic feasibility predicates for fixed end-effector
//!    orientations, plus a sampling fallback.
//! 5. [`trajectory`] — straight-line via-point generation under uniform or
//!    quintic time scaling, solving IK at every via-point.
//! 6. [`pathopt`] — layered solution graph, six edge-cost functions, Dijkstra
//!    shortest path with brute-force and random baselines.
//! 7. [`cli`] — the end-to-end pipeline driver behind the `jointpath` binary.
//!
//! All quantities are millimeters and radians. Angles are normalized to
//! `(-pi, pi]`.

pub use nalgebra;

pub mod cli;
pub mod geometry;
pub mod ik;
pub mod kinematics;
pub mod pathopt;
pub mod region;
pub mod trajectory;

pub use geometry::{DhRow, GeometryError, LinkLengths, RobotGeometry};
pub use ik::{inverse_kinematics, IkSolutionSet};
pub use kinematics::{
    forward_kinematics, manipulability, position_jacobian, JointConfig, Pose, WristCenter,
};
pub use pathopt::{build_graph, shortest_path, CostKind, CostSpec, PathResult, SolutionGraph};
pub use region::{region_check, RegionStatus, RegionVerdict};
pub use trajectory::{plan_trajectory, MotionProfile, Scenario, SolutionLayer};
