//! Robot geometry: the Denavit-Hartenberg table and link constants.

use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;
use std::fs;
use std::path::Path;
use thiserror::Error;

/// One row of the D-H table.
///
/// `a` [mm] and `alpha` [rad] are the usual link length and twist, `d` [mm]
/// the joint offset. `delta` [rad] is an extra rotation about the new z axis
/// applied after the twist, which absorbs the fixed frame offsets of the
/// RViz/URDF frame convention.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DhRow {
    pub a: f64,
    pub alpha: f64,
    pub d: f64,
    pub delta: f64,
}

/// Signed link constants, all strictly positive [mm].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkLengths {
    pub d1: f64,
    pub a2: f64,
    pub a3: f64,
    pub d4: f64,
    pub d5: f64,
    pub d6: f64,
}

/// D-H parameter table plus the link constants used by the closed-form
/// inverse kinematics.
///
/// The two views must describe the same chain: forward kinematics built from
/// `dh` has to satisfy the consistency residuals expressed in terms of
/// `links` (see [`crate::kinematics::consistency_residuals`]); the test suite
/// enforces this for the bundled default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotGeometry {
    pub dh: [DhRow; 6],
    pub links: LinkLengths,
}

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("link constant {name} must be positive, got {value}")]
    NonPositiveLink { name: &'static str, value: f64 },
    #[error("failed to read geometry file: {0}")]
    Io(#[from] std::io::Error),
    #[error("failed to parse geometry file: {0}")]
    Parse(#[from] serde_json::Error),
}

impl RobotGeometry {
    /// Bundled myCobot-280 geometry.
    ///
    /// d1, a2, a3, d4 and d5 are fixed by the arm itself; d6 is the vendor's
    /// published flange offset and is an external input — any positive value
    /// yields a consistent chain because forward and inverse kinematics share
    /// this record.
    pub fn mycobot280() -> Self {
        let links = LinkLengths {
            d1: 131.56,
            a2: 110.4,
            a3: 96.0,
            d4: 64.62,
            d5: 73.18,
            d6: 48.6,
        };
        RobotGeometry {
            dh: [
                DhRow { a: 0.0, alpha: FRAC_PI_2, d: links.d1, delta: -FRAC_PI_2 },
                DhRow { a: -links.a2, alpha: 0.0, d: 0.0, delta: 0.0 },
                DhRow { a: -links.a3, alpha: 0.0, d: 0.0, delta: -FRAC_PI_2 },
                DhRow { a: 0.0, alpha: FRAC_PI_2, d: links.d4, delta: FRAC_PI_2 },
                DhRow { a: 0.0, alpha: -FRAC_PI_2, d: links.d5, delta: 0.0 },
                DhRow { a: 0.0, alpha: 0.0, d: links.d6, delta: 0.0 },
            ],
            links,
        }
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        let l = &self.links;
        for (name, value) in [
            ("d1", l.d1),
            ("a2", l.a2),
            ("a3", l.a3),
            ("d4", l.d4),
            ("d5", l.d5),
            ("d6", l.d6),
        ] {
            if !(value > 0.0) {
                return Err(GeometryError::NonPositiveLink { name, value });
            }
        }
        Ok(())
    }

    pub fn from_json_str(text: &str) -> Result<Self, GeometryError> {
        let geom: RobotGeometry = serde_json::from_str(text)?;
        geom.validate()?;
        Ok(geom)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, GeometryError> {
        Self::from_json_str(&fs::read_to_string(path)?)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("geometry serializes")
    }
}

impl Default for RobotGeometry {
    fn default() -> Self {
        Self::mycobot280()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_links_are_positive() {
        RobotGeometry::mycobot280().validate().unwrap();
    }

    #[test]
    fn json_round_trip() {
        let geom = RobotGeometry::mycobot280();
        let text = geom.to_json_string();
        let back = RobotGeometry::from_json_str(&text).unwrap();
        assert_eq!(geom, back);
    }

    #[test]
    fn rejects_non_positive_link() {
        let mut geom = RobotGeometry::mycobot280();
        geom.links.d6 = 0.0;
        let text = serde_json::to_string(&geom).unwrap();
        assert!(matches!(
            RobotGeometry::from_json_str(&text),
            Err(GeometryError::NonPositiveLink { name: "d6", .. })
        ));
    }

    #[test]
    fn rejects_malformed_json() {
        assert!(matches!(
            RobotGeometry::from_json_str("{\"dh\": []}"),
            Err(GeometryError::Parse(_))
        ));
    }
}
