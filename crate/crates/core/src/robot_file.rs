//! JSON robot description files.
//!
//! ```json
//! {
//!   "name": "pendulum",
//!   "task_dim": 2,
//!   "base_frame": { "xyz": [0.0, 0.0, 0.0], "rpy": [0.0, 0.0, 0.0] },
//!   "joints": [ { "axis": [0.0, 0.0, 1.0], "origin": [0.0, 0.0, 0.0], "limits": [-1.0, 1.0] } ],
//!   "links":  [ { "mass": 1.0, "com": [1.0, 0.0, 0.0], "inertia": [[..], [..], [..]] } ]
//! }
//! ```
//!
//! `base_frame`, `limits` and `inertia` are optional. `rpy` follows the
//! URDF convention (fixed-axis roll, pitch, yaw). Unknown keys are rejected.

use std::path::Path;

use nalgebra::{Isometry3, Matrix3, Translation3, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use crate::chain_model::{ChainModel, JointSpec, LinkSpec, TaskDim};
use crate::error::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RobotDoc {
    name: String,
    task_dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    base_frame: Option<FrameDoc>,
    joints: Vec<JointDoc>,
    links: Vec<LinkDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FrameDoc {
    #[serde(default)]
    xyz: [f64; 3],
    #[serde(default)]
    rpy: [f64; 3],
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JointDoc {
    axis: [f64; 3],
    origin: [f64; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    limits: Option<[f64; 2]>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LinkDoc {
    mass: f64,
    com: [f64; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    inertia: Option<[[f64; 3]; 3]>,
}

pub fn parse_robot_str(text: &str) -> Result<ChainModel> {
    let doc: RobotDoc = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
    build(doc).map_err(|e| match e {
        Error::Schema(_) => e,
        other => Error::Schema(other.to_string()),
    })
}

pub fn parse_robot_bytes(bytes: &[u8]) -> Result<ChainModel> {
    let text = std::str::from_utf8(bytes).map_err(|e| Error::Schema(e.to_string()))?;
    parse_robot_str(text)
}

pub fn load_robot_file(path: impl AsRef<Path>) -> Result<ChainModel> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Schema(format!("{}: {e}", path.display())))?;
    parse_robot_str(&text)
}

fn build(doc: RobotDoc) -> Result<ChainModel> {
    let task_dim = TaskDim::from_dim(doc.task_dim)?;
    let base_frame = match doc.base_frame {
        None => Isometry3::identity(),
        Some(f) => Isometry3::from_parts(
            Translation3::new(f.xyz[0], f.xyz[1], f.xyz[2]),
            UnitQuaternion::from_euler_angles(f.rpy[0], f.rpy[1], f.rpy[2]),
        ),
    };
    let joints = doc
        .joints
        .into_iter()
        .map(|j| JointSpec {
            axis: Vector3::from(j.axis),
            origin: Vector3::from(j.origin),
            limits: j.limits.map(|[lo, hi]| (lo, hi)),
        })
        .collect();
    let links = doc
        .links
        .into_iter()
        .map(|l| LinkSpec {
            mass: l.mass,
            com: Vector3::from(l.com),
            inertia: l.inertia.map(|rows| {
                Matrix3::from_row_slice(&rows.iter().flatten().copied().collect::<Vec<_>>())
            }),
        })
        .collect();
    ChainModel::new(doc.name, joints, links, task_dim, base_frame)
}

/// Pretty JSON for `model`, terminated by a newline.
pub fn to_robot_json(model: &ChainModel) -> String {
    let base = model.base_frame();
    let base_frame = if *base == Isometry3::identity() {
        None
    } else {
        let (roll, pitch, yaw) = base.rotation.euler_angles();
        Some(FrameDoc {
            xyz: base.translation.vector.into(),
            rpy: [roll, pitch, yaw],
        })
    };
    let doc = RobotDoc {
        name: model.name().to_string(),
        task_dim: model.task_dim().dim(),
        base_frame,
        joints: model
            .joints()
            .iter()
            .map(|j| JointDoc {
                axis: j.axis.into(),
                origin: j.origin.into(),
                limits: j.limits.map(|(lo, hi)| [lo, hi]),
            })
            .collect(),
        links: model
            .links()
            .iter()
            .map(|l| LinkDoc {
                mass: l.mass,
                com: l.com.into(),
                inertia: l.inertia.map(|m| {
                    let mut rows = [[0.0; 3]; 3];
                    for (r, row) in rows.iter_mut().enumerate() {
                        for (c, v) in row.iter_mut().enumerate() {
                            *v = m[(r, c)];
                        }
                    }
                    rows
                }),
            })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("robot document serializes");
    text.push('\n');
    text
}

#[cfg(test)]
mod tests {
    use super::*;

    const PENDULUM: &str = r#"{
        "name": "p", "task_dim": 2,
        "joints": [{"axis": [0, 0, 1], "origin": [0, 0, 0], "limits": [-1, 1]}],
        "links": [{"mass": 1.5, "com": [1, 0, 0]}]
    }"#;

    #[test]
    fn parses_minimal_file() {
        let m = parse_robot_str(PENDULUM).unwrap();
        assert_eq!(m.dof(), 1);
        assert_eq!(m.task_dim(), TaskDim::Planar);
        assert_eq!(m.total_mass(), 1.5);
        assert_eq!(m.joints()[0].limits, Some((-1.0, 1.0)));
    }

    #[test]
    fn unknown_key_is_named() {
        let text = PENDULUM.replace("\"mass\"", "\"colour\": \"red\", \"mass\"");
        let err = parse_robot_str(&text).unwrap_err();
        assert!(err.to_string().contains("colour"), "{err}");
        let text = PENDULUM.replace("\"task_dim\"", "\"colour\": 1, \"task_dim\"");
        assert!(parse_robot_str(&text)
            .unwrap_err()
            .to_string()
            .contains("colour"));
    }

    #[test]
    fn invalid_models_are_schema_errors() {
        let text = PENDULUM.replace("\"task_dim\": 2", "\"task_dim\": 4");
        assert!(matches!(parse_robot_str(&text), Err(Error::Schema(_))));
        let text = PENDULUM.replace("[0, 0, 1]", "[0, 0, 2]");
        assert!(matches!(parse_robot_str(&text), Err(Error::Schema(_))));
        assert!(matches!(
            parse_robot_bytes(&[0xff, 0xfe]),
            Err(Error::Schema(_))
        ));
    }

    #[test]
    fn base_frame_and_inertia_round_trip() {
        let text = r#"{
            "name": "arm", "task_dim": 3,
            "base_frame": {"xyz": [0.1, 0.2, 0.3], "rpy": [0.1, -0.2, 0.3]},
            "joints": [{"axis": [1, 0, 0], "origin": [0, 0, 0]}],
            "links": [{"mass": 2, "com": [0, 0, -1],
                       "inertia": [[0.1, 0.01, 0], [0.01, 0.2, 0], [0, 0, 0.3]]}]
        }"#;
        let m = parse_robot_str(text).unwrap();
        let again = parse_robot_str(&to_robot_json(&m)).unwrap();
        assert_eq!(m.links(), again.links());
        assert_eq!(m.joints(), again.joints());
        let d = m.base_frame().inverse() * again.base_frame();
        assert!(d.translation.vector.norm() < 1e-12 && d.rotation.angle() < 1e-12);
    }
}
