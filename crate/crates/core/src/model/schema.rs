//! Versioned structured-text model documents (TOML).
//!
//! Top-level keys: `schema_version`, `name`, `kind`, `gravity`, `bodies`
//! (each with `name`, `mass`, `com`, `inertia` as a scalar for planar or a
//! 3x3 row list for spatial, and `joint = {type, parent, origin, axis, name}`),
//! `contacts`, `end_effector`, optional `speed_point`, and `actuated` (joint
//! names). All numbers are SI.

use super::{Body, BodyPoint, Joint, JointType, ModelKind, RobotModel};
use crate::error::{Error, Result};
use nalgebra::{Matrix3, Vector3};
use serde::Deserialize;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDoc {
    #[serde(default = "default_version")]
    schema_version: u32,
    name: String,
    kind: String,
    gravity: Option<[f64; 3]>,
    bodies: Vec<BodyDoc>,
    #[serde(default)]
    contacts: Vec<PointDoc>,
    end_effector: Option<AnonPointDoc>,
    speed_point: Option<AnonPointDoc>,
    #[serde(default)]
    actuated: Vec<String>,
}

fn default_version() -> u32 {
    1
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BodyDoc {
    name: String,
    mass: f64,
    #[serde(default)]
    com: [f64; 3],
    inertia: InertiaDoc,
    joint: JointDoc,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum InertiaDoc {
    Scalar(f64),
    Full([[f64; 3]; 3]),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct JointDoc {
    #[serde(rename = "type")]
    jtype: String,
    parent: String,
    #[serde(default)]
    origin: [f64; 3],
    axis: Option<[f64; 3]>,
    name: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PointDoc {
    name: String,
    body: String,
    #[serde(default)]
    offset: [f64; 3],
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AnonPointDoc {
    body: String,
    #[serde(default)]
    offset: [f64; 3],
}

fn v3(a: [f64; 3]) -> Vector3<f64> {
    Vector3::new(a[0], a[1], a[2])
}

/// Parse and validate a model document.
pub fn load_model(text: &str) -> Result<RobotModel> {
    let doc: ModelDoc = toml::from_str(text).map_err(|e| Error::Schema {
        path: e
            .span()
            .map(|s| format!("offset {}..{}", s.start, s.end))
            .unwrap_or_else(|| "document".into()),
        reason: e.message().to_string(),
    })?;
    if doc.schema_version != 1 {
        return Err(Error::Schema {
            path: "schema_version".into(),
            reason: format!("unsupported version {}", doc.schema_version),
        });
    }
    let kind = match doc.kind.as_str() {
        "planar" => ModelKind::Planar,
        "spatial" => ModelKind::Spatial,
        other => {
            return Err(Error::Schema {
                path: "kind".into(),
                reason: format!("expected `planar` or `spatial`, got `{other}`"),
            })
        }
    };
    let gravity = doc.gravity.map(v3).unwrap_or(match kind {
        ModelKind::Planar => Vector3::new(0.0, -9.81, 0.0),
        ModelKind::Spatial => Vector3::new(0.0, 0.0, -9.81),
    });

    let body_index = |name: &str, bodies: &[BodyDoc], upto: usize| -> Option<usize> {
        bodies[..upto].iter().position(|b| b.name == name)
    };

    let mut bodies = Vec::new();
    let mut joints = Vec::new();
    for (i, b) in doc.bodies.iter().enumerate() {
        let path = format!("bodies[{i}] (`{}`)", b.name);
        let inertia = match &b.inertia {
            InertiaDoc::Scalar(izz) => {
                if kind == ModelKind::Spatial {
                    return Err(Error::Schema {
                        path: format!("{path}.inertia"),
                        reason: "spatial bodies need a full 3x3 inertia".into(),
                    });
                }
                Matrix3::from_diagonal(&Vector3::new(0.0, 0.0, *izz))
            }
            InertiaDoc::Full(rows) => Matrix3::from_fn(|r, c| rows[r][c]),
        };
        let parent = if b.joint.parent == "world" {
            None
        } else {
            match body_index(&b.joint.parent, &doc.bodies, doc.bodies.len()) {
                // self/forward references surface as cycles in assemble()
                Some(p) => Some(p),
                None => {
                    return Err(Error::Schema {
                        path: format!("{path}.joint.parent"),
                        reason: format!("unknown parent body `{}`", b.joint.parent),
                    })
                }
            }
        };
        let axis = b.joint.axis.map(v3);
        let jtype = match b.joint.jtype.as_str() {
            "floating-planar" => JointType::FloatingPlanar,
            "floating-spatial" => JointType::FloatingSpatial,
            "revolute" => {
                let axis = axis.unwrap_or_else(|| Vector3::z());
                if kind == ModelKind::Planar && (axis - Vector3::z()).norm() > 1e-12 {
                    return Err(Error::Schema {
                        path: format!("{path}.joint.axis"),
                        reason: "planar revolute joints rotate about z".into(),
                    });
                }
                JointType::Revolute { axis }
            }
            "prismatic" => {
                let axis = axis.ok_or_else(|| Error::Schema {
                    path: format!("{path}.joint.axis"),
                    reason: "prismatic joint needs an axis".into(),
                })?;
                if kind == ModelKind::Planar && axis.z.abs() > 1e-12 {
                    return Err(Error::Schema {
                        path: format!("{path}.joint.axis"),
                        reason: "planar prismatic axis must lie in the x-y plane".into(),
                    });
                }
                JointType::Prismatic {
                    axis: axis.normalize(),
                }
            }
            "fixed" => JointType::Fixed,
            other => {
                return Err(Error::Schema {
                    path: format!("{path}.joint.type"),
                    reason: format!("unknown joint type `{other}`"),
                })
            }
        };
        match (&jtype, kind) {
            (JointType::FloatingPlanar, ModelKind::Spatial) => {
                return Err(Error::Schema {
                    path: format!("{path}.joint.type"),
                    reason: "planar base in a spatial model".into(),
                })
            }
            (JointType::FloatingSpatial, ModelKind::Planar) => {
                return Err(Error::Schema {
                    path: format!("{path}.joint.type"),
                    reason: "spatial base in a planar model".into(),
                })
            }
            _ => {}
        }
        // a self-parent would have resolved to this body's own index
        if b.joint.parent == b.name {
            return Err(Error::CyclicTree(b.name.clone()));
        }
        bodies.push(Body {
            name: b.name.clone(),
            mass: b.mass,
            com: v3(b.com),
            inertia,
        });
        joints.push(Joint {
            name: b.joint.name.clone().unwrap_or_else(|| b.name.clone()),
            jtype,
            parent,
            origin: v3(b.joint.origin),
        });
    }

    let find_body = |name: &str| -> Result<usize> {
        doc.bodies
            .iter()
            .position(|b| b.name == name)
            .ok_or_else(|| Error::UnknownBody(name.into()))
    };
    let contacts = doc
        .contacts
        .iter()
        .map(|c| {
            Ok(BodyPoint {
                name: c.name.clone(),
                body: find_body(&c.body)?,
                offset: v3(c.offset),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let end_effector = doc
        .end_effector
        .as_ref()
        .map(|p| {
            Ok(BodyPoint {
                name: "end_effector".into(),
                body: find_body(&p.body)?,
                offset: v3(p.offset),
            })
        })
        .transpose()?;
    let speed_point = doc
        .speed_point
        .as_ref()
        .map(|p| {
            Ok(BodyPoint {
                name: "speed_point".into(),
                body: find_body(&p.body)?,
                offset: v3(p.offset),
            })
        })
        .transpose()?;
    let actuated = doc
        .actuated
        .iter()
        .map(|name| {
            joints
                .iter()
                .position(|j| &j.name == name)
                .ok_or_else(|| Error::UnknownJoint(name.clone()))
        })
        .collect::<Result<Vec<_>>>()?;

    RobotModel::assemble(
        doc.name,
        kind,
        gravity,
        bodies,
        joints,
        contacts,
        end_effector,
        speed_point,
        actuated,
    )
}
