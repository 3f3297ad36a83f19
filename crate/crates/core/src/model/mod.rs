//! Robot models as kinematic trees with a floating base.
//!
//! A model is a list of rigid bodies, each attached to its parent by exactly
//! one joint, plus named body-fixed points used as leg-end contacts, the end
//! effector, and the forward-speed reference point. Planar models live in the
//! x-y plane (y up) and embed into the world with a zero third coordinate;
//! spatial models use roll-pitch-yaw base orientation.

mod fk;
mod schema;

pub use fk::{Fk, FkVel};
pub use schema::load_model;

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector, Matrix3, Vector3};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Planar,
    Spatial,
}

#[derive(Debug, Clone, PartialEq)]
pub enum JointType {
    /// 3-DOF planar base: x, y, rotation about world z. Parent must be the world.
    FloatingPlanar,
    /// 6-DOF spatial base: x, y, z, roll, pitch, yaw. Parent must be the world.
    ///
    /// Orientation is R = Rz(yaw) * Ry(pitch) * Rx(roll); the representation is
    /// singular at pitch = +/- pi/2 and states near it are rejected by
    /// [`RobotModel::check_state`].
    FloatingSpatial,
    /// 1-DOF rotation about `axis` (parent frame). Planar models force the z axis.
    Revolute { axis: Vector3<f64> },
    /// 1-DOF translation along `axis` (parent frame).
    Prismatic { axis: Vector3<f64> },
    /// Rigid attachment, 0 DOF.
    Fixed,
}

impl JointType {
    pub fn dofs(&self) -> usize {
        match self {
            JointType::FloatingPlanar => 3,
            JointType::FloatingSpatial => 6,
            JointType::Revolute { .. } | JointType::Prismatic { .. } => 1,
            JointType::Fixed => 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Joint {
    pub name: String,
    pub jtype: JointType,
    /// Parent body index; `None` is the world.
    pub parent: Option<usize>,
    /// Fixed translation from the parent frame to the joint frame.
    pub origin: Vector3<f64>,
}

#[derive(Debug, Clone)]
pub struct Body {
    pub name: String,
    pub mass: f64,
    /// Center of mass in the body frame.
    pub com: Vector3<f64>,
    /// Rotational inertia about the center of mass, body frame.
    pub inertia: Matrix3<f64>,
}

/// A named body-fixed point.
#[derive(Debug, Clone)]
pub struct BodyPoint {
    pub name: String,
    pub body: usize,
    pub offset: Vector3<f64>,
}

#[derive(Debug, Clone)]
pub struct RobotModel {
    pub name: String,
    pub kind: ModelKind,
    pub gravity: Vector3<f64>,
    pub bodies: Vec<Body>,
    /// One joint per body, same index.
    pub joints: Vec<Joint>,
    pub contacts: Vec<BodyPoint>,
    pub end_effector: Option<BodyPoint>,
    /// Point whose world-x velocity defines the forward speed; defaults to the
    /// base origin.
    pub speed_point: BodyPoint,
    /// Actuated joint indices (each a 1-DOF joint), defining the input map B.
    pub actuated: Vec<usize>,
    /// Generalized coordinate offset of each body's joint.
    pub q_offset: Vec<usize>,
    /// Total number of generalized coordinates.
    pub nq: usize,
    /// Per body, the generalized-coordinate indices on its root-to-body chain.
    pub(crate) chains: Vec<Vec<usize>>,
}

impl RobotModel {
    /// Builds the derived fields and checks the tree invariants. Used by the
    /// schema loader and the programmatic fixture builders.
    pub fn assemble(
        name: String,
        kind: ModelKind,
        gravity: Vector3<f64>,
        bodies: Vec<Body>,
        joints: Vec<Joint>,
        contacts: Vec<BodyPoint>,
        end_effector: Option<BodyPoint>,
        speed_point: Option<BodyPoint>,
        actuated: Vec<usize>,
    ) -> Result<Self> {
        assert_eq!(bodies.len(), joints.len());
        let nb = bodies.len();
        for (i, j) in joints.iter().enumerate() {
            if let Some(p) = j.parent {
                if p >= i {
                    // forward or self reference: with parent-before-child
                    // ordering this is exactly a cycle
                    return Err(Error::CyclicTree(bodies[i].name.clone()));
                }
            }
            let floating = matches!(
                j.jtype,
                JointType::FloatingPlanar | JointType::FloatingSpatial
            );
            if floating && j.parent.is_some() {
                return Err(Error::Schema {
                    path: format!("bodies[{i}].joint"),
                    reason: "floating base must attach to the world".into(),
                });
            }
        }
        let roots = joints.iter().filter(|j| j.parent.is_none()).count();
        if roots != 1 {
            return Err(Error::Schema {
                path: "bodies".into(),
                reason: format!("expected exactly one world-rooted body, found {roots}"),
            });
        }
        for (i, b) in bodies.iter().enumerate() {
            if !(b.mass > 0.0) {
                return Err(Error::Schema {
                    path: format!("bodies[{i}].mass"),
                    reason: format!("nonpositive mass {} for `{}`", b.mass, b.name),
                });
            }
            let sym = (b.inertia - b.inertia.transpose()).amax();
            if sym > 1e-12 {
                return Err(Error::Schema {
                    path: format!("bodies[{i}].inertia"),
                    reason: "inertia matrix not symmetric".into(),
                });
            }
            let eig = b.inertia.symmetric_eigenvalues();
            if eig.min() < -1e-12 {
                return Err(Error::Schema {
                    path: format!("bodies[{i}].inertia"),
                    reason: "inertia matrix not positive semidefinite".into(),
                });
            }
        }

        let mut q_offset = vec![0usize; nb];
        let mut nq = 0;
        for i in 0..nb {
            q_offset[i] = nq;
            nq += joints[i].jtype.dofs();
        }
        let mut chains: Vec<Vec<usize>> = Vec::with_capacity(nb);
        for i in 0..nb {
            let mut chain = match joints[i].parent {
                Some(p) => chains[p].clone(),
                None => Vec::new(),
            };
            chain.extend(q_offset[i]..q_offset[i] + joints[i].jtype.dofs());
            chains.push(chain);
        }

        for a in &actuated {
            if joints[*a].jtype.dofs() != 1 {
                return Err(Error::Schema {
                    path: format!("actuated `{}`", joints[*a].name),
                    reason: "only 1-DOF joints can be actuated".into(),
                });
            }
        }
        let speed_point = speed_point.unwrap_or(BodyPoint {
            name: "speed_point".into(),
            body: 0,
            offset: Vector3::zeros(),
        });

        Ok(Self {
            name,
            kind,
            gravity,
            bodies,
            joints,
            contacts,
            end_effector,
            speed_point,
            actuated,
            q_offset,
            nq,
            chains,
        })
    }

    pub fn nv(&self) -> usize {
        self.nq
    }

    /// Number of actuators (columns of B).
    pub fn nu(&self) -> usize {
        self.actuated.len()
    }

    /// The input distribution matrix B (nq x nu, entries in {0, 1}).
    pub fn input_matrix(&self) -> DMatrix<f64> {
        let mut b = DMatrix::zeros(self.nq, self.nu());
        for (col, joint) in self.actuated.iter().enumerate() {
            b[(self.q_offset[*joint], col)] = 1.0;
        }
        b
    }

    /// Constraint rows contributed per contact point: 2 planar, 3 spatial.
    pub fn contact_rows(&self) -> usize {
        match self.kind {
            ModelKind::Planar => 2,
            ModelKind::Spatial => 3,
        }
    }

    /// Generalized-coordinate indices of the horizontal base translation.
    pub fn horizontal_coords(&self) -> &'static [usize] {
        match self.kind {
            ModelKind::Planar => &[0],
            ModelKind::Spatial => &[0, 1],
        }
    }

    /// Index of the vertical base coordinate.
    pub fn vertical_coord(&self) -> usize {
        match self.kind {
            ModelKind::Planar => 1,
            ModelKind::Spatial => 2,
        }
    }

    /// (roll, pitch) coordinate indices. Planar bases expose pitch only.
    pub fn roll_pitch_coords(&self) -> (Option<usize>, Option<usize>) {
        match self.kind {
            ModelKind::Planar => (None, Some(2)),
            ModelKind::Spatial => (Some(3), Some(4)),
        }
    }

    /// Look up a named point: a contact name, `end_effector`, `speed_point`,
    /// or `base` (the base origin).
    pub fn point(&self, id: &str) -> Result<BodyPoint> {
        if id == "base" {
            return Ok(BodyPoint {
                name: "base".into(),
                body: 0,
                offset: Vector3::zeros(),
            });
        }
        if id == "end_effector" {
            return self
                .end_effector
                .clone()
                .ok_or_else(|| Error::UnknownPoint(id.into()));
        }
        if id == "speed_point" {
            return Ok(self.speed_point.clone());
        }
        self.contacts
            .iter()
            .find(|c| c.name == id)
            .cloned()
            .ok_or_else(|| Error::UnknownPoint(id.into()))
    }

    /// Rejects non-finite states and spatial states near the pitch singularity.
    pub fn check_state(&self, x: &AgentState) -> Result<()> {
        if x.q.len() != self.nq || x.v.len() != self.nq {
            return Err(Error::Dimension {
                expected: self.nq,
                got: x.q.len().max(x.v.len()),
            });
        }
        if !x.q.iter().chain(x.v.iter()).all(|c| c.is_finite()) {
            return Err(Error::Simulation("non-finite state".into()));
        }
        if self.kind == ModelKind::Spatial {
            let pitch = x.q[4];
            if (pitch.abs() - std::f64::consts::FRAC_PI_2).abs() < 0.05 {
                return Err(Error::Simulation(format!(
                    "pitch {pitch:.3} rad within 0.05 of the roll-pitch-yaw singularity"
                )));
            }
        }
        Ok(())
    }
}

/// Configuration and velocity of one agent.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentState {
    pub q: DVector<f64>,
    pub v: DVector<f64>,
}

impl AgentState {
    pub fn new(q: DVector<f64>, v: DVector<f64>) -> Self {
        assert_eq!(q.len(), v.len());
        Self { q, v }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            q: DVector::zeros(n),
            v: DVector::zeros(n),
        }
    }

    /// Stacked col(q, v).
    pub fn to_vector(&self) -> DVector<f64> {
        let n = self.q.len();
        let mut out = DVector::zeros(2 * n);
        out.rows_mut(0, n).copy_from(&self.q);
        out.rows_mut(n, n).copy_from(&self.v);
        out
    }

    pub fn from_vector(x: &DVector<f64>) -> Self {
        let n = x.len() / 2;
        Self {
            q: x.rows(0, n).into_owned(),
            v: x.rows(n, n).into_owned(),
        }
    }
}

/// States of two structurally identical agents.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedState {
    pub agent1: AgentState,
    pub agent2: AgentState,
}

impl AugmentedState {
    pub fn new(agent1: AgentState, agent2: AgentState) -> Self {
        Self { agent1, agent2 }
    }

    pub fn to_vector(&self) -> DVector<f64> {
        let a = self.agent1.to_vector();
        let b = self.agent2.to_vector();
        let mut out = DVector::zeros(a.len() + b.len());
        out.rows_mut(0, a.len()).copy_from(&a);
        out.rows_mut(a.len(), b.len()).copy_from(&b);
        out
    }

    pub fn from_vector(x: &DVector<f64>) -> Self {
        let half = x.len() / 2;
        Self {
            agent1: AgentState::from_vector(&x.rows(0, half).into_owned()),
            agent2: AgentState::from_vector(&x.rows(half, half).into_owned()),
        }
    }

    pub fn agent(&self, i: usize) -> &AgentState {
        match i {
            0 => &self.agent1,
            1 => &self.agent2,
            _ => panic!("agent index {i} out of range"),
        }
    }
}

/// World position of a named point. Planar models embed with third coordinate 0.
pub fn point_position(model: &RobotModel, q: &DVector<f64>, point_id: &str) -> Result<Vector3<f64>> {
    let point = model.point(point_id)?;
    let fk = Fk::new(model, q);
    Ok(fk.body_point(&point))
}

/// World Jacobian (3 x nq) of a named point.
pub fn point_jacobian(model: &RobotModel, q: &DVector<f64>, point_id: &str) -> Result<DMatrix<f64>> {
    let point = model.point(point_id)?;
    let fk = Fk::new(model, q);
    Ok(fk.point_jacobian_of(model, &point))
}

/// The Jacobian-rate product d/dt(J(q)) * qdot for a named point, i.e. the
/// point acceleration at zero generalized acceleration.
pub fn jdot_v(
    model: &RobotModel,
    q: &DVector<f64>,
    v: &DVector<f64>,
    point_id: &str,
) -> Result<Vector3<f64>> {
    let point = model.point(point_id)?;
    let fk = Fk::new(model, q);
    let vel = FkVel::new(model, &fk, v);
    Ok(vel.point_bias(&fk, &point))
}
