//! Forward kinematics: body poses, per-DOF world twists, point Jacobians,
//! and velocity-dependent bias accelerations.

use super::{BodyPoint, JointType, ModelKind, RobotModel};
use nalgebra::{DMatrix, DVector, Matrix3, Vector3};

fn rot_z(a: f64) -> Matrix3<f64> {
    Matrix3::new(a.cos(), -a.sin(), 0.0, a.sin(), a.cos(), 0.0, 0.0, 0.0, 1.0)
}

fn rot_axis(axis: &Vector3<f64>, a: f64) -> Matrix3<f64> {
    nalgebra::Rotation3::from_axis_angle(&nalgebra::Unit::new_normalize(*axis), a).into_inner()
}

/// One generalized coordinate's instantaneous world twist: the velocity field
/// it induces for a unit rate is `v(p) = angular x p + linear`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Twist {
    pub angular: Vector3<f64>,
    pub linear: Vector3<f64>,
}

impl Twist {
    fn revolute(axis: Vector3<f64>, through: Vector3<f64>) -> Self {
        Twist {
            angular: axis,
            linear: through.cross(&axis),
        }
    }

    fn prismatic(axis: Vector3<f64>) -> Self {
        Twist {
            angular: Vector3::zeros(),
            linear: axis,
        }
    }

    pub fn velocity_at(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.angular.cross(p) + self.linear
    }
}

/// Position-level kinematics at a fixed configuration.
pub struct Fk {
    /// World rotation per body.
    pub rot: Vec<Matrix3<f64>>,
    /// World position of each body frame origin.
    pub pos: Vec<Vector3<f64>>,
    pub(crate) twists: Vec<Twist>,
    nq: usize,
}

impl Fk {
    pub fn new(model: &RobotModel, q: &DVector<f64>) -> Self {
        assert_eq!(q.len(), model.nq, "configuration dimension mismatch");
        let nb = model.bodies.len();
        let mut rot = Vec::with_capacity(nb);
        let mut pos = Vec::with_capacity(nb);
        let mut twists = vec![
            Twist {
                angular: Vector3::zeros(),
                linear: Vector3::zeros()
            };
            model.nq
        ];
        for i in 0..nb {
            let joint = &model.joints[i];
            let (pr, pp) = match joint.parent {
                Some(p) => (rot[p], pos[p]),
                None => (Matrix3::identity(), Vector3::zeros()),
            };
            let o = model.q_offset[i];
            let (r, p) = match &joint.jtype {
                JointType::FloatingPlanar => {
                    let base = Vector3::new(q[o], q[o + 1], 0.0);
                    twists[o] = Twist::prismatic(Vector3::x());
                    twists[o + 1] = Twist::prismatic(Vector3::y());
                    twists[o + 2] = Twist::revolute(Vector3::z(), base);
                    (rot_z(q[o + 2]), base)
                }
                JointType::FloatingSpatial => {
                    let base = Vector3::new(q[o], q[o + 1], q[o + 2]);
                    let (roll, pitch, yaw) = (q[o + 3], q[o + 4], q[o + 5]);
                    let rz = rot_z(yaw);
                    let rzy = rz * rot_axis(&Vector3::y(), pitch);
                    twists[o] = Twist::prismatic(Vector3::x());
                    twists[o + 1] = Twist::prismatic(Vector3::y());
                    twists[o + 2] = Twist::prismatic(Vector3::z());
                    // instantaneous roll-pitch-yaw axes for R = Rz*Ry*Rx
                    twists[o + 3] = Twist::revolute(rzy * Vector3::x(), base);
                    twists[o + 4] = Twist::revolute(rz * Vector3::y(), base);
                    twists[o + 5] = Twist::revolute(Vector3::z(), base);
                    (rzy * rot_axis(&Vector3::x(), roll), base)
                }
                JointType::Revolute { axis } => {
                    let g = pp + pr * joint.origin;
                    let world_axis = pr * axis;
                    twists[o] = Twist::revolute(world_axis, g);
                    (pr * rot_axis(axis, q[o]), g)
                }
                JointType::Prismatic { axis } => {
                    let world_axis = pr * axis;
                    let g = pp + pr * joint.origin + world_axis * q[o];
                    twists[o] = Twist::prismatic(world_axis);
                    (pr, g)
                }
                JointType::Fixed => (pr, pp + pr * joint.origin),
            };
            rot.push(r);
            pos.push(p);
        }
        Fk {
            rot,
            pos,
            twists,
            nq: model.nq,
        }
    }

    /// World position of a body-fixed point.
    pub fn body_point(&self, point: &BodyPoint) -> Vector3<f64> {
        self.pos[point.body] + self.rot[point.body] * point.offset
    }

    /// 3 x nq world Jacobian of a body-fixed point.
    pub fn point_jacobian_of(&self, model: &RobotModel, point: &BodyPoint) -> DMatrix<f64> {
        let p = self.body_point(point);
        let mut jac = DMatrix::zeros(3, self.nq);
        for &k in &model.chains[point.body] {
            jac.set_column(k, &self.twists[k].velocity_at(&p));
        }
        jac
    }

}

/// Velocity-level kinematics: body angular velocities and the acceleration
/// field at zero generalized acceleration (the J-dot-v bias terms).
pub struct FkVel {
    /// Angular velocity per body.
    pub omega: Vec<Vector3<f64>>,
    /// Velocity of the body-frame origin.
    pub vel: Vec<Vector3<f64>>,
    /// Angular acceleration per body at qddot = 0.
    pub alpha_bias: Vec<Vector3<f64>>,
    /// Linear acceleration of the body-frame origin at qddot = 0.
    pub acc_bias: Vec<Vector3<f64>>,
}

impl FkVel {
    pub fn new(model: &RobotModel, fk: &Fk, v: &DVector<f64>) -> Self {
        let nb = model.bodies.len();
        let mut omega = Vec::with_capacity(nb);
        let mut vel = Vec::with_capacity(nb);
        let mut alpha = Vec::with_capacity(nb);
        let mut acc = Vec::with_capacity(nb);
        for i in 0..nb {
            let joint = &model.joints[i];
            let o = model.q_offset[i];
            let (w_p, v_p, al_p, ac_p, p_p) = match joint.parent {
                Some(p) => (omega[p], vel[p], alpha[p], acc[p], fk.pos[p]),
                None => (
                    Vector3::zeros(),
                    Vector3::zeros(),
                    Vector3::zeros(),
                    Vector3::zeros(),
                    Vector3::zeros(),
                ),
            };
            // transport of the parent-fixed attachment point to this joint origin
            let transport = |g: &Vector3<f64>| {
                let r = g - p_p;
                (
                    v_p + w_p.cross(&r),
                    ac_p + al_p.cross(&r) + w_p.cross(&w_p.cross(&r)),
                )
            };
            let (w, vl, al, ac) = match &joint.jtype {
                JointType::FloatingPlanar => (
                    Vector3::new(0.0, 0.0, v[o + 2]),
                    Vector3::new(v[o], v[o + 1], 0.0),
                    Vector3::zeros(),
                    Vector3::zeros(),
                ),
                JointType::FloatingSpatial => {
                    let a_roll = fk.twists[o + 3].angular;
                    let a_pitch = fk.twists[o + 4].angular;
                    let a_yaw = fk.twists[o + 5].angular;
                    let w = a_roll * v[o + 3] + a_pitch * v[o + 4] + a_yaw * v[o + 5];
                    // axis rates at fixed Euler accelerations
                    let da_pitch = (a_yaw * v[o + 5]).cross(&a_pitch);
                    let da_roll = (a_yaw * v[o + 5] + a_pitch * v[o + 4]).cross(&a_roll);
                    let al = da_roll * v[o + 3] + da_pitch * v[o + 4];
                    (
                        w,
                        Vector3::new(v[o], v[o + 1], v[o + 2]),
                        al,
                        Vector3::zeros(),
                    )
                }
                JointType::Revolute { .. } => {
                    let g = fk.pos[i];
                    let (vg, ag) = transport(&g);
                    let z = fk.twists[o].angular;
                    (
                        w_p + z * v[o],
                        vg,
                        al_p + w_p.cross(&z) * v[o],
                        ag,
                    )
                }
                JointType::Prismatic { .. } => {
                    let g = fk.pos[i];
                    // g moves with the joint coordinate; transport the
                    // parent-frame path then add relative terms
                    let (vg, ag) = transport(&g);
                    let z = fk.twists[o].linear;
                    (
                        w_p,
                        vg + z * v[o],
                        al_p,
                        ag + 2.0 * w_p.cross(&(z * v[o])),
                    )
                }
                JointType::Fixed => {
                    let g = fk.pos[i];
                    let (vg, ag) = transport(&g);
                    (w_p, vg, al_p, ag)
                }
            };
            omega.push(w);
            vel.push(vl);
            alpha.push(al);
            acc.push(ac);
        }
        FkVel {
            omega,
            vel,
            alpha_bias: alpha,
            acc_bias: acc,
        }
    }

    /// World velocity of a body-fixed point.
    pub fn point_velocity(&self, fk: &Fk, point: &BodyPoint) -> Vector3<f64> {
        let r = fk.rot[point.body] * point.offset;
        self.vel[point.body] + self.omega[point.body].cross(&r)
    }

    /// Point acceleration at zero generalized acceleration, i.e. Jdot * qdot.
    pub fn point_bias(&self, fk: &Fk, point: &BodyPoint) -> Vector3<f64> {
        let b = point.body;
        let r = fk.rot[b] * point.offset;
        self.acc_bias[b] + self.alpha_bias[b].cross(&r) + self.omega[b].cross(&self.omega[b].cross(&r))
    }
}

/// Materialized kinematic quantities shared by the dynamics routines.
pub(crate) fn world_inertia(model: &RobotModel, fk: &Fk, body: usize) -> Matrix3<f64> {
    let r = fk.rot[body];
    r * model.bodies[body].inertia * r.transpose()
}

pub(crate) fn world_com(model: &RobotModel, fk: &Fk, body: usize) -> Vector3<f64> {
    fk.pos[body] + fk.rot[body] * model.bodies[body].com
}

/// Embeds the planar third coordinate check: planar points always have z = 0.
pub fn assert_planar_embedding(model: &RobotModel, p: &Vector3<f64>) {
    if model.kind == ModelKind::Planar {
        debug_assert!(p.z.abs() < 1e-12);
    }
}
