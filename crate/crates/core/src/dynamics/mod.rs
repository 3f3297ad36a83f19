//! Manipulator-equation terms and constrained dynamics: mass matrix via
//! composite-rigid-body accumulation, bias forces via projected Newton-Euler,
//! contact-constrained forward dynamics, rigid impact maps, and the two-agent
//! variants coupled through the end-effector bar.

mod coupled;

pub use coupled::{
    coupled_fd, coupled_impact, ee_positions, BarConstraint, CoupledAccel, CoupledImpact, Coupling,
};

use crate::error::{Error, Result};
use crate::model::{AgentState, Fk, FkVel, RobotModel};
use nalgebra::{DMatrix, DVector, Matrix3, Vector3, Vector6};

/// Mass-inertia matrix, bias vector, and input map at one state.
#[derive(Debug, Clone)]
pub struct DynamicsTerms {
    pub d: DMatrix<f64>,
    pub h: DVector<f64>,
    pub b: DMatrix<f64>,
}

impl DynamicsTerms {
    pub fn compute(model: &RobotModel, x: &AgentState) -> Self {
        Self {
            d: mass_matrix(model, &x.q),
            h: bias_vector(model, &x.q, &x.v),
            b: model.input_matrix(),
        }
    }
}

fn skew(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// 6x6 spatial inertia of one body about the world origin, twist coordinates
/// ordered (angular, linear).
fn spatial_inertia_about_origin(mass: f64, com: &Vector3<f64>, i_com: &Matrix3<f64>) -> nalgebra::Matrix6<f64> {
    let c = skew(com);
    let mut m = nalgebra::Matrix6::zeros();
    m.fixed_view_mut::<3, 3>(0, 0)
        .copy_from(&(i_com - mass * c * c));
    m.fixed_view_mut::<3, 3>(0, 3).copy_from(&(mass * c));
    m.fixed_view_mut::<3, 3>(3, 0).copy_from(&(-mass * c));
    m.fixed_view_mut::<3, 3>(3, 3)
        .copy_from(&(mass * Matrix3::identity()));
    m
}

/// Mass-inertia matrix D(q) by composite-rigid-body recursion over the tree:
/// subtree spatial inertias are accumulated leaf-to-root and projected onto the
/// per-DOF world twists.
pub fn mass_matrix(model: &RobotModel, q: &DVector<f64>) -> DMatrix<f64> {
    let fk = Fk::new(model, q);
    let nb = model.bodies.len();
    let mut composite: Vec<nalgebra::Matrix6<f64>> = (0..nb)
        .map(|i| {
            let b = &model.bodies[i];
            let c = fk.pos[i] + fk.rot[i] * b.com;
            let i_w = fk.rot[i] * b.inertia * fk.rot[i].transpose();
            spatial_inertia_about_origin(b.mass, &c, &i_w)
        })
        .collect();
    for i in (0..nb).rev() {
        if let Some(p) = model.joints[i].parent {
            let child = composite[i];
            composite[p] += child;
        }
    }
    let twist6 = |k: usize| -> Vector6<f64> {
        let t = &fk.twists[k];
        Vector6::new(
            t.angular.x, t.angular.y, t.angular.z, t.linear.x, t.linear.y, t.linear.z,
        )
    };
    let mut d = DMatrix::zeros(model.nq, model.nq);
    for body in 0..nb {
        let o = model.q_offset[body];
        for k in o..o + model.joints[body].jtype.dofs() {
            let f = composite[body] * twist6(k);
            for &i in &model.chains[body] {
                if i <= k {
                    let val = twist6(i).dot(&f);
                    d[(i, k)] = val;
                    d[(k, i)] = val;
                }
            }
        }
    }
    d
}

/// Coriolis, centrifugal, and gravity bias H(q, qdot): inverse dynamics at zero
/// generalized acceleration, projected through the point and angular Jacobians.
pub fn bias_vector(model: &RobotModel, q: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
    let fk = Fk::new(model, q);
    let vel = FkVel::new(model, &fk, v);
    let g = model.gravity;
    let mut h = DVector::zeros(model.nq);
    for body in 0..model.bodies.len() {
        let b = &model.bodies[body];
        let r = fk.rot[body] * b.com;
        let com = fk.pos[body] + r;
        let omega = vel.omega[body];
        let alpha = vel.alpha_bias[body];
        let a_com = vel.acc_bias[body] + alpha.cross(&r) + omega.cross(&omega.cross(&r));
        let i_w = fk.rot[body] * b.inertia * fk.rot[body].transpose();
        let force = b.mass * (a_com - g);
        let torque = i_w * alpha + omega.cross(&(i_w * omega));
        for &k in &model.chains[body] {
            let t = &fk.twists[k];
            h[k] += t.velocity_at(&com).dot(&force) + t.angular.dot(&torque);
        }
    }
    h
}

/// Ordered set of active contact points, identified by contact names.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ContactSet {
    pub points: Vec<String>,
}

impl ContactSet {
    pub fn new<S: Into<String>>(points: Vec<S>) -> Self {
        Self {
            points: points.into_iter().map(Into::into).collect(),
        }
    }

    pub fn empty() -> Self {
        Self { points: Vec::new() }
    }

    pub fn rows(&self, model: &RobotModel) -> usize {
        self.points.len() * model.contact_rows()
    }

    fn names(&self) -> String {
        self.points.join(", ")
    }
}

/// Stacked contact Jacobian (2 or 3 rows per point) at a configuration.
pub fn contact_jacobian(model: &RobotModel, q: &DVector<f64>, set: &ContactSet) -> Result<DMatrix<f64>> {
    let fk = Fk::new(model, q);
    stacked_jacobian(model, &fk, set)
}

pub(crate) fn stacked_jacobian(model: &RobotModel, fk: &Fk, set: &ContactSet) -> Result<DMatrix<f64>> {
    let rows = model.contact_rows();
    let mut j = DMatrix::zeros(set.points.len() * rows, model.nq);
    for (i, name) in set.points.iter().enumerate() {
        let point = model.point(name)?;
        let jp = fk.point_jacobian_of(model, &point);
        j.rows_mut(i * rows, rows).copy_from(&jp.rows(0, rows));
    }
    Ok(j)
}

pub(crate) fn stacked_bias(model: &RobotModel, fk: &Fk, vel: &FkVel, set: &ContactSet) -> Result<DVector<f64>> {
    let rows = model.contact_rows();
    let mut jd = DVector::zeros(set.points.len() * rows);
    for (i, name) in set.points.iter().enumerate() {
        let point = model.point(name)?;
        let bias = vel.point_bias(fk, &point);
        jd.rows_mut(i * rows, rows)
            .copy_from(&bias.rows(0, rows).into_owned());
    }
    Ok(jd)
}

pub(crate) fn check_row_rank(j: &DMatrix<f64>, set: &ContactSet, what: &str) -> Result<()> {
    if j.nrows() == 0 {
        return Ok(());
    }
    let svd = j.clone().svd(false, false);
    let min_sv = svd.singular_values.iter().cloned().fold(f64::MAX, f64::min);
    if j.nrows() > j.ncols() || min_sv <= 1e-8 {
        return Err(Error::SingularKkt {
            contacts: set.names(),
            reason: format!("{what}: min singular value {min_sv:.3e}"),
        });
    }
    Ok(())
}

/// Solves the contact-constrained dynamics
/// `D qdd + H = B u + J^T lambda`, `J qdd + Jdot qdot = 0`
/// as one symmetric KKT system. Returns the acceleration and the contact
/// forces stacked in the order of the contact set.
pub fn constrained_fd(
    model: &RobotModel,
    contacts: &ContactSet,
    x: &AgentState,
    u: &DVector<f64>,
) -> Result<(DVector<f64>, DVector<f64>)> {
    let sol = constrained_solve(model, contacts, x, &[u.clone()])?;
    Ok((sol.0[0].clone(), sol.1[0].clone()))
}

/// Shared KKT factorization for multiple input columns.
fn constrained_solve(
    model: &RobotModel,
    contacts: &ContactSet,
    x: &AgentState,
    inputs: &[DVector<f64>],
) -> Result<(Vec<DVector<f64>>, Vec<DVector<f64>>)> {
    model.check_state(x)?;
    let n = model.nq;
    let fk = Fk::new(model, &x.q);
    let vel = FkVel::new(model, &fk, &x.v);
    let d = mass_matrix(model, &x.q);
    let h = bias_vector(model, &x.q, &x.v);
    let b = model.input_matrix();
    let j = stacked_jacobian(model, &fk, contacts)?;
    let jd = stacked_bias(model, &fk, &vel, contacts)?;
    check_row_rank(&j, contacts, "contact Jacobian")?;
    let c = j.nrows();

    let mut kkt = DMatrix::zeros(n + c, n + c);
    kkt.view_mut((0, 0), (n, n)).copy_from(&d);
    if c > 0 {
        kkt.view_mut((0, n), (n, c)).copy_from(&(-j.transpose()));
        kkt.view_mut((n, 0), (c, n)).copy_from(&j);
    }
    let lu = kkt.lu();
    let mut accels = Vec::with_capacity(inputs.len());
    let mut lambdas = Vec::with_capacity(inputs.len());
    for u in inputs {
        let mut rhs = DVector::zeros(n + c);
        rhs.rows_mut(0, n).copy_from(&(&b * u - &h));
        if c > 0 {
            rhs.rows_mut(n, c).copy_from(&(-&jd));
        }
        let sol = lu.solve(&rhs).ok_or_else(|| Error::SingularKkt {
            contacts: contacts.names(),
            reason: "KKT factorization failed".into(),
        })?;
        accels.push(sol.rows(0, n).into_owned());
        lambdas.push(sol.rows(n, c).into_owned());
    }
    Ok((accels, lambdas))
}

/// Drift and input map of the constrained acceleration: `qdd = f_acc + g_acc u`.
#[derive(Debug, Clone)]
pub struct AffineDynamics {
    pub f_acc: DVector<f64>,
    pub g_acc: DMatrix<f64>,
}

/// Decomposes the constrained dynamics into its input-affine form by one KKT
/// factorization shared across the zero input and each unit input.
pub fn affine_decomposition(
    model: &RobotModel,
    contacts: &ContactSet,
    x: &AgentState,
) -> Result<AffineDynamics> {
    let m = model.nu();
    let n = model.nq;
    let mut inputs = vec![DVector::zeros(m)];
    for jcol in 0..m {
        let mut e = DVector::zeros(m);
        e[jcol] = 1.0;
        inputs.push(e);
    }
    let (accels, _) = constrained_solve(model, contacts, x, &inputs)?;
    let f_acc = accels[0].clone();
    let mut g_acc = DMatrix::zeros(n, m);
    for jcol in 0..m {
        g_acc.set_column(jcol, &(&accels[jcol + 1] - &f_acc));
    }
    Ok(AffineDynamics { f_acc, g_acc })
}

/// Rigid plastic impact: solves `D (v+ - v-) = J^T dlam`, `J v+ = 0` for the
/// contact set of the new domain. Positions are unchanged by the reset.
pub fn impact_map(
    model: &RobotModel,
    new_contacts: &ContactSet,
    x_minus: &AgentState,
) -> Result<(DVector<f64>, DVector<f64>)> {
    model.check_state(x_minus)?;
    let n = model.nq;
    let fk = Fk::new(model, &x_minus.q);
    let d = mass_matrix(model, &x_minus.q);
    let j = stacked_jacobian(model, &fk, new_contacts)?;
    check_row_rank(&j, new_contacts, "impact Jacobian")?;
    let c = j.nrows();
    if c == 0 {
        return Ok((x_minus.v.clone(), DVector::zeros(0)));
    }
    let mut kkt = DMatrix::zeros(n + c, n + c);
    kkt.view_mut((0, 0), (n, n)).copy_from(&d);
    kkt.view_mut((0, n), (n, c)).copy_from(&(-j.transpose()));
    kkt.view_mut((n, 0), (c, n)).copy_from(&j);
    let mut rhs = DVector::zeros(n + c);
    rhs.rows_mut(0, n).copy_from(&(&d * &x_minus.v));
    let sol = kkt.lu().solve(&rhs).ok_or_else(|| Error::SingularKkt {
        contacts: new_contacts.names(),
        reason: "impulsive KKT factorization failed".into(),
    })?;
    Ok((sol.rows(0, n).into_owned(), sol.rows(n, c).into_owned()))
}

/// Kinetic energy at a state; used by the impact-dissipativity audits.
pub fn kinetic_energy(model: &RobotModel, x: &AgentState) -> f64 {
    let d = mass_matrix(model, &x.q);
    0.5 * x.v.dot(&(&d * &x.v))
}

/// Potential (gravity) energy at a configuration.
pub fn potential_energy(model: &RobotModel, q: &DVector<f64>) -> f64 {
    let fk = Fk::new(model, q);
    let mut e = 0.0;
    for (i, b) in model.bodies.iter().enumerate() {
        let com = fk.pos[i] + fk.rot[i] * b.com;
        e -= b.mass * model.gravity.dot(&com);
    }
    e
}

