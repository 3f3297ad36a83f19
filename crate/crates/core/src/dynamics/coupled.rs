//! Two-agent dynamics coupled by the end-effector bar.
//!
//! The agents carry a massless rigid bar between their end effectors via
//! ball joints, which adds one scalar holonomic constraint (constant EE
//! distance). Planar agents walk in parallel planes separated by a fixed
//! lateral offset; that offset lives in the coupling, not in the agent state.

use super::{bias_vector, check_row_rank, mass_matrix, stacked_bias, stacked_jacobian, ContactSet};
use crate::error::{Error, Result};
use crate::model::{AugmentedState, Fk, FkVel, ModelKind, RobotModel};
use nalgebra::{DMatrix, DVector, Vector3};

/// Massless rigid bar of fixed length between the agents' end effectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarConstraint {
    pub length: f64,
}

impl BarConstraint {
    pub fn new(length: f64) -> Self {
        assert!(length > 0.0, "bar length must be positive");
        Self { length }
    }
}

/// Geometry of the two-agent coupling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coupling {
    pub bar: BarConstraint,
    /// Out-of-plane separation between the agents' sagittal planes. Only
    /// meaningful for planar models; must be zero for spatial ones.
    pub lateral: f64,
}

impl Coupling {
    pub fn new(bar_length: f64, lateral: f64) -> Self {
        Self {
            bar: BarConstraint::new(bar_length),
            lateral,
        }
    }
}

struct EeData {
    p: Vector3<f64>,
    jac: DMatrix<f64>,
    pdot: Vector3<f64>,
    bias: Vector3<f64>,
}

fn ee_data(model: &RobotModel, fk: &Fk, vel: &FkVel, lateral: f64) -> Result<EeData> {
    let point = model.point("end_effector")?;
    let mut p = fk.body_point(&point);
    if model.kind == ModelKind::Planar {
        p.z = lateral;
    }
    Ok(EeData {
        p,
        jac: fk.point_jacobian_of(model, &point),
        pdot: vel.point_velocity(fk, &point),
        bias: vel.point_bias(fk, &point),
    })
}

/// Accelerations and multipliers of the coupled system.
#[derive(Debug, Clone)]
pub struct CoupledAccel {
    pub qdd1: DVector<f64>,
    pub qdd2: DVector<f64>,
    pub lam1: DVector<f64>,
    pub lam2: DVector<f64>,
    pub lam_e: f64,
}

/// Post-impact velocities and impulse intensities of the coupled system.
#[derive(Debug, Clone)]
pub struct CoupledImpact {
    pub v1: DVector<f64>,
    pub v2: DVector<f64>,
    pub dlam1: DVector<f64>,
    pub dlam2: DVector<f64>,
    pub dlam_e: f64,
}

struct AgentBlocks {
    d: DMatrix<f64>,
    rhs_dyn: DVector<f64>,
    j: DMatrix<f64>,
    jd: DVector<f64>,
    ee: EeData,
}

fn agent_blocks(
    model: &RobotModel,
    contacts: &ContactSet,
    q: &DVector<f64>,
    v: &DVector<f64>,
    u: Option<&DVector<f64>>,
    lateral: f64,
) -> Result<AgentBlocks> {
    let fk = Fk::new(model, q);
    let vel = FkVel::new(model, &fk, v);
    let d = mass_matrix(model, q);
    let rhs_dyn = match u {
        Some(u) => model.input_matrix() * u - bias_vector(model, q, v),
        // impulsive balance: D v+ - (impulses) = D v-
        None => &d * v,
    };
    let j = stacked_jacobian(model, &fk, contacts)?;
    let jd = stacked_bias(model, &fk, &vel, contacts)?;
    check_row_rank(&j, contacts, "contact Jacobian")?;
    let ee = ee_data(model, &fk, &vel, lateral)?;
    Ok(AgentBlocks {
        d,
        rhs_dyn,
        j,
        jd,
        ee,
    })
}

struct BarRow {
    r1: DVector<f64>,
    r2: DVector<f64>,
    dir: Vector3<f64>,
}

fn bar_row(a1: &AgentBlocks, a2: &AgentBlocks, bar: &BarConstraint) -> Result<BarRow> {
    let dir = a1.ee.p - a2.ee.p;
    let sep = dir.norm();
    if sep < 1e-9 {
        return Err(Error::DegenerateBar(sep));
    }
    if (sep - bar.length).abs() > 1e-3 {
        log::warn!(
            "bar length drift: separation {sep:.6} m vs nominal {:.6} m",
            bar.length
        );
    }
    let r1 = a1.ee.jac.transpose() * dir;
    let r2 = a2.ee.jac.transpose() * (-dir);
    if r1.norm() + r2.norm() < 1e-10 {
        return Err(Error::SingularKkt {
            contacts: "end_effector bar".into(),
            reason: "bar constraint gradient vanishes".into(),
        });
    }
    Ok(BarRow { r1, r2, dir })
}

/// Stacked symmetric KKT solve over both agents. `bar = None` pins the bar
/// multiplier to zero, which decouples the agents exactly.
fn assemble_and_solve(
    a1: &AgentBlocks,
    a2: &AgentBlocks,
    bar: Option<(&BarRow, f64)>,
    rhs_c1: &DVector<f64>,
    rhs_c2: &DVector<f64>,
) -> Result<(DVector<f64>, DVector<f64>, DVector<f64>, DVector<f64>, f64)> {
    let (n1, n2) = (a1.d.nrows(), a2.d.nrows());
    let (c1, c2) = (a1.j.nrows(), a2.j.nrows());
    let dim = n1 + n2 + c1 + c2 + 1;
    let mut kkt = DMatrix::zeros(dim, dim);
    let mut rhs = DVector::zeros(dim);
    let (o_q2, o_l1, o_l2, o_le) = (n1, n1 + n2, n1 + n2 + c1, n1 + n2 + c1 + c2);

    kkt.view_mut((0, 0), (n1, n1)).copy_from(&a1.d);
    kkt.view_mut((o_q2, o_q2), (n2, n2)).copy_from(&a2.d);
    if c1 > 0 {
        kkt.view_mut((0, o_l1), (n1, c1))
            .copy_from(&(-a1.j.transpose()));
        kkt.view_mut((o_l1, 0), (c1, n1)).copy_from(&a1.j);
    }
    if c2 > 0 {
        kkt.view_mut((o_q2, o_l2), (n2, c2))
            .copy_from(&(-a2.j.transpose()));
        kkt.view_mut((o_l2, o_q2), (c2, n2)).copy_from(&a2.j);
    }
    match bar {
        Some((row, rhs_bar)) => {
            for i in 0..n1 {
                kkt[(i, o_le)] = -row.r1[i];
                kkt[(o_le, i)] = row.r1[i];
            }
            for i in 0..n2 {
                kkt[(o_q2 + i, o_le)] = -row.r2[i];
                kkt[(o_le, o_q2 + i)] = row.r2[i];
            }
            rhs[o_le] = rhs_bar;
        }
        None => kkt[(o_le, o_le)] = 1.0,
    }
    rhs.rows_mut(0, n1).copy_from(&a1.rhs_dyn);
    rhs.rows_mut(o_q2, n2).copy_from(&a2.rhs_dyn);
    if c1 > 0 {
        rhs.rows_mut(o_l1, c1).copy_from(rhs_c1);
    }
    if c2 > 0 {
        rhs.rows_mut(o_l2, c2).copy_from(rhs_c2);
    }

    let sol = kkt.lu().solve(&rhs).ok_or_else(|| Error::SingularKkt {
        contacts: "coupled system".into(),
        reason: "stacked KKT factorization failed".into(),
    })?;
    Ok((
        sol.rows(0, n1).into_owned(),
        sol.rows(o_q2, n2).into_owned(),
        sol.rows(o_l1, c1).into_owned(),
        sol.rows(o_l2, c2).into_owned(),
        sol[o_le],
    ))
}

/// Coupled constrained forward dynamics of the two agents: both agents' contact
/// constraints plus the scalar bar row, solved as one stacked KKT system.
///
/// With `coupling = None` the bar multiplier is pinned to zero, which reduces
/// the system to two independent constrained solves.
pub fn coupled_fd(
    m1: &RobotModel,
    m2: &RobotModel,
    contacts1: &ContactSet,
    contacts2: &ContactSet,
    xa: &AugmentedState,
    u1: &DVector<f64>,
    u2: &DVector<f64>,
    coupling: Option<&Coupling>,
) -> Result<CoupledAccel> {
    m1.check_state(&xa.agent1)?;
    m2.check_state(&xa.agent2)?;
    let lateral = coupling.map(|c| c.lateral).unwrap_or(0.0);
    let a1 = agent_blocks(m1, contacts1, &xa.agent1.q, &xa.agent1.v, Some(u1), 0.0)?;
    let a2 = agent_blocks(m2, contacts2, &xa.agent2.q, &xa.agent2.v, Some(u2), lateral)?;
    let rhs_c1 = -&a1.jd;
    let rhs_c2 = -&a2.jd;
    let (qdd1, qdd2, lam1, lam2, lam_e) = match coupling {
        Some(c) => {
            let bar = bar_row(&a1, &a2, &c.bar)?;
            // exact second derivative of the squared-distance constraint
            let rel_vel = a1.ee.pdot - a2.ee.pdot;
            let rhs_bar = -rel_vel.norm_squared() - bar.dir.dot(&(a1.ee.bias - a2.ee.bias));
            assemble_and_solve(&a1, &a2, Some((&bar, rhs_bar)), &rhs_c1, &rhs_c2)?
        }
        None => assemble_and_solve(&a1, &a2, None, &rhs_c1, &rhs_c2)?,
    };
    Ok(CoupledAccel {
        qdd1,
        qdd2,
        lam1,
        lam2,
        lam_e,
    })
}

/// Coupled rigid impact for a product transition. The caller supplies the
/// extended contact sets: the current set for an agent that stays in its
/// domain, the next domain's set for an agent that transitions.
pub fn coupled_impact(
    m1: &RobotModel,
    m2: &RobotModel,
    extended1: &ContactSet,
    extended2: &ContactSet,
    xa_minus: &AugmentedState,
    coupling: &Coupling,
) -> Result<CoupledImpact> {
    m1.check_state(&xa_minus.agent1)?;
    m2.check_state(&xa_minus.agent2)?;
    let a1 = agent_blocks(
        m1,
        extended1,
        &xa_minus.agent1.q,
        &xa_minus.agent1.v,
        None,
        0.0,
    )?;
    let a2 = agent_blocks(
        m2,
        extended2,
        &xa_minus.agent2.q,
        &xa_minus.agent2.v,
        None,
        coupling.lateral,
    )?;
    let bar = bar_row(&a1, &a2, &coupling.bar)?;
    let zero1 = DVector::zeros(a1.j.nrows());
    let zero2 = DVector::zeros(a2.j.nrows());
    let (v1, v2, dlam1, dlam2, dlam_e) =
        assemble_and_solve(&a1, &a2, Some((&bar, 0.0)), &zero1, &zero2)?;
    Ok(CoupledImpact {
        v1,
        v2,
        dlam1,
        dlam2,
        dlam_e,
    })
}

/// End-effector positions of both agents in the shared world frame, with the
/// planar lateral embedding applied to agent 2.
pub fn ee_positions(
    m1: &RobotModel,
    m2: &RobotModel,
    xa: &AugmentedState,
    coupling: &Coupling,
) -> Result<(Vector3<f64>, Vector3<f64>)> {
    let fk1 = Fk::new(m1, &xa.agent1.q);
    let fk2 = Fk::new(m2, &xa.agent2.q);
    let pt1 = m1.point("end_effector")?;
    let pt2 = m2.point("end_effector")?;
    let mut p1 = fk1.body_point(&pt1);
    let mut p2 = fk2.body_point(&pt2);
    if m1.kind == ModelKind::Planar {
        p1.z = 0.0;
    }
    if m2.kind == ModelKind::Planar {
        p2.z = coupling.lateral;
    }
    Ok((p1, p2))
}
