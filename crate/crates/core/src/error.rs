//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Model document failed schema validation. The string names the offending path.
    #[error("model schema violation at `{path}`: {reason}")]
    Schema { path: String, reason: String },

    /// Body parent indices do not form a tree.
    #[error("cyclic tree: body `{0}` is its own ancestor")]
    CyclicTree(String),

    #[error("unknown point id `{0}`")]
    UnknownPoint(String),

    #[error("unknown body `{0}`")]
    UnknownBody(String),

    #[error("unknown joint `{0}` in actuated list")]
    UnknownJoint(String),

    /// Contact Jacobian (or stacked KKT block) lost row rank.
    #[error("singular KKT system for contacts [{contacts}]: {reason}")]
    SingularKkt { contacts: String, reason: String },

    /// End effectors coincide; the bar direction is undefined.
    #[error("degenerate bar: end effectors coincide (separation {0:.3e} m)")]
    DegenerateBar(f64),

    #[error("state dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("rank-deficient decoupling matrix (min singular value {0:.3e})")]
    RankDeficient(f64),

    #[error("QP infeasible: {0}")]
    QpInfeasible(String),

    #[error("QP iteration limit exceeded ({0} iterations)")]
    QpIterations(usize),

    #[error("shooting did not converge after {iterations} iterations (residual {residual:.3e})")]
    ShootingDiverged { iterations: usize, residual: f64 },

    #[error("shooting Jacobian is singular")]
    ShootingSingular,

    /// A rollout was asked to continue from a flagged (timeout / inadmissible) log.
    #[error("simulation flag: {0}")]
    Simulation(String),

    #[error("poincare section error: {0}")]
    Section(String),

    #[error("gait file error: {0}")]
    GaitFile(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
