use thiserror::Error;

/// Errors raised by model construction and the analyses built on it.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("robot file: {0}")]
    Schema(String),

    #[error("joint {joint} angle {value} outside limits [{lower}, {upper}]")]
    JointLimit {
        joint: usize,
        value: f64,
        lower: f64,
        upper: f64,
    },

    #[error("link index {index} out of range for a chain with {links} links")]
    LinkIndex { index: usize, links: usize },

    #[error("total mass of the chain is zero")]
    ZeroMass,

    #[error("mass matrix is singular (condition estimate {condition:e})")]
    SingularMassMatrix { condition: f64 },

    #[error("force vector is zero; RoToM is undefined")]
    ZeroForce,

    #[error("degenerate ellipsoid: largest eigenvalue {lambda_max:e} below threshold")]
    DegenerateEllipsoid { lambda_max: f64 },

    #[error("mobility eigenvalue {value} outside [0, 1]")]
    MobilityOutOfRange { value: f64 },

    #[error("objective norm {norm:e} is at the non-differentiable zero")]
    NormSingularity { norm: f64 },

    #[error("invalid settings: {0}")]
    InvalidSettings(String),
}

pub type Result<T> = std::result::Result<T, Error>;
