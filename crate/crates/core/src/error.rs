use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid algebra: antisymmetry violation {antisymmetry:e}, Jacobi residual {jacobi:e}")]
    InvalidAlgebra { antisymmetry: f64, jacobi: f64 },

    #[error("Leibniz rule violated on basis pair ({i}, {j}) with residual {residual:e}")]
    LeibnizViolation { i: usize, j: usize, residual: f64 },

    #[error("nilpotency class {class} is not supported (at most {max})")]
    UnsupportedClass { class: usize, max: usize },

    #[error("algebra is not nilpotent")]
    NotNilpotent,

    #[error("realization does not reproduce the structure constants (residual {residual:e})")]
    RealizationMismatch { residual: f64 },

    #[error("invalid horizon or step: {0}")]
    InvalidHorizon(String),

    #[error("control value {value} on channel {channel} of segment {segment} lies outside the control range")]
    ControlOutOfRange {
        segment: usize,
        channel: usize,
        value: f64,
    },

    #[error("control is not defined on [{from}, {to}]")]
    ControlUndefined { from: f64, to: f64 },

    #[error("real Schur decomposition did not converge")]
    SchurFailed,

    #[error("{0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
