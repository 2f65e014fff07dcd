use alloc::string::String;

/// Errors raised anywhere in the core crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("operands live in different scalar fields")]
    FieldMismatch,
    #[error("{0} is not defined over exact rationals")]
    NotExact(&'static str),
    #[error("formal {0} needs a zero constant term")]
    NonzeroConstant(&'static str),
    #[error("division by zero")]
    DivisionByZero,
    #[error("vertex {vertex} has out-degree {degree}, not allowed by the model")]
    DegreeViolation { vertex: usize, degree: usize },
    #[error("invalid degree model: {0}")]
    InvalidModel(String),
    #[error("invalid tree: {0}")]
    InvalidTree(String),
    #[error("size {n} exceeds the configured ceiling {ceiling}")]
    CeilingExceeded { n: usize, ceiling: usize },
    #[error("no tree of size {n} exists in this model")]
    UnreachableSize { n: usize },
    #[error("no sign change of the target on [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },
    #[error("singular Jacobian in Newton step {iteration}")]
    SingularJacobian { iteration: usize },
    #[error("Newton iteration did not converge (residual {residual:e})")]
    Divergence { residual: f64 },
    #[error("non-degeneracy check failed: {0}")]
    Degenerate(String),
    #[error("unstable finite difference for {quantity}: relative drift {drift:e}")]
    UnstableDifference { quantity: String, drift: f64 },
    #[error("truncation instability for {quantity}: relative change {change:e}")]
    TruncationUnstable { quantity: String, change: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = core::result::Result<T, Error>;
