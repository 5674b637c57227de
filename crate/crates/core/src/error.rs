use alloc::string::String;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("variable error: {0}")]
    Variable(String),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("algebra error: {0}")]
    Algebra(String),
    #[error("frame error: {0}")]
    Frame(String),
    #[error("element is not regular semisimple: {0}")]
    NotRegularSemisimple(String),
    #[error("signature mismatch: {0}")]
    SignatureMismatch(String),
    #[error("degenerate invariant: {0}")]
    DegenerateInvariant(String),
    #[error("singular matrix: {0}")]
    SingularMatrix(String),
    #[error("quadrature did not converge: {0}")]
    QuadratureDivergence(String),
    #[error("equivariance violated: {0}")]
    EquivarianceViolation(String),
    #[error("chart violation: {0}")]
    ChartViolation(String),
    #[error("partition of unity deficit: {0}")]
    PartitionDeficit(String),
    #[error("fit residual too large: {0}")]
    FitResidual(String),
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = core::result::Result<T, Error>;
