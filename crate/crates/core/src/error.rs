use thiserror::Error;

/// Errors produced by polynomial, tensor, and bound computations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("degree mismatch: expected {expected}, got {got}")]
    DegreeMismatch { expected: u32, got: u32 },

    #[error("term budget exceeded{}: needs more than {budget} terms", at_power.map(|k| format!(" at power k={k}")).unwrap_or_default())]
    TermBudgetExceeded { at_power: Option<u32>, budget: usize },

    #[error("constant polynomial has no gradient map")]
    ConstantPolynomial,

    #[error("matrix is not orthogonal: max deviation {deviation:.3e} from QᵀQ = I")]
    NotOrthogonal { deviation: f64 },

    #[error("tensor is not symmetric: max entry deviation {deviation:.3e}")]
    NotSymmetric { deviation: f64 },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("negative entry {value} where nonnegative entries are required")]
    NegativeEntry { value: f64 },

    #[error("bracket violation: lower bound {lower} exceeds upper bound {upper}")]
    BracketViolation { lower: f64, upper: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}
