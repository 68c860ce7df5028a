use thiserror::Error;

use crate::forge::ForgeTrace;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid measure space: {0}")]
    InvalidSpace(String),

    #[error("invalid tolerance: {0}")]
    InvalidTolerance(String),

    #[error("matrix entry ({row}, {col}) = {value} is negative")]
    NegativeEntry { row: usize, col: usize, value: f64 },

    #[error("invalid operator: {0}")]
    InvalidOperator(String),

    #[error("operator is not {r}-potent: residual {residual:e} exceeds bound {bound:e}")]
    NotPotent { r: u32, residual: f64, bound: f64 },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("functions are linearly dependent: {0}")]
    Dependence(String),

    /// A positive/negative split produced a part outside the range. In exact
    /// arithmetic this only happens when the kernel holds a nonnegative element.
    #[error("range split violation: residual {residual:e} exceeds bound {bound:e}")]
    RangeSplitViolation { residual: f64, bound: f64 },

    #[error("basis loss: candidates span rank {rank}, need {target}")]
    BasisLoss { rank: usize, target: usize },

    #[error("forge exceeded its step budget ({budget} rule applications)")]
    BudgetExceeded {
        budget: usize,
        trace: Box<ForgeTrace>,
    },

    #[error("image of basis function {index} has {significant} significant coefficients")]
    SingleImageViolation { index: usize, significant: usize },

    #[error("image of basis function {index} vanishes; the kernel route applies")]
    KernelRoute { index: usize },

    #[error("cycle structure incompatible with potency: {0}")]
    PotencyStructure(String),

    #[error("degenerate decomposing set: {0}")]
    DegenerateSet(String),

    #[error("oracle refused: {n} atoms exceeds limit {limit}")]
    OracleRefused { n: usize, limit: usize },

    #[error("zero-image consistency violated: ||Af|| is negligible but ||A||_F = {norm:e} exceeds {bound:e}")]
    ZeroCheckViolation { norm: f64, bound: f64 },

    #[error("consistency fault: {0}")]
    ConsistencyFault(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("linear program failed: {0}")]
    LinearProgram(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
