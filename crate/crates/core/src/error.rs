use alloc::string::String;
use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
    #[error("non-finite value produced or supplied")]
    NonFinite,
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("matrix is not positive definite (pivot {pivot} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },
    #[error("rank-one downdate is singular (1 - xᵀA⁻¹x = {margin})")]
    DowndateSingular { margin: f64 },
    #[error("design matrix is rank deficient")]
    RankDeficient,
    #[error("sketch is too coarse: audited leverage ratio {ratio} outside [1/2, 3/2]")]
    SketchTooCoarse { ratio: f64 },
    #[error("continuous design needs a leverage upper bound for rejection sampling")]
    MissingBound,
    #[error("leverage {leverage} exceeds the declared bound {bound}")]
    LeverageBoundExceeded { leverage: f64, bound: f64 },
    #[error("row {row} has zero leverage")]
    ZeroLeverageRow { row: usize },
    #[error("batch carries no responses")]
    MissingResponses,
    #[error("batch carries no leverage values")]
    MissingLeverages,
    #[error("design does not expose its optimum")]
    MissingOptimum,
    #[error("determinantal rejection stalled after {rejections} consecutive rejections")]
    AcceptanceStall { rejections: usize },
    #[error("rejection probability {ratio} exceeds one")]
    AcceptanceAboveOne { ratio: f64 },
    #[error("reverse iterative sampling degenerated: no removable row")]
    Degenerate,
    #[error("enumeration of {size} outcomes exceeds the limit")]
    TooLarge { size: f64 },
    #[error("empty input list")]
    EmptyList,
    #[error("sampling method not available for this design: {0}")]
    MethodUnavailable(&'static str),
    #[error("unknown verification check `{0}`")]
    UnknownCheck(String),
    #[error("budget of {trials} trials is below the minimum {minimum}")]
    BudgetTooSmall { trials: usize, minimum: usize },
    #[error("approximate covariance violates the spectral bound (eigenvalue ratio {ratio})")]
    CovarianceOutOfBounds { ratio: f64 },
}
