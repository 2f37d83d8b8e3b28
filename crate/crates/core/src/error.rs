use alloc::string::String;

/// Every failure mode of the library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid resolution ({n1}, {n2}): {reason}")]
    InvalidResolution { n1: usize, n2: usize, reason: &'static str },
    #[error("invalid domain: {0}")]
    InvalidDomain(&'static str),
    #[error("fields are defined on different grids")]
    GridMismatch,
    #[error("the torus has no boundary")]
    NoBoundary,
    #[error("point at distance {0} from the boundary is outside the collar")]
    OutOfCollar(f64),
    #[error("loop does not lie strictly inside the domain")]
    LoopOutsideDomain,
    #[error("right-hand side has mean {0:e}, expected zero")]
    NonzeroMean(f64),
    #[error("operation not available on this domain: {0}")]
    WrongDomain(&'static str),
    #[error("incompatible data: relative residual {residual:e} above {tolerance:e}")]
    IncompatibleData { residual: f64, tolerance: f64 },
    #[error("dt = {dt:e} exceeds the CFL limit {limit:e}")]
    CflViolation { dt: f64, limit: f64 },
    #[error("non-finite value in field")]
    NonFiniteField,
    #[error("trajectory left the domain by {0:e}")]
    LeftDomain(f64),
    #[error("order {requested} requested, {available} available")]
    InsufficientOrder { requested: usize, available: usize },
    #[error("order {order} above cap {cap}")]
    OrderTooLarge { order: usize, cap: usize },
    #[error("malformed expression: {0}")]
    MalformedExpr(String),
    #[error("context lacks factor {0}")]
    MissingFactor(String),
    #[error("boundary form requested away from the boundary")]
    WrongLocus,
    #[error("level {k}: reconstruction residual {residual:e} above {tolerance:e}")]
    ResidualTooLarge { k: usize, residual: f64, tolerance: f64 },
    #[error("finite-difference noise {noise:e} exceeds half of value {value:e}")]
    UnstableStencil { noise: f64, value: f64 },
    #[error("enumeration of {0} compositions is too large")]
    TooLarge(u128),
    #[error("L = {l} is not above the certified threshold {min}")]
    LTooSmall { l: f64, min: f64 },
    #[error("search did not terminate")]
    NotFound,
    #[error("singular linear system")]
    Singular,
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;
