use thiserror::Error;

/// Error type shared by every module in the crate.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// A constructor or operation received an out-of-range parameter.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Dimension other than 1 or 2.
    #[error("unsupported dimension {0}; only n = 1 and n = 2 are implemented")]
    UnsupportedDimension(usize),

    /// A sampled closure produced a non-finite value at a node.
    #[error("non-finite sample {value} at node index {node} (y = ({y0}, {y1}))")]
    NonFiniteSample {
        node: usize,
        y0: f64,
        y1: f64,
        value: f64,
    },

    /// Two fields or masks that must share a grid do not.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// A ball or evaluation point leaves the grid cube.
    #[error("domain error: {0}")]
    Domain(String),

    /// A radius or spacing is too coarse for the requested quantity.
    #[error("resolution error: {0}")]
    Resolution(String),

    /// An input field violates a sign or Lipschitz constraint.
    #[error("constraint violation: {0}")]
    ConstraintViolation(String),

    /// A stated precondition of an operation does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Hausdorff distance of an empty point set.
    #[error("undefined distance: {0}")]
    UndefinedDistance(String),

    /// Curvature ratio over an empty evaluation set.
    #[error("undefined ratio: {0}")]
    UndefinedRatio(String),
}

pub type Result<T> = std::result::Result<T, Error>;
