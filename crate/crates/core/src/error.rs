//! Error type shared by all solvers in the crate.

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes of the numerical kernels.
///
/// Scalar payloads are reported as `f64` regardless of the working scalar
/// type; they are diagnostic only.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// A state left the working interval on which the model was validated.
    #[error("state {value} outside working interval [{lo}, {hi}]")]
    OutOfDomain { value: f64, lo: f64, hi: f64 },

    /// Shock quantities requested for coinciding left/right states.
    #[error("degenerate shock: left and right states coincide at {0}")]
    DegenerateShock(f64),

    /// An ordering precondition (monotone data, ordered layers, uL >= uR)
    /// does not hold.
    #[error("ordering violated: {0}")]
    Ordering(String),

    /// The flux or entropy fails strict convexity on the working interval.
    #[error("model not admissible: {0}")]
    NonConvex(String),

    /// A scalar parameter is out of range (non-positive tolerance, bad
    /// window, ...).
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Evaluation requested beyond the solved time horizon.
    #[error("time {t} beyond solved horizon {horizon}")]
    Horizon { t: f64, horizon: f64 },

    /// Front tracking produced more interaction events than allowed.
    #[error("front tracking exceeded {max} events; coarsen the rarefaction step")]
    EventOverflow { max: usize },

    /// A bracketing root solve could not be set up or did not converge.
    #[error("root bracketing failed: {0}")]
    Bracket(String),

    /// An adaptive refinement loop hit its resolution cap before reaching
    /// the requested accuracy budget.
    #[error("refinement budget exhausted: {0}")]
    Refinement(String),
}
