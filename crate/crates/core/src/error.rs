use alloc::string::String;

/// Errors raised by the model, flow, kernel and solver operations.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Two objects that must share a dimension do not.
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch {
        /// Dimension required by the receiving object.
        expected: usize,
        /// Dimension that was supplied.
        found: usize,
    },
    /// A scale factor, duration or step that must be positive is not.
    #[error("{what} must be positive, got {value}")]
    NonPositive {
        /// Name of the offending parameter.
        what: &'static str,
        /// Supplied value.
        value: f64,
    },
    /// A flow was asked to run for a negative duration.
    #[error("negative flow duration {0}")]
    NegativeDuration(f64),
    /// A state or function value stopped being finite.
    #[error("non-finite value encountered at s = {at}")]
    NonFinite {
        /// Flow parameter (or time) at which the blow-up was detected.
        at: f64,
    },
    /// An index is out of range (field index, axis, control component).
    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange {
        /// Offending index.
        index: usize,
        /// Number of valid entries.
        len: usize,
    },
    /// The requested operation is not available for this model.
    #[error("{op} is not available for model `{model}`")]
    Unsupported {
        /// Operation name.
        op: &'static str,
        /// Model name.
        model: String,
    },
    /// An argument violates a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// The explicit scheme's stability bound is violated.
    #[error("CFL violation: dt = {dt} exceeds the bound {bound}")]
    Cfl {
        /// Requested time step.
        dt: f64,
        /// Largest admissible time step.
        bound: f64,
    },
    /// The Martin normalisation point lies in the kernel's zero region.
    #[error("degenerate Martin sequence: tau_k = {tau} is not below T = {base_time}")]
    DegenerateSequence {
        /// Pole time at the offending index.
        tau: f64,
        /// Normalisation time `T`.
        base_time: f64,
    },
    /// The explicit scheme produced a non-finite value.
    #[error("solver diverged at step {step}")]
    Diverged {
        /// Index of the first step with a non-finite value.
        step: usize,
    },
    /// A function evaluated to zero where a strictly positive value is needed.
    #[error("function vanishes at a sample point")]
    Vanishing,
}

/// Shorthand result type.
pub type Result<T> = core::result::Result<T, Error>;
