//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A scalar or index argument is outside its documented range.
    #[error("invalid argument `{name}`: {message}")]
    InvalidArgument { name: &'static str, message: String },

    /// Function index outside `0..n_functions`.
    #[error("function index {index} out of range for family of {n_functions} functions")]
    IndexOutOfRange { index: usize, n_functions: usize },

    /// A point violates a ball precondition (e.g. the exponentiated softmax
    /// is only defined on the smoothing ball).
    #[error("point at distance {distance:.6e} from the center violates the ball precondition (radius {radius:.6e})")]
    OutsideBall { distance: f64, radius: f64 },

    /// Two balls handed to the intersection projector do not intersect.
    #[error("balls do not intersect: center distance {center_distance:.6e} > {radius_sum:.6e}")]
    EmptyIntersection {
        center_distance: f64,
        radius_sum: f64,
    },

    /// State-vector simulator would exceed the amplitude cap.
    #[error("simulator needs {required} amplitudes ({bytes} bytes) but the cap is {cap}")]
    SimulatorTooLarge {
        required: usize,
        bytes: usize,
        cap: usize,
    },

    /// An adversary step description is not unitary.
    #[error("adversary step is not unitary: max deviation {deviation:.3e} > {tolerance:.1e}")]
    NotUnitary { deviation: f64, tolerance: f64 },

    /// Internal numerical failure that indicates a bug rather than bad input.
    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub fn invalid(name: &'static str, message: impl Into<String>) -> Self {
        Error::InvalidArgument {
            name,
            message: message.into(),
        }
    }
}
