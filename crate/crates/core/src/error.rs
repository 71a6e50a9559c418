use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by validation and by the simulation routines.
///
/// Validation failures always carry the measured residual next to the
/// tolerance it was compared against.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("invalid matrix shape: {0}")]
    Shape(String),

    #[error("matrix is not Hermitian: max |M - M^dagger| = {residual:e} > {tolerance:e}")]
    NotHermitian { residual: f64, tolerance: f64 },

    #[error("trace is {trace} (|tr - 1| = {residual:e} > {tolerance:e})")]
    TraceNotOne {
        trace: f64,
        residual: f64,
        tolerance: f64,
    },

    #[error("negative eigenvalue {eigenvalue:e} below -{tolerance:e}")]
    NegativeEigenvalue { eigenvalue: f64, tolerance: f64 },

    #[error("matrix is not unitary: max |U^dagger U - I| = {residual:e} > {tolerance:e}")]
    NotUnitary { residual: f64, tolerance: f64 },

    #[error("Kraus set is not trace preserving: max |sum K^dagger K - I| = {residual:e} > {tolerance:e}")]
    NotTracePreserving { residual: f64, tolerance: f64 },

    #[error("channel is not unital: max |E[I] - I| = {residual:e} > {tolerance:e}")]
    NotUnital { residual: f64, tolerance: f64 },

    #[error("invalid probability vector: {0}")]
    InvalidProbabilities(String),

    #[error("invalid memory coherences: {0}")]
    InvalidCoherences(Box<Error>),

    #[error("total dimension {dim} exceeds the cap of {cap}")]
    SizeCap { dim: usize, cap: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("step {step}: {source}")]
    Step {
        step: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn at_step(self, step: usize) -> Self {
        Error::Step {
            step,
            source: Box::new(self),
        }
    }
}
