use alloc::string::String;

/// Errors raised by the simulation kernels.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("singular system (condition estimate {condition:e})")]
    Singular { condition: f64 },

    #[error("physicality violated: {0}")]
    Physicality(String),

    #[error("integration became unstable at step {step}: defect {defect:e}")]
    Instability { step: usize, defect: f64 },

    #[error("step size too large: total jump probability {total} exceeds 1")]
    StepSize { total: f64 },

    #[error("dense oracle capacity exceeded: {n} modes (maximum {max})")]
    Capacity { n: usize, max: usize },

    #[error("calibration failure: {0}")]
    Calibration(String),
}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! invalid {
    ($($arg:tt)*) => {
        $crate::error::Error::Validation(alloc::format!($($arg)*))
    };
}

macro_rules! dim_err {
    ($($arg:tt)*) => {
        $crate::error::Error::Dimension(alloc::format!($($arg)*))
    };
}

pub(crate) use dim_err;
pub(crate) use invalid;
