#![no_std]
extern crate alloc;

pub mod error;
pub mod grassmann;
pub mod matkit;
pub mod models;
pub mod oracle;
pub mod state;
pub mod circuits;
pub mod dynamics;
pub mod entanglement;
pub mod seed;
pub mod superop;
pub mod trajectory;

pub use error::{Error, Result};
pub use matkit::AntisymMatrix;
pub use state::{CorrelationMatrix, CovarianceState};
pub use superop::{DressedMode, GaussianSuperop, MapOutcome, Occupation};
