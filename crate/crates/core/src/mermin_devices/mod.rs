//! Behavioral Mermin boxes. A device receives a setting with `X^Y^Z = 1` and
//! answers `(A, B, C)`; it passes when `A^B^C = X*Y*Z`. GHZ devices are
//! modelled by their exact statistics on the four settings (A, B uniform,
//! C fixed by the test), not by a state vector.

mod classical;
mod io;
mod model;

pub use classical::{brute_force_classical_max, lhv_value, ClassicalConstraint, ClassicalMax};
pub use io::{encode_setting, passes_test, MerminInput, MerminOutput, Transcript, TranscriptEntry};
pub use model::{
    builtin_adversary, respond, AdversaryRule, BitFunction, Device, DeviceModel, LhvStrategy,
    ParitySteer, RotatingLhv, BUILTIN_ADVERSARIES,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DeviceError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("contract violation: {0}")]
    Contract(String),
}
