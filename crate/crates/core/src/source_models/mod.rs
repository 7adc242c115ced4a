//! Weak randomness sources: general min-entropy distributions, flat pieces,
//! and adversarial block sources.

mod block;
mod decompose;
mod distribution;
mod params;

pub use block::{
    AdaptiveFlat, BlockSourceOracle, BlockStrategy, IidSource, SanthaVazirani, ENTROPY_TOLERANCE,
};
pub use decompose::{
    caratheodory_decompose, decompose_into_flats, reconstruct, FlatComponent, ZERO_TOLERANCE,
};
pub use distribution::{OutcomeDistribution, FLAT_TOLERANCE, NORMALIZATION_TOLERANCE};
pub use params::{block_concat, blocks_needed, SourceParams};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SourceError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("not decomposable: {0}")]
    NotDecomposable(String),
    #[error("cannot amplify: {0}")]
    CannotAmplify(String),
    #[error("source contract violated: {0}")]
    Contract(String),
    #[error("distribution file: {0}")]
    Format(String),
}
