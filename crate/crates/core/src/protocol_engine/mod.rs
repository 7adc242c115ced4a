//! Single-round, multi-round, one-shot and robust extraction runs.
//!
//! Devices within a round are queried in ascending order and each sees the
//! full transcript of every earlier device of the run. Every round uses fresh
//! device instances, one per family member, with global ids `round * m + i`.

mod analysis;
mod config;
mod run;

pub use analysis::{
    analysis_flat_size, analyze_one_shot, one_shot_round, ComponentOutcome, OneShotAnalysis,
};
pub use config::{
    listed_members, one_shot_family, Plan, ProtocolConfig, ProtocolMode, MAX_DEVICES_PER_ROUND,
};
pub use run::{
    run_block_protocol, run_one_shot, run_planned, run_protocol, run_robust, run_single_round,
    RoundResult, RunReport,
};

use thiserror::Error;

use crate::bounds_stats::BoundsError;
use crate::hash_families::HashError;
use crate::mermin_devices::DeviceError;
use crate::source_models::SourceError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProtocolError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("contract violation: {0}")]
    Contract(String),
}

impl From<SourceError> for ProtocolError {
    fn from(e: SourceError) -> Self {
        match e {
            SourceError::Contract(_) => ProtocolError::Contract(e.to_string()),
            _ => ProtocolError::Config(e.to_string()),
        }
    }
}

impl From<DeviceError> for ProtocolError {
    fn from(e: DeviceError) -> Self {
        match e {
            DeviceError::Contract(_) => ProtocolError::Contract(e.to_string()),
            DeviceError::InvalidInput(_) => ProtocolError::Config(e.to_string()),
        }
    }
}

impl From<HashError> for ProtocolError {
    fn from(e: HashError) -> Self {
        ProtocolError::Config(e.to_string())
    }
}

impl From<BoundsError> for ProtocolError {
    fn from(e: BoundsError) -> Self {
        ProtocolError::Config(e.to_string())
    }
}

#[cfg(test)]
mod tests;
