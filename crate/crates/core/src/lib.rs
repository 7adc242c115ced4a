//! Device-independent randomness extraction from weak sources using
//! Mermin (GHZ) devices: source models, covering hash families, device
//! models, the protocol engine, analytic bounds and an experiment harness.

pub mod bounds_stats;
pub mod cli_harness;
pub mod hash_families;
pub mod mermin_devices;
pub mod protocol_engine;
pub mod rng;
pub mod source_models;

use thiserror::Error;

use bounds_stats::BoundsError;
use hash_families::HashError;
use mermin_devices::DeviceError;
use protocol_engine::ProtocolError;
use source_models::SourceError;

/// Errors at the operational surface, classified by exit code.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("config error: {0}")]
    Config(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Io(_) => 2,
            Error::Contract(_) => 3,
            Error::Budget(_) => 4,
        }
    }
}

impl From<ProtocolError> for Error {
    fn from(e: ProtocolError) -> Self {
        match e {
            ProtocolError::Config(m) => Error::Config(m),
            ProtocolError::Contract(m) => Error::Contract(m),
        }
    }
}

impl From<HashError> for Error {
    fn from(e: HashError) -> Self {
        match e {
            HashError::Mode(m) => Error::Budget(m),
            other => Error::Config(other.to_string()),
        }
    }
}

impl From<SourceError> for Error {
    fn from(e: SourceError) -> Self {
        match e {
            SourceError::Contract(m) => Error::Contract(m),
            other => Error::Config(other.to_string()),
        }
    }
}

impl From<DeviceError> for Error {
    fn from(e: DeviceError) -> Self {
        match e {
            DeviceError::Contract(m) => Error::Contract(m),
            other => Error::Config(other.to_string()),
        }
    }
}

impl From<BoundsError> for Error {
    fn from(e: BoundsError) -> Self {
        Error::Config(e.to_string())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
