//! Covering hash families `h: {0..N-1} -> {0,1,2,3}`.
//!
//! A family covers when every 4-element subset of the domain is mapped onto
//! all four symbols by at least one member. Two constructions are provided:
//! the derandomized family indexed by pairs of small-bias seeds, and the
//! base-4 digit matrix over a flat support used by the one-shot protocol.
//! Explicit lookup tables are supported for small domains and tests.

mod covering;
mod family;
pub mod field;
mod format;
pub mod small_bias;

pub use covering::{
    count_subsets, covered_fraction_single, covers, verify_covering,
    verify_covering_with_witnesses, CoverageEstimate, CoveringMode, CoveringReport, SubsetSampler,
    DEFAULT_BUDGET,
};
pub use family::{
    build_derandomized_family, build_matrix_family, build_matrix_family_floor, full_family,
    ConstructionKind, DerandomizedHash, DerandomizedSpace, FamilyMembers, FlatLabeling, HashFamily,
    HashFunctionDescriptor, MatrixHash, SeedPair, TableHash,
};
pub use format::FamilyFile;
pub use small_bias::{
    marginal_distance, ComposedSpace, DependenceReport, ExplicitSpace, KwiseLinearMap, SampleSpace,
    SeedPoint, SmallBiasSpace,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HashError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("parameter error: {0}")]
    Parameter(String),
    #[error("mode error: {0}")]
    Mode(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("family format: {0}")]
    Format(String),
}
