//! Analytic quantities: the Mermin value, the pluggable `f(eps)` curve,
//! round counts, binomial tail bounds, and empirical estimators.

mod estimate;
mod fcurve;
mod mermin;
mod rounds;
mod tails;

pub use estimate::{estimate_bias, wilson_interval, BiasEstimate, Z_99};
pub use fcurve::{FCurve, ILLUSTRATIVE_CURVE_CSV};
pub use mermin::{mermin_value, MerminStats};
pub use rounds::{
    one_shot_length, one_shot_length_for, required_rounds, required_rounds_for,
    required_rounds_robust, required_rounds_robust_for, scaling_factor,
};
pub use tails::{
    binomial_cdf, binomial_upper_tail, chernoff_abort_bound, failure_budget,
    hoeffding_false_abort_bound, honest_failure_budget, ChernoffBound, HoeffdingBound,
    EXACT_BINOMIAL_LIMIT,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundsError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("epsilon {eps} outside the curve's range [{low}, {high}]")]
    OutOfRange { eps: f64, low: f64, high: f64 },
    #[error("round count undefined: {0}")]
    UndefinedRounds(String),
    #[error("curve file: {0}")]
    Format(String),
}
