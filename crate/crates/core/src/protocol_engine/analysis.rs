//! One-shot runs on general sources. A source of min-entropy `k` is a convex
//! combination of flat sources on `4^floor(k/2)` outcomes; each flat piece is
//! run on its own and the results are weighted by the piece's mass. This is
//! an analysis of the protocol, not a protocol step; the peeling is one
//! decomposition among many and the conclusions hold for any of them.

use serde::Serialize;

use super::config::{listed_members, one_shot_family};
use super::run::{run_one_shot, RoundResult};
use super::ProtocolError;
use crate::mermin_devices::{DeviceModel, Transcript};
use crate::rng::StreamRng;
use crate::source_models::{decompose_into_flats, OutcomeDistribution};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentOutcome {
    pub weight: f64,
    pub support_size: usize,
    pub devices: usize,
    pub trials: u64,
    pub non_aborts: u64,
    pub ones: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OneShotAnalysis {
    pub min_entropy: f64,
    pub flat_size: usize,
    pub components: Vec<ComponentOutcome>,
    /// `sum_i w_i * non_abort_i / trials`
    pub non_abort_rate: f64,
    /// Weighted `P(b = 1 | no abort)`, over components that did not always abort.
    pub conditional_one_rate: Option<f64>,
}

/// Device inputs are uniform and independent only when the flat size is a
/// power of 4, so the size used is `4^floor(k/2)` with `k` the min-entropy.
pub fn analysis_flat_size(dist: &OutcomeDistribution) -> Result<usize, ProtocolError> {
    // a tiny slack so that exactly representable entropies are not rounded down
    let k = dist.min_entropy() + 1e-9;
    let digits = (k / 2.0).floor() as u32;
    if digits == 0 {
        return Err(ProtocolError::Config(format!(
            "min-entropy {} is below 2 bits",
            dist.min_entropy()
        )));
    }
    if digits > 15 {
        return Err(ProtocolError::Config(format!(
            "flat pieces of 4^{digits} outcomes are too large to run"
        )));
    }
    Ok(1usize << (2 * digits))
}

pub fn analyze_one_shot(
    dist: &OutcomeDistribution,
    devices: &[DeviceModel],
    trials_per_component: u64,
    seed: u64,
) -> Result<OneShotAnalysis, ProtocolError> {
    if trials_per_component == 0 {
        return Err(ProtocolError::Config(
            "trials per component must be positive".into(),
        ));
    }
    let size = analysis_flat_size(dist)?;
    let pieces = decompose_into_flats(dist, size)?;
    let mut components = Vec::with_capacity(pieces.len());
    let mut non_abort_rate = 0.0;
    let mut one_mass = 0.0;
    let mut pass_mass = 0.0;
    let mut next_trial = 0u64;
    for piece in &pieces {
        let flat = piece.as_distribution(dist.n())?;
        let mut non_aborts = 0;
        let mut ones = 0;
        let mut d = 0;
        for _ in 0..trials_per_component {
            let r = run_one_shot(&flat, devices, seed, next_trial, false)?;
            next_trial += 1;
            d = r.devices_per_round;
            if let Some(b) = r.bit {
                non_aborts += 1;
                ones += b as u64;
            }
        }
        let rate = non_aborts as f64 / trials_per_component as f64;
        non_abort_rate += piece.weight * rate;
        if non_aborts > 0 {
            pass_mass += piece.weight * rate;
            one_mass += piece.weight * ones as f64 / trials_per_component as f64;
        }
        components.push(ComponentOutcome {
            weight: piece.weight,
            support_size: piece.support.len(),
            devices: d,
            trials: trials_per_component,
            non_aborts,
            ones,
        });
    }
    Ok(OneShotAnalysis {
        min_entropy: dist.min_entropy(),
        flat_size: size,
        components,
        non_abort_rate,
        conditional_one_rate: (pass_mass > 0.0).then(|| one_mass / pass_mass),
    })
}

/// The one-shot round on a chosen support string `x`, for exhaustive checks.
pub fn one_shot_round(
    dist: &OutcomeDistribution,
    x: u64,
    devices: &[DeviceModel],
    rng: &mut StreamRng,
) -> Result<(Vec<u8>, RoundResult), ProtocolError> {
    let family = one_shot_family(dist)?;
    let members = listed_members(&family)?;
    if dist.prob(x) == 0.0 {
        return Err(ProtocolError::Config(format!(
            "{x} is not in the flat support"
        )));
    }
    if !(devices.len() == 1 || devices.len() == members.len()) {
        return Err(ProtocolError::Config(format!(
            "{} device models given; one-shot uses {} devices",
            devices.len(),
            members.len()
        )));
    }
    let settings: Vec<u8> = members.iter().map(|h| h.eval_unchecked(x)).collect();
    let mut history = Transcript::new();
    let model_of = |i: usize| {
        if devices.len() == 1 {
            devices[0].clone()
        } else {
            devices[i].clone()
        }
    };
    let r = super::run::execute_round(x, 0, &members, model_of, &mut history, rng, true)?;
    Ok((settings, r))
}
