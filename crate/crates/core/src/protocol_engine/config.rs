use std::sync::Arc;

use serde::Serialize;

use super::ProtocolError;
use crate::bounds_stats::{
    failure_budget, required_rounds_for, required_rounds_robust_for, FCurve,
};
use crate::hash_families::{build_matrix_family_floor, HashFamily, HashFunctionDescriptor};
use crate::mermin_devices::DeviceModel;
use crate::source_models::{BlockSourceOracle, OutcomeDistribution};

/// Largest family accepted as one device per member per round.
pub const MAX_DEVICES_PER_ROUND: u128 = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum ProtocolMode {
    Single,
    /// `rounds: None` takes the smallest `l` with `f^l < delta`.
    Multi {
        rounds: Option<u64>,
    },
    OneShot,
    /// `rounds: None` takes the smallest `l > 8 ln(delta) / (f - 1)`.
    Robust {
        rounds: Option<u64>,
    },
}

impl ProtocolMode {
    pub fn name(&self) -> &'static str {
        match self {
            ProtocolMode::Single => "single",
            ProtocolMode::Multi { .. } => "multi",
            ProtocolMode::OneShot => "one-shot",
            ProtocolMode::Robust { .. } => "robust",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ProtocolConfig {
    pub epsilon: f64,
    pub delta: f64,
    pub source: BlockSourceOracle,
    /// Required except in one-shot mode, which builds the matrix family from
    /// the source's flat support.
    pub family: Option<Arc<HashFamily>>,
    /// One model for every device, one per family member (reused as a model
    /// for the fresh devices of every round), or one per device of the run.
    pub devices: Vec<DeviceModel>,
    pub mode: ProtocolMode,
    pub fcurve: Arc<FCurve>,
    /// Keep per-round results in the report.
    pub record_rounds: bool,
}

/// Everything a run needs, resolved and checked once.
#[derive(Debug, Clone)]
pub struct Plan {
    pub members: Arc<Vec<HashFunctionDescriptor>>,
    pub rounds: u64,
    pub threshold: Option<u64>,
    pub f: f64,
    pub devices: Vec<DeviceModel>,
    pub per_round: usize,
    pub one_shot_source: Option<OutcomeDistribution>,
}

impl Plan {
    pub fn device_model(&self, round: u64, i: usize) -> &DeviceModel {
        match self.devices.len() {
            1 => &self.devices[0],
            len if len == self.per_round => &self.devices[i],
            _ => &self.devices[round as usize * self.per_round + i],
        }
    }
}

fn config_err(msg: impl Into<String>) -> ProtocolError {
    ProtocolError::Config(msg.into())
}

/// Listed members of a family small enough to instantiate as devices.
pub fn listed_members(family: &HashFamily) -> Result<Vec<HashFunctionDescriptor>, ProtocolError> {
    let members = family.listed().ok_or_else(|| {
        config_err(format!(
            "family of {} members is a full seed space; build a listed sub-family (family build --prune) to run it",
            family.m_count()
        ))
    })?;
    if members.is_empty() {
        return Err(config_err("family has no members"));
    }
    if members.len() as u128 > MAX_DEVICES_PER_ROUND {
        return Err(config_err(format!(
            "family of {} members exceeds {MAX_DEVICES_PER_ROUND} devices per round",
            members.len()
        )));
    }
    Ok(members.to_vec())
}

/// Matrix family over a uniform source of `2^r` outcomes, `r >= 2`.
pub fn one_shot_family(dist: &OutcomeDistribution) -> Result<HashFamily, ProtocolError> {
    let k = dist.support_len();
    if !dist.is_uniform() || k < 4 || !k.is_power_of_two() {
        return Err(config_err(format!(
            "one-shot mode needs a flat source on 2^r >= 4 outcomes; got {k} outcomes{}. \
             Decompose general sources first (analysis mode)",
            if dist.is_uniform() {
                ""
            } else {
                " with unequal probabilities"
            }
        )));
    }
    Ok(build_matrix_family_floor(dist.n(), &dist.support())?)
}

impl ProtocolConfig {
    pub fn plan(&self) -> Result<Plan, ProtocolError> {
        if !(self.epsilon > 0.0 && self.epsilon < 0.5) {
            return Err(config_err(format!(
                "epsilon = {} must lie in (0, 1/2)",
                self.epsilon
            )));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(config_err(format!(
                "delta = {} must lie in (0, 1)",
                self.delta
            )));
        }
        let f = self.fcurve.f_of_eps(self.epsilon)?;
        for d in &self.devices {
            d.validate()?;
        }
        let n = self.source.params().n;

        let (members, one_shot_source) = match self.mode {
            ProtocolMode::OneShot => {
                let dist = self.source.emit(&[])?;
                let family = one_shot_family(&dist)?;
                (listed_members(&family)?, Some(dist))
            }
            _ => {
                let family = self.family.as_ref().ok_or_else(|| {
                    config_err(format!("{} mode needs a hash family", self.mode.name()))
                })?;
                if family.n() != n {
                    return Err(config_err(format!(
                        "family is over {} bits but source blocks have {n} bits",
                        family.n()
                    )));
                }
                (listed_members(family)?, None)
            }
        };

        let (rounds, threshold) = match self.mode {
            ProtocolMode::Single | ProtocolMode::OneShot => (1, None),
            ProtocolMode::Multi { rounds } => (
                match rounds {
                    Some(l) => l,
                    None => required_rounds_for(f, self.delta)?,
                },
                None,
            ),
            ProtocolMode::Robust { rounds } => {
                let l = match rounds {
                    Some(l) => l,
                    None => required_rounds_robust_for(f, self.delta)?,
                };
                (l, Some(failure_budget(f, l)))
            }
        };
        if rounds == 0 {
            return Err(config_err("rounds must be at least 1"));
        }

        let per_round = members.len();
        let total = per_round as u128 * rounds as u128;
        let len = self.devices.len();
        if !(len == 1 || len == per_round || len as u128 == total) {
            return Err(config_err(format!(
                "{len} device models given; expected 1, {per_round} (one per family member) or {total} (one per device of the run)"
            )));
        }
        Ok(Plan {
            members: Arc::new(members),
            rounds,
            threshold,
            f,
            devices: self.devices.clone(),
            per_round,
            one_shot_source,
        })
    }
}
