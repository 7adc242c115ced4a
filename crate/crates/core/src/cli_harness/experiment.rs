use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::bounds_stats::{
    chernoff_abort_bound, estimate_bias, hoeffding_false_abort_bound, required_rounds_for,
    required_rounds_robust_for, scaling_factor, wilson_interval, BiasEstimate, ChernoffBound,
    HoeffdingBound, Z_99,
};
use crate::protocol_engine::{run_planned, Plan, ProtocolConfig, ProtocolError, ProtocolMode};
use crate::rng::RNG_ALGORITHM;
use crate::Error;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRow {
    pub trial: u64,
    pub aborted: Option<bool>,
    pub failures: Option<u64>,
    pub bit: Option<bool>,
    pub rounds_executed: Option<u64>,
    pub first_failure: Option<u64>,
    /// Set when the trial stopped on a contract violation.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportHeader {
    pub rng: &'static str,
    pub seed: u64,
    pub trials: u64,
    pub mode: &'static str,
    pub epsilon: f64,
    pub delta: f64,
    pub source: String,
    pub devices: Vec<String>,
    pub devices_per_round: usize,
    pub rounds: u64,
    pub threshold: Option<u64>,
}

/// Values from `bounds_stats` for the configured `(epsilon, delta, m, l)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyticColumns {
    pub f: f64,
    /// `f^l`: chance that devices below `f` per round go unnoticed.
    pub soundness_bound: f64,
    pub required_rounds: Option<u64>,
    pub required_rounds_robust: Option<u64>,
    pub scaling_factor: Option<f64>,
    pub chernoff: Option<ChernoffBound>,
    pub hoeffding: Option<HoeffdingBound>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub trials: u64,
    pub completed: u64,
    pub errors: u64,
    pub aborts: u64,
    pub abort_rate: f64,
    pub abort_ci: (f64, f64),
    /// Output bits of the runs that did not abort.
    pub bits: u64,
    pub bias: Option<BiasEstimate>,
    /// Cumulative failure count per completed run.
    pub failure_histogram: BTreeMap<u64, u64>,
    pub analytic: AnalyticColumns,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryReport {
    pub header: ReportHeader,
    pub rows: Vec<TrialRow>,
    pub summary: Summary,
}

impl SummaryReport {
    pub fn has_errors(&self) -> bool {
        self.summary.errors > 0
    }

    pub fn first_error(&self) -> Option<&str> {
        self.rows.iter().find_map(|r| r.error.as_deref())
    }
}

fn analytic(config: &ProtocolConfig, plan: &Plan) -> Result<AnalyticColumns, Error> {
    let f = plan.f;
    let robust = matches!(config.mode, ProtocolMode::Robust { .. }) && f < 1.0;
    let rounds_defined = f < 1.0;
    Ok(AnalyticColumns {
        f,
        soundness_bound: f.powf(plan.rounds as f64),
        required_rounds: rounds_defined
            .then(|| required_rounds_for(f, config.delta))
            .transpose()?,
        required_rounds_robust: rounds_defined
            .then(|| required_rounds_robust_for(f, config.delta))
            .transpose()?,
        scaling_factor: Some(scaling_factor(f)?),
        chernoff: if robust {
            Some(chernoff_abort_bound(f, plan.rounds)?)
        } else {
            None
        },
        hoeffding: if robust {
            Some(hoeffding_false_abort_bound(
                f,
                plan.per_round as u64,
                plan.rounds,
            )?)
        } else {
            None
        },
    })
}

/// Runs every trial of `config` on the current rayon pool. Rows come back
/// in trial order whatever the scheduling, so reports depend only on the
/// seed. A contract violation becomes an error row; any other failure
/// stops the experiment.
pub fn run_experiment(
    config: &ProtocolConfig,
    seed: u64,
    trials: u64,
) -> Result<SummaryReport, Error> {
    if trials == 0 {
        return Err(Error::Config("trials must be positive".into()));
    }
    let plan = config.plan()?;
    let analytic = analytic(config, &plan)?;
    let rows = (0..trials)
        .into_par_iter()
        .map(|t| match run_planned(config, &plan, seed, t) {
            Ok(r) => Ok(TrialRow {
                trial: t,
                aborted: Some(r.aborted),
                failures: Some(r.failures),
                bit: r.bit,
                rounds_executed: Some(r.rounds_executed),
                first_failure: r.first_failure,
                error: None,
            }),
            Err(ProtocolError::Contract(m)) => Ok(TrialRow {
                trial: t,
                aborted: None,
                failures: None,
                bit: None,
                rounds_executed: None,
                first_failure: None,
                error: Some(m),
            }),
            Err(e) => Err(Error::from(e)),
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut histogram = BTreeMap::new();
    let mut bits = Vec::new();
    let mut aborts = 0;
    let mut errors = 0;
    for r in &rows {
        match r.failures {
            Some(k) => *histogram.entry(k).or_insert(0) += 1,
            None => errors += 1,
        }
        aborts += (r.aborted == Some(true)) as u64;
        bits.extend(r.bit);
    }
    let completed = trials - errors;
    let (abort_rate, abort_ci) = if completed > 0 {
        (
            aborts as f64 / completed as f64,
            wilson_interval(aborts, completed, Z_99),
        )
    } else {
        (0.0, (0.0, 1.0))
    };
    let header = ReportHeader {
        rng: RNG_ALGORITHM,
        seed,
        trials,
        mode: config.mode.name(),
        epsilon: config.epsilon,
        delta: config.delta,
        source: config.source.strategy_name(),
        devices: config.devices.iter().map(|d| d.to_string()).collect(),
        devices_per_round: plan.per_round,
        rounds: plan.rounds,
        threshold: plan.threshold,
    };
    let summary = Summary {
        trials,
        completed,
        errors,
        aborts,
        abort_rate,
        abort_ci,
        bits: bits.len() as u64,
        bias: if bits.is_empty() {
            None
        } else {
            Some(estimate_bias(&bits)?)
        },
        failure_histogram: histogram,
        analytic,
    };
    Ok(SummaryReport {
        header,
        rows,
        summary,
    })
}
