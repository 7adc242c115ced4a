use serde::Serialize;

use super::config::{listed_members, one_shot_family, Plan, ProtocolConfig, ProtocolMode};
use super::ProtocolError;
use crate::hash_families::HashFunctionDescriptor;
use crate::mermin_devices::{
    encode_setting, passes_test, Device, DeviceModel, Transcript, TranscriptEntry,
};
use crate::rng::{stream, StreamRng};
use crate::source_models::{BlockSourceOracle, OutcomeDistribution};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundResult {
    pub round: u64,
    pub x: u64,
    /// XOR of the A outputs of the round.
    pub bit: bool,
    pub passes: Vec<bool>,
    pub failures: u64,
    pub entries: Vec<TranscriptEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub mode: &'static str,
    /// Absent whenever the run aborted.
    pub bit: Option<bool>,
    pub aborted: bool,
    pub failures: u64,
    pub rounds_executed: u64,
    pub rounds_planned: u64,
    pub devices_per_round: usize,
    /// Robust mode: aborting requires more than this many failures.
    pub threshold: Option<u64>,
    pub first_failure: Option<u64>,
    pub seed: u64,
    pub trial: u64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub rounds: Vec<RoundResult>,
}

/// One round: device `i` of the round gets `encode_setting(h_i(x))`, in
/// ascending order, each seeing the transcript of all earlier devices.
/// Devices are fresh instances with ids `round * m + i`.
#[allow(clippy::too_many_arguments)]
pub(super) fn execute_round(
    x: u64,
    round: u64,
    members: &[HashFunctionDescriptor],
    model_of: impl Fn(usize) -> DeviceModel,
    history: &mut Transcript,
    rng: &mut StreamRng,
    record: bool,
) -> Result<RoundResult, ProtocolError> {
    let m = members.len() as u64;
    let mut bit = false;
    let mut failures = 0;
    let mut passes = Vec::with_capacity(if record { members.len() } else { 0 });
    let mut entries = Vec::with_capacity(if record { members.len() } else { 0 });
    for (i, h) in members.iter().enumerate() {
        let input = encode_setting(h.eval(x)?);
        let device = Device::new(round * m + i as u64, model_of(i))?;
        let entry = device.use_once(input, history, rng)?;
        let ok = passes_test(entry.input, entry.output);
        bit ^= entry.output.a;
        failures += (!ok) as u64;
        if record {
            passes.push(ok);
            entries.push(entry);
        }
    }
    Ok(RoundResult {
        round,
        x,
        bit,
        passes,
        failures,
        entries,
    })
}

/// A single round on input `x` with the first round's devices; aborted when
/// any device fails.
pub fn run_single_round(
    x: u64,
    config: &ProtocolConfig,
    rng: &mut StreamRng,
) -> Result<RoundResult, ProtocolError> {
    let plan = config.plan()?;
    let n = config.source.params().n;
    if n < 64 && x >> n != 0 {
        return Err(ProtocolError::Config(format!(
            "input {x} is not a {n}-bit string"
        )));
    }
    let mut history = Transcript::new();
    execute_round(
        x,
        0,
        &plan.members,
        |i| plan.device_model(0, i).clone(),
        &mut history,
        rng,
        true,
    )
}

struct BlockRun<'a> {
    plan: &'a Plan,
    oracle: &'a BlockSourceOracle,
    threshold: u64,
    record: bool,
}

impl BlockRun<'_> {
    fn run(
        &self,
        mode: &'static str,
        rng: &mut StreamRng,
        seed: u64,
        trial: u64,
    ) -> Result<RunReport, ProtocolError> {
        let mut history = Transcript::new();
        let mut blocks: Vec<u64> = Vec::with_capacity(self.plan.rounds.min(1 << 16) as usize);
        let mut rounds = Vec::new();
        let mut bit = false;
        let mut failures = 0u64;
        let mut first_failure = None;
        let mut executed = 0;
        let mut aborted = false;
        for round in 0..self.plan.rounds {
            let dist = self.oracle.emit(&blocks)?;
            let x = dist.sample(rng);
            blocks.push(x);
            let before = history.len();
            let r = execute_round(
                x,
                round,
                &self.plan.members,
                |i| self.plan.device_model(round, i).clone(),
                &mut history,
                rng,
                self.record,
            )?;
            executed += 1;
            if r.failures > 0 && first_failure.is_none() {
                first_failure = history.entries()[before..]
                    .iter()
                    .find(|e| !passes_test(e.input, e.output))
                    .map(|e| e.device_id);
            }
            failures += r.failures;
            bit ^= r.bit;
            if self.record {
                rounds.push(r);
            }
            if failures > self.threshold {
                aborted = true;
                break;
            }
        }
        Ok(RunReport {
            mode,
            bit: (!aborted).then_some(bit),
            aborted,
            failures,
            rounds_executed: executed,
            rounds_planned: self.plan.rounds,
            devices_per_round: self.plan.per_round,
            threshold: (mode == "robust").then_some(self.threshold),
            first_failure,
            seed,
            trial,
            rounds,
        })
    }
}

/// `l` rounds on successive blocks of `oracle`; the output is the XOR of the
/// round bits, and any failure aborts.
pub fn run_block_protocol(
    oracle: &BlockSourceOracle,
    rounds: u64,
    config: &ProtocolConfig,
    seed: u64,
    trial: u64,
) -> Result<RunReport, ProtocolError> {
    let cfg = ProtocolConfig {
        mode: ProtocolMode::Multi {
            rounds: Some(rounds),
        },
        source: oracle.clone(),
        ..config.clone()
    };
    let plan = cfg.plan()?;
    let mut rng = stream(seed, trial);
    BlockRun {
        plan: &plan,
        oracle,
        threshold: 0,
        record: config.record_rounds,
    }
    .run("multi", &mut rng, seed, trial)
}

/// As [`run_block_protocol`], aborting only once the cumulative failure count
/// exceeds `T = floor(l (1 - f) / 2)`.
pub fn run_robust(
    oracle: &BlockSourceOracle,
    rounds: u64,
    config: &ProtocolConfig,
    seed: u64,
    trial: u64,
) -> Result<RunReport, ProtocolError> {
    let cfg = ProtocolConfig {
        mode: ProtocolMode::Robust {
            rounds: Some(rounds),
        },
        source: oracle.clone(),
        ..config.clone()
    };
    let plan = cfg.plan()?;
    let mut rng = stream(seed, trial);
    let threshold = plan.threshold.expect("robust plan has a threshold");
    BlockRun {
        plan: &plan,
        oracle,
        threshold,
        record: config.record_rounds,
    }
    .run("robust", &mut rng, seed, trial)
}

/// One round over the matrix family of a flat source on `2^r` outcomes, with
/// `floor(r / 2)` devices.
pub fn run_one_shot(
    dist: &OutcomeDistribution,
    devices: &[DeviceModel],
    seed: u64,
    trial: u64,
    record: bool,
) -> Result<RunReport, ProtocolError> {
    let family = one_shot_family(dist)?;
    let members = listed_members(&family)?;
    let d = members.len();
    if !(devices.len() == 1 || devices.len() == d) {
        return Err(ProtocolError::Config(format!(
            "{} device models given; one-shot uses {d} devices",
            devices.len()
        )));
    }
    for m in devices {
        m.validate()?;
    }
    let mut rng = stream(seed, trial);
    let x = dist.sample(&mut rng);
    let mut history = Transcript::new();
    let model_of = |i: usize| {
        if devices.len() == 1 {
            devices[0].clone()
        } else {
            devices[i].clone()
        }
    };
    let r = execute_round(x, 0, &members, model_of, &mut history, &mut rng, true)?;
    let aborted = r.failures > 0;
    let first_failure = r
        .entries
        .iter()
        .find(|e| !passes_test(e.input, e.output))
        .map(|e| e.device_id);
    Ok(RunReport {
        mode: "one-shot",
        bit: (!aborted).then_some(r.bit),
        aborted,
        failures: r.failures,
        rounds_executed: 1,
        rounds_planned: 1,
        devices_per_round: d,
        threshold: None,
        first_failure,
        seed,
        trial,
        rounds: if record { vec![r] } else { Vec::new() },
    })
}

/// Runs trial `trial` of `config` in its configured mode.
pub fn run_protocol(
    config: &ProtocolConfig,
    seed: u64,
    trial: u64,
) -> Result<RunReport, ProtocolError> {
    run_planned(config, &config.plan()?, seed, trial)
}

/// As [`run_protocol`] with a plan already resolved by `config.plan()`.
pub fn run_planned(
    config: &ProtocolConfig,
    plan: &Plan,
    seed: u64,
    trial: u64,
) -> Result<RunReport, ProtocolError> {
    let threshold = match config.mode {
        ProtocolMode::OneShot => {
            let dist = plan
                .one_shot_source
                .as_ref()
                .expect("one-shot plan carries its source");
            return run_one_shot(dist, &plan.devices, seed, trial, config.record_rounds);
        }
        ProtocolMode::Single | ProtocolMode::Multi { .. } => 0,
        ProtocolMode::Robust { .. } => plan.threshold.expect("robust plan has a threshold"),
    };
    let mut rng = stream(seed, trial);
    BlockRun {
        plan,
        oracle: &config.source,
        threshold,
        record: config.record_rounds,
    }
    .run(config.mode.name(), &mut rng, seed, trial)
}
