use std::sync::Arc;

use super::*;
use crate::bounds_stats::FCurve;
use crate::hash_families::{build_derandomized_family, HashFamily, HashFunctionDescriptor};
use crate::mermin_devices::{DeviceModel, LhvStrategy, ParitySteer};
use crate::rng::stream;
use crate::source_models::{
    BlockSourceOracle, BlockStrategy, OutcomeDistribution, SourceError, SourceParams,
};

fn table_family(n: u32, tables: &[Vec<u8>]) -> Arc<HashFamily> {
    let members = tables
        .iter()
        .map(|t| HashFunctionDescriptor::table(n, t.clone()).unwrap())
        .collect();
    Arc::new(HashFamily::from_members(n, members).unwrap())
}

fn curve() -> Arc<FCurve> {
    Arc::new(FCurve::new(vec![(0.01, 0.99), (0.1, 0.9), (0.2, 0.8)]).unwrap())
}

fn config(
    family: Arc<HashFamily>,
    source: OutcomeDistribution,
    device: DeviceModel,
    mode: ProtocolMode,
) -> ProtocolConfig {
    ProtocolConfig {
        epsilon: 0.1,
        delta: 1e-3,
        source: BlockSourceOracle::iid(source).unwrap(),
        family: Some(family),
        devices: vec![device],
        mode,
        fcurve: curve(),
        record_rounds: true,
    }
}

fn uniform2() -> OutcomeDistribution {
    OutcomeDistribution::uniform(2, &[0, 1, 2, 3]).unwrap()
}

fn two_tables() -> Arc<HashFamily> {
    table_family(2, &[vec![0, 1, 2, 3], vec![3, 2, 1, 0]])
}

fn assert_abort_rule(r: &RunReport) {
    match r.threshold {
        None => assert_eq!(r.aborted, r.failures > 0),
        Some(t) => assert_eq!(r.aborted, r.failures > t),
    }
    assert_eq!(r.aborted, r.bit.is_none());
}

#[test]
fn honest_round_has_no_failures() {
    let cfg = config(
        two_tables(),
        uniform2(),
        DeviceModel::HonestGhz,
        ProtocolMode::Single,
    );
    let mut rng = stream(1, 0);
    for x in 0..4 {
        let r = run_single_round(x, &cfg, &mut rng).unwrap();
        assert_eq!(r.failures, 0);
        assert!(r.passes.iter().all(|&p| p));
        assert_eq!(r.bit, r.entries.iter().fold(false, |b, e| b ^ e.output.a));
    }
}

#[test]
fn lhv_round_fails_on_setting_001() {
    let cfg = config(
        two_tables(),
        uniform2(),
        DeviceModel::lhv(2).unwrap(),
        ProtocolMode::Single,
    );
    let mut rng = stream(1, 0);
    // h_0(3) = 3 selects 001, which strategy 2 fails
    let r = run_single_round(3, &cfg, &mut rng).unwrap();
    assert_eq!(r.passes, vec![false, true]);
    let r = run_single_round(1, &cfg, &mut rng).unwrap();
    assert_eq!(r.failures, 0);

    let source = OutcomeDistribution::point_mass(2, 3).unwrap();
    let cfg = config(
        two_tables(),
        source,
        DeviceModel::lhv(2).unwrap(),
        ProtocolMode::Single,
    );
    let report = run_protocol(&cfg, 4, 0).unwrap();
    assert!(report.aborted && report.bit.is_none());
    assert_eq!(report.first_failure, Some(0));
}

#[test]
fn honest_round_bit_unbiased() {
    let cfg = config(
        two_tables(),
        uniform2(),
        DeviceModel::HonestGhz,
        ProtocolMode::Single,
    );
    let plan = cfg.plan().unwrap();
    let trials = 100_000u64;
    let ones = (0..trials)
        .filter(|&t| run_planned(&cfg, &plan, 11, t).unwrap().bit.unwrap())
        .count();
    let sigma = 0.5 / (trials as f64).sqrt();
    assert!((ones as f64 / trials as f64 - 0.5).abs() < 5.0 * sigma);
}

#[test]
fn honest_block_protocol_never_aborts() {
    let cfg = config(
        two_tables(),
        uniform2(),
        DeviceModel::HonestGhz,
        ProtocolMode::Multi { rounds: Some(100) },
    );
    for t in 0..20 {
        let r = run_block_protocol(&cfg.source, 100, &cfg, 2, t).unwrap();
        assert!(!r.aborted && r.bit.is_some());
        assert_eq!(r.rounds_executed, 100);
        let expected = r.rounds.iter().fold(false, |b, rr| b ^ rr.bit);
        assert_eq!(r.bit, Some(expected));
        assert_abort_rule(&r);
    }
}

#[test]
fn one_failing_device_aborts_the_run() {
    let mut devices = vec![DeviceModel::HonestGhz; 2 * 10];
    devices[2 * 6 + 1] = DeviceModel::lhv(2).unwrap();
    // setting 3 on every device: h = const 3
    let family = table_family(2, &[vec![3; 4], vec![3; 4]]);
    let mut cfg = config(
        family,
        uniform2(),
        DeviceModel::HonestGhz,
        ProtocolMode::Multi { rounds: Some(10) },
    );
    cfg.devices = devices;
    let r = run_protocol(&cfg, 3, 0).unwrap();
    assert!(r.aborted);
    assert_eq!(r.bit, None);
    assert_eq!(r.rounds_executed, 7);
    assert_eq!(r.first_failure, Some(13));
}

#[test]
fn lhv_detection_compounds() {
    let cfg = config(
        two_tables(),
        uniform2(),
        DeviceModel::lhv(2).unwrap(),
        ProtocolMode::Multi { rounds: Some(4) },
    );
    let plan = cfg.plan().unwrap();
    let trials = 20_000u64;
    let survived = (0..trials)
        .filter(|&t| !run_planned(&cfg, &plan, 5, t).unwrap().aborted)
        .count();
    let p = 0.75f64.powi(4);
    let sigma = (p * (1.0 - p) / trials as f64).sqrt();
    assert!((survived as f64 / trials as f64) <= p + 5.0 * sigma);
}

#[test]
fn robust_mode_thresholds() {
    // f = 0.9, l = 10: T = floor(0.5) = 0, identical to the non-robust rule
    let family = table_family(2, &[vec![0, 1, 2, 3]]);
    let multi = config(
        family.clone(),
        uniform2(),
        DeviceModel::lhv(2).unwrap(),
        ProtocolMode::Multi { rounds: Some(10) },
    );
    let robust = config(
        family.clone(),
        uniform2(),
        DeviceModel::lhv(2).unwrap(),
        ProtocolMode::Robust { rounds: Some(10) },
    );
    assert_eq!(robust.plan().unwrap().threshold, Some(0));
    for t in 0..200 {
        let a = run_protocol(&multi, 9, t).unwrap();
        let b = run_protocol(&robust, 9, t).unwrap();
        assert_eq!(
            (a.bit, a.aborted, a.failures, a.rounds_executed),
            (b.bit, b.aborted, b.failures, b.rounds_executed)
        );
        assert_abort_rule(&a);
        assert_abort_rule(&b);
    }
    // l = 200: T = 10, honest devices never abort
    let honest = config(
        family.clone(),
        uniform2(),
        DeviceModel::HonestGhz,
        ProtocolMode::Robust { rounds: Some(200) },
    );
    let r = run_protocol(&honest, 1, 0).unwrap();
    assert_eq!(r.threshold, Some(10));
    assert!(!r.aborted && r.failures == 0);
    // LHV devices fail about a quarter of the rounds, far above T
    let cheat = config(
        family,
        uniform2(),
        DeviceModel::lhv(2).unwrap(),
        ProtocolMode::Robust { rounds: Some(200) },
    );
    let r = run_protocol(&cheat, 1, 0).unwrap();
    assert!(r.aborted && r.failures == 11);
    assert_abort_rule(&r);
}

#[test]
fn robust_rounds_default_from_curve() {
    let cfg = config(
        two_tables(),
        uniform2(),
        DeviceModel::HonestGhz,
        ProtocolMode::Robust { rounds: None },
    );
    let plan = cfg.plan().unwrap();
    // f(0.1) = 0.9, delta = 1e-3: l > 8 * 6.9078 / 0.1 = 552.6
    assert_eq!(plan.rounds, 553);
    assert_eq!(plan.threshold, Some(27));
    let cfg = config(
        two_tables(),
        uniform2(),
        DeviceModel::HonestGhz,
        ProtocolMode::Multi { rounds: None },
    );
    assert_eq!(cfg.plan().unwrap().rounds, 66);
}

#[test]
fn reports_are_deterministic() {
    let cfg = config(
        two_tables(),
        uniform2(),
        DeviceModel::noisy(0.1).unwrap(),
        ProtocolMode::Robust { rounds: Some(50) },
    );
    let a = serde_json::to_string(&run_protocol(&cfg, 77, 3).unwrap()).unwrap();
    let b = serde_json::to_string(&run_protocol(&cfg, 77, 3).unwrap()).unwrap();
    assert_eq!(a, b);
    let c = serde_json::to_string(&run_protocol(&cfg, 77, 4).unwrap()).unwrap();
    assert_ne!(a, c);
}

#[test]
fn transcripts_are_causal() {
    let cfg = config(
        two_tables(),
        uniform2(),
        DeviceModel::HonestGhz,
        ProtocolMode::Multi { rounds: Some(5) },
    );
    let r = run_protocol(&cfg, 1, 1).unwrap();
    let ids: Vec<u64> = r
        .rounds
        .iter()
        .flat_map(|rr| rr.entries.iter().map(|e| e.device_id))
        .collect();
    assert_eq!(ids, (0..10).collect::<Vec<_>>());
}

#[test]
fn earlier_devices_ignore_later_inputs() {
    // same first member, different later members: the first device's
    // outputs are unchanged trial by trial
    let a = table_family(2, &[vec![0, 1, 2, 3], vec![0, 0, 0, 0], vec![1, 1, 1, 1]]);
    let b = table_family(2, &[vec![0, 1, 2, 3], vec![3, 2, 1, 0], vec![2, 3, 3, 2]]);
    for device in [
        DeviceModel::HonestGhz,
        DeviceModel::MemoryAdversary(Arc::new(ParitySteer)),
    ] {
        let ca = config(a.clone(), uniform2(), device.clone(), ProtocolMode::Single);
        let cb = config(b.clone(), uniform2(), device.clone(), ProtocolMode::Single);
        for x in 0..4 {
            for t in 0..50 {
                let ra = run_single_round(x, &ca, &mut stream(t, 0)).unwrap();
                let rb = run_single_round(x, &cb, &mut stream(t, 0)).unwrap();
                assert_eq!(ra.entries[0], rb.entries[0]);
            }
        }
    }
}

#[test]
fn parity_steer_zeroes_unaborted_bits() {
    let family = table_family(2, &[vec![0, 1, 2, 3], vec![1, 2, 0, 0]]);
    let cfg = config(
        family,
        uniform2(),
        DeviceModel::MemoryAdversary(Arc::new(ParitySteer)),
        ProtocolMode::Multi { rounds: Some(3) },
    );
    let mut survived = 0;
    for t in 0..500 {
        let r = run_protocol(&cfg, 8, t).unwrap();
        if let Some(b) = r.bit {
            survived += 1;
            assert!(!b);
        }
    }
    assert!(survived > 0);
}

fn support16() -> Vec<u64> {
    (0..16).map(|i| i * 3 + 1).collect()
}

#[test]
fn one_shot_rn4_inputs_uniform_and_independent() {
    let dist = OutcomeDistribution::uniform(6, &support16()).unwrap();
    let mut joint = [[0u32; 4]; 4];
    let mut rng = stream(0, 0);
    for &x in &support16() {
        let (settings, r) = one_shot_round(&dist, x, &[DeviceModel::HonestGhz], &mut rng).unwrap();
        assert_eq!(settings.len(), 2);
        assert_eq!(r.failures, 0);
        joint[settings[0] as usize][settings[1] as usize] += 1;
    }
    assert!(joint.iter().flatten().all(|&c| c == 1));
    let r = run_one_shot(&dist, &[DeviceModel::HonestGhz], 1, 0, true).unwrap();
    assert_eq!(r.devices_per_round, 2);
    assert!(!r.aborted);
}

#[test]
fn one_shot_rn2_single_device() {
    let dist = OutcomeDistribution::uniform(4, &[9, 2, 7, 4]).unwrap();
    let mut seen = [0u32; 4];
    let mut rng = stream(0, 0);
    for x in dist.support() {
        let (s, _) = one_shot_round(&dist, x, &[DeviceModel::HonestGhz], &mut rng).unwrap();
        assert_eq!(s.len(), 1);
        seen[s[0] as usize] += 1;
    }
    assert_eq!(seen, [1; 4]);
}

#[test]
fn one_shot_lhv_exhaustive() {
    let dist = OutcomeDistribution::uniform(6, &support16()).unwrap();
    let oracle_bound = 9.0 / 16.0;
    let mut rng = stream(0, 0);
    for s in LhvStrategy::all() {
        let model = DeviceModel::DeterministicLhv(s);
        let passed = support16()
            .iter()
            .filter(|&&x| {
                one_shot_round(&dist, x, std::slice::from_ref(&model), &mut rng)
                    .unwrap()
                    .1
                    .failures
                    == 0
            })
            .count();
        assert!(passed as f64 / 16.0 <= oracle_bound);
    }
}

#[test]
fn one_shot_odd_rate_uses_floor() {
    let dist = OutcomeDistribution::uniform(5, &(0..32).collect::<Vec<_>>()).unwrap();
    let r = run_one_shot(&dist, &[DeviceModel::HonestGhz], 1, 0, true).unwrap();
    assert_eq!(r.devices_per_round, 2);
}

#[test]
fn one_shot_rejects_non_flat() {
    let d = OutcomeDistribution::new(3, [(0, 0.25), (1, 0.25), (2, 0.25), (3, 0.125), (4, 0.125)])
        .unwrap();
    assert!(matches!(
        run_one_shot(&d, &[DeviceModel::HonestGhz], 1, 0, false),
        Err(ProtocolError::Config(_))
    ));
}

#[test]
fn analysis_pipeline_on_general_source() {
    let d = OutcomeDistribution::new(3, [(0, 0.25), (1, 0.25), (2, 0.25), (3, 0.125), (4, 0.125)])
        .unwrap();
    let honest = analyze_one_shot(&d, &[DeviceModel::HonestGhz], 200, 3).unwrap();
    assert_eq!(honest.flat_size, 4);
    assert!((honest.non_abort_rate - 1.0).abs() < 1e-12);
    let total: f64 = honest.components.iter().map(|c| c.weight).sum();
    assert!((total - 1.0).abs() < 1e-12);
    let lhv = analyze_one_shot(&d, &[DeviceModel::lhv(2).unwrap()], 2000, 3).unwrap();
    assert!(lhv.non_abort_rate < 0.8);
}

struct Collapsing;

impl BlockStrategy for Collapsing {
    fn name(&self) -> String {
        "collapsing".into()
    }
    fn next_block(&self, history: &[u64]) -> Result<OutcomeDistribution, SourceError> {
        if history.len() < 2 {
            OutcomeDistribution::uniform(2, &[0, 1, 2, 3])
        } else {
            OutcomeDistribution::point_mass(2, 0)
        }
    }
}

#[test]
fn source_contract_violation_is_reported() {
    let oracle = BlockSourceOracle::new(SourceParams::new(2, 2.0).unwrap(), Arc::new(Collapsing));
    let cfg = config(
        two_tables(),
        uniform2(),
        DeviceModel::HonestGhz,
        ProtocolMode::Multi { rounds: Some(5) },
    );
    assert!(matches!(
        run_block_protocol(&oracle, 5, &cfg, 1, 0),
        Err(ProtocolError::Contract(_))
    ));
}

#[test]
fn config_validation() {
    let bad_n = config(
        table_family(3, &[vec![0; 8]]),
        uniform2(),
        DeviceModel::HonestGhz,
        ProtocolMode::Single,
    );
    assert!(matches!(bad_n.plan(), Err(ProtocolError::Config(_))));
    let mut bad_devices = config(
        two_tables(),
        uniform2(),
        DeviceModel::HonestGhz,
        ProtocolMode::Single,
    );
    bad_devices.devices = vec![DeviceModel::HonestGhz; 3];
    assert!(bad_devices.plan().is_err());
    let full = Arc::new(build_derandomized_family(2, 0.1).unwrap());
    assert!(config(
        full,
        uniform2(),
        DeviceModel::HonestGhz,
        ProtocolMode::Single
    )
    .plan()
    .is_err());
    let mut eps = config(
        two_tables(),
        uniform2(),
        DeviceModel::HonestGhz,
        ProtocolMode::Single,
    );
    eps.epsilon = 0.5;
    assert!(eps.plan().is_err());
    eps.epsilon = 0.3;
    assert!(eps.plan().is_err(), "epsilon outside the curve");
    let mut no_family = config(
        two_tables(),
        uniform2(),
        DeviceModel::HonestGhz,
        ProtocolMode::Single,
    );
    no_family.family = None;
    assert!(no_family.plan().is_err());
}
