//! Experiment plumbing behind the command-line tool: JSON experiment
//! configs, parallel trial execution on per-trial RNG streams, NDJSON and
//! CSV reports, and bound tables.
//!
//! Validation happens before any trial runs and before any file is
//! written; every output file is written to a temporary and renamed.

mod config;
mod experiment;
mod report;
mod tables;

pub use config::{
    resolve_family, resolve_source, ExperimentConfig, FamilyConfig, ModeName, OutputConfig,
    SourceConfig,
};
pub use experiment::{
    run_experiment, AnalyticColumns, ReportHeader, Summary, SummaryReport, TrialRow,
};
pub use report::{report_csv, report_ndjson, summary_csv, write_atomic};
pub use tables::{
    bound_tables, emit_bound_tables, BoundTables, BoundsParams, BoundsRow, EpsilonSweepRow,
    RoundsSweepRow,
};

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::Path;

    fn config(devices: &str, rounds: u64, trials: u64) -> ExperimentConfig {
        ExperimentConfig::from_json(&format!(
            r#"{{"seed": 5, "trials": {trials}, "mode": "multi", "epsilon": 0.1, "delta": 0.001,
                "rounds": {rounds}, "devices": ["{devices}"],
                "source": {{"uniform": {{"n": 2}}}},
                "family": {{"tables": [[0, 1, 2, 3], [3, 2, 1, 0]]}}}}"#
        ))
        .unwrap()
    }

    fn run(cfg: &ExperimentConfig) -> SummaryReport {
        run_experiment(&cfg.resolve(Path::new(".")).unwrap(), cfg.seed, cfg.trials).unwrap()
    }

    #[test]
    fn honest_experiment_never_aborts() {
        let r = run(&config("ghz", 10, 10_000));
        assert_eq!(r.summary.aborts, 0);
        assert_eq!(r.summary.bits, 10_000);
        let b = r.summary.bias.unwrap();
        assert!(b.bias < 5.0 * 0.5 / 100.0);
        assert_eq!(
            r.summary.failure_histogram.values().sum::<u64>(),
            r.rows.len() as u64
        );
    }

    #[test]
    fn lhv_experiment_detected() {
        let r = run(&config("lhv:2", 4, 20_000));
        let p = 0.75f64.powi(4);
        let sigma = (p * (1.0 - p) / 20_000.0).sqrt();
        assert!(1.0 - r.summary.abort_rate <= p + 5.0 * sigma);
        assert_eq!(r.summary.aborts + r.summary.bits, r.summary.completed);
    }

    #[test]
    fn reports_are_byte_identical() {
        let cfg = config("noisy:0.05", 20, 2000);
        let a = run(&cfg);
        let b = rayon::ThreadPoolBuilder::new()
            .num_threads(3)
            .build()
            .unwrap()
            .install(|| run(&cfg));
        assert_eq!(report_ndjson(&a), report_ndjson(&b));
        assert_eq!(report_csv(&a).unwrap(), report_csv(&b).unwrap());
        let ndjson = report_ndjson(&a);
        assert!(ndjson
            .lines()
            .next()
            .unwrap()
            .contains(crate::rng::RNG_ALGORITHM));
        assert_eq!(ndjson.lines().count(), 2002);
    }

    #[test]
    fn csv_columns() {
        let r = run(&config("lhv:2", 4, 50));
        let csv = report_csv(&r).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("trial,aborted,failures,bit"));
        for (line, row) in lines.zip(&r.rows) {
            let cols: Vec<_> = line.split(',').collect();
            assert_eq!(cols[0], row.trial.to_string());
            assert_eq!(cols[1] == "1", row.aborted.unwrap());
            assert_eq!(cols[3].is_empty(), row.aborted.unwrap());
        }
        let summary = summary_csv(&r.summary).unwrap();
        assert!(summary.starts_with("metric,value\n"));
        assert!(summary.contains("\nabort_rate,"));
    }
}
