//! `mermin-extract`: run extraction experiments, print bound tables, build
//! and verify covering families, decompose sources into flat pieces.
//!
//! Exit codes: 0 ok, 2 config error, 3 contract violation, 4 budget exceeded.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mermin_extract::bounds_stats::FCurve;
use mermin_extract::cli_harness::{
    bound_tables, emit_bound_tables, report_csv, report_ndjson, resolve_family, run_experiment,
    summary_csv, write_atomic, BoundsParams, ExperimentConfig, FamilyConfig, ModeName,
    OutputConfig, SourceConfig,
};
use mermin_extract::hash_families::{
    build_derandomized_family, verify_covering, verify_covering_with_witnesses, CoveringMode,
    CoveringReport, FamilyFile, DEFAULT_BUDGET,
};
use mermin_extract::source_models::{decompose_into_flats, OutcomeDistribution};
use mermin_extract::Error;

#[derive(Parser)]
#[command(
    name = "mermin-extract",
    version,
    about = "Randomness extraction from weak sources with Mermin devices"
)]
struct Cli {
    /// Master seed; trial i uses stream(seed, i).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (run, bounds) or file (family build, decompose).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Format of what is printed to stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Worker threads for trials and covering scans.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Run protocol trials and report abort rate and output bias.
    Run(RunArgs),
    /// Round counts and Chernoff/Hoeffding bounds for (epsilon, delta, m).
    Bounds(BoundsArgs),
    #[command(subcommand)]
    Family(FamilyCommand),
    /// Split a distribution of min-entropy >= 2 into flat pieces.
    Decompose(DecomposeArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config (JSON). Excludes the protocol flags below.
    #[arg(long, conflicts_with_all = ["mode", "epsilon", "delta", "rounds", "device", "family_file", "source_file", "fcurve"])]
    config: Option<PathBuf>,
    /// single | multi | one-shot | robust
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    rounds: Option<u64>,
    /// Device model (ghz, lhv:<i>, noisy:<mu>, adversary:<name>); repeatable.
    #[arg(long)]
    device: Vec<String>,
    #[arg(long)]
    family_file: Option<PathBuf>,
    #[arg(long)]
    source_file: Option<PathBuf>,
    #[arg(long)]
    fcurve: Option<PathBuf>,
    #[arg(long)]
    trials: Option<u64>,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long)]
    epsilon: f64,
    #[arg(long)]
    delta: f64,
    /// Devices per round.
    #[arg(long, default_value_t = 1)]
    devices: u64,
    /// `epsilon,v` CSV; the illustrative curve when absent.
    #[arg(long)]
    fcurve: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    sweep_rounds: u64,
}

#[derive(Subcommand)]
enum FamilyCommand {
    /// Build the derandomized family over n-bit inputs.
    Build {
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 1.0 / 16.0)]
        delta: f64,
        /// Keep only the members found covering some 4-subset in an
        /// exhaustive scan, giving a listed family that can be run.
        #[arg(long)]
        prune: bool,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u128,
    },
    /// Count uncovered 4-subsets of a family file.
    Verify {
        #[arg(long)]
        family_file: PathBuf,
        #[arg(long, value_enum, default_value_t = VerifyMode::Exhaustive)]
        mode: VerifyMode,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u128,
        /// Subsets drawn in sampled mode.
        #[arg(long, default_value_t = 1_000_000)]
        trials: u64,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VerifyMode {
    Exhaustive,
    Sampled,
}

#[derive(Args)]
struct DecomposeArgs {
    #[arg(long)]
    source_file: PathBuf,
    /// Size of each flat piece, a power of two >= 4.
    #[arg(long, default_value_t = 4)]
    flat_size: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if t == 0 {
            return fail(&Error::Config("--threads must be positive".into()));
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
        {
            return fail(&Error::Config(e.to_string()));
        }
    }
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => fail(&e),
    }
}

fn fail(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code() as u8)
}

fn dispatch(cli: &Cli) -> Result<ExitCode, Error> {
    match &cli.command {
        Command::Run(args) => run(cli, args),
        Command::Bounds(args) => bounds(cli, args),
        Command::Family(FamilyCommand::Build {
            n,
            delta,
            prune,
            budget,
        }) => family_build(cli, *n, *delta, *prune, *budget),
        Command::Family(FamilyCommand::Verify {
            family_file,
            mode,
            budget,
            trials,
        }) => family_verify(cli, family_file, *mode, *budget, *trials),
        Command::Decompose(args) => decompose(cli, args),
    }
}

fn emit(cli: &Cli, text: &str) -> Result<(), Error> {
    match &cli.out {
        Some(path) => write_atomic(path, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn json(v: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(v).expect("output serializes") + "\n"
}

fn experiment_from_flags(cli: &Cli, args: &RunArgs) -> Result<ExperimentConfig, Error> {
    let missing = |flag: &str| Error::Config(format!("--{flag} is required without --config"));
    Ok(ExperimentConfig {
        seed: cli.seed.unwrap_or(0),
        trials: args.trials.unwrap_or(1),
        mode: ModeName::parse(args.mode.as_deref().ok_or_else(|| missing("mode"))?)?,
        epsilon: args.epsilon.ok_or_else(|| missing("epsilon"))?,
        delta: args.delta.ok_or_else(|| missing("delta"))?,
        rounds: args.rounds,
        devices: if args.device.is_empty() {
            vec!["ghz".into()]
        } else {
            args.device.clone()
        },
        source: SourceConfig::File(
            args.source_file
                .clone()
                .ok_or_else(|| missing("source-file"))?,
        ),
        min_entropy: None,
        family: args.family_file.clone().map(FamilyConfig::File),
        fcurve: args.fcurve.clone(),
        output: OutputConfig::default(),
        verbosity: 0,
    })
}

fn run(cli: &Cli, args: &RunArgs) -> Result<ExitCode, Error> {
    let (mut cfg, base) = match &args.config {
        Some(path) => ExperimentConfig::from_path(path)?,
        None => (experiment_from_flags(cli, args)?, PathBuf::from(".")),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(t) = args.trials {
        cfg.trials = t;
    }
    let protocol = cfg.resolve(&base)?;
    if cfg.fcurve.is_none() {
        eprintln!("note: using the illustrative f(eps) curve; supply --fcurve for real values");
    }
    let (mut report_path, mut csv_path) = cfg.output_paths(&base);
    if let Some(dir) = &cli.out {
        report_path = Some(dir.join("report.ndjson"));
        csv_path = Some(dir.join("trials.csv"));
    }
    let report = run_experiment(&protocol, cfg.seed, cfg.trials)?;
    if let Some(p) = &report_path {
        write_atomic(p, report_ndjson(&report).as_bytes())?;
    }
    if let Some(p) = &csv_path {
        write_atomic(p, report_csv(&report)?.as_bytes())?;
    }
    match cli.format {
        Format::Json => print!("{}", json(&report.summary)),
        Format::Csv => print!("{}", summary_csv(&report.summary)?),
    }
    if let Some(e) = report.first_error() {
        let err = Error::Contract(format!(
            "{} of {} trials stopped: {e}",
            report.summary.errors, report.summary.trials
        ));
        return Ok(fail(&err));
    }
    Ok(ExitCode::SUCCESS)
}

fn load_curve(path: Option<&Path>) -> Result<FCurve, Error> {
    match path {
        Some(p) => Ok(FCurve::from_csv_path(p)?),
        None => {
            eprintln!("note: using the illustrative f(eps) curve; supply --fcurve for real values");
            Ok(FCurve::illustrative())
        }
    }
}

fn bounds(cli: &Cli, args: &BoundsArgs) -> Result<ExitCode, Error> {
    let params = BoundsParams {
        epsilon: args.epsilon,
        delta: args.delta,
        devices: args.devices,
        curve: load_curve(args.fcurve.as_deref())?,
        sweep_rounds: args.sweep_rounds,
    };
    let tables = match &cli.out {
        Some(dir) => emit_bound_tables(&params, dir)?.0,
        None => bound_tables(&params)?,
    };
    match cli.format {
        Format::Json => print!("{}", json(&tables.bounds)),
        Format::Csv => print!("{}", tables.bounds_csv()?),
    }
    Ok(ExitCode::SUCCESS)
}

fn family_build(
    cli: &Cli,
    n: u32,
    delta: f64,
    prune: bool,
    budget: u128,
) -> Result<ExitCode, Error> {
    let family = build_derandomized_family(n, delta)?;
    let family = if prune {
        let (report, witnesses) =
            verify_covering_with_witnesses(&family, CoveringMode::Exhaustive { budget }, true)?;
        if report.uncovered() > 0 {
            return Err(Error::Contract(format!(
                "{} 4-subsets left uncovered",
                report.uncovered()
            )));
        }
        family.restrict(witnesses)?
    } else {
        family
    };
    emit(cli, &(FamilyFile::from_family(&family)?.to_json() + "\n"))?;
    eprintln!("family over {n} bits with {} members", family.m_count());
    Ok(ExitCode::SUCCESS)
}

fn family_verify(
    cli: &Cli,
    path: &Path,
    mode: VerifyMode,
    budget: u128,
    trials: u64,
) -> Result<ExitCode, Error> {
    let family = resolve_family(&FamilyConfig::File(path.to_path_buf()), Path::new(""))?;
    let mode = match mode {
        VerifyMode::Exhaustive => CoveringMode::Exhaustive { budget },
        VerifyMode::Sampled => CoveringMode::Sampled {
            trials,
            seed: cli.seed.unwrap_or(0),
        },
    };
    let report = verify_covering(&family, mode)?;
    let text = match (cli.format, &report) {
        (Format::Json, _) => json(&report),
        (Format::Csv, CoveringReport::Exhaustive { subsets, uncovered }) => {
            format!("mode,subsets,uncovered\nexhaustive,{subsets},{uncovered}\n")
        }
        (Format::Csv, CoveringReport::Sampled { estimate: e }) => format!(
            "mode,subsets,uncovered,fraction,ci_low,ci_high\nsampled,{},{},{},{},{}\n",
            e.trials, e.hits, e.fraction, e.ci_low, e.ci_high
        ),
    };
    emit(cli, &text)?;
    if report.uncovered() > 0 {
        return Ok(fail(&Error::Contract(format!(
            "{} 4-subsets uncovered",
            report.uncovered()
        ))));
    }
    Ok(ExitCode::SUCCESS)
}

fn decompose(cli: &Cli, args: &DecomposeArgs) -> Result<ExitCode, Error> {
    let dist = OutcomeDistribution::from_json_path(&args.source_file)?;
    let pieces = decompose_into_flats(&dist, args.flat_size)?;
    let text = match cli.format {
        Format::Json => json(&pieces),
        Format::Csv => {
            let mut s = String::from("weight,support\n");
            for p in &pieces {
                let support: Vec<String> = p.support.iter().map(u64::to_string).collect();
                s.push_str(&format!("{},\"{}\"\n", p.weight, support.join(" ")));
            }
            s
        }
    };
    emit(cli, &text)?;
    Ok(ExitCode::SUCCESS)
}
