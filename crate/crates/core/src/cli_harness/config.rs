use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bounds_stats::FCurve;
use crate::hash_families::{FamilyFile, HashFamily, HashFunctionDescriptor};
use crate::mermin_devices::DeviceModel;
use crate::protocol_engine::{ProtocolConfig, ProtocolMode};
use crate::source_models::{
    AdaptiveFlat, BlockSourceOracle, OutcomeDistribution, SanthaVazirani, SourceParams,
};
use crate::Error;

/// One experiment: a protocol configuration run for `trials` independent
/// trials, trial `i` drawing from `stream(seed, i)`.
///
/// File references are resolved against the directory holding the config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub trials: u64,
    pub mode: ModeName,
    pub epsilon: f64,
    pub delta: f64,
    #[serde(default)]
    pub rounds: Option<u64>,
    /// Device model strings (`ghz`, `lhv:<i>`, `noisy:<mu>`,
    /// `adversary:<name>`): one for all devices, one per family member, or
    /// one per device of the run.
    pub devices: Vec<String>,
    pub source: SourceConfig,
    /// Declared per-block min-entropy `k`; every emitted block is checked
    /// against it. Defaults to what the source itself guarantees.
    #[serde(default)]
    pub min_entropy: Option<f64>,
    #[serde(default)]
    pub family: Option<FamilyConfig>,
    /// `epsilon,v` CSV; the illustrative curve when absent.
    #[serde(default)]
    pub fcurve: Option<PathBuf>,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub verbosity: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeName {
    Single,
    Multi,
    OneShot,
    Robust,
}

impl ModeName {
    pub fn parse(s: &str) -> Result<Self, Error> {
        match s {
            "single" => Ok(ModeName::Single),
            "multi" => Ok(ModeName::Multi),
            "one-shot" => Ok(ModeName::OneShot),
            "robust" => Ok(ModeName::Robust),
            _ => Err(Error::Config(format!(
                "unknown mode {s:?}; expected single, multi, one-shot or robust"
            ))),
        }
    }

    pub fn with_rounds(self, rounds: Option<u64>) -> Result<ProtocolMode, Error> {
        match self {
            ModeName::Single | ModeName::OneShot if rounds.is_some_and(|l| l != 1) => Err(
                Error::Config(format!("{self:?} mode runs exactly one round").to_lowercase()),
            ),
            ModeName::Single => Ok(ProtocolMode::Single),
            ModeName::OneShot => Ok(ProtocolMode::OneShot),
            ModeName::Multi => Ok(ProtocolMode::Multi { rounds }),
            ModeName::Robust => Ok(ProtocolMode::Robust { rounds }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum SourceConfig {
    /// Distribution file, emitted i.i.d. per block.
    File(PathBuf),
    /// Inline distribution object in the file format.
    Distribution(serde_json::Value),
    /// Uniform on all `2^n` strings.
    Uniform {
        n: u32,
    },
    SanthaVazirani {
        n: u32,
        eps: f64,
    },
    AdaptiveFlat {
        n: u32,
        size: u64,
        key: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum FamilyConfig {
    File(PathBuf),
    /// Explicit lookup tables of length `2^n`.
    Tables(Vec<Vec<u8>>),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Newline-delimited JSON report.
    #[serde(default)]
    pub report: Option<PathBuf>,
    /// CSV with columns trial, aborted, failures, bit.
    #[serde(default)]
    pub csv: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, Error> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("experiment config: {e}")))
    }

    pub fn from_path(path: &Path) -> Result<(Self, PathBuf), Error> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let cfg = Self::from_json(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((cfg, base))
    }

    /// The protocol configuration, with files read relative to `base`.
    pub fn resolve(&self, base: &Path) -> Result<ProtocolConfig, Error> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be positive".into()));
        }
        if self.devices.is_empty() {
            return Err(Error::Config(
                "at least one device model is required".into(),
            ));
        }
        let devices = self
            .devices
            .iter()
            .map(|d| DeviceModel::parse(d))
            .collect::<Result<Vec<_>, _>>()?;
        let fcurve = match &self.fcurve {
            Some(p) => FCurve::from_csv_path(&base.join(p))?,
            None => FCurve::illustrative(),
        };
        let mut source = resolve_source(&self.source, base)?;
        if let Some(k) = self.min_entropy {
            source = source.with_params(SourceParams::new(source.params().n, k)?);
        }
        let family = self
            .family
            .as_ref()
            .map(|f| resolve_family(f, base))
            .transpose()?;
        Ok(ProtocolConfig {
            epsilon: self.epsilon,
            delta: self.delta,
            source,
            family: family.map(Arc::new),
            devices,
            mode: self.mode.with_rounds(self.rounds)?,
            fcurve: Arc::new(fcurve),
            record_rounds: false,
        })
    }

    pub fn output_paths(&self, base: &Path) -> (Option<PathBuf>, Option<PathBuf>) {
        (
            self.output.report.as_ref().map(|p| base.join(p)),
            self.output.csv.as_ref().map(|p| base.join(p)),
        )
    }
}

pub fn resolve_source(source: &SourceConfig, base: &Path) -> Result<BlockSourceOracle, Error> {
    Ok(match source {
        SourceConfig::File(p) => {
            BlockSourceOracle::iid(OutcomeDistribution::from_json_path(&base.join(p))?)?
        }
        SourceConfig::Distribution(v) => {
            BlockSourceOracle::iid(OutcomeDistribution::from_json(&v.to_string())?)?
        }
        SourceConfig::Uniform { n } => {
            if *n == 0 || *n > 24 {
                return Err(Error::Config(format!(
                    "uniform source limited to 1..=24 bits, got {n}"
                )));
            }
            BlockSourceOracle::iid(OutcomeDistribution::uniform(
                *n,
                &(0..1u64 << n).collect::<Vec<_>>(),
            )?)?
        }
        SourceConfig::SanthaVazirani { n, eps } => {
            let sv = SanthaVazirani::new(*n, *eps)?;
            BlockSourceOracle::new(sv.params()?, Arc::new(sv))
        }
        SourceConfig::AdaptiveFlat { n, size, key } => {
            let a = AdaptiveFlat::new(*n, *size, *key)?;
            let params = SourceParams::new(*n, (*size as f64).log2())?;
            BlockSourceOracle::new(params, Arc::new(a))
        }
    })
}

pub fn resolve_family(family: &FamilyConfig, base: &Path) -> Result<HashFamily, Error> {
    match family {
        FamilyConfig::File(p) => {
            let path = base.join(p);
            let text = std::fs::read_to_string(&path)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            Ok(FamilyFile::from_json(&text)?.into_family()?)
        }
        FamilyConfig::Tables(tables) => {
            let len = tables.first().map_or(0, Vec::len);
            if len < 2 || !len.is_power_of_two() {
                return Err(Error::Config(format!(
                    "table length {len} is not a power of two >= 2"
                )));
            }
            let n = len.trailing_zeros();
            let members = tables
                .iter()
                .map(|t| HashFunctionDescriptor::table(n, t.clone()))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(HashFamily::from_members(n, members)?)
        }
    }
}
