use std::collections::BTreeMap;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::SourceError;

/// Accepted gap between the total mass and 1.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-12;
/// Tolerance on `1/4` when testing flatness.
pub const FLAT_TOLERANCE: f64 = 1e-9;

/// Sparse distribution over `n`-bit strings. Outcomes of probability zero
/// are dropped on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeDistribution {
    n: u32,
    probs: BTreeMap<u64, f64>,
}

#[derive(Serialize, Deserialize)]
struct DistributionFile {
    n: u32,
    probs: BTreeMap<String, f64>,
}

fn check_n(n: u32) -> Result<(), SourceError> {
    if n == 0 || n > 64 {
        return Err(SourceError::InvalidInput(format!(
            "bit-length {n} outside 1..=64"
        )));
    }
    Ok(())
}

fn fits(n: u32, x: u64) -> bool {
    n >= 64 || x >> n == 0
}

impl OutcomeDistribution {
    pub fn new(n: u32, probs: impl IntoIterator<Item = (u64, f64)>) -> Result<Self, SourceError> {
        check_n(n)?;
        let mut map = BTreeMap::new();
        for (x, p) in probs {
            if !fits(n, x) {
                return Err(SourceError::InvalidInput(format!(
                    "outcome {x} is not a {n}-bit string"
                )));
            }
            if !(0.0..=1.0).contains(&p) {
                return Err(SourceError::InvalidInput(format!(
                    "probability {p} of outcome {x} outside [0, 1]"
                )));
            }
            if map.insert(x, p).is_some() {
                return Err(SourceError::InvalidInput(format!(
                    "outcome {x} listed twice"
                )));
            }
        }
        map.retain(|_, p| *p > 0.0);
        if map.is_empty() {
            return Err(SourceError::InvalidInput("empty distribution".into()));
        }
        let total: f64 = map.values().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(SourceError::InvalidInput(format!(
                "probabilities sum to {total}"
            )));
        }
        Ok(OutcomeDistribution { n, probs: map })
    }

    /// Scales nonnegative weights to unit mass.
    pub fn from_weights(
        n: u32,
        weights: impl IntoIterator<Item = (u64, f64)>,
    ) -> Result<Self, SourceError> {
        let weights: Vec<(u64, f64)> = weights.into_iter().collect();
        if weights.iter().any(|&(_, w)| !(w.is_finite() && w >= 0.0)) {
            return Err(SourceError::InvalidInput(
                "weights must be finite and nonnegative".into(),
            ));
        }
        let total: f64 = weights.iter().map(|&(_, w)| w).sum();
        if total <= 0.0 {
            return Err(SourceError::InvalidInput("empty distribution".into()));
        }
        Self::new(n, weights.into_iter().map(|(x, w)| (x, w / total)))
    }

    pub fn uniform(n: u32, support: &[u64]) -> Result<Self, SourceError> {
        if support.is_empty() {
            return Err(SourceError::InvalidInput("empty distribution".into()));
        }
        let p = 1.0 / support.len() as f64;
        Self::new(n, support.iter().map(|&x| (x, p)))
    }

    pub fn point_mass(n: u32, x: u64) -> Result<Self, SourceError> {
        Self::new(n, [(x, 1.0)])
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn probs(&self) -> &BTreeMap<u64, f64> {
        &self.probs
    }

    pub fn prob(&self, x: u64) -> f64 {
        self.probs.get(&x).copied().unwrap_or(0.0)
    }

    pub fn support_len(&self) -> usize {
        self.probs.len()
    }

    /// Outcomes with positive probability, ascending.
    pub fn support(&self) -> Vec<u64> {
        self.probs.keys().copied().collect()
    }

    pub fn max_prob(&self) -> f64 {
        self.probs.values().copied().fold(0.0, f64::max)
    }

    /// `-log2` of the largest probability.
    pub fn min_entropy(&self) -> f64 {
        -self.max_prob().log2()
    }

    /// Exactly four outcomes, each of probability 1/4.
    pub fn is_flat(&self) -> bool {
        self.probs.len() == 4
            && self
                .probs
                .values()
                .all(|p| (p - 0.25).abs() <= FLAT_TOLERANCE)
    }

    /// Uniform on its support, of any size.
    pub fn is_uniform(&self) -> bool {
        let p = 1.0 / self.probs.len() as f64;
        self.probs.values().all(|q| (q - p).abs() <= FLAT_TOLERANCE)
    }

    /// Independent joint distribution; `self` supplies the high bits.
    pub fn product(&self, other: &OutcomeDistribution) -> Result<OutcomeDistribution, SourceError> {
        let n = self.n + other.n;
        check_n(n)?;
        let mut probs = BTreeMap::new();
        for (&a, &p) in &self.probs {
            for (&b, &q) in &other.probs {
                probs.insert((a << other.n) | b, p * q);
            }
        }
        Ok(OutcomeDistribution { n, probs })
    }

    /// One draw by walking the cumulative distribution in outcome order.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut last = 0;
        for (&x, &p) in &self.probs {
            acc += p;
            last = x;
            if u < acc {
                return x;
            }
        }
        last
    }

    pub fn to_json(&self) -> String {
        let file = DistributionFile {
            n: self.n,
            probs: self
                .probs
                .iter()
                .map(|(x, p)| (x.to_string(), *p))
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("distribution serializes")
    }

    /// `{ "n": int, "probs": { "<decimal outcome>": real } }`
    pub fn from_json(text: &str) -> Result<Self, SourceError> {
        let file: DistributionFile =
            serde_json::from_str(text).map_err(|e| SourceError::Format(e.to_string()))?;
        let probs = file
            .probs
            .into_iter()
            .map(|(k, p)| {
                k.trim().parse::<u64>().map(|x| (x, p)).map_err(|_| {
                    SourceError::Format(format!("outcome key {k:?} is not a decimal integer"))
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(file.n, probs)
    }

    pub fn from_json_path(path: &Path) -> Result<Self, SourceError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SourceError::Format(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}
