//! Block sources: an adversarial rule choosing each block's distribution from
//! the previous blocks, subject to a per-block min-entropy floor.

use std::fmt;
use std::sync::Arc;

use super::{OutcomeDistribution, SourceError, SourceParams};

/// Slack allowed when comparing a block's min-entropy with the floor.
pub const ENTROPY_TOLERANCE: f64 = 1e-9;

/// The adversary's rule for the next block. Any side information E the
/// adversary holds is part of the implementing value.
pub trait BlockStrategy: Send + Sync {
    fn name(&self) -> String;
    fn next_block(&self, history: &[u64]) -> Result<OutcomeDistribution, SourceError>;
}

#[derive(Clone)]
pub struct BlockSourceOracle {
    params: SourceParams,
    strategy: Arc<dyn BlockStrategy>,
}

impl fmt::Debug for BlockSourceOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BlockSourceOracle")
            .field("params", &self.params)
            .field("strategy", &self.strategy.name())
            .finish()
    }
}

impl BlockSourceOracle {
    pub fn new(params: SourceParams, strategy: Arc<dyn BlockStrategy>) -> Self {
        BlockSourceOracle { params, strategy }
    }

    /// iid blocks from one fixed distribution, whose min-entropy is the floor.
    pub fn iid(dist: OutcomeDistribution) -> Result<Self, SourceError> {
        let params = SourceParams::new(dist.n(), dist.min_entropy().min(dist.n() as f64))?;
        Ok(Self::new(params, Arc::new(IidSource { dist })))
    }

    pub fn params(&self) -> SourceParams {
        self.params
    }

    /// Same strategy held to a different contract.
    pub fn with_params(&self, params: SourceParams) -> Self {
        Self::new(params, self.strategy.clone())
    }

    pub fn strategy_name(&self) -> String {
        self.strategy.name()
    }

    /// Next block's distribution, rejected if it breaks the `(n, k)` contract.
    pub fn emit(&self, history: &[u64]) -> Result<OutcomeDistribution, SourceError> {
        let dist = self.strategy.next_block(history)?;
        if dist.n() != self.params.n {
            return Err(SourceError::Contract(format!(
                "strategy {} emitted a {}-bit block, contract is {} bits",
                self.strategy.name(),
                dist.n(),
                self.params.n
            )));
        }
        let h = dist.min_entropy();
        if h + ENTROPY_TOLERANCE < self.params.k {
            return Err(SourceError::Contract(format!(
                "strategy {} emitted min-entropy {h} below the floor {} after {} blocks",
                self.strategy.name(),
                self.params.k,
                history.len()
            )));
        }
        Ok(dist)
    }

    /// Runs `emit` on each test history.
    pub fn check_contract<'a>(
        &self,
        histories: impl IntoIterator<Item = &'a [u64]>,
    ) -> Result<(), SourceError> {
        for h in histories {
            self.emit(h)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct IidSource {
    pub dist: OutcomeDistribution,
}

impl BlockStrategy for IidSource {
    fn name(&self) -> String {
        "iid".into()
    }
    fn next_block(&self, _history: &[u64]) -> Result<OutcomeDistribution, SourceError> {
        Ok(self.dist.clone())
    }
}

/// Uniform on `size` strings starting at an offset keyed by the history, so
/// the support moves adaptively while each block keeps `log2(size)` bits.
#[derive(Debug, Clone)]
pub struct AdaptiveFlat {
    pub n: u32,
    pub size: u64,
    pub key: u64,
}

impl AdaptiveFlat {
    pub fn new(n: u32, size: u64, key: u64) -> Result<Self, SourceError> {
        if n == 0 || n > 20 {
            return Err(SourceError::InvalidInput(format!(
                "adaptive flat source limited to 1..=20 bits, got {n}"
            )));
        }
        if size == 0 || size > 1u64 << n {
            return Err(SourceError::InvalidInput(format!(
                "support size {size} invalid for {n} bits"
            )));
        }
        Ok(AdaptiveFlat { n, size, key })
    }
}

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl BlockStrategy for AdaptiveFlat {
    fn name(&self) -> String {
        format!("adaptive-flat(size={})", self.size)
    }
    fn next_block(&self, history: &[u64]) -> Result<OutcomeDistribution, SourceError> {
        let h = history.iter().fold(mix(self.key), |acc, &b| mix(acc ^ b));
        let domain = 1u64 << self.n;
        let start = h % domain;
        let support: Vec<u64> = (0..self.size).map(|i| (start + i) % domain).collect();
        OutcomeDistribution::uniform(self.n, &support)
    }
}

/// Santha-Vazirani source read in blocks of `n` bits: every bit is 1 with
/// probability `1/2 + eps` or `1/2 - eps`, the sign chosen from the bits
/// emitted so far (here: favour repeating the previous bit).
#[derive(Debug, Clone)]
pub struct SanthaVazirani {
    pub n: u32,
    pub eps: f64,
}

impl SanthaVazirani {
    pub fn new(n: u32, eps: f64) -> Result<Self, SourceError> {
        if n == 0 || n > 16 {
            return Err(SourceError::InvalidInput(format!(
                "SV blocks limited to 1..=16 bits, got {n}"
            )));
        }
        if !(0.0..0.5).contains(&eps) {
            return Err(SourceError::InvalidInput(format!(
                "SV bias {eps} outside [0, 1/2)"
            )));
        }
        Ok(SanthaVazirani { n, eps })
    }

    /// `-n log2(1/2 + eps)`, the block min-entropy guaranteed by the bias.
    pub fn block_min_entropy(&self) -> f64 {
        -(self.n as f64) * (0.5 + self.eps).log2()
    }

    pub fn params(&self) -> Result<SourceParams, SourceError> {
        SourceParams::new(self.n, self.block_min_entropy())
    }
}

impl BlockStrategy for SanthaVazirani {
    fn name(&self) -> String {
        format!("santha-vazirani(eps={})", self.eps)
    }
    fn next_block(&self, history: &[u64]) -> Result<OutcomeDistribution, SourceError> {
        let prev = history.last().map_or(0, |b| b & 1);
        let mut probs = Vec::with_capacity(1 << self.n);
        for x in 0..1u64 << self.n {
            let mut p = 1.0;
            let mut last = prev;
            // most significant bit is emitted first
            for j in (0..self.n).rev() {
                let bit = (x >> j) & 1;
                p *= if bit == last {
                    0.5 + self.eps
                } else {
                    0.5 - self.eps
                };
                last = bit;
            }
            probs.push((x, p));
        }
        OutcomeDistribution::from_weights(self.n, probs)
    }
}
