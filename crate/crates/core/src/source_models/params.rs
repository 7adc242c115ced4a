use serde::{Deserialize, Serialize};

use super::SourceError;

/// An `(n, k)` source: `n`-bit blocks of min-entropy at least `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceParams {
    pub n: u32,
    pub k: f64,
}

impl SourceParams {
    pub fn new(n: u32, k: f64) -> Result<Self, SourceError> {
        if n == 0 || n > 64 {
            return Err(SourceError::InvalidInput(format!(
                "block length {n} outside 1..=64"
            )));
        }
        if !(k >= 0.0 && k <= n as f64) {
            return Err(SourceError::InvalidInput(format!(
                "min-entropy {k} outside [0, {n}]"
            )));
        }
        Ok(SourceParams { n, k })
    }

    pub fn rate(&self) -> f64 {
        self.k / self.n as f64
    }
}

/// Number of blocks of min-entropy `k` whose concatenation reaches 2 bits,
/// `ceil(2 / k)` settled by checking `c * k >= 2` directly.
pub fn blocks_needed(k: f64) -> Result<u64, SourceError> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(SourceError::CannotAmplify(format!(
            "block min-entropy {k} must be positive"
        )));
    }
    let mut c = (2.0 / k).ceil().max(1.0) as u64;
    while c > 1 && (c - 1) as f64 * k >= 2.0 {
        c -= 1;
    }
    while (c as f64) * k < 2.0 {
        c += 1;
    }
    Ok(c)
}

/// Concatenation of `ceil(2 / k')` blocks of an `(n', k')` source.
pub fn block_concat(params: SourceParams) -> Result<SourceParams, SourceError> {
    let c = blocks_needed(params.k)?;
    let n = c
        .checked_mul(params.n as u64)
        .filter(|&n| n <= 64)
        .ok_or_else(|| {
            SourceError::InvalidInput(format!("{c} blocks of {} bits exceed 64 bits", params.n))
        })?;
    Ok(SourceParams {
        n: n as u32,
        k: c as f64 * params.k,
    })
}
