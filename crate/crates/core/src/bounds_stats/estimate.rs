use serde::Serialize;

use super::BoundsError;

/// Two-sided 99% standard normal quantile.
pub const Z_99: f64 = 2.575_829_303_548_901;

/// Wilson score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BiasEstimate {
    pub samples: u64,
    pub ones: u64,
    pub mean: f64,
    /// `|mean - 1/2|`
    pub bias: f64,
    /// Interval on the bias induced by the 99% Wilson interval on the mean.
    pub ci_low: f64,
    pub ci_high: f64,
}

pub fn estimate_bias(bits: &[bool]) -> Result<BiasEstimate, BoundsError> {
    if bits.is_empty() {
        return Err(BoundsError::InvalidInput(
            "bias estimate of an empty sample".into(),
        ));
    }
    let samples = bits.len() as u64;
    let ones = bits.iter().filter(|&&b| b).count() as u64;
    let mean = ones as f64 / samples as f64;
    let (lo, hi) = wilson_interval(ones, samples, Z_99);
    let (ci_low, ci_high) = if lo <= 0.5 && 0.5 <= hi {
        (0.0, (0.5 - lo).max(hi - 0.5))
    } else {
        let a = (lo - 0.5).abs();
        let b = (hi - 0.5).abs();
        (a.min(b), a.max(b))
    };
    Ok(BiasEstimate {
        samples,
        ones,
        mean,
        bias: (mean - 0.5).abs(),
        ci_low,
        ci_high,
    })
}
