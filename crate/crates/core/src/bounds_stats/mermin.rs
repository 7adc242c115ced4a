use serde::Serialize;

use super::BoundsError;

/// Conditional pass probabilities over the four settings (111, 100, 010,
/// 001), the input distribution, and the resulting Mermin value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MerminStats {
    pub pass_probs: [f64; 4],
    pub input_dist: [f64; 4],
    pub v: f64,
    pub w: f64,
}

impl MerminStats {
    pub fn new(pass_probs: [f64; 4], input_dist: [f64; 4]) -> Result<Self, BoundsError> {
        let v = mermin_value(pass_probs, input_dist)?;
        Ok(MerminStats {
            pass_probs,
            input_dist,
            v,
            w: 1.0 - v,
        })
    }

    /// From pass/trial counts per setting, weighting settings uniformly.
    pub fn uniform_from_counts(passes: [u64; 4], trials: [u64; 4]) -> Result<Self, BoundsError> {
        let mut probs = [0.0; 4];
        for s in 0..4 {
            if trials[s] == 0 {
                return Err(BoundsError::InvalidInput(format!(
                    "no trials for setting {s}"
                )));
            }
            probs[s] = passes[s] as f64 / trials[s] as f64;
        }
        Self::new(probs, [0.25; 4])
    }
}

/// `v = sum_s P(pass | s) P(s)`. The 111 term counts `A^B^C = 1` as a pass, the
/// other three count `A^B^C = 0`; `pass_probs` are already in that form.
pub fn mermin_value(pass_probs: [f64; 4], input_dist: [f64; 4]) -> Result<f64, BoundsError> {
    if pass_probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(BoundsError::InvalidInput(format!(
            "pass probabilities {pass_probs:?} outside [0, 1]"
        )));
    }
    if input_dist.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(BoundsError::InvalidInput(format!(
            "input distribution {input_dist:?} has entries outside [0, 1]"
        )));
    }
    let total: f64 = input_dist.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(BoundsError::InvalidInput(format!(
            "input distribution sums to {total}"
        )));
    }
    Ok(pass_probs.iter().zip(input_dist).map(|(c, p)| c * p).sum())
}
