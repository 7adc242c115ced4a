use serde::Serialize;

use super::LhvStrategy;
use crate::bounds_stats::mermin_value;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassicalConstraint {
    None,
    /// Party A's response does not depend on its input.
    OutputAConstant,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassicalMax {
    pub max_vu: f64,
    pub maximizers: Vec<u8>,
    pub strategies_considered: usize,
    /// Entry `k`: strategies passing exactly `k` of the four settings.
    pub satisfied_histogram: [usize; 5],
}

/// `v_u` of a deterministic strategy under uniform settings.
pub fn lhv_value(s: LhvStrategy) -> f64 {
    let mask = s.pass_mask();
    let probs: [f64; 4] = std::array::from_fn(|i| ((mask >> i) & 1) as f64);
    mermin_value(probs, [0.25; 4]).expect("0/1 pass probabilities with uniform settings")
}

/// Exhaustive search over the 64 deterministic strategies (or the 32 with a
/// constant A).
pub fn brute_force_classical_max(constraint: ClassicalConstraint) -> ClassicalMax {
    let candidates: Vec<LhvStrategy> = LhvStrategy::all()
        .filter(|s| match constraint {
            ClassicalConstraint::None => true,
            ClassicalConstraint::OutputAConstant => s.parties()[0].is_constant(),
        })
        .collect();
    let mut histogram = [0usize; 5];
    let mut best = f64::NEG_INFINITY;
    let mut maximizers = Vec::new();
    for &s in &candidates {
        histogram[s.pass_mask().count_ones() as usize] += 1;
        let v = lhv_value(s);
        if v > best {
            best = v;
            maximizers.clear();
        }
        if v == best {
            maximizers.push(s.index());
        }
    }
    ClassicalMax {
        max_vu: best,
        maximizers,
        strategies_considered: candidates.len(),
        satisfied_histogram: histogram,
    }
}
