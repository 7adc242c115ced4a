//! Greedy peeling of a distribution with max probability `<= 1/K` into a
//! convex combination of distributions uniform on `K` outcomes.
//!
//! Each step takes the `K` largest residual probabilities (outcomes already
//! at the cap `M/K` first, then by outcome value on ties) and peels the
//! largest weight that keeps every residual probability at most `1/K` of the
//! remaining mass `M`. A step either zeroes an outcome or brings one more
//! outcome to the cap, and capped outcomes stay capped, so the number of
//! components never exceeds the support size.

use std::collections::BTreeSet;

use serde::Serialize;

use super::{OutcomeDistribution, SourceError};

/// Residual probabilities below this are treated as zero.
pub const ZERO_TOLERANCE: f64 = 1e-12;
/// An outcome this close to `M/K` is treated as sitting at the cap.
const TIGHT_TOLERANCE: f64 = 1e-14;
/// Mass that may be left over on fewer than `K` outcomes by rounding.
const RESIDUE_TOLERANCE: f64 = 1e-10;

/// Weight times the uniform distribution on `support` (sorted, `K` strings).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlatComponent {
    pub support: Vec<u64>,
    pub weight: f64,
}

impl FlatComponent {
    pub fn as_distribution(&self, n: u32) -> Result<OutcomeDistribution, SourceError> {
        OutcomeDistribution::uniform(n, &self.support)
    }
}

/// Decomposition into `(n, 2)` flat pieces, each uniform on 4 strings.
pub fn caratheodory_decompose(
    dist: &OutcomeDistribution,
) -> Result<Vec<FlatComponent>, SourceError> {
    decompose_into_flats(dist, 4)
}

pub fn decompose_into_flats(
    dist: &OutcomeDistribution,
    k: usize,
) -> Result<Vec<FlatComponent>, SourceError> {
    if k == 0 {
        return Err(SourceError::InvalidInput(
            "flat size must be positive".into(),
        ));
    }
    let cap = 1.0 / k as f64;
    if dist.max_prob() > cap + ZERO_TOLERANCE {
        return Err(SourceError::NotDecomposable(format!(
            "max probability {} exceeds 1/{k}; min-entropy {} < {}",
            dist.max_prob(),
            dist.min_entropy(),
            (k as f64).log2()
        )));
    }
    if dist.support_len() < k {
        return Err(SourceError::NotDecomposable(format!(
            "support of {} outcomes is smaller than {k}",
            dist.support_len()
        )));
    }

    let mut residual: Vec<(u64, f64)> = dist.probs().iter().map(|(&x, &p)| (x, p)).collect();
    let mut tight: BTreeSet<u64> = BTreeSet::new();
    let mut components = Vec::new();
    let kf = k as f64;

    loop {
        residual.retain(|e| e.1 > ZERO_TOLERANCE);
        tight.retain(|x| residual.iter().any(|e| e.0 == *x));
        // the residual's own sum, so rounding in earlier steps cannot drift
        // the mass away from the probabilities it describes
        let mass: f64 = residual.iter().map(|e| e.1).sum();
        if mass <= ZERO_TOLERANCE {
            break;
        }
        if residual.len() < k {
            if mass <= RESIDUE_TOLERANCE {
                break;
            }
            return Err(SourceError::NotDecomposable(format!(
                "residual mass {mass} left on {} outcomes",
                residual.len()
            )));
        }
        let level = mass / kf;
        for (x, p) in residual.iter_mut() {
            if (*p - level).abs() <= TIGHT_TOLERANCE {
                tight.insert(*x);
            }
            if tight.contains(x) {
                *p = level;
            }
        }
        residual.sort_by(|a, b| {
            let ta = tight.contains(&a.0);
            let tb = tight.contains(&b.0);
            tb.cmp(&ta).then(b.1.total_cmp(&a.1)).then(a.0.cmp(&b.0))
        });
        let smallest = residual[k - 1].1;
        let weight = match residual.get(k) {
            None => mass,
            Some(&(_, outside)) => {
                let w = (kf * smallest).min(mass - kf * outside);
                // an outcome a rounding error above the cap: peel the
                // smallest selected outcome instead
                if w > 0.0 {
                    w
                } else {
                    kf * smallest
                }
            }
        };

        let mut support: Vec<u64> = residual[..k].iter().map(|e| e.0).collect();
        support.sort_unstable();
        components.push(FlatComponent { support, weight });

        let share = weight / kf;
        for e in residual[..k].iter_mut() {
            e.1 -= share;
        }
    }
    // mass dropped as sub-tolerance residue is spread back proportionally
    let total: f64 = components.iter().map(|c| c.weight).sum();
    for c in components.iter_mut() {
        c.weight /= total;
    }
    Ok(components)
}

/// `sum_i w_i * uniform(support_i)` as a sparse map.
pub fn reconstruct(components: &[FlatComponent]) -> std::collections::BTreeMap<u64, f64> {
    let mut out = std::collections::BTreeMap::new();
    for c in components {
        let share = c.weight / c.support.len() as f64;
        for &x in &c.support {
            *out.entry(x).or_insert(0.0) += share;
        }
    }
    out
}
