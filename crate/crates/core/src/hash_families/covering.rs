use std::collections::BTreeSet;

use rand::Rng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use super::family::{HashFamily, HashFunctionDescriptor};
use super::HashError;
use crate::bounds_stats::{wilson_interval, Z_99};
use crate::rng::stream;

/// Default cap on the number of 4-subsets scanned in exhaustive mode.
pub const DEFAULT_BUDGET: u128 = 100_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoveringMode {
    Exhaustive { budget: u128 },
    Sampled { trials: u64, seed: u64 },
}

impl CoveringMode {
    pub fn exhaustive() -> Self {
        CoveringMode::Exhaustive {
            budget: DEFAULT_BUDGET,
        }
    }
}

/// Sampled proportion with a 99% Wilson interval.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct CoverageEstimate {
    pub trials: u64,
    pub hits: u64,
    pub fraction: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl CoverageEstimate {
    fn new(hits: u64, trials: u64) -> Self {
        let (ci_low, ci_high) = wilson_interval(hits, trials, Z_99);
        CoverageEstimate {
            trials,
            hits,
            fraction: hits as f64 / trials as f64,
            ci_low,
            ci_high,
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum CoveringReport {
    Exhaustive {
        subsets: u128,
        uncovered: u128,
    },
    /// `estimate` is the uncovered fraction.
    Sampled {
        estimate: CoverageEstimate,
    },
}

impl CoveringReport {
    pub fn uncovered(&self) -> u128 {
        match self {
            CoveringReport::Exhaustive { uncovered, .. } => *uncovered,
            CoveringReport::Sampled { estimate } => estimate.hits as u128,
        }
    }
}

/// `C(N, 4)` for the domain `{0..N-1}`.
pub fn count_subsets(domain: u128) -> u128 {
    if domain < 4 {
        return 0;
    }
    // exact in u128 for any N <= 2^31; beyond that saturate
    let n = domain;
    n.checked_mul(n - 1)
        .and_then(|v| v.checked_mul(n - 2))
        .and_then(|v| v.checked_mul(n - 3))
        .map(|v| v / 24)
        .unwrap_or(u128::MAX)
}

/// `h(S) = {0,1,2,3}` for four distinct inputs.
pub fn covers(h: &HashFunctionDescriptor, subset: &[u64; 4]) -> bool {
    let mut seen = 0u8;
    for &x in subset {
        seen |= 1 << h.eval_unchecked(x);
    }
    seen == 0xf
}

fn domain_size(n: u32) -> Result<u64, HashError> {
    if n >= 64 {
        return Err(HashError::Unsupported("domain of 2^64 strings".into()));
    }
    Ok(1u64 << n)
}

fn check_budget(domain: u64, budget: u128) -> Result<u128, HashError> {
    let subsets = count_subsets(domain as u128);
    if subsets > budget {
        return Err(HashError::Mode(format!(
            "exhaustive scan of {subsets} subsets exceeds budget {budget}; use sampled mode"
        )));
    }
    Ok(subsets)
}

/// Draws uniformly random 4-subsets of `{0..N-1}`.
#[derive(Debug, Clone)]
pub struct SubsetSampler {
    domain: u64,
}

impl SubsetSampler {
    pub fn new(domain: u64) -> Result<Self, HashError> {
        if domain < 4 {
            return Err(HashError::InvalidInput(format!(
                "domain of {domain} has no 4-subsets"
            )));
        }
        Ok(SubsetSampler { domain })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> [u64; 4] {
        let mut s = [0u64; 4];
        let mut k = 0;
        while k < 4 {
            let v = rng.random_range(0..self.domain);
            if !s[..k].contains(&v) {
                s[k] = v;
                k += 1;
            }
        }
        s.sort_unstable();
        s
    }
}

/// Visit every 4-subset, partitioned by smallest element.
fn scan_subsets<T, F, M>(domain: u64, init: T, visit: F, merge: M) -> T
where
    T: Send + Sync + Clone,
    F: Fn(&mut T, [u64; 4]) + Sync,
    M: Fn(T, T) -> T + Sync + Send,
{
    let init_ref = &init;
    (0..domain)
        .into_par_iter()
        .map(|a| {
            let mut acc = init_ref.clone();
            for b in a + 1..domain {
                for c in b + 1..domain {
                    for d in c + 1..domain {
                        visit(&mut acc, [a, b, c, d]);
                    }
                }
            }
            acc
        })
        .reduce(|| init_ref.clone(), &merge)
}

/// Count (or estimate) the 4-subsets no member of `family` covers.
///
/// A subset counts as covered only when the witness member returned by the
/// family's search maps it onto all four symbols under ordinary evaluation.
pub fn verify_covering(
    family: &HashFamily,
    mode: CoveringMode,
) -> Result<CoveringReport, HashError> {
    verify_covering_with_witnesses(family, mode, false).map(|(r, _)| r)
}

/// As [`verify_covering`], optionally collecting the witness members found.
pub fn verify_covering_with_witnesses(
    family: &HashFamily,
    mode: CoveringMode,
    collect: bool,
) -> Result<(CoveringReport, BTreeSet<u128>), HashError> {
    let domain = domain_size(family.n())?;
    let witnessed = |subset: &[u64; 4]| -> Option<u128> {
        let idx = family.find_cover(subset)?;
        let h = family.member(idx)?;
        covers(&h, subset).then_some(idx)
    };
    match mode {
        CoveringMode::Exhaustive { budget } => {
            let subsets = check_budget(domain, budget)?;
            let (uncovered, witnesses) = scan_subsets(
                domain,
                (0u128, BTreeSet::new()),
                |acc, s| match witnessed(&s) {
                    Some(idx) => {
                        if collect {
                            acc.1.insert(idx);
                        }
                    }
                    None => acc.0 += 1,
                },
                |mut a, b| {
                    a.0 += b.0;
                    a.1.extend(b.1);
                    a
                },
            );
            Ok((CoveringReport::Exhaustive { subsets, uncovered }, witnesses))
        }
        CoveringMode::Sampled { trials, seed } => {
            if trials == 0 {
                return Err(HashError::InvalidInput(
                    "sampled mode needs trials > 0".into(),
                ));
            }
            let sampler = SubsetSampler::new(domain)?;
            let mut rng: ChaCha20Rng = stream(seed, 0);
            let mut uncovered = 0u64;
            let mut witnesses = BTreeSet::new();
            for _ in 0..trials {
                let s = sampler.sample(&mut rng);
                match witnessed(&s) {
                    Some(idx) => {
                        if collect {
                            witnesses.insert(idx);
                        }
                    }
                    None => uncovered += 1,
                }
            }
            Ok((
                CoveringReport::Sampled {
                    estimate: CoverageEstimate::new(uncovered, trials),
                },
                witnesses,
            ))
        }
    }
}

/// Fraction of 4-subsets mapped onto all four symbols by `h`, exact in
/// exhaustive mode, estimated with an interval in sampled mode.
pub fn covered_fraction_single(
    h: &HashFunctionDescriptor,
    mode: CoveringMode,
) -> Result<CoverageEstimate, HashError> {
    let domain = domain_size(h.n())?;
    match mode {
        CoveringMode::Exhaustive { budget } => {
            let subsets = check_budget(domain, budget)?;
            let hits = scan_subsets(
                domain,
                0u128,
                |acc, s| *acc += covers(h, &s) as u128,
                |a, b| a + b,
            );
            let fraction = hits as f64 / subsets as f64;
            Ok(CoverageEstimate {
                trials: subsets as u64,
                hits: hits as u64,
                fraction,
                ci_low: fraction,
                ci_high: fraction,
            })
        }
        CoveringMode::Sampled { trials, seed } => {
            if trials == 0 {
                return Err(HashError::InvalidInput(
                    "sampled mode needs trials > 0".into(),
                ));
            }
            let sampler = SubsetSampler::new(domain)?;
            let mut rng: ChaCha20Rng = stream(seed, 0);
            let hits = (0..trials)
                .filter(|_| covers(h, &sampler.sample(&mut rng)))
                .count() as u64;
            Ok(CoverageEstimate::new(hits, trials))
        }
    }
}
