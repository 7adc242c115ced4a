//! Binomial tails and the Chernoff/Hoeffding robustness bounds.

use serde::Serialize;
use statrs::function::erf::erfc;
use statrs::function::gamma::ln_gamma;

use super::BoundsError;

/// Largest trial count summed exactly; beyond it the normal approximation
/// with continuity correction is used.
pub const EXACT_BINOMIAL_LIMIT: u64 = 1_000_000;

fn ln_choose(n: u64, k: u64) -> f64 {
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

/// `ln sum_{i in lo..=hi} P(X = i)` for `X ~ Bin(n, p)`, `0 < p < 1`.
fn ln_pmf_sum(n: u64, p: f64, lo: u64, hi: u64) -> f64 {
    let lp = p.ln();
    let lq = (-p).ln_1p();
    let term = |i: u64| ln_choose(n, i) + i as f64 * lp + (n - i) as f64 * lq;
    // the pmf is unimodal; anchor the log-sum-exp at its largest term in range
    let mode = (((n + 1) as f64 * p).floor() as u64).clamp(lo, hi);
    let peak = term(mode);
    let mut acc = 0.0;
    for i in lo..=hi {
        acc += (term(i) - peak).exp();
    }
    peak + acc.ln()
}

fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// `P(X <= k)` for `X ~ Bin(n, p)`; `k < 0` gives 0.
pub fn binomial_cdf(k: i64, n: u64, p: f64) -> f64 {
    if k < 0 {
        return 0.0;
    }
    let k = k as u64;
    if k >= n {
        return 1.0;
    }
    if p <= 0.0 {
        return 1.0;
    }
    if p >= 1.0 {
        return 0.0;
    }
    if n > EXACT_BINOMIAL_LIMIT {
        let mean = n as f64 * p;
        let sd = (mean * (1.0 - p)).sqrt();
        return normal_cdf((k as f64 + 0.5 - mean) / sd);
    }
    // sum whichever side is the minority tail
    if (k as f64) < n as f64 * p {
        ln_pmf_sum(n, p, 0, k).exp().min(1.0)
    } else {
        (1.0 - ln_pmf_sum(n, p, k + 1, n).exp()).max(0.0)
    }
}

/// `P(X > k)` for `X ~ Bin(n, p)`.
pub fn binomial_upper_tail(k: i64, n: u64, p: f64) -> f64 {
    if k < 0 {
        return 1.0;
    }
    let k = k as u64;
    if k >= n || p <= 0.0 {
        return 0.0;
    }
    if p >= 1.0 {
        return 1.0;
    }
    if n > EXACT_BINOMIAL_LIMIT {
        return 1.0 - binomial_cdf(k as i64, n, p);
    }
    if (k as f64) >= n as f64 * p {
        ln_pmf_sum(n, p, k + 1, n).exp().min(1.0)
    } else {
        (1.0 - ln_pmf_sum(n, p, 0, k).exp()).max(0.0)
    }
}

/// Tolerated failures over `l` rounds, `floor(l (1 - f) / 2)`. A relative
/// guard of 1e-9 keeps exact products such as `80 * 0.1 / 2` from flooring
/// to one less after rounding in `1 - f`.
pub fn failure_budget(f: f64, rounds: u64) -> u64 {
    let t = rounds as f64 * (1.0 - f) / 2.0;
    if t <= 0.0 {
        0
    } else {
        (t * (1.0 + 1e-9)).floor() as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChernoffBound {
    /// `exp(-(1 - f) l / 8)`
    pub bound: f64,
    /// `F(floor((1 - f) l / 2); l; 1 - f)`, the exact binomial probability of
    /// a cheating adversary staying within the failure budget.
    pub exact: f64,
}

/// Escape probability of a cheating adversary in the robust protocol.
pub fn chernoff_abort_bound(f: f64, rounds: u64) -> Result<ChernoffBound, BoundsError> {
    if !(0.0..1.0).contains(&f) {
        return Err(BoundsError::InvalidInput(format!(
            "f = {f} must lie in [0, 1)"
        )));
    }
    if rounds == 0 {
        return Ok(ChernoffBound {
            bound: 1.0,
            exact: 1.0,
        });
    }
    let bound = (-(1.0 - f) * rounds as f64 / 8.0).exp();
    let exact = binomial_cdf(failure_budget(f, rounds) as i64, rounds, 1.0 - f);
    Ok(ChernoffBound { bound, exact })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HoeffdingBound {
    /// `exp(-(1 - f)^2 l / (8 m))`
    pub bound: f64,
    /// `P(Bin(m l, mu) > floor(l (1 - f) / 2))` with `mu = (1 - f) / (4 m)`.
    pub exact: f64,
    pub mu: f64,
}

/// False-abort probability for honest devices failing independently with
/// probability `mu = (1 - f) / (4m)`.
pub fn hoeffding_false_abort_bound(
    f: f64,
    devices: u64,
    rounds: u64,
) -> Result<HoeffdingBound, BoundsError> {
    if !(0.0..1.0).contains(&f) {
        return Err(BoundsError::InvalidInput(format!(
            "f = {f} must lie in [0, 1)"
        )));
    }
    if devices == 0 {
        return Err(BoundsError::InvalidInput("m must be at least 1".into()));
    }
    let mu = honest_failure_budget(f, devices)?;
    let bound = (-(1.0 - f).powi(2) * rounds as f64 / (8.0 * devices as f64)).exp();
    let exact = binomial_upper_tail(failure_budget(f, rounds) as i64, devices * rounds, mu);
    Ok(HoeffdingBound { bound, exact, mu })
}

/// Per-device failure probability `mu = (1 - f) / (4m)` an honest provider
/// may have.
pub fn honest_failure_budget(f: f64, devices: u64) -> Result<f64, BoundsError> {
    if devices == 0 {
        return Err(BoundsError::InvalidInput("m must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&f) {
        return Err(BoundsError::InvalidInput(format!(
            "f = {f} must lie in [0, 1]"
        )));
    }
    Ok((1.0 - f) / (4.0 * devices as f64))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn direct_cdf(k: u64, n: u64, p: f64) -> f64 {
        // naive product-form pmf for small n
        let mut total = 0.0;
        for i in 0..=k.min(n) {
            let mut c = 1.0;
            for j in 0..i {
                c *= (n - j) as f64 / (j + 1) as f64;
            }
            total += c * p.powi(i as i32) * (1.0 - p).powi((n - i) as i32);
        }
        total
    }

    #[test]
    fn cdf_matches_direct_sum() {
        for &(n, p) in &[(10u64, 0.3), (25, 0.1), (40, 0.5), (60, 0.93)] {
            for k in 0..=n {
                let a = binomial_cdf(k as i64, n, p);
                let b = direct_cdf(k, n, p);
                assert!((a - b).abs() < 1e-12, "n={n} p={p} k={k}: {a} vs {b}");
                let up = binomial_upper_tail(k as i64, n, p);
                assert!((up - (1.0 - b)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn edges() {
        assert_eq!(binomial_cdf(-1, 10, 0.5), 0.0);
        assert_eq!(binomial_cdf(10, 10, 0.5), 1.0);
        assert_eq!(binomial_cdf(0, 0, 0.5), 1.0);
        assert_eq!(binomial_upper_tail(3, 10, 0.0), 0.0);
    }

    #[test]
    fn chernoff_plug_in() {
        let c = chernoff_abort_bound(0.9, 80).unwrap();
        assert!((c.bound - (-1.0f64).exp()).abs() < 1e-12);
        assert!(c.exact <= c.bound);
        assert_eq!(chernoff_abort_bound(0.9, 0).unwrap().bound, 1.0);
    }

    #[test]
    fn hoeffding_plug_in() {
        let h = hoeffding_false_abort_bound(0.9, 10, 8000).unwrap();
        assert!((h.bound - (-1.0f64).exp()).abs() < 1e-12);
        assert!(h.exact <= h.bound);
        let mut prev = 1.0;
        for l in (100..=5000).step_by(100) {
            let b = hoeffding_false_abort_bound(0.9, 10, l).unwrap().bound;
            assert!(b < prev);
            prev = b;
        }
    }

    #[test]
    fn budgets() {
        assert!((honest_failure_budget(0.9, 10).unwrap() - 0.0025).abs() < 1e-15);
        assert_eq!(honest_failure_budget(1.0, 10).unwrap(), 0.0);
        let a = honest_failure_budget(0.8, 5).unwrap();
        let b = honest_failure_budget(0.8, 10).unwrap();
        assert!((a - 2.0 * b).abs() < 1e-15);
        assert_eq!(failure_budget(0.9, 80), 4);
        assert_eq!(failure_budget(0.9, 0), 0);
        assert_eq!(failure_budget(0.99, 11053), 55);
    }
}
