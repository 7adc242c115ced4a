//! Round and length formulas. Every strict inequality is settled by checking
//! the defining condition directly on the candidate integer, never by a
//! floating-point ceiling alone.

use super::{BoundsError, FCurve};

fn check_delta(delta: f64) -> Result<(), BoundsError> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(BoundsError::InvalidInput(format!(
            "delta = {delta} must lie in (0, 1)"
        )));
    }
    Ok(())
}

fn check_f(f: f64) -> Result<(), BoundsError> {
    if f == 1.0 {
        return Err(BoundsError::UndefinedRounds(
            "f = 1 certifies nothing per round".into(),
        ));
    }
    if !(f > 0.0 && f < 1.0) {
        return Err(BoundsError::InvalidInput(format!(
            "f = {f} must lie in (0, 1)"
        )));
    }
    Ok(())
}

/// Smallest integer `k >= 1` with `holds(k)`, given `holds` is monotone and
/// `estimate` is close to the answer.
fn smallest_satisfying(estimate: f64, holds: impl Fn(u64) -> bool) -> u64 {
    let mut k = if estimate.is_finite() && estimate > 1.0 {
        estimate.floor() as u64
    } else {
        1
    };
    while !holds(k) {
        k += 1;
    }
    while k > 1 && holds(k - 1) {
        k -= 1;
    }
    k
}

/// Smallest `l` with `f^l < delta`, i.e. `l > log(delta) / log(f)`.
pub fn required_rounds_for(f: f64, delta: f64) -> Result<u64, BoundsError> {
    check_delta(delta)?;
    check_f(f)?;
    let estimate = delta.ln() / f.ln();
    Ok(smallest_satisfying(estimate, |l| f.powf(l as f64) < delta))
}

pub fn required_rounds(eps: f64, delta: f64, curve: &FCurve) -> Result<u64, BoundsError> {
    required_rounds_for(curve.f_of_eps(eps)?, delta)
}

/// Smallest `l > 8 ln(delta) / (f - 1)`, checked as `exp(-(1 - f) l / 8) < delta`.
pub fn required_rounds_robust_for(f: f64, delta: f64) -> Result<u64, BoundsError> {
    check_delta(delta)?;
    check_f(f)?;
    let estimate = 8.0 * delta.ln() / (f - 1.0);
    Ok(smallest_satisfying(estimate, |l| {
        (-(1.0 - f) * l as f64 / 8.0).exp() < delta
    }))
}

pub fn required_rounds_robust(eps: f64, delta: f64, curve: &FCurve) -> Result<u64, BoundsError> {
    required_rounds_robust_for(curve.f_of_eps(eps)?, delta)
}

/// `s = 8 ln(f) / (f - 1)`, the factor between robust and ideal round
/// counts; its limit 8 is returned at `f = 1`.
pub fn scaling_factor(f: f64) -> Result<f64, BoundsError> {
    if f == 1.0 {
        return Ok(8.0);
    }
    if !(f > 0.0 && f < 1.0) {
        return Err(BoundsError::InvalidInput(format!(
            "f = {f} must lie in (0, 1]"
        )));
    }
    let d = f - 1.0;
    Ok(8.0 * d.ln_1p() / d)
}

/// Smallest `n > (2 / R) log(delta) / log(f)`, checked as `f^(R n / 2) < delta`.
pub fn one_shot_length_for(rate: f64, f: f64, delta: f64) -> Result<u64, BoundsError> {
    if !(rate > 0.0 && rate <= 1.0) {
        return Err(BoundsError::InvalidInput(format!(
            "rate R = {rate} must lie in (0, 1]"
        )));
    }
    check_delta(delta)?;
    check_f(f)?;
    let estimate = 2.0 / rate * delta.ln() / f.ln();
    Ok(smallest_satisfying(estimate, |n| {
        f.powf(rate * n as f64 / 2.0) < delta
    }))
}

pub fn one_shot_length(
    rate: f64,
    eps: f64,
    delta: f64,
    curve: &FCurve,
) -> Result<u64, BoundsError> {
    one_shot_length_for(rate, curve.f_of_eps(eps)?, delta)
}
