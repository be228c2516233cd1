//! Riemann zeta and power-sum tails for real arguments.
//!
//! Both are evaluated by Euler–Maclaurin summation. For real `s` the
//! remainder after the `B_{2M}` correction is bounded in magnitude by the
//! first omitted correction term, which gives a certified truncation bound;
//! a rounding allowance proportional to the sum of absolute values of all
//! terms is added on top.

use serde::Serialize;
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// B_2, B_4, ..., B_30.
const BERNOULLI_EVEN: [f64; 15] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
    8553103.0 / 6.0,
    -23749461029.0 / 870.0,
    8615841276005.0 / 14322.0,
];

const ROUNDING: f64 = 8.0 * f64::EPSILON;

/// A zeta value with a certified absolute error bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZetaValue {
    pub argument: f64,
    pub value: f64,
    pub abs_error_bound: f64,
}

/// `(value, bound)` of `Σ_{n ≥ start} n^{-s}`; for `start == 1` and any
/// real `s > -(2M+1)` this is the analytic continuation of ζ(s).
fn em_sum(s: f64, start: u64) -> (f64, f64) {
    let n0 = start.max(16).max((s.abs() / 2.0) as u64 + 8);
    let mut sum = 0.0;
    let mut comp = 0.0;
    let mut abs_sum = 0.0;
    for n in start..n0 {
        let t = (n as f64).powf(-s);
        // Neumaier summation
        let y = sum + t;
        if sum.abs() >= t.abs() {
            comp += (sum - y) + t;
        } else {
            comp += (t - y) + sum;
        }
        sum = y;
        abs_sum += t.abs();
    }
    let n = n0 as f64;
    let n_pow = n.powf(-s);
    let integral = n * n_pow / (s - 1.0);
    let mut tail = integral + 0.5 * n_pow;
    abs_sum += integral.abs() + 0.5 * n_pow.abs();

    // (s)_{2k-1} n^{-s-2k+1} / (2k)!, updated incrementally.
    let mut rising = s; // (s)_1
    let mut npow = n_pow / n; // n^{-s-1}
    let mut fact = 2.0; // 2!
    let mut bound = f64::INFINITY;
    for (k, b2k) in BERNOULLI_EVEN.iter().enumerate() {
        let term = b2k / fact * rising * npow;
        if k + 1 == BERNOULLI_EVEN.len() {
            bound = term.abs();
            break;
        }
        tail += term;
        abs_sum += term.abs();
        let m = (2 * k + 1) as f64; // current rising length is 2k+1
        rising *= (s + m) * (s + m + 1.0);
        npow /= n * n;
        fact *= (m + 2.0) * (m + 3.0);
    }
    let value = sum + comp + tail;
    (value, bound + ROUNDING * abs_sum)
}

/// ζ(s) for real `s` with `|s − 1| ≥ 10⁻⁶`.
///
/// Negative arguments go through the functional equation
/// ζ(s) = 2^s π^{s−1} sin(πs/2) Γ(1−s) ζ(1−s).
pub fn zeta(s: f64) -> Result<ZetaValue> {
    if !s.is_finite() {
        return Err(Error::OutOfRange(format!(
            "zeta argument {s} is not finite"
        )));
    }
    if (s - 1.0).abs() < 1e-6 {
        return Err(Error::OutOfRange(format!(
            "zeta argument {s} is too close to the pole at 1"
        )));
    }
    if s < -100.0 {
        return Err(Error::OutOfRange(format!(
            "zeta argument {s} below supported range"
        )));
    }
    if s >= 0.0 {
        let (value, bound) = em_sum(s, 1);
        return Ok(ZetaValue {
            argument: s,
            value,
            abs_error_bound: bound,
        });
    }
    if s.fract() == 0.0 && (s as i64) % 2 == 0 {
        return Ok(ZetaValue {
            argument: s,
            value: 0.0,
            abs_error_bound: 0.0,
        });
    }
    let reflected = zeta(1.0 - s)?;
    let factor = 2f64.powf(s)
        * std::f64::consts::PI.powf(s - 1.0)
        * (std::f64::consts::FRAC_PI_2 * s).sin()
        * gamma(1.0 - s);
    let value = factor * reflected.value;
    // Γ and the elementary factors are trusted to ~1e-14 relative.
    let bound = factor.abs() * reflected.abs_error_bound + 1e-14 * value.abs();
    Ok(ZetaValue {
        argument: s,
        value,
        abs_error_bound: bound,
    })
}

/// Σ_{n > after} n^{-s} for `s > 1`, returned as `(value, bound)`.
pub fn power_tail(s: f64, after: u64) -> (f64, f64) {
    assert!(s > 1.0, "power_tail needs s > 1, got {s}");
    em_sum(s, after + 1)
}
