//! Exact lattice counting for the two-dimensional divisor problem.
//!
//! `d_{a,b}(n)` counts ordered pairs `(h, r)` of positive integers with
//! `h^a r^b = n`; its summatory function `D_{a,b}(x)` counts the lattice
//! points under the curve `h^a r^b = x`. All counting is done on integers
//! (`u128` intermediates) so that near-perfect powers are never
//! misclassified by floating-point roots.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::precision::DoubleDouble;
use crate::zeta::{zeta, EULER_GAMMA};

/// Largest evaluation point accepted by the counting routines.
pub const MAX_X: f64 = 9_223_372_036_854_775_808.0; // 2^63

/// Largest exponent accepted in a pair.
pub const MAX_EXPONENT: u32 = 12;

/// A coprime exponent pair `1 ≤ a ≤ b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Params {
    a: u32,
    b: u32,
}

impl Params {
    pub fn new(a: u32, b: u32) -> Result<Self> {
        if a == 0 || b == 0 {
            return Err(Error::InvalidParams {
                a,
                b,
                reason: "exponents must be positive",
            });
        }
        if a > b {
            return Err(Error::InvalidParams {
                a,
                b,
                reason: "expected a <= b",
            });
        }
        if b > MAX_EXPONENT {
            return Err(Error::InvalidParams {
                a,
                b,
                reason: "exponent larger than 12",
            });
        }
        if gcd(a as u64, b as u64) != 1 {
            return Err(Error::InvalidParams {
                a,
                b,
                reason: "gcd(a, b) must be 1",
            });
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> u32 {
        self.a
    }

    pub fn b(&self) -> u32 {
        self.b
    }

    /// `a + b`.
    pub fn sum(&self) -> u32 {
        self.a + self.b
    }

    /// The pair (1,1), i.e. the classical Dirichlet divisor problem.
    pub fn is_dirichlet(&self) -> bool {
        self.a == self.b
    }

    /// Growth exponent `(1+a+b)/(a+b)` of `∫₁ᵀ Δ² dx`.
    pub fn mean_square_exponent(&self) -> f64 {
        (1 + self.a + self.b) as f64 / self.sum() as f64
    }

    /// Exponents `(first, second)` as seen from the given orientation.
    pub fn oriented(&self, orientation: Orientation) -> (u32, u32) {
        match orientation {
            Orientation::Forward => (self.a, self.b),
            Orientation::Swapped => (self.b, self.a),
        }
    }
}

impl std::fmt::Display for Params {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.a, self.b)
    }
}

/// Selects `(a, b)` or the swapped roles `(b, a)` for asymmetric objects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Orientation {
    Forward,
    Swapped,
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `base^k`, or `None` on `u128` overflow.
pub fn checked_pow(base: u128, k: u32) -> Option<u128> {
    base.checked_pow(k)
}

/// `⌊n^{1/k}⌋`, exactly.
pub fn ikrt(n: u128, k: u32) -> u128 {
    assert!(k >= 1, "ikrt: k must be positive");
    if k == 1 || n < 2 {
        return n;
    }
    if k >= 128 {
        return 1;
    }
    // Start strictly above the root, then integer Newton descends to the floor.
    let est = (n as f64).powf(1.0 / k as f64);
    let mut x = (est * (1.0 + 1e-9)) as u128 + 2;
    loop {
        let quotient = match checked_pow(x, k - 1) {
            Some(p) => n / p,
            None => 0,
        };
        let y = ((k as u128 - 1) * x + quotient) / k as u128;
        if y >= x {
            break;
        }
        x = y;
    }
    while checked_pow(x, k).is_none_or(|p| p > n) {
        x -= 1;
    }
    while checked_pow(x + 1, k).is_some_and(|p| p <= n) {
        x += 1;
    }
    x
}

/// Number of ordered pairs `(h, r)` with `h^a r^b = n`.
pub fn d_ab(n: u64, p: Params) -> u32 {
    if n == 0 {
        return 0;
    }
    let n = n as u128;
    let (a, b) = (p.a, p.b);
    let mut count = 0;
    if a == 1 && b == 1 {
        // Plain divisor count, pairing r with n/r.
        let s = ikrt(n, 2);
        for r in 1..=s {
            if n.is_multiple_of(r) {
                count += 2;
            }
        }
        return if s * s == n { count - 1 } else { count };
    }
    for r in 1..=ikrt(n, b) {
        let rb = r.pow(b);
        if n.is_multiple_of(rb) {
            let q = n / rb;
            if ikrt(q, a).pow(a) == q {
                count += 1;
            }
        }
    }
    count
}

fn check_x(x: f64) -> Result<()> {
    if !x.is_finite() || x < 0.0 {
        return Err(Error::OutOfRange(format!(
            "x = {x} must be finite and non-negative"
        )));
    }
    if x > MAX_X {
        return Err(Error::OutOfRange(format!(
            "x = {x} exceeds the supported maximum 2^63"
        )));
    }
    Ok(())
}

/// `D_{a,b}(X)` for an integer `X`, by the hyperbola method split at
/// `X^{1/(a+b)}`.
pub fn summatory_int(x: u64, p: Params) -> u128 {
    if x == 0 {
        return 0;
    }
    let xx = x as u128;
    let (a, b) = (p.a, p.b);
    let s = ikrt(xx, a + b);
    let mut total: u128 = 0;
    for h in 1..=s {
        total += ikrt(xx / h.pow(a), b);
    }
    if a == b {
        total *= 2;
    } else {
        for r in 1..=s {
            total += ikrt(xx / r.pow(b), a);
        }
    }
    total - s * s
}

/// `D_{a,b}(x) = #{(h, r) : h^a r^b ≤ x}`.
///
/// Only `⌊x⌋` matters, since every `h^a r^b` is an integer.
pub fn summatory_exact(x: f64, p: Params) -> Result<u128> {
    check_x(x)?;
    Ok(summatory_int(x.floor() as u64, p))
}

/// The smooth main term `ζ(b/a) x^{1/a} + ζ(a/b) x^{1/b}`, or
/// `x log x + (2γ − 1) x` for the pair (1,1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MainTerm {
    params: Params,
    zeta_ba: f64,
    zeta_ab: f64,
}

impl MainTerm {
    pub fn new(params: Params) -> Result<Self> {
        if params.is_dirichlet() {
            return Ok(Self {
                params,
                zeta_ba: f64::NAN,
                zeta_ab: f64::NAN,
            });
        }
        let (a, b) = (params.a as f64, params.b as f64);
        Ok(Self {
            params,
            zeta_ba: zeta(b / a)?.value,
            zeta_ab: zeta(a / b)?.value,
        })
    }

    pub fn params(&self) -> Params {
        self.params
    }

    /// `(ζ(b/a), ζ(a/b))`; NaN for (1,1).
    pub fn coefficients(&self) -> (f64, f64) {
        (self.zeta_ba, self.zeta_ab)
    }

    pub fn eval(&self, x: f64) -> f64 {
        if self.params.is_dirichlet() {
            x * x.ln() + (2.0 * EULER_GAMMA - 1.0) * x
        } else {
            let (a, b) = (self.params.a as f64, self.params.b as f64);
            self.zeta_ba * x.powf(1.0 / a) + self.zeta_ab * x.powf(1.0 / b)
        }
    }

    /// `C − main(x)`, keeping extra precision once `C` outgrows `f64`'s
    /// exact integer range.
    pub fn deficit(&self, count: u128, x: f64) -> f64 {
        let main = self.eval(x);
        if count <= 1_000_000_000_000_000 {
            count as f64 - main
        } else {
            (DoubleDouble::from_u128(count) - DoubleDouble::from_f64(main)).to_f64()
        }
    }
}

pub fn main_term(x: f64, p: Params) -> Result<f64> {
    check_x(x)?;
    Ok(MainTerm::new(p)?.eval(x))
}

/// One exact evaluation of the error term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorSample {
    pub x: f64,
    pub summatory: u128,
    pub main: f64,
    pub delta: f64,
}

pub fn delta(x: f64, p: Params) -> Result<ErrorSample> {
    delta_with(x, &MainTerm::new(p)?)
}

/// Like [`delta`] with a precomputed main term.
pub fn delta_with(x: f64, main: &MainTerm) -> Result<ErrorSample> {
    let summatory = summatory_exact(x, main.params)?;
    let m = main.eval(x);
    Ok(ErrorSample {
        x,
        summatory,
        main: m,
        delta: main.deficit(summatory, x),
    })
}

/// `ψ(u) = {u} − 1/2`.
pub fn psi(u: f64) -> f64 {
    u - u.floor() - 0.5
}

/// `f(a,b;x) = −Σ_{m ≤ x^{1/(a+b)}} ψ(x^{1/a} / m^{b/a})`, with the roles of
/// `a` and `b` exchanged for [`Orientation::Swapped`].
pub fn f_sum(orientation: Orientation, x: f64, p: Params) -> Result<f64> {
    check_x(x)?;
    if x < 1.0 {
        return Ok(0.0);
    }
    let (alpha, beta) = p.oriented(orientation);
    let xi = x.floor() as u64;
    let integral = x == xi as f64;
    let m_max = ikrt(xi as u128, p.sum());
    let inv_alpha = 1.0 / alpha as f64;
    let mut acc = 0.0;
    for m in 1..=m_max {
        let mb = m.pow(beta);
        let v = if alpha == 1 {
            x / mb as f64
        } else {
            (x / mb as f64).powf(inv_alpha)
        };
        let k = v.round();
        let value = if (v - k).abs() < 1e-9 {
            psi_near_integer(x, xi, integral, v, k, alpha, mb)
        } else {
            psi(v)
        };
        acc -= value;
    }
    Ok(acc)
}

/// ψ(v) for `v = (x/m^β)^{1/α}` within 1e-9 of the integer `k`: the side of
/// the jump is decided by comparing `x` with `k^α m^β` exactly.
fn psi_near_integer(x: f64, xi: u64, integral: bool, v: f64, k: f64, alpha: u32, mb: u128) -> f64 {
    let target = (k as u128)
        .checked_pow(alpha)
        .and_then(|t| t.checked_mul(mb));
    let ordering = match target {
        Some(t) if integral => (xi as u128).cmp(&t),
        Some(t) => x
            .partial_cmp(&(t as f64))
            .unwrap_or(std::cmp::Ordering::Equal),
        None => std::cmp::Ordering::Less,
    };
    match ordering {
        std::cmp::Ordering::Equal => -0.5,
        std::cmp::Ordering::Greater => (v - k).max(0.0) - 0.5,
        std::cmp::Ordering::Less => 0.5 - (k - v).max(0.0),
    }
}

/// `|ψ(u) + Σ_{1≤|h|≤H} e(hu)/(2πih)|`, the truncation error of the
/// Fourier series of ψ. The paired `±h` terms combine to `sin(2πhu)/(πh)`.
pub fn psi_expansion_residual(u: f64, big_h: f64) -> Result<f64> {
    if !big_h.is_finite() || big_h < 2.0 {
        return Err(Error::OutOfRange(format!(
            "H = {big_h} must be a finite real >= 2"
        )));
    }
    if !u.is_finite() {
        return Err(Error::OutOfRange("u must be finite".into()));
    }
    let frac = u - u.floor();
    let two_pi_u = 2.0 * std::f64::consts::PI * frac;
    let mut series = 0.0;
    for h in 1..=(big_h.floor() as u64) {
        let hf = h as f64;
        series += (hf * two_pi_u).sin() / (std::f64::consts::PI * hf);
    }
    Ok((psi(frac) + series).abs())
}
