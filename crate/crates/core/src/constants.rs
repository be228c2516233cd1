//! The series `Σ g_{a,b}(n)²` and the mean-square constant `c_{a,b}`,
//! evaluated by two independent routes.
//!
//! The direct route sums the sieved table up to `N` and adds the tail
//! `Σ_{n>N} g(n)²` computed from the structure of pairs of representations:
//! two representations of the same `n` are always
//! `(k m^b, j m'^a)` and `(k m'^b, j m^a)` with `gcd(m, m') = 1`, so
//! `n = k^a j^b P^{ab}` with `P = mm'`, and each `P` arises from `2^{ω(P)}`
//! ordered pairs `(m, m')`. The tail is then a lattice sum over `(k, j, P)`
//! with power-sum tails evaluated by Euler–Maclaurin.
//!
//! The Euler route writes `g(n)² = n^{-s₀} g*(n)²` with the multiplicative
//! `g*(n) = Σ_{n=h^a r^b} h^{-(b-a)/b}` and takes the product of local
//! factors over primes up to `P`. The normalized factor
//! `L(p)(1 − p^{-bs})(1 − p^{-(as+2λ)})` equals `(1 + p^{-E})/(1 − p^{-E})`
//! with `E = (b − a) + ab·s`, which bounds the product over `p > P`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{ikrt, Params};
use crate::precision::CompensatedSum;
use crate::voronoi::{coefficient_exponents, g_table, MAX_TABLE_LEN};
use crate::zeta::{power_tail, zeta, ZetaValue};

/// Largest prime bound accepted by the sieve.
pub const MAX_PRIME_LIMIT: u64 = 1_000_000;

pub const DEFAULT_DIRECT_N: u64 = 1_000_000;
pub const DEFAULT_PRIME_LIMIT: u64 = 100_000;

const ROUNDING: f64 = 32.0 * f64::EPSILON;

/// Evaluation route for [`sum_g_squared`] and [`c_ab`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    Direct,
    EulerProduct,
}

impl std::fmt::Display for Route {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Route::Direct => "direct",
            Route::EulerProduct => "euler_product",
        })
    }
}

/// A value with a certified error bound and the route that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesEstimate {
    pub value: f64,
    #[serde(rename = "error_bound")]
    pub truncation_error_bound: f64,
    pub route: Route,
    #[serde(flatten)]
    pub params: Params,
}

impl SeriesEstimate {
    /// True if the two estimates overlap within their combined bounds.
    pub fn agrees_with(&self, other: &SeriesEstimate) -> bool {
        (self.value - other.value).abs()
            <= self.truncation_error_bound + other.truncation_error_bound
    }

    pub fn relative_bound(&self) -> f64 {
        self.truncation_error_bound / self.value.abs()
    }
}

/// Primes `≤ limit`, by the sieve of Eratosthenes.
pub fn primes_up_to(limit: u64) -> Result<Vec<u64>> {
    if limit > MAX_PRIME_LIMIT {
        return Err(Error::Guard(format!(
            "prime bound {limit} exceeds the cap {MAX_PRIME_LIMIT}"
        )));
    }
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            primes.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    Ok(primes)
}

/// Number of non-negative solutions `(u, v)` of `ua + vb = α`.
pub fn v_count(alpha: u64, p: Params) -> u64 {
    match first_solution(alpha, p) {
        Some(u0) => (alpha - u0 * p.a() as u64) / (p.a() as u64 * p.b() as u64) + 1,
        None => 0,
    }
}

/// Smallest `u₀ ≥ 0` with `u₀ a ≡ α (mod b)` and `u₀ a ≤ α`.
fn first_solution(alpha: u64, p: Params) -> Option<u64> {
    let (a, b) = (p.a() as u64, p.b() as u64);
    let u0 = (0..b).find(|u| (u * a) % b == alpha % b)?;
    (u0 * a <= alpha).then_some(u0)
}

/// Exponent `λ = (b − a)/b` in `g*`.
pub fn gstar_exponent(p: Params) -> f64 {
    (p.b() - p.a()) as f64 / p.b() as f64
}

fn require_unequal(p: Params) -> Result<()> {
    if p.is_dirichlet() {
        return Err(Error::InvalidParams {
            a: p.a(),
            b: p.b(),
            reason: "g* is defined for a < b; use the closed form for (1,1)",
        });
    }
    Ok(())
}

/// `g*(n) = Σ_{n = h^a r^b} h^{-(b−a)/b}`, by enumerating representations.
pub fn gstar(n: u64, p: Params) -> Result<f64> {
    require_unequal(p)?;
    if n == 0 {
        return Ok(0.0);
    }
    let (a, b) = (p.a(), p.b());
    let lambda = gstar_exponent(p);
    let n = n as u128;
    let mut acc = 0.0;
    for r in 1..=ikrt(n, b) {
        let rb = r.pow(b);
        if n.is_multiple_of(rb) {
            let q = n / rb;
            let h = ikrt(q, a);
            if h.pow(a) == q {
                acc += (h as f64).powf(-lambda);
            }
        }
    }
    Ok(acc)
}

/// `g*(p^α) = Σ_{j < v(α)} p^{-(u₀ + bj)λ}`, where `u₀` is the least
/// solution of `ua ≡ α (mod b)`.
pub fn gstar_prime_power(prime: u64, alpha: u64, p: Params) -> Result<f64> {
    require_unequal(p)?;
    if prime < 2 {
        return Err(Error::OutOfRange(format!("{prime} is not a prime")));
    }
    let Some(u0) = first_solution(alpha, p) else {
        return Ok(0.0);
    };
    let lambda = gstar_exponent(p);
    let (a, b) = (p.a() as u64, p.b() as u64);
    let count = (alpha - u0 * a) / (a * b) + 1;
    if a == 1 {
        // α = u + vb: u runs over α mod b, α mod b + b, ..., α.
        let step = (prime as f64).powf(-(b as f64) * lambda);
        let mut term = (prime as f64).powf(-((alpha % b) as f64) * lambda);
        let mut acc = 0.0;
        for _ in 0..count {
            acc += term;
            term *= step;
        }
        return Ok(acc);
    }
    let pf = prime as f64;
    Ok((0..count)
        .map(|j| pf.powf(-((u0 + b * j) as f64) * lambda))
        .sum())
}

/// A local Euler factor with its truncation bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EulerFactor {
    pub value: f64,
    pub tail_bound: f64,
    /// Exponents actually summed, `0..=alpha_cap`.
    pub alpha_cap: u64,
}

fn check_region(s: f64, p: Params) -> Result<()> {
    let (a, b) = (p.a() as f64, p.b() as f64);
    let lambda = gstar_exponent(p);
    if !(b * s > 1.0 && a * s + 2.0 * lambda > 1.0) {
        return Err(Error::OutOfRange(format!(
            "s = {s} outside the convergence region bs > 1, as + 2(b-a)/b > 1 for {p}"
        )));
    }
    Ok(())
}

/// `1 + Σ_{1≤α≤cap} g*(p^α)² p^{-αs}` with a bound on the omitted terms.
///
/// The tail uses `g*(p^α) ≤ v(α) ≤ α/(ab) + 1`; the cap is raised until that
/// bound falls below `10⁻¹⁸` of the factor.
pub fn euler_factor(prime: u64, s: f64, p: Params, alpha_cap: u64) -> Result<EulerFactor> {
    require_unequal(p)?;
    check_region(s, p)?;
    if alpha_cap < 2 * p.b() as u64 {
        return Err(Error::OutOfRange(format!("alpha cap {alpha_cap} below 2b")));
    }
    let ab = (p.a() * p.b()) as f64;
    let ps = (prime as f64).powf(-s);
    let mut acc = CompensatedSum::new();
    let mut weight = 1.0;
    let mut alpha = 0u64;
    loop {
        let g = if alpha == 0 {
            1.0
        } else {
            gstar_prime_power(prime, alpha, p)?
        };
        acc.add(g * g * weight);
        // Terms beyond alpha: the next is ≤ (next/ab + 1)² ps^{next}, and successive
        // ratios are at most rho.
        let next = (alpha + 1) as f64;
        let first = (next / ab + 1.0).powi(2) * weight * ps;
        let rho = ((next + 1.0 + ab) / (next + ab)).powi(2) * ps;
        let tail = if rho < 1.0 {
            first / (1.0 - rho)
        } else {
            f64::INFINITY
        };
        if alpha >= alpha_cap && tail <= 1e-18 * acc.value() {
            return Ok(EulerFactor {
                value: acc.value(),
                tail_bound: tail,
                alpha_cap: alpha,
            });
        }
        if alpha > 100_000 {
            return Err(Error::Precision(format!(
                "Euler factor at p = {prime} did not converge"
            )));
        }
        alpha += 1;
        weight *= ps;
    }
}

/// `E = (b − a) + ab·s`: the normalized factor is `1 + O(p^{-E})`.
pub fn normalized_decay_exponent(s: f64, p: Params) -> f64 {
    (p.b() - p.a()) as f64 + (p.a() * p.b()) as f64 * s
}

/// `L(p) (1 − p^{-bs}) (1 − p^{-(as+2λ)})`, with its bound.
pub fn normalized_factor(prime: u64, s: f64, p: Params) -> Result<(f64, f64)> {
    let f = euler_factor(prime, s, p, 2 * p.b() as u64)?;
    let pf = prime as f64;
    let (a, b) = (p.a() as f64, p.b() as f64);
    let m = (1.0 - pf.powf(-b * s)) * (1.0 - pf.powf(-(a * s + 2.0 * gstar_exponent(p))));
    Ok((f.value * m, f.tail_bound * m + ROUNDING * f.value))
}

/// `Σ_n g*(n)² n^{-s} = ζ(bs) ζ(as + 2λ) G(s)`, with `G` as a product over
/// primes up to `prime_limit` times a bracketed tail.
pub fn gstar_dirichlet_series(s: f64, p: Params, prime_limit: u64) -> Result<(f64, f64)> {
    require_unequal(p)?;
    check_region(s, p)?;
    if prime_limit < 10 {
        return Err(Error::OutOfRange("prime bound must be at least 10".into()));
    }
    let (a, b) = (p.a() as f64, p.b() as f64);
    let z1 = zeta(b * s)?;
    let z2 = zeta(a * s + 2.0 * gstar_exponent(p))?;
    let mut log_g = CompensatedSum::new();
    let mut log_bound = 0.0;
    for prime in primes_up_to(prime_limit)? {
        let (v, bound) = normalized_factor(prime, s, p)?;
        log_g.add(v.ln());
        log_bound += bound / v + f64::EPSILON;
    }
    // Π_{p>P} (1 + 2p^{-E}/(1 − p^{-E})) lies in [1, exp(U)].
    let e = normalized_decay_exponent(s, p);
    let pl = prime_limit as f64;
    let u = 2.0 / (1.0 - pl.powf(-e)) * pl.powf(1.0 - e) / (e - 1.0);
    let tail_mid = (1.0 + u.exp()) / 2.0;
    let tail_half = u.exp_m1() / 2.0;
    let g = log_g.value().exp();
    let value = z1.value * z2.value * g * tail_mid;
    let bound =
        value.abs() * (rel(&z1) + rel(&z2) + log_bound.exp_m1() + tail_half / tail_mid + ROUNDING);
    Ok((value, bound))
}

fn rel(z: &ZetaValue) -> f64 {
    z.abs_error_bound / z.value.abs()
}

/// `s₀ = (2a+b)/((a+b)b)`: `g(n)² = n^{-s₀} g*(n)²`.
pub fn s0(p: Params) -> f64 {
    (2 * p.a() + p.b()) as f64 / (p.sum() * p.b()) as f64
}

/// `κ = (a² + ab + b²)/(a+b)`, the exponent attached to `P = mm'` in the
/// pair parametrization.
pub fn pair_exponent(p: Params) -> f64 {
    let (a, b) = (p.a() as f64, p.b() as f64);
    (a * a + a * b + b * b) / (a + b)
}

/// `Σ_{n≥1} g_{a,b}(n)²`.
///
/// `truncation` is the table length `N` for [`Route::Direct`] and the prime
/// bound for [`Route::EulerProduct`].
pub fn sum_g_squared(p: Params, route: Route, truncation: u64) -> Result<SeriesEstimate> {
    let (value, bound) = match route {
        Route::Direct => direct_route(p, truncation)?,
        Route::EulerProduct if p.is_dirichlet() => dirichlet_closed_form()?,
        Route::EulerProduct => gstar_dirichlet_series(s0(p), p, truncation)?,
    };
    Ok(SeriesEstimate {
        value,
        truncation_error_bound: bound,
        route,
        params: p,
    })
}

/// `ζ(3/2)⁴/ζ(3)`.
fn dirichlet_closed_form() -> Result<(f64, f64)> {
    let z = zeta(1.5)?;
    let z3 = zeta(3.0)?;
    let value = z.value.powi(4) / z3.value;
    Ok((value, value * (4.0 * rel(&z) + rel(&z3) + ROUNDING)))
}

/// `Σ_{j>J} j^{-s}` for `J = 0..=max`, built backwards from a certified tail.
fn power_tail_table(s: f64, max: u64) -> (Vec<f64>, f64) {
    let (start, bound) = power_tail(s, max);
    let mut table = vec![0.0; max as usize + 1];
    let mut acc = CompensatedSum::new();
    acc.add(start);
    table[max as usize] = start;
    for j in (1..=max).rev() {
        acc.add((j as f64).powf(-s));
        table[j as usize - 1] = acc.value();
    }
    (table, bound)
}

/// `2^{ω(n)}` for `n ≤ limit`.
fn two_pow_omega(limit: usize) -> Vec<u32> {
    let mut c = vec![1u32; limit + 1];
    for i in 2..=limit {
        if c[i] == 1 {
            // i is prime: no smaller prime has touched it.
            let mut j = i;
            while j <= limit {
                c[j] *= 2;
                j += i;
            }
        }
    }
    c
}

fn direct_route(p: Params, n_max: u64) -> Result<(f64, f64)> {
    if n_max < 16 {
        return Err(Error::OutOfRange(format!(
            "truncation N = {n_max} too small to certify"
        )));
    }
    if n_max > MAX_TABLE_LEN {
        return Err(Error::Guard(format!(
            "truncation N = {n_max} exceeds the cap {MAX_TABLE_LEN}"
        )));
    }
    let (a, b) = (p.a(), p.b());
    let (e1, e2) = coefficient_exponents(p);
    let (s1, s2) = (2.0 * e1, 2.0 * e2);
    let kappa = pair_exponent(p);

    let table = g_table(n_max, p)?;
    let mut head = CompensatedSum::new();
    for g in table.values() {
        head.add(g * g);
    }
    let head = head.value();
    drop(table);

    let nn = n_max as u128;
    let q = ikrt(nn, a * b) as u64;
    let (z1_table, z1_bound) = power_tail_table(s1, ikrt(nn, a) as u64);
    let (z2_table, z2_bound) = power_tail_table(s2, ikrt(nn, b) as u64);
    let zeta1 = zeta(s1)?;
    let zeta2 = zeta(s2)?;
    let c = two_pow_omega(q as usize);

    // Pairs with P ≤ Q that land beyond N.
    let mut tail = CompensatedSum::new();
    let mut tail_weight = 0.0;
    let mut p_sum = CompensatedSum::new();
    for pp in 1..=q {
        let cp = c[pp as usize] as f64;
        let wp = cp * (pp as f64).powf(-kappa);
        p_sum.add(wp);
        let m = nn / (pp as u128).pow(a * b);
        let k_max = ikrt(m, a);
        let mut inner = CompensatedSum::new();
        let mut inner_w = 0.0;
        for k in 1..=k_max {
            let j = ikrt(m / k.pow(a), b) as usize;
            let w = (k as f64).powf(-s1);
            inner.add(w * z2_table[j]);
            inner_w += w;
        }
        inner.add(zeta2.value * z1_table[k_max as usize]);
        tail.add(wp * inner.value());
        tail_weight += wp * (inner_w * z2_bound + z1_bound * zeta2.value + zeta2.abs_error_bound);
    }

    // Pairs with P > Q: every (k, j) counts. Σ_P 2^{ω(P)} P^{-κ} = ζ(κ)²/ζ(2κ).
    let zk = zeta(kappa)?;
    let z2k = zeta(2.0 * kappa)?;
    let all_p = zk.value * zk.value / z2k.value;
    let all_p_bound = all_p * (2.0 * rel(&zk) + rel(&z2k)) + ROUNDING * all_p;
    let far = zeta1.value * zeta2.value * (all_p - p_sum.value());
    let far_bound = zeta1.value * zeta2.value * (all_p_bound + ROUNDING * all_p)
        + far.abs() * (rel(&zeta1) + rel(&zeta2));

    let tail = tail.value();
    let value = head + tail + far;
    let bound = ROUNDING * (head + tail.abs() + far.abs()) + tail_weight + far_bound;
    Ok((value, bound))
}

/// `a^{b/(a+b)} b^{a/(a+b)} / (2(a+b+1)π²)`.
pub fn c_ab_prefactor(p: Params) -> f64 {
    let (a, b) = (p.a() as f64, p.b() as f64);
    let k = a + b;
    a.powf(b / k) * b.powf(a / k) / (2.0 * (k + 1.0) * PI * PI)
}

/// `c_{a,b} = a^{b/(a+b)} b^{a/(a+b)} / (2(a+b+1)π²) · Σ g(n)²`.
pub fn c_ab(p: Params, route: Route, truncation: u64) -> Result<SeriesEstimate> {
    let s = sum_g_squared(p, route, truncation)?;
    let f = c_ab_prefactor(p);
    Ok(SeriesEstimate {
        value: f * s.value,
        truncation_error_bound: f * s.truncation_error_bound + ROUNDING * f * s.value,
        ..s
    })
}

/// [`c_ab`] with the default truncation of the route.
pub fn c_ab_default(p: Params, route: Route) -> Result<SeriesEstimate> {
    c_ab(p, route, default_truncation(route))
}

pub fn default_truncation(route: Route) -> u64 {
    match route {
        Route::Direct => DEFAULT_DIRECT_N,
        Route::EulerProduct => DEFAULT_PRIME_LIMIT,
    }
}
