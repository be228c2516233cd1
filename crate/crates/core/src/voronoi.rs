//! Truncated Voronoi expansion of the error term and the stationary-phase
//! probe of the inner exponential sums.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{self, ikrt, MainTerm, Orientation, Params};
use crate::precision::{CompensatedSum, DoubleDouble};

/// Largest coefficient table that [`g_table`] will allocate.
pub const MAX_TABLE_LEN: u64 = 50_000_000;

/// Phases `2π·θ` above this are reduced in double-double.
pub const PHASE_DD_THRESHOLD: f64 = 1e8;

/// Cycle counts above this cannot keep 15 fractional digits even in double-double.
const MAX_CYCLES: f64 = 1e16;

/// Largest number of terms in a direct probe sum.
pub const MAX_PROBE_TERMS: u128 = 10_000_000;

/// Largest number of terms in a transformed probe sum.
pub const MAX_TRANSFORMED_TERMS: u64 = 100_000_000;

/// `c₁ = a^{b/2(a+b)} b^{a/2(a+b)} (a+b)^{-1/2}`.
pub fn c1(p: Params) -> f64 {
    let (a, b) = (p.a() as f64, p.b() as f64);
    let k = a + b;
    a.powf(b / (2.0 * k)) * b.powf(a / (2.0 * k)) / k.sqrt()
}

/// `c₂ = (a/b)^{b/(a+b)} + (b/a)^{a/(a+b)}`.
pub fn c2(p: Params) -> f64 {
    let (a, b) = (p.a() as f64, p.b() as f64);
    let k = a + b;
    (a / b).powf(b / k) + (b / a).powf(a / k)
}

/// `c₂` to double-double accuracy, from exact integer powers.
fn c2_dd(p: Params) -> DoubleDouble {
    let (a, b, k) = (p.a(), p.b(), p.sum());
    let pa = |base: u32, e: u32| DoubleDouble::from_u128((base as u128).pow(e));
    (pa(a, b) / pa(b, b)).root(k) + (pa(b, a) / pa(a, a)).root(k)
}

/// Weight exponents `((a+2b)/2(a+b), (2a+b)/2(a+b))` on `h` and `r`.
pub fn coefficient_exponents(p: Params) -> (f64, f64) {
    let (a, b) = (p.a() as f64, p.b() as f64);
    let k2 = 2.0 * (a + b);
    ((a + 2.0 * b) / k2, (2.0 * a + b) / k2)
}

/// Exponent on the variable carrying power `alpha` when the other carries `beta`.
fn weight_exponent(alpha: u32, beta: u32) -> f64 {
    (alpha + 2 * beta) as f64 / (2 * (alpha + beta)) as f64
}

/// `g_{a,b}(n) = Σ_{n = h^a r^b} h^{-(a+2b)/2(a+b)} r^{-(2a+b)/2(a+b)}`.
pub fn g_ab(n: u64, p: Params) -> f64 {
    g_ab_oriented(n, p, Orientation::Forward)
}

/// [`g_ab`] with the roles of `a` and `b` optionally exchanged.
pub fn g_ab_oriented(n: u64, p: Params, orientation: Orientation) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let (alpha, beta) = p.oriented(orientation);
    let (wa, wb) = (weight_exponent(alpha, beta), weight_exponent(beta, alpha));
    let n = n as u128;
    let mut acc = 0.0;
    for r in 1..=ikrt(n, beta) {
        let rb = r.pow(beta);
        if !n.is_multiple_of(rb) {
            continue;
        }
        let q = n / rb;
        let h = ikrt(q, alpha);
        if h.pow(alpha) == q {
            acc += (h as f64).powf(-wa) * (r as f64).powf(-wb);
        }
    }
    acc
}

/// Sieved values of `g_{a,b}(n)` for `n ≤ N`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffTable {
    params: Params,
    n_max: u64,
    g: Vec<f64>,
}

impl CoeffTable {
    pub fn params(&self) -> Params {
        self.params
    }

    pub fn n_max(&self) -> u64 {
        self.n_max
    }

    /// `g(n)`; zero for `n = 0` or `n > N`.
    pub fn get(&self, n: u64) -> f64 {
        self.g.get(n as usize).copied().unwrap_or(0.0)
    }

    /// Values indexed by `n`, with a zero at index 0.
    pub fn values(&self) -> &[f64] {
        &self.g
    }

    /// `(n, g(n))` for the representable `n`.
    pub fn nonzero(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.g
            .iter()
            .enumerate()
            .skip(1)
            .filter(|(_, g)| **g != 0.0)
            .map(|(n, g)| (n as u64, *g))
    }
}

pub fn g_table(n_max: u64, p: Params) -> Result<CoeffTable> {
    g_table_oriented(n_max, p, Orientation::Forward)
}

/// Builds the table by enumerating the pairs `(h, r)` with `h^a r^b ≤ N`.
pub fn g_table_oriented(n_max: u64, p: Params, orientation: Orientation) -> Result<CoeffTable> {
    if n_max == 0 {
        return Err(Error::OutOfRange("table length must be at least 1".into()));
    }
    if n_max > MAX_TABLE_LEN {
        return Err(Error::Guard(format!(
            "coefficient table of length {n_max} exceeds the cap {MAX_TABLE_LEN}"
        )));
    }
    let (alpha, beta) = p.oriented(orientation);
    let (wa, wb) = (weight_exponent(alpha, beta), weight_exponent(beta, alpha));
    let n = n_max as usize;
    let inner_max = ikrt(n_max as u128, alpha) as usize;
    let inner_w: Vec<f64> = (0..=inner_max).map(|u| (u as f64).powf(-wa)).collect();
    let mut g = vec![0.0; n + 1];
    let mut r = 1usize;
    while let Some(rb) = r.checked_pow(beta).filter(|&rb| rb <= n) {
        let wr = (r as f64).powf(-wb);
        let limit = n / rb;
        if alpha == 1 {
            for (h, w) in inner_w.iter().enumerate().take(limit + 1).skip(1) {
                g[h * rb] += w * wr;
            }
        } else {
            let mut h = 1usize;
            while let Some(ha) = h.checked_pow(alpha).filter(|&ha| ha <= limit) {
                g[ha * rb] += inner_w[h] * wr;
                h += 1;
            }
        }
        r += 1;
    }
    Ok(CoeffTable {
        params: p,
        n_max,
        g,
    })
}

/// Truncation settings for the Voronoi series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoronoiConfig {
    pub z: f64,
    /// Minimum significant digits carried in each cosine phase.
    pub phase_precision: u32,
}

impl VoronoiConfig {
    pub fn new(z: f64) -> Result<Self> {
        Self::with_precision(z, 15)
    }

    pub fn with_precision(z: f64, phase_precision: u32) -> Result<Self> {
        if !z.is_finite() || z < 1.0 {
            return Err(Error::OutOfRange(format!(
                "truncation z = {z} must be finite and >= 1"
            )));
        }
        if phase_precision < 15 {
            return Err(Error::OutOfRange(
                "phase precision must be at least 15 digits".into(),
            ));
        }
        if phase_precision > 31 {
            return Err(Error::Precision(format!(
                "phase precision {phase_precision} exceeds the 31 digits of double-double"
            )));
        }
        Ok(Self { z, phase_precision })
    }

    /// `⌊z⌋` as a table length.
    pub fn terms(&self) -> u64 {
        self.z.floor() as u64
    }
}

/// Fractional part of `c₂ (x n)^{1/(a+b)}`, the Voronoi phase in cycles.
struct VoronoiPhase {
    k: u32,
    c2: f64,
    c2_dd: DoubleDouble,
    force_dd: bool,
}

impl VoronoiPhase {
    fn new(p: Params, phase_precision: u32) -> Self {
        Self {
            k: p.sum(),
            c2: c2(p),
            c2_dd: c2_dd(p),
            force_dd: phase_precision > 15,
        }
    }

    fn frac_cycles(&self, x: f64, n: u64) -> Result<f64> {
        let k = self.k as f64;
        let theta = self.c2 * (x * n as f64).powf(1.0 / k);
        if !self.force_dd && 2.0 * PI * theta <= PHASE_DD_THRESHOLD {
            return Ok(theta - theta.floor());
        }
        if theta > MAX_CYCLES {
            return Err(Error::Precision(format!(
                "phase of {theta:e} cycles cannot be reduced to 15 digits"
            )));
        }
        let xn = DoubleDouble::from_u128(n as u128).mul_f64(x);
        Ok((self.c2_dd * xn.root(self.k)).fract())
    }
}

/// `Δ*(x, z) = (c₁/π) x^{1/2(a+b)} Σ_{n≤z} g(n) cos(2π c₂ (xn)^{1/(a+b)} − π/4)`.
pub fn voronoi_truncated(x: f64, cfg: VoronoiConfig, p: Params) -> Result<f64> {
    let table = g_table(cfg.terms(), p)?;
    voronoi_truncated_with(x, cfg, &table)
}

/// [`voronoi_truncated`] reusing a prebuilt coefficient table.
pub fn voronoi_truncated_with(x: f64, cfg: VoronoiConfig, table: &CoeffTable) -> Result<f64> {
    if !x.is_finite() || x < 1.0 {
        return Err(Error::OutOfRange(format!(
            "x = {x} must be finite and >= 1"
        )));
    }
    let terms = cfg.terms();
    if table.n_max() < terms {
        return Err(Error::OutOfRange(format!(
            "coefficient table holds {} terms, {terms} requested",
            table.n_max()
        )));
    }
    let p = table.params();
    let phase = VoronoiPhase::new(p, cfg.phase_precision);
    let mut acc = CompensatedSum::new();
    for (n, g) in table.nonzero().take_while(|(n, _)| *n <= terms) {
        let t = phase.frac_cycles(x, n)?;
        acc.add(g * (2.0 * PI * (t - 0.125)).cos());
    }
    let k = p.sum() as f64;
    Ok(c1(p) / PI * x.powf(1.0 / (2.0 * k)) * acc.value())
}

/// `Δ(x) − Δ*(x, z)`.
pub fn voronoi_residual(x: f64, cfg: VoronoiConfig, p: Params) -> Result<f64> {
    let table = g_table(cfg.terms(), p)?;
    voronoi_residual_with(x, cfg, &table, &MainTerm::new(p)?)
}

pub fn voronoi_residual_with(
    x: f64,
    cfg: VoronoiConfig,
    table: &CoeffTable,
    main: &MainTerm,
) -> Result<f64> {
    let exact = lattice::delta_with(x, main)?.delta;
    Ok(exact - voronoi_truncated_with(x, cfg, table)?)
}

/// One block `S_{h,j}` of the dyadic decomposition of the ψ-sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BProbeSpec {
    pub h: u64,
    pub j: u32,
    pub x: f64,
    /// Frequency cutoff.
    pub big_h: f64,
    /// Dyadic depth.
    pub big_j: u32,
}

impl BProbeSpec {
    fn validate(&self) -> Result<()> {
        if self.h == 0 {
            return Err(Error::OutOfRange("frequency h must be positive".into()));
        }
        if !self.x.is_finite() || self.x < 1.0 || self.x > lattice::MAX_X {
            return Err(Error::OutOfRange(format!("x = {} out of range", self.x)));
        }
        Ok(())
    }
}

/// Decay ratio `c = (2ab)^{ab}` between consecutive dyadic points.
pub fn dyadic_ratio(p: Params) -> f64 {
    let (a, b) = (p.a() as f64, p.b() as f64);
    (2.0 * a * b).powf(a * b)
}

/// `m_j = x^{1/(a+b)} c^{-j}`.
pub fn dyadic_point(x: f64, j: u32, p: Params) -> f64 {
    x.powf(1.0 / p.sum() as f64) * dyadic_ratio(p).powi(-(j as i32))
}

/// `⌊m_j⌋`, exactly.
fn dyadic_floor(x: f64, j: u32, p: Params) -> u128 {
    let (a, b) = (p.a() as u128, p.b() as u128);
    let c = (2 * a * b).checked_pow(p.a() * p.b());
    let root = ikrt(x.floor() as u128, p.sum());
    match c.and_then(|c| c.checked_pow(j)) {
        Some(cj) => root / cj,
        None => 0,
    }
}

/// `Σ_{m_{j+1} < m ≤ m_j} e(−h x^{1/a} / m^{b/a})`, summed term by term.
pub fn s_hj_direct(spec: BProbeSpec, p: Params) -> Result<Complex64> {
    spec.validate()?;
    let hi = dyadic_floor(spec.x, spec.j, p);
    let lo = dyadic_floor(spec.x, spec.j + 1, p);
    if hi - lo > MAX_PROBE_TERMS {
        return Err(Error::Guard(format!("direct sum has {} terms", hi - lo)));
    }
    let (a, b) = (p.a(), p.b());
    let xi = spec.x.floor() as u128;
    let exact = a == 1 && spec.x == xi as f64;
    let x_dd = DoubleDouble::from_f64(spec.x);
    let mut re = CompensatedSum::new();
    let mut im = CompensatedSum::new();
    for m in (lo + 1)..=hi {
        let mb = m.pow(b);
        let t = if exact {
            // h x / m^b mod 1, with h x reduced modulo m^b first.
            let hx = (spec.h as u128 % mb) * (xi % mb) % mb;
            hx as f64 / mb as f64
        } else {
            (x_dd / DoubleDouble::from_u128(mb))
                .root(a)
                .mul_f64(spec.h as f64)
                .fract()
        };
        let (s, c) = (2.0 * PI * t).sin_cos();
        re.add(c);
        im.add(-s);
    }
    Ok(Complex64::new(re.value(), im.value()))
}

fn pow_mod(mut base: u128, mut e: u64, m: u128) -> u128 {
    let mut acc = 1 % m;
    base %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % m;
        }
        base = base * base % m;
        e >>= 1;
    }
    acc
}

/// Endpoint `n_{j,h} = (b/a) h (2ab)^{(a+b)bj}`, and whether it is an integer.
pub fn transform_endpoint(h: u64, j: u32, p: Params) -> (f64, bool) {
    let (a, b, k) = (p.a(), p.b(), p.sum());
    let e = k as u64 * b as u64 * j as u64;
    let base = 2 * a as u128 * b as u128;
    let numer_mod = (b as u128 % a as u128) * (h as u128 % a as u128) % a as u128
        * pow_mod(base, e, a as u128)
        % a as u128;
    let value = b as f64 / a as f64 * h as f64 * (base as f64).powf(e as f64);
    (value, numer_mod == 0)
}

/// `f'(1/2) = (b/a) h x^{1/a} 2^{(a+b)/a}`: the frequency at `m = 1/2`.
fn half_point_frequency(spec: &BProbeSpec, p: Params) -> (f64, bool) {
    let (a, b, k) = (p.a(), p.b(), p.sum());
    let (af, bf) = (a as f64, b as f64);
    let value = bf / af * spec.h as f64 * spec.x.powf(1.0 / af) * 2f64.powf(k as f64 / af);
    let xi = spec.x.floor();
    if xi != spec.x || value > 1e15 {
        return (value, false);
    }
    // Integer K is the endpoint iff (aK)^a = (bh)^a x 2^{a+b}.
    let cand = value.round() as u128;
    let lhs = (a as u128 * cand).checked_pow(a);
    let rhs = (b as u128 * spec.h as u128)
        .checked_pow(a)
        .and_then(|v| v.checked_mul(xi as u128))
        .and_then(|v| v.checked_mul(1u128 << k));
    let integral = matches!((lhs, rhs), (Some(l), Some(r)) if l == r);
    (value, integral)
}

/// Main term of the stationary-phase transform of [`s_hj_direct`]:
///
/// `c₁ x^{1/2(a+b)} Σ′_{n_{j,h} ≤ r ≤ n_{j+1,h}} h^{a/2(a+b)} r^{-(2a+b)/2(a+b)}
///  e(−c₂ x^{1/(a+b)} (h^a r^b)^{1/(a+b)} − 1/8)`.
///
/// When `m_{j+1} < 1/2` the block contains no integer below `1/2`, so the
/// summation interval is clipped at `m = 1/2` and the upper endpoint becomes
/// the frequency there; this keeps the last block finite.
pub fn s_hj_transformed(spec: BProbeSpec, p: Params) -> Result<Complex64> {
    spec.validate()?;
    let m_hi = dyadic_point(spec.x, spec.j, p);
    if m_hi < 0.5 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let (a, b, k) = (p.a(), p.b(), p.sum());
    let (lo, lo_int) = transform_endpoint(spec.h, spec.j, p);
    let clipped = dyadic_point(spec.x, spec.j + 1, p) < 0.5;
    let (hi, hi_int) = if clipped {
        half_point_frequency(&spec, p)
    } else {
        transform_endpoint(spec.h, spec.j + 1, p)
    };
    let r_lo = lo.ceil();
    let r_hi = hi.floor();
    if r_hi < r_lo {
        return Ok(Complex64::new(0.0, 0.0));
    }
    if r_hi - r_lo + 1.0 > MAX_TRANSFORMED_TERMS as f64 {
        return Err(Error::Guard(format!(
            "transformed sum has {} terms",
            r_hi - r_lo + 1.0
        )));
    }
    let (r_lo, r_hi) = (r_lo as u64, r_hi as u64);
    let kf = k as f64;
    let amp_exp = (2 * a + b) as f64 / (2.0 * kf);
    let prefactor =
        c1(p) * spec.x.powf(1.0 / (2.0 * kf)) * (spec.h as f64).powf(a as f64 / (2.0 * kf));
    let phase = VoronoiPhase::new(p, 15);
    let ha = (spec.h as u128).pow(a);
    let mut re = CompensatedSum::new();
    let mut im = CompensatedSum::new();
    for r in r_lo..=r_hi {
        let mut w = (r as f64).powf(-amp_exp);
        if (r == r_lo && lo_int && r as f64 == lo) || (r == r_hi && hi_int && r as f64 == hi) {
            w *= 0.5;
        }
        let n = u64::try_from(ha * (r as u128).pow(b))
            .map_err(|_| Error::Guard("transformed frequency exceeds 64 bits".into()))?;
        let t = phase.frac_cycles(spec.x, n)? + 0.125;
        let (s, c) = (2.0 * PI * t).sin_cos();
        re.add(w * c);
        im.add(-w * s);
    }
    Ok(Complex64::new(
        prefactor * re.value(),
        prefactor * im.value(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(a: u32, b: u32) -> Params {
        Params::new(a, b).unwrap()
    }

    #[test]
    fn constants_examples() {
        let p = pair(1, 1);
        assert!((c1(p) - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((c2(p) - 2.0).abs() < 1e-15);
        // 2^{1/6} 3^{-1/2} and 2^{-2/3} + 2^{1/3}, from mpmath at 30 digits.
        let p = pair(1, 2);
        assert!((c1(p) - 0.648_053_765_746_555_2).abs() < 1e-15);
        assert!((c2(p) - 1.889_881_574_842_31).abs() < 1e-15);
        assert!((c2_dd(p).to_f64() - c2(p)).abs() < 1e-15);
        // Classical coefficient (π√2)^{-1} of the truncated Voronoi formula.
        assert!((c1(pair(1, 1)) / PI - 0.225_079_079_039_276_5).abs() < 1e-15);
    }

    #[test]
    fn g_examples() {
        assert_eq!(g_ab(1, pair(2, 3)), 1.0);
        assert!((g_ab(2, pair(1, 1)) - 2.0 * 2f64.powf(-0.75)).abs() < 1e-15);
        let expected = 4f64.powf(-5.0 / 6.0) + 2f64.powf(-2.0 / 3.0);
        assert!((g_ab(4, pair(1, 2)) - expected).abs() < 1e-15);
        assert_eq!(g_ab(2, pair(2, 3)), 0.0);
    }

    #[test]
    fn table_examples() {
        let t = g_table(10, pair(1, 1)).unwrap();
        for n in 1..=10u64 {
            let d = lattice::d_ab(n, pair(1, 1)) as f64;
            assert!((t.get(n) - d * (n as f64).powf(-0.75)).abs() < 1e-15);
        }
        let t = g_table(40, pair(2, 3)).unwrap();
        let support: Vec<u64> = t.nonzero().map(|(n, _)| n).collect();
        assert_eq!(support, vec![1, 4, 8, 9, 16, 25, 27, 32, 36]);
        let t = g_table(1, pair(1, 2)).unwrap();
        assert_eq!(t.values(), &[0.0, 1.0]);
        assert!(g_table(MAX_TABLE_LEN + 1, pair(1, 2))
            .unwrap_err()
            .is_guard());
    }

    #[test]
    fn single_term_series() {
        let p = pair(1, 2);
        let x = 37.5;
        let v = voronoi_truncated(x, VoronoiConfig::new(1.0).unwrap(), p).unwrap();
        let expected = c1(p) / PI
            * x.powf(1.0 / 6.0)
            * (2.0 * PI * c2(p) * x.powf(1.0 / 3.0) - PI / 4.0).cos();
        assert!((v - expected).abs() < 1e-13);
    }

    #[test]
    fn config_validation() {
        assert!(VoronoiConfig::new(0.5).is_err());
        assert!(VoronoiConfig::with_precision(10.0, 32)
            .unwrap_err()
            .is_guard());
        assert!(VoronoiConfig::with_precision(10.0, 30).is_ok());
    }

    #[test]
    fn endpoints_exact() {
        // (1,1), h=1: n_{j,1} = 2^{2j+... } integer for every j.
        for j in 0..4 {
            let (v, int) = transform_endpoint(1, j, pair(1, 1));
            assert!(int);
            assert_eq!(v, 4f64.powi(j as i32));
        }
        // (2,3), h=1, j=0: 3/2 is not an integer; h=2 gives 3.
        assert!(!transform_endpoint(1, 0, pair(2, 3)).1);
        assert!(transform_endpoint(2, 0, pair(2, 3)).1);
        assert!(transform_endpoint(1, 1, pair(2, 3)).1);
    }

    #[test]
    fn single_phasor_block() {
        // x = 10^6, (1,2): m_0 = 100, m_1 = 6.25, so block j = 1 holds m in {1..6}.
        // Block j = 2 (m_2 ≈ 0.39) holds just m = 1.
        let spec = BProbeSpec {
            h: 1,
            j: 1,
            x: 1e6,
            big_h: 10.0,
            big_j: 3,
        };
        let s = s_hj_direct(spec, pair(1, 2)).unwrap();
        assert!(s.norm() <= 6.0);
        let p = pair(1, 3);
        // x = 10^4, (1,3): c = 6^3 = 216, m_0 = 10, m_1 < 1 -> block 0 is m in 1..=10.
        let spec = BProbeSpec {
            h: 1,
            j: 0,
            x: 10.0f64.powi(4),
            big_h: 2.0,
            big_j: 1,
        };
        let _ = s_hj_direct(spec, p).unwrap();
        let spec = BProbeSpec {
            h: 1,
            j: 1,
            x: 1e4,
            big_h: 2.0,
            big_j: 1,
        };
        assert_eq!(s_hj_direct(spec, p).unwrap(), Complex64::new(0.0, 0.0));
        // x = 2^4 = 16, (1,3): m_0 = 2, m_1 < 1: block 0 = {1, 2}; x = 1 gives m = 1 only.
        let spec = BProbeSpec {
            h: 1,
            j: 0,
            x: 1.0,
            big_h: 2.0,
            big_j: 0,
        };
        let one = s_hj_direct(spec, p).unwrap();
        assert!((one.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn direct_exact_and_dd_paths_agree() {
        let p = pair(1, 2);
        let spec = BProbeSpec {
            h: 3,
            j: 0,
            x: 1e6,
            big_h: 10.0,
            big_j: 2,
        };
        let exact = s_hj_direct(spec, p).unwrap();
        let nudged = BProbeSpec {
            x: 1e6 * (1.0 + f64::EPSILON),
            ..spec
        };
        let dd = s_hj_direct(nudged, p).unwrap();
        assert!((exact - dd).norm() < 1e-6);
    }
}
