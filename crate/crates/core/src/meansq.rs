//! Exact `∫ Δ(x)² dx` by closed-form integration between consecutive jumps
//! of the summatory function.
//!
//! On a segment `[u, v]` where `D(x) = C`, write `Δ(x) = Δ(u) − (M(x) − M(u))`
//! with `M` the main term. Then
//! `∫ Δ² = Δ(u)²(v−u) − 2Δ(u) ∫(M − M(u)) + ∫(M − M(u))²`, and the two
//! increment integrals are expanded in `τ = (x − u)/u`. Short segments use
//! power series in `τ`, long ones closed-form antiderivatives; neither ever
//! forms the cancelling square `C²`.

use rayon::prelude::*;
use serde::Serialize;

use crate::constants::{c_ab_default, Route};
use crate::error::{Error, Result};
use crate::lattice::{ikrt, summatory_exact, MainTerm, Params};
use crate::precision::CompensatedSum;

/// Integers per sieve block.
pub const BLOCK: u64 = 1 << 20;

/// Largest `T₁` for pairs with `a = 1`.
pub const CAP_A1: f64 = 1e7;
/// Largest `T₁` for pairs with `a ≥ 2`.
pub const CAP_A2: f64 = 1e9;

/// Segments with `τ = (v − u)/u` below this use the series expansions.
const SERIES_CUTOFF: f64 = 0.5;
const SERIES_TERMS: usize = 64;

const EULER_GAMMA: f64 = crate::zeta::EULER_GAMMA;

pub fn cap(p: Params) -> f64 {
    if p.a() == 1 {
        CAP_A1
    } else {
        CAP_A2
    }
}

fn check_range(t0: f64, t1: f64, p: Params) -> Result<()> {
    if !(t0.is_finite() && t1.is_finite()) || t0 < 0.0 || t1 < t0 {
        return Err(Error::OutOfRange(format!("invalid range [{t0}, {t1}]")));
    }
    if t1 > cap(p) {
        return Err(Error::Guard(format!(
            "T1 = {t1} exceeds the cap {} for {p}",
            cap(p)
        )));
    }
    Ok(())
}

/// Jumps `(n, d_{a,b}(n))` for representable `n` in `(T₀, T₁]`, produced one
/// sieve block at a time.
#[derive(Debug)]
pub struct Breakpoints {
    p: Params,
    next: u64,
    last: u64,
    buf: Vec<(u64, u32)>,
    pos: usize,
}

pub fn breakpoints(t0: f64, t1: f64, p: Params) -> Result<Breakpoints> {
    check_range(t0, t1, p)?;
    Ok(Breakpoints {
        p,
        next: t0.floor() as u64 + 1,
        last: t1.floor() as u64,
        buf: Vec::new(),
        pos: 0,
    })
}

impl Iterator for Breakpoints {
    type Item = (u64, u32);

    fn next(&mut self) -> Option<(u64, u32)> {
        while self.pos == self.buf.len() {
            if self.next > self.last {
                return None;
            }
            let hi = self.last.min((self.next / BLOCK + 1) * BLOCK - 1);
            self.buf.clear();
            self.pos = 0;
            block_breakpoints(self.next, hi, self.p, &mut self.buf);
            self.next = hi + 1;
        }
        self.pos += 1;
        Some(self.buf[self.pos - 1])
    }
}

/// Fills `out` with the jumps in `[lo, hi]`, in increasing order.
fn block_breakpoints(lo: u64, hi: u64, p: Params, out: &mut Vec<(u64, u32)>) {
    let (a, b) = (p.a(), p.b());
    if a == 1 {
        let mut counts = vec![0u32; (hi - lo + 1) as usize];
        if b == 1 {
            // Divisor pairs (r, h) with r ≤ h.
            for r in 1..=ikrt(hi as u128, 2) as u64 {
                let first = lo.div_ceil(r).max(r);
                let mut n = first * r;
                let mut h = first;
                while n <= hi {
                    counts[(n - lo) as usize] += if h == r { 1 } else { 2 };
                    n += r;
                    h += 1;
                }
            }
        } else {
            for r in 1..=ikrt(hi as u128, b) as u64 {
                let rb = r.pow(b);
                let mut n = lo.div_ceil(rb) * rb;
                while n <= hi {
                    counts[(n - lo) as usize] += 1;
                    n += rb;
                }
            }
        }
        out.extend(
            counts
                .iter()
                .enumerate()
                .filter(|(_, c)| **c > 0)
                .map(|(i, c)| (lo + i as u64, *c)),
        );
        return;
    }
    let mut values = Vec::new();
    for r in 1..=ikrt(hi as u128, b) as u64 {
        let rb = r.pow(b);
        let h_lo = ikrt(((lo - 1) / rb) as u128, a) as u64 + 1;
        let h_hi = ikrt((hi / rb) as u128, a) as u64;
        for h in h_lo..=h_hi {
            values.push(h.pow(a) * rb);
        }
    }
    values.sort_unstable();
    for n in values {
        match out.last_mut() {
            Some((m, c)) if *m == n => *c += 1,
            _ => out.push((n, 1)),
        }
    }
}

fn binomial_series(e: f64) -> [f64; SERIES_TERMS + 1] {
    let mut c = [0.0; SERIES_TERMS + 1];
    c[0] = 1.0;
    for k in 1..=SERIES_TERMS {
        c[k] = c[k - 1] * (e - (k as f64 - 1.0)) / k as f64;
    }
    c
}

/// `Σ_k coef[k] t^{k+1}/(k+1)`: the integral over `[0, t]` of a power series.
fn integrate_series(coef: &[f64], t: f64) -> f64 {
    let mut acc = 0.0;
    let mut tp = t;
    let floor = 1e-19 * t * t * t;
    for (k, c) in coef.iter().enumerate() {
        tp *= if k == 0 { 1.0 } else { t };
        if k > 2 && tp < floor {
            break;
        }
        acc += c * tp / (k as f64 + 1.0);
    }
    acc
}

/// The smooth part `M(x) = Σ_i A_i x^{α_i}` for `a ≠ b`.
#[derive(Debug, Clone)]
struct PowerModel {
    coef: [f64; 2],
    exp: [f64; 2],
    /// Series of `(1+τ)^{α_i} − 1`.
    single: [[f64; SERIES_TERMS + 1]; 2],
    /// Series of `((1+τ)^{α_i} − 1)((1+τ)^{α_j} − 1)`, for `(i,j) = (0,0), (0,1), (1,1)`.
    cross: [[f64; SERIES_TERMS + 1]; 3],
}

impl PowerModel {
    fn new(main: &MainTerm) -> Self {
        let p = main.params();
        let (z_ba, z_ab) = main.coefficients();
        let exp = [1.0 / p.a() as f64, 1.0 / p.b() as f64];
        let mut single = [binomial_series(exp[0]), binomial_series(exp[1])];
        for s in single.iter_mut() {
            s[0] = 0.0;
        }
        let pairs = [(0, 0), (0, 1), (1, 1)];
        let cross = pairs.map(|(i, j)| {
            let both = binomial_series(exp[i] + exp[j]);
            let (ci, cj) = (binomial_series(exp[i]), binomial_series(exp[j]));
            let mut c = [0.0; SERIES_TERMS + 1];
            for k in 2..=SERIES_TERMS {
                c[k] = both[k] - ci[k] - cj[k];
            }
            c
        });
        Self {
            coef: [z_ba, z_ab],
            exp,
            single,
            cross,
        }
    }

    /// `(∫_u^v (M − M(u)), ∫_u^v (M − M(u))²)`.
    fn increments(&self, u: f64, t: f64) -> (f64, f64) {
        let series = t < SERIES_CUTOFF;
        // ∫_0^t ((1+τ)^e − 1) dτ
        let s1 = |i: usize| {
            if series {
                integrate_series(&self.single[i], t)
            } else {
                let e = self.exp[i];
                ((1.0 + t).powf(e + 1.0) - 1.0) / (e + 1.0) - t
            }
        };
        // ∫_0^t ((1+τ)^{e_i} − 1)((1+τ)^{e_j} − 1) dτ
        let s2 = |i: usize, j: usize, slot: usize| {
            if series {
                integrate_series(&self.cross[slot], t)
            } else {
                let w = |e: f64| ((1.0 + t).powf(e + 1.0) - 1.0) / (e + 1.0);
                w(self.exp[i] + self.exp[j]) - w(self.exp[i]) - w(self.exp[j]) + t
            }
        };
        let ua = [u.powf(self.exp[0]), u.powf(self.exp[1])];
        let j1 = u * (self.coef[0] * ua[0] * s1(0) + self.coef[1] * ua[1] * s1(1));
        let j2 = u
            * (self.coef[0] * self.coef[0] * ua[0] * ua[0] * s2(0, 0, 0)
                + 2.0 * self.coef[0] * self.coef[1] * ua[0] * ua[1] * s2(0, 1, 1)
                + self.coef[1] * self.coef[1] * ua[1] * ua[1] * s2(1, 1, 2));
        (j1, j2)
    }
}

/// Series coefficients for `R(τ) = (1+τ) log(1+τ) − τ`, `τR` and `R²`.
#[derive(Debug, Clone)]
struct LogModel {
    r: [f64; SERIES_TERMS + 1],
    tau_r: [f64; SERIES_TERMS + 1],
    r_sq: [f64; SERIES_TERMS + 1],
}

impl LogModel {
    fn new() -> Self {
        let mut r = [0.0; SERIES_TERMS + 1];
        for (k, c) in r.iter_mut().enumerate().skip(2) {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            *c = sign / (k * (k - 1)) as f64;
        }
        let mut tau_r = [0.0; SERIES_TERMS + 1];
        tau_r[1..].copy_from_slice(&r[..SERIES_TERMS]);
        let mut r_sq = [0.0; SERIES_TERMS + 1];
        for (m, c) in r_sq.iter_mut().enumerate() {
            *c = (0..=m).map(|k| r[k] * r[m - k]).sum();
        }
        Self { r, tau_r, r_sq }
    }

    /// `(∫_0^t R, ∫_0^t τR, ∫_0^t R²)`.
    fn moments(&self, t: f64) -> (f64, f64, f64) {
        if t < SERIES_CUTOFF {
            self.series_moments(t)
        } else {
            Self::closed_moments(t)
        }
    }

    fn series_moments(&self, t: f64) -> (f64, f64, f64) {
        (
            integrate_series(&self.r, t),
            integrate_series(&self.tau_r, t),
            integrate_series(&self.r_sq, t),
        )
    }

    fn closed_moments(t: f64) -> (f64, f64, f64) {
        let w = 1.0 + t;
        let l = w.ln();
        let g1 = |w: f64, l: f64| w * w * l / 2.0 - 0.75 * w * w + w;
        let g2 = |w: f64, l: f64| {
            w.powi(3) * l / 3.0 - w.powi(3) / 9.0 - w * w * l / 2.0 + w * w / 4.0
                - (w - 1.0).powi(3) / 3.0
        };
        let g3 = |w: f64, l: f64| {
            w.powi(3) * (l * l / 3.0 - 2.0 * l / 9.0 + 2.0 / 27.0)
                - 2.0 * (w.powi(3) * l / 3.0 - w.powi(3) / 9.0 - w * w * l / 2.0 + w * w / 4.0)
                + (w - 1.0).powi(3) / 3.0
        };
        (
            g1(w, l) - 0.25,
            g2(w, l) - 5.0 / 36.0,
            g3(w, l) + 11.0 / 54.0,
        )
    }

    /// Increments for `M(x) = x log x + (2γ−1)x`:
    /// `M(u+y) − M(u) = y (log u + 2γ) + u R(y/u)`.
    fn increments(&self, u: f64, t: f64) -> (f64, f64) {
        let l = u.ln() + 2.0 * EULER_GAMMA;
        let (i_r, i_tr, i_rr) = self.moments(t);
        let j1 = u * u * (l * t * t / 2.0 + i_r);
        let j2 = u.powi(3) * (l * l * t.powi(3) / 3.0 + 2.0 * l * i_tr + i_rr);
        (j1, j2)
    }
}

#[derive(Debug, Clone)]
enum Model {
    Power(Box<PowerModel>),
    Log(Box<LogModel>),
}

/// Closed-form `∫_u^v (C − M(x))² dx` for one pair.
#[derive(Debug, Clone)]
pub struct SegmentIntegrator {
    main: MainTerm,
    model: Model,
}

impl SegmentIntegrator {
    pub fn new(p: Params) -> Result<Self> {
        let main = MainTerm::new(p)?;
        let model = if p.is_dirichlet() {
            Model::Log(Box::new(LogModel::new()))
        } else {
            Model::Power(Box::new(PowerModel::new(&main)))
        };
        Ok(Self { main, model })
    }

    pub fn params(&self) -> Params {
        self.main.params()
    }

    /// `∫_u^v (C − M(x))² dx` for `0 < u ≤ v`.
    pub fn integral(&self, count: u128, u: f64, v: f64) -> f64 {
        if v <= u {
            return 0.0;
        }
        if u == 0.0 {
            // D vanishes on [0, 1); split off a tiny left piece where M is negligible.
            return self.integral_from_zero(count, v);
        }
        let h = v - u;
        let t = h / u;
        let du = self.main.deficit(count, u);
        let (j1, j2) = match &self.model {
            Model::Power(m) => m.increments(u, t),
            Model::Log(m) => m.increments(u, t),
        };
        du * du * h - 2.0 * du * j1 + j2
    }

    fn integral_from_zero(&self, count: u128, v: f64) -> f64 {
        // ∫_0^v (C − M)²: expand directly; only reached for v ≤ 1 where values are O(1).
        let c = count as f64;
        match &self.model {
            Model::Power(m) => {
                let mut acc = c * c * v;
                for i in 0..2 {
                    let e = m.exp[i];
                    acc -= 2.0 * c * m.coef[i] * v.powf(e + 1.0) / (e + 1.0);
                    for j in 0..2 {
                        let f = m.exp[j];
                        acc += m.coef[i] * m.coef[j] * v.powf(e + f + 1.0) / (e + f + 1.0);
                    }
                }
                acc
            }
            Model::Log(_) => {
                let g = 2.0 * EULER_GAMMA - 1.0;
                let l = v.ln();
                let v2 = v * v;
                let v3 = v2 * v;
                // ∫ x log x, ∫ x² log² x, ∫ x² log x over [0, v].
                let x_log = v2 * l / 2.0 - v2 / 4.0;
                let x2_log2 = v3 * (l * l / 3.0 - 2.0 * l / 9.0 + 2.0 / 27.0);
                let x2_log = v3 * l / 3.0 - v3 / 9.0;
                c * c * v - 2.0 * c * (x_log + g * v2 / 2.0)
                    + x2_log2
                    + 2.0 * g * x2_log
                    + g * g * v3 / 3.0
            }
        }
    }
}

/// `∫_u^v (C − M(x))² dx` for a segment on which `D(x) = C`.
pub fn segment_integral(count: u128, u: f64, v: f64, p: Params) -> Result<f64> {
    if !(u.is_finite() && v.is_finite()) || u < 0.0 || v < u {
        return Err(Error::OutOfRange(format!("invalid segment [{u}, {v}]")));
    }
    Ok(SegmentIntegrator::new(p)?.integral(count, u, v))
}

/// Exact `∫_{T₀}^{T₁} Δ²` and its normalization against `c_{a,b}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanSquareReport {
    pub a: u32,
    pub b: u32,
    pub t0: f64,
    pub t1: f64,
    /// `∫_{T₀}^{T₁} Δ(x)² dx`.
    pub integral: f64,
    /// `∫_1^{T₁} Δ² / T₁^{(1+a+b)/(a+b)}`.
    pub normalized_ratio: f64,
    pub predicted: f64,
    /// Jumps of `D` processed in `(T₀, T₁]`.
    pub segments: u64,
}

/// `c_{a,b}` from the Euler-product route.
pub fn predicted_constant(p: Params) -> Result<f64> {
    Ok(c_ab_default(p, Route::EulerProduct)?.value)
}

/// `(∫_{t0}^{t1} Δ², jumps)`, block-parallel with an order-fixed reduction.
pub fn integrate(t0: f64, t1: f64, integ: &SegmentIntegrator) -> Result<(f64, u64)> {
    let p = integ.params();
    check_range(t0, t1, p)?;
    let mut cuts = vec![t0];
    let mut edge = ((t0.floor() as u64) / BLOCK + 1) * BLOCK;
    while (edge as f64) < t1 {
        cuts.push(edge as f64);
        edge += BLOCK;
    }
    cuts.push(t1);
    let parts: Vec<Result<(f64, u64)>> = cuts
        .par_windows(2)
        .map(|w| integrate_block(w[0], w[1], integ))
        .collect();
    let mut acc = CompensatedSum::new();
    let mut segments = 0;
    for part in parts {
        let (v, s) = part?;
        acc.add(v);
        segments += s;
    }
    Ok((acc.value(), segments))
}

fn integrate_block(s: f64, e: f64, integ: &SegmentIntegrator) -> Result<(f64, u64)> {
    let p = integ.params();
    let mut count = summatory_exact(s, p)?;
    let mut u = s;
    let mut acc = CompensatedSum::new();
    let mut segments = 0;
    for (n, d) in breakpoints(s, e, p)? {
        let x = n as f64;
        acc.add(integ.integral(count, u, x));
        count += d as u128;
        u = x;
        segments += 1;
    }
    acc.add(integ.integral(count, u, e));
    Ok((acc.value(), segments))
}

pub fn mean_square_exact(t0: f64, t1: f64, p: Params) -> Result<MeanSquareReport> {
    if t0 < 1.0 {
        return Err(Error::OutOfRange(format!("T0 = {t0} must be at least 1")));
    }
    check_range(t0, t1, p)?;
    let integ = SegmentIntegrator::new(p)?;
    let (integral, segments) = integrate(t0, t1, &integ)?;
    let head = if t0 > 1.0 {
        integrate(1.0, t0, &integ)?.0
    } else {
        0.0
    };
    Ok(MeanSquareReport {
        a: p.a(),
        b: p.b(),
        t0,
        t1,
        integral,
        normalized_ratio: (head + integral) / t1.powf(p.mean_square_exponent()),
        predicted: predicted_constant(p)?,
        segments,
    })
}

/// One row of [`ratio_scan`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatioRow {
    pub a: u32,
    pub b: u32,
    #[serde(rename = "T")]
    pub t: f64,
    /// `∫_1^T Δ²`.
    pub integral: f64,
    pub ratio: f64,
    pub predicted: f64,
    pub relative_gap: f64,
}

/// `∫_1^T Δ² / T^{(1+a+b)/(a+b)}` against `c_{a,b}` for ascending `T`,
/// extending the integral incrementally.
pub fn ratio_scan(ts: &[f64], p: Params) -> Result<Vec<RatioRow>> {
    if ts.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::OutOfRange("T values must be ascending".into()));
    }
    if let Some(&t) = ts.first() {
        if t < 1.0 {
            return Err(Error::OutOfRange(format!("T = {t} must be at least 1")));
        }
    }
    if let Some(&t) = ts.last() {
        check_range(1.0, t, p)?;
    }
    let integ = SegmentIntegrator::new(p)?;
    let predicted = predicted_constant(p)?;
    let mut rows = Vec::with_capacity(ts.len());
    let mut from = 1.0;
    let mut total = CompensatedSum::new();
    for &t in ts {
        total.add(integrate(from, t, &integ)?.0);
        from = t;
        let ratio = total.value() / t.powf(p.mean_square_exponent());
        rows.push(RatioRow {
            a: p.a(),
            b: p.b(),
            t,
            integral: total.value(),
            ratio,
            predicted,
            relative_gap: (ratio - predicted).abs() / predicted,
        });
    }
    Ok(rows)
}
