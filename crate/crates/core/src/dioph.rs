//! Counting solutions of `|h₁^α r₁^β − h₂^α r₂^β| ≤ δ` over dyadic boxes,
//! the bound these counts are compared against, and a truncated evaluation
//! of the spacing sum `S_{a,b}(T)`.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{gcd, Params};
use crate::precision::DoubleDouble;

/// Largest `H₁H₂R₁R₂` accepted by [`count_solutions`].
pub const MAX_BOX_VOLUME: f64 = 1e10;
/// Differences within this distance of `δ` are reported as ambiguous.
pub const TIE_TOLERANCE: f64 = 1e-14;
/// Largest number of admissible pairs [`s_ab_truncated`] will sum.
pub const MAX_SPACING_PAIRS: u64 = 1_000_000_000;

/// A positive rational exponent `num/den`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Exponent {
    pub num: u32,
    pub den: u32,
}

impl Exponent {
    pub fn new(num: u32, den: u32) -> Result<Self> {
        if num == 0 || den == 0 {
            return Err(Error::OutOfRange(format!(
                "exponent {num}/{den} must be positive"
            )));
        }
        let g = gcd(num as u64, den as u64) as u32;
        Ok(Self {
            num: num / g,
            den: den / g,
        })
    }

    pub fn value(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

/// `α = a/(a+b)`, `β = b/(a+b)`.
pub fn pair_exponents(p: Params) -> (Exponent, Exponent) {
    let k = p.sum();
    (
        Exponent::new(p.a(), k).unwrap(),
        Exponent::new(p.b(), k).unwrap(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiophBox {
    pub h1: f64,
    pub h2: f64,
    pub r1: f64,
    pub r2: f64,
    pub delta: f64,
    pub alpha: Exponent,
    pub beta: Exponent,
}

impl DiophBox {
    pub fn new(
        h1: f64,
        h2: f64,
        r1: f64,
        r2: f64,
        delta: f64,
        alpha: Exponent,
        beta: Exponent,
    ) -> Result<Self> {
        for (name, v) in [("H1", h1), ("H2", h2), ("R1", r1), ("R2", r2)] {
            if !(v.is_finite() && v >= 1.0) {
                return Err(Error::OutOfRange(format!(
                    "{name} = {v} must be at least 1"
                )));
            }
        }
        if !(delta.is_finite() && delta >= 0.0) {
            return Err(Error::OutOfRange(format!(
                "delta = {delta} must be non-negative"
            )));
        }
        Ok(Self {
            h1,
            h2,
            r1,
            r2,
            delta,
            alpha,
            beta,
        })
    }

    pub fn for_pair(h1: f64, h2: f64, r1: f64, r2: f64, delta: f64, p: Params) -> Result<Self> {
        let (alpha, beta) = pair_exponents(p);
        Self::new(h1, h2, r1, r2, delta, alpha, beta)
    }

    pub fn volume(&self) -> f64 {
        self.h1 * self.h2 * self.r1 * self.r2
    }

    fn check(&self) -> Result<()> {
        if self.volume() > MAX_BOX_VOLUME {
            return Err(Error::Guard(format!(
                "box volume {} exceeds {MAX_BOX_VOLUME}",
                self.volume()
            )));
        }
        Ok(())
    }
}

/// Integers in `(X, 2X]`.
fn dyadic(x: f64) -> std::ops::RangeInclusive<u64> {
    x.floor() as u64 + 1..=(2.0 * x).floor() as u64
}

/// `h^α r^β` as an exact integer power `K^{1/D}` plus its double-double value.
#[derive(Debug, Clone, Copy)]
struct Term {
    value: DoubleDouble,
    key: Option<u128>,
}

#[derive(Debug, Clone, Copy)]
struct Evaluator {
    d: u32,
    p: u32,
    q: u32,
}

impl Evaluator {
    fn new(alpha: Exponent, beta: Exponent) -> Self {
        let l = alpha.den as u64 / gcd(alpha.den as u64, beta.den as u64) * beta.den as u64;
        let d = l as u32;
        Self {
            d,
            p: alpha.num * (d / alpha.den),
            q: beta.num * (d / beta.den),
        }
    }

    fn term(&self, h: u64, r: u64) -> Term {
        let key = (h as u128).checked_pow(self.p).and_then(|x| {
            (r as u128)
                .checked_pow(self.q)
                .and_then(|y| x.checked_mul(y))
        });
        let inner = DoubleDouble::from_f64(h as f64).powi(self.p)
            * DoubleDouble::from_f64(r as f64).powi(self.q);
        Term {
            value: inner.root(self.d),
            key,
        }
    }
}

/// Result of [`count_solutions`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DiophCount {
    pub count: u64,
    /// Tuples whose difference lies within [`TIE_TOLERANCE`] of `δ` and was not
    /// settled by exact integer comparison. They are classified by the
    /// double-double value and included in `count` when it says so.
    pub ambiguous: u64,
}

fn terms(hs: f64, rs: f64, ev: &Evaluator) -> Vec<Term> {
    let mut out = Vec::new();
    for h in dyadic(hs) {
        for r in dyadic(rs) {
            out.push(ev.term(h, r));
        }
    }
    out
}

/// `(counted, ambiguous)` for one pair of terms.
fn classify(x: &Term, y: &Term, delta: DoubleDouble) -> (bool, bool) {
    if let (Some(k1), Some(k2)) = (x.key, y.key) {
        if k1 == k2 {
            return (true, false);
        }
        if delta.is_zero() {
            return (false, false);
        }
    }
    let d = (x.value - y.value).abs();
    let counted = d.cmp_dd(delta) != Ordering::Greater;
    let ambiguous = (d - delta).abs().to_f64() <= TIE_TOLERANCE;
    (counted, ambiguous)
}

/// Number of `(h₁, h₂, r₁, r₂)` with `h_i ∈ (H_i, 2H_i]`, `r_i ∈ (R_i, 2R_i]`
/// and `|h₁^α r₁^β − h₂^α r₂^β| ≤ δ`.
pub fn count_solutions(bx: &DiophBox) -> Result<DiophCount> {
    bx.check()?;
    let ev = Evaluator::new(bx.alpha, bx.beta);
    let xs = terms(bx.h1, bx.r1, &ev);
    let mut ys = terms(bx.h2, bx.r2, &ev);
    ys.sort_by(|u, v| u.value.cmp_dd(v.value));
    let delta = DoubleDouble::from_f64(bx.delta);
    let tol = DoubleDouble::from_f64(TIE_TOLERANCE);
    let first_at_least =
        |t: DoubleDouble| ys.partition_point(|y| y.value.cmp_dd(t) == Ordering::Less);
    let first_above =
        |t: DoubleDouble| ys.partition_point(|y| y.value.cmp_dd(t) != Ordering::Greater);

    let (count, ambiguous) = xs
        .par_iter()
        .map(|x| {
            let outer_lo = first_at_least(x.value - delta - tol);
            let outer_hi = first_above(x.value + delta + tol);
            // Strictly inside the window by more than the tolerance.
            let (inner_lo, inner_hi) = if bx.delta > TIE_TOLERANCE {
                (
                    first_at_least(x.value - delta + tol),
                    first_above(x.value + delta - tol),
                )
            } else {
                (outer_lo, outer_lo)
            };
            let inner_hi = inner_hi.max(inner_lo);
            let mut count = (inner_hi - inner_lo) as u64;
            let mut amb = 0u64;
            for y in ys[outer_lo..inner_lo].iter().chain(&ys[inner_hi..outer_hi]) {
                let (c, a) = classify(x, y, delta);
                count += c as u64;
                amb += a as u64;
            }
            (count, amb)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    Ok(DiophCount { count, ambiguous })
}

/// The same count assembled over `u = gcd(r₁, r₂)`, `v = gcd(h₁, h₂)`: with
/// `r_j = m_j u`, `h_j = l_j v` the inequality becomes
/// `v^α u^β |l₁^α m₁^β − l₂^α m₂^β| ≤ δ` over coprime `(m₁, m₂)`, `(l₁, l₂)`.
pub fn count_solutions_stratified(bx: &DiophBox) -> Result<u64> {
    bx.check()?;
    let ev = Evaluator::new(bx.alpha, bx.beta);
    let delta = DoubleDouble::from_f64(bx.delta);
    let hr = |x: f64, s: u64| {
        let r = dyadic(x);
        r.start().div_ceil(s)..=r.end() / s
    };
    let max_u = (2.0 * bx.r1.min(bx.r2)).floor() as u64;
    let max_v = (2.0 * bx.h1.min(bx.h2)).floor() as u64;
    let mut total = 0u64;
    for u in 1..=max_u {
        for v in 1..=max_v {
            let scale = ev.term(v, u).value;
            for l1 in hr(bx.h1, v) {
                for l2 in hr(bx.h2, v) {
                    if gcd(l1, l2) != 1 {
                        continue;
                    }
                    for m1 in hr(bx.r1, u) {
                        let x = ev.term(l1, m1);
                        for m2 in hr(bx.r2, u) {
                            if gcd(m1, m2) != 1 {
                                continue;
                            }
                            let y = ev.term(l2, m2);
                            let hit = match (x.key, y.key) {
                                (Some(k1), Some(k2)) if k1 == k2 => true,
                                (Some(_), Some(_)) if bx.delta == 0.0 => false,
                                _ => {
                                    let d = (x.value - y.value).abs() * scale;
                                    d.cmp_dd(delta) != Ordering::Greater
                                }
                            };
                            total += hit as u64;
                        }
                    }
                }
            }
        }
    }
    Ok(total)
}

/// `δ(H₁H₂)^{1−α/2}(R₁R₂)^{1−β/2} + (H₁H₂R₁R₂)^{1/2} log²(2H₁H₂R₁R₂)`.
pub fn spacing_bound(bx: &DiophBox) -> f64 {
    let hh = bx.h1 * bx.h2;
    let rr = bx.r1 * bx.r2;
    let v = hh * rr;
    bx.delta * hh.powf(1.0 - bx.alpha.value() / 2.0) * rr.powf(1.0 - bx.beta.value() / 2.0)
        + v.sqrt() * (2.0 * v).ln().powi(2)
}

/// One box of the bound sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub a: u32,
    pub b: u32,
    pub h1: f64,
    pub h2: f64,
    pub r1: f64,
    pub r2: f64,
    pub delta: f64,
    pub count: u64,
    pub ambiguous: u64,
    pub bound: f64,
    pub ratio: f64,
}

pub const SWEEP_SIDES: [f64; 5] = [1.0, 2.0, 4.0, 8.0, 16.0];
pub const SWEEP_DELTAS: [f64; 5] = [0.0, 1e-3, 1e-2, 1e-1, 1.0];

/// Every box with sides in [`SWEEP_SIDES`] and `δ` in [`SWEEP_DELTAS`] for `p`.
pub fn spacing_sweep(p: Params) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    for &h1 in &SWEEP_SIDES {
        for &h2 in &SWEEP_SIDES {
            for &r1 in &SWEEP_SIDES {
                for &r2 in &SWEEP_SIDES {
                    for &delta in &SWEEP_DELTAS {
                        let bx = DiophBox::for_pair(h1, h2, r1, r2, delta, p)?;
                        let c = count_solutions(&bx)?;
                        let bound = spacing_bound(&bx);
                        rows.push(SweepRow {
                            a: p.a(),
                            b: p.b(),
                            h1,
                            h2,
                            r1,
                            r2,
                            delta,
                            count: c.count,
                            ambiguous: c.ambiguous,
                            bound,
                            ratio: c.count as f64 / bound,
                        });
                    }
                }
            }
        }
    }
    Ok(rows)
}

/// Largest `(h r)`-tuple set [`s_ab_truncated`] will enumerate.
const MAX_SPACING_TUPLES: usize = 50_000_000;

/// `S_{a,b}(T)` restricted to `h_j^a r_j^b ≤ cap`: the sum over pairs of tuples
/// with `0 < |η| < (1/10)(h₁^a r₁^b h₂^a r₂^b)^{1/(2(a+b))}` of
/// `(h₁h₂)^{−(a+2b)/(2(a+b))} (r₁r₂)^{−(2a+b)/(2(a+b))} min(T^{1/(a+b)}, 1/|η|)`,
/// where `η = (h₁^a r₁^b)^{1/(a+b)} − (h₂^a r₂^b)^{1/(a+b)}`.
pub fn s_ab_truncated(t: f64, cap: f64, p: Params) -> Result<f64> {
    if !(t.is_finite() && t >= 1.0) {
        return Err(Error::OutOfRange(format!("T = {t} must be at least 1")));
    }
    if !(cap.is_finite() && cap >= 1.0) {
        return Err(Error::OutOfRange(format!("cap = {cap} must be at least 1")));
    }
    let (a, b) = (p.a(), p.b());
    let k = p.sum() as f64;
    let cap_n = cap.floor() as u128;
    let eh = -((a + 2 * b) as f64) / (2.0 * k);
    let er = -((2 * a + b) as f64) / (2.0 * k);
    // (n, n^{1/(a+b)}, weight)
    let mut tuples: Vec<(u128, f64, f64)> = Vec::new();
    let mut r = 1u64;
    while (r as u128).pow(b) <= cap_n {
        let rb = (r as u128).pow(b);
        let mut h = 1u64;
        while (h as u128).pow(a) * rb <= cap_n {
            let n = (h as u128).pow(a) * rb;
            tuples.push((
                n,
                (n as f64).powf(1.0 / k),
                (h as f64).powf(eh) * (r as f64).powf(er),
            ));
            if tuples.len() > MAX_SPACING_TUPLES {
                return Err(Error::Guard(format!(
                    "more than {MAX_SPACING_TUPLES} tuples below cap {cap}"
                )));
            }
            h += 1;
        }
        r += 1;
    }
    tuples.sort_by_key(|t| t.0);
    // For y_j ≥ y_i the spacing condition is y_j/y_i < s², s² − 1 = s/10.
    let s = (0.1 + (0.01f64 + 4.0).sqrt()) / 2.0;
    let ratio_cap = s * s;
    let ends: Vec<usize> = tuples
        .iter()
        .map(|&(_, y, _)| tuples.partition_point(|z| z.1 < y * ratio_cap * (1.0 + 1e-12)))
        .collect();
    let pairs: u64 = ends
        .iter()
        .enumerate()
        .map(|(i, &e)| e.saturating_sub(i + 1) as u64)
        .sum();
    if pairs > MAX_SPACING_PAIRS {
        return Err(Error::Guard(format!(
            "{pairs} candidate pairs exceed {MAX_SPACING_PAIRS}"
        )));
    }
    let cut = t.powf(1.0 / k);
    let half: f64 = (0..tuples.len())
        .into_par_iter()
        .map(|i| {
            let (ni, yi, wi) = tuples[i];
            let mut acc = 0.0;
            for &(nj, yj, wj) in &tuples[i + 1..ends[i]] {
                if nj == ni {
                    continue;
                }
                let eta = yj - yi;
                if eta >= 0.1 * (yi * yj).sqrt() {
                    continue;
                }
                acc += wi * wj * cut.min(1.0 / eta);
            }
            acc
        })
        .sum();
    Ok(2.0 * half)
}
