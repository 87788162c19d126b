//! Continued fractions, convergents and Ostrowski digits.
//!
//! Partial quotients are extracted by running the Gauss map on both ends of
//! the interval that certainly contains α; a digit is emitted only while both
//! ends agree, so every digit returned is correct.

use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::birkhoff::StepFunction;
use crate::precision::{frac256_to_f64, HighPrecision, FRAC_BITS};
use crate::stats::star_discrepancy;
use crate::torus::TorusPoint;
use crate::{Error, Result};

/// How an expansion ended.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum ExpansionStatus {
    /// All requested digits were produced.
    Complete,
    /// The interval around α became too wide to certify the next digit.
    PrecisionExhausted,
    /// α is rational and its expansion terminated.
    Terminated,
}

/// α = [0; a_1, a_2, …] together with its 256-bit source value.
#[derive(Clone, Debug)]
pub struct ContinuedFraction {
    alpha: HighPrecision,
    partial_quotients: Vec<u64>,
    status: ExpansionStatus,
}

impl ContinuedFraction {
    pub fn alpha(&self) -> &HighPrecision {
        &self.alpha
    }

    /// `a_1, a_2, …`; `partial_quotients()[j − 1] = a_j`.
    pub fn partial_quotients(&self) -> &[u64] {
        &self.partial_quotients
    }

    /// a_j for j ≥ 1.
    pub fn a(&self, j: usize) -> Option<u64> {
        j.checked_sub(1)
            .and_then(|i| self.partial_quotients.get(i))
            .copied()
    }

    pub fn depth(&self) -> usize {
        self.partial_quotients.len()
    }

    pub fn status(&self) -> ExpansionStatus {
        self.status
    }
}

/// Quotient `floor(den / num)` as u64, if it fits.
fn gauss_digit(num: &BigUint, den: &BigUint) -> Option<u64> {
    if num.is_zero() {
        return None;
    }
    (den / num).to_u64()
}

/// Expands α ∈ (0,1) to at most `depth` certified partial quotients.
pub fn cf_expand(alpha: &HighPrecision, depth: usize) -> Result<ContinuedFraction> {
    if depth == 0 {
        return Err(Error::Config("depth must be at least 1"));
    }
    if alpha.is_zero() {
        return Err(Error::Config("alpha must lie in (0,1)"));
    }
    let scale = BigUint::one() << FRAC_BITS;
    let (lo, hi) = alpha.bounds();
    // Endpoints as separate fractions num/den; the Gauss map is decreasing so
    // their roles swap each step, which does not matter since both are kept.
    let mut ends = [(lo, scale.clone()), (hi, scale)];
    let mut digits = Vec::with_capacity(depth);
    let mut status = ExpansionStatus::Complete;
    while digits.len() < depth {
        if alpha.is_exact() && ends[0].0.is_zero() {
            status = ExpansionStatus::Terminated;
            break;
        }
        let d0 = gauss_digit(&ends[0].0, &ends[0].1);
        let d1 = gauss_digit(&ends[1].0, &ends[1].1);
        let a = match (d0, d1) {
            (Some(x), Some(y)) if x == y && x > 0 => x,
            _ => {
                status = ExpansionStatus::PrecisionExhausted;
                break;
            }
        };
        digits.push(a);
        for (num, den) in ends.iter_mut() {
            let next = &*den - &*num * a;
            *den = core::mem::replace(num, next);
        }
    }
    if status == ExpansionStatus::Complete && alpha.is_exact() && ends[0].0.is_zero() {
        status = ExpansionStatus::Terminated;
    }
    Ok(ContinuedFraction {
        alpha: alpha.clone(),
        partial_quotients: digits,
        status,
    })
}

/// Exact expansion of `p/q ∈ (0,1)` by the Euclidean algorithm.
pub fn cf_of_ratio(p: u64, q: u64) -> Result<ContinuedFraction> {
    if p == 0 || p >= q {
        return Err(Error::Config("p/q must lie in (0,1)"));
    }
    let (mut num, mut den) = (p, q);
    let mut digits = Vec::new();
    while num != 0 {
        digits.push(den / num);
        (num, den) = (den % num, num);
    }
    Ok(ContinuedFraction {
        alpha: HighPrecision::from_ratio_u64(p, q)?,
        partial_quotients: digits,
        status: ExpansionStatus::Terminated,
    })
}

/// Numerators and denominators of the convergents, `p_0/q_0 = 0/1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Convergents {
    pub p: Vec<BigUint>,
    pub q: Vec<BigUint>,
}

impl Convergents {
    /// Number of convergents (`depth + 1`).
    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    pub fn q_u128(&self, k: usize) -> Option<u128> {
        self.q.get(k).and_then(|q| q.to_u128())
    }

    pub fn q_f64(&self, k: usize) -> f64 {
        self.q[k].to_f64().unwrap_or(f64::INFINITY)
    }

    /// `q_k mod 2^128`, the form needed for exact phases.
    pub fn q_wrapped(&self, k: usize) -> u128 {
        let digits = self.q[k].to_u64_digits();
        let lo = digits.first().copied().unwrap_or(0) as u128;
        let hi = digits.get(1).copied().unwrap_or(0) as u128;
        (hi << 64) | lo
    }

    /// `p_{n−1} q_n − p_n q_{n−1}` for n ≥ 1.
    pub fn determinant(&self, n: usize) -> BigInt {
        let pm = BigInt::from(self.p[n - 1].clone());
        let qn = BigInt::from(self.q[n].clone());
        let pn = BigInt::from(self.p[n].clone());
        let qm = BigInt::from(self.q[n - 1].clone());
        pm * qn - pn * qm
    }
}

pub fn convergents(cf: &ContinuedFraction) -> Convergents {
    let mut p = Vec::with_capacity(cf.depth() + 1);
    let mut q = Vec::with_capacity(cf.depth() + 1);
    p.push(BigUint::zero());
    q.push(BigUint::one());
    let (mut p_prev, mut q_prev) = (BigUint::one(), BigUint::zero());
    for &a in cf.partial_quotients() {
        let pn = p.last().unwrap() * a + &p_prev;
        let qn = q.last().unwrap() * a + &q_prev;
        p_prev = p.last().unwrap().clone();
        q_prev = q.last().unwrap().clone();
        p.push(pn);
        q.push(qn);
    }
    Convergents { p, q }
}

/// `‖q_k α‖` computed in 256-bit arithmetic.
pub fn qk_alpha_distance(cf: &ContinuedFraction, conv: &Convergents, k: usize) -> f64 {
    let x = cf.alpha().mul_big_mod1(&conv.q[k]);
    let v = frac256_to_f64(&x);
    v.min(1.0 - v)
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum OstrowskiStatus {
    /// The remainder vanished: b is a finite combination of the q_n α.
    Exact,
    /// Digits ran out before the remainder vanished.
    Partial,
    /// Working precision ran out before the requested depth.
    PrecisionLimited,
}

/// `b ≡ Σ b_n q_n α (mod 1)` with `0 ≤ b_n ≤ a_{n+1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct OstrowskiExpansion {
    pub digits: Vec<u64>,
    /// |b − Σ b_n θ_n| for the chosen representative of b.
    pub residual: f64,
    pub status: OstrowskiStatus,
}

impl OstrowskiExpansion {
    /// `Σ b_n q_n`.
    pub fn weight(&self, conv: &Convergents) -> BigUint {
        self.digits
            .iter()
            .zip(&conv.q)
            .fold(BigUint::zero(), |acc, (&b, q)| acc + q * b)
    }

    /// `Σ b_n q_n α mod 1`.
    pub fn reconstruct(&self, cf: &ContinuedFraction, conv: &Convergents) -> TorusPoint {
        let raw = cf.alpha().mul_big_mod1(&self.weight(conv));
        HighPrecision::from_parts(raw, 0).to_torus()
    }

    /// `max |b_n|/a_{n+1}` over the second half of the digits, the quantity
    /// whose vanishing forces ‖q_k b‖ → 0.
    pub fn tail_digit_ratio(&self, cf: &ContinuedFraction) -> f64 {
        let start = self.digits.len() / 2;
        self.digits
            .iter()
            .enumerate()
            .skip(start)
            .map(|(n, &b)| b as f64 / cf.a(n + 1).unwrap_or(1) as f64)
            .fold(0.0, f64::max)
    }

    /// Tail ratio at most 1/4, or a finite expansion.
    pub fn in_vanishing_regime(&self, cf: &ContinuedFraction) -> bool {
        self.status == OstrowskiStatus::Exact || self.tail_digit_ratio(cf) <= 0.25
    }
}

fn scaled_theta(alpha: &HighPrecision, conv: &Convergents, n: usize) -> BigInt {
    BigInt::from(&conv.q[n] * alpha.mantissa()) - (BigInt::from(conv.p[n].clone()) << FRAC_BITS)
}

/// Greedy Ostrowski digits of b ∈ (0,1).
///
/// Works on the representative `x ∈ [−α, 1 − α)` of b and the signed
/// remainders θ_n = q_n α − p_n, choosing at each step the unique digit that
/// keeps the tail inside its admissible window.
pub fn ostrowski(b: &HighPrecision, cf: &ContinuedFraction) -> Result<OstrowskiExpansion> {
    if b.is_zero() {
        return Err(Error::Config("b must lie in (0,1)"));
    }
    let conv = convergents(cf);
    let alpha = cf.alpha();
    let scale = BigInt::one() << FRAC_BITS;
    let mb = BigInt::from(b.mantissa().clone());
    let one_minus_alpha = &scale - BigInt::from(alpha.mantissa().clone());
    let mut x = if mb < one_minus_alpha { mb } else { mb - &scale };

    let mut digits = Vec::new();
    let mut status = OstrowskiStatus::Partial;
    let mut theta = scaled_theta(alpha, &conv, 0);
    for n in 0..cf.depth() {
        if x.is_zero() {
            status = OstrowskiStatus::Exact;
            break;
        }
        let next = scaled_theta(alpha, &conv, n + 1);
        let err = BigInt::from(&conv.q[n + 1] * alpha.radius() + b.radius() + 2u32);
        if next.abs() <= err * 4u32 {
            status = OstrowskiStatus::PrecisionLimited;
            break;
        }
        let signed = if theta.sign() == Sign::Minus { -&x } else { x.clone() };
        let num = signed + theta.abs() - next.abs();
        let d = num.div_floor(&theta.abs());
        let d = if d.sign() == Sign::Minus { BigInt::zero() } else { d };
        let digit = d.to_u64().ok_or(Error::Precision("Ostrowski digit overflow"))?;
        x -= &theta * digit;
        digits.push(digit);
        theta = next;
    }
    if x.is_zero() {
        status = OstrowskiStatus::Exact;
    }
    let residual = x.abs().to_f64().unwrap_or(f64::INFINITY) / libm::ldexp(1.0, FRAC_BITS as i32);
    Ok(OstrowskiExpansion {
        digits,
        residual,
        status,
    })
}

/// `‖q_k b‖` for k = 1..=K.
pub fn qk_b_distances(cf: &ContinuedFraction, b: &HighPrecision, k_max: usize) -> Result<Vec<f64>> {
    let conv = convergents(cf);
    if conv.len() <= k_max {
        return Err(Error::Precision("continued fraction shorter than requested horizon"));
    }
    Ok((1..=k_max)
        .map(|k| {
            let v = frac256_to_f64(&b.mul_big_mod1(&conv.q[k]));
            v.min(1.0 - v)
        })
        .collect())
}

/// Star discrepancy of `{q_k b mod 1 : 1 ≤ k ≤ K}`.
pub fn discrepancy_qk_b(cf: &ContinuedFraction, b: &HighPrecision, k_max: usize) -> Result<f64> {
    if k_max < 8 {
        return Err(Error::Config("need at least 8 points"));
    }
    let conv = convergents(cf);
    if conv.len() <= k_max {
        return Err(Error::Precision("continued fraction shorter than requested horizon"));
    }
    let points: Vec<f64> = (1..=k_max)
        .map(|k| frac256_to_f64(&b.mul_big_mod1(&conv.q[k])))
        .collect();
    Ok(star_discrepancy(&points))
}

/// Smallest A with `a_n ≤ A n^p` over the computed digits.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct GrowthBound {
    pub p: f64,
    pub a: f64,
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct EtaCount {
    pub eta: f64,
    pub count: usize,
    pub fraction: f64,
}

/// Evaluators for the Diophantine and Fourier hypotheses of the rotation CLTs.
#[derive(Clone, Debug, PartialEq)]
pub struct HypothesisReport {
    pub growth: Vec<GrowthBound>,
    /// `Card{0 ≤ j ≤ N : a_{j+1} |γ_{q_j}(f)| ≥ η} / N` per η.
    pub eta_curve: Vec<EtaCount>,
    /// `(1/n) Σ_{k ≤ n} Σ_{0<|r|≤R} |γ_{r q_k}(f)|²/r²` for n = 1..=N.
    pub gamma_averages: Vec<f64>,
    pub r_max: u64,
}

pub const GROWTH_EXPONENTS: [f64; 2] = [0.0, 1.0 / 16.0];

pub fn growth_bound(cf: &ContinuedFraction, p: f64) -> GrowthBound {
    let a = cf
        .partial_quotients()
        .iter()
        .enumerate()
        .map(|(i, &a)| a as f64 / libm::pow((i + 1) as f64, p))
        .fold(0.0, f64::max);
    GrowthBound { p, a }
}

pub fn hypothesis_checks(
    cf: &ContinuedFraction,
    f: &StepFunction,
    n: usize,
    etas: &[f64],
    r_max: u64,
) -> Result<HypothesisReport> {
    if cf.depth() < n + 1 {
        return Err(Error::Precision("continued fraction shorter than requested horizon"));
    }
    let conv = convergents(cf);
    let growth = GROWTH_EXPONENTS.iter().map(|&p| growth_bound(cf, p)).collect();

    let weighted: Vec<f64> = (0..=n)
        .map(|j| cf.a(j + 1).unwrap() as f64 * f.gamma(conv.q_wrapped(j)).norm())
        .collect();
    let eta_curve = etas
        .iter()
        .map(|&eta| {
            let count = weighted.iter().filter(|&&w| w >= eta).count();
            EtaCount {
                eta,
                count,
                fraction: count as f64 / n.max(1) as f64,
            }
        })
        .collect();

    let mut acc = 0.0;
    let gamma_averages = (1..=n)
        .map(|k| {
            let qk = conv.q_wrapped(k);
            let inner: f64 = (1..=r_max)
                .map(|r| {
                    let g = f.gamma(qk.wrapping_mul(r as u128)).norm_sqr();
                    // f real: |γ_{−r q}| = |γ_{r q}|.
                    2.0 * g / (r as f64 * r as f64)
                })
                .sum();
            acc += inner;
            acc / k as f64
        })
        .collect();

    Ok(HypothesisReport {
        growth,
        eta_curve,
        gamma_averages,
        r_max,
    })
}

/// Indices `t_1 < t_2 < …` with `a_{t_k + 1} ≥ k^β`, chosen greedily.
#[derive(Clone, Debug, PartialEq)]
pub struct GrowthIndices {
    pub t: Vec<usize>,
    pub beta: f64,
    /// `min_{k ≥ 2} log a_{t_k+1} / log k` over the selected indices.
    pub achieved_beta: f64,
    /// All requested indices were found within the computed digits.
    pub hypothesis_met: bool,
}

pub fn select_growth_indices(cf: &ContinuedFraction, beta: f64, count: usize) -> GrowthIndices {
    let mut t = Vec::with_capacity(count);
    let mut next = 1usize;
    'outer: for k in 1..=count {
        let need = libm::pow(k as f64, beta);
        while next < cf.depth() {
            let idx = next;
            next += 1;
            if cf.a(idx + 1).unwrap() as f64 >= need {
                t.push(idx);
                continue 'outer;
            }
        }
        break;
    }
    let achieved_beta = t
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, &tk)| libm::log(cf.a(tk + 1).unwrap() as f64) / libm::log((i + 1) as f64))
        .fold(f64::INFINITY, f64::min);
    GrowthIndices {
        hypothesis_met: t.len() == count && count > 0 && beta > 1.0,
        t,
        beta,
        achieved_beta,
    }
}
