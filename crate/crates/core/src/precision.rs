//! 256-bit fixed-point reals in [0, 1) with an explicit error radius.
//!
//! Used wherever 128 bits are not enough: continued-fraction extraction,
//! Ostrowski digits, and the oracle that checks long rotation orbits.

use alloc::vec::Vec;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::torus::TorusPoint;
use crate::{Error, Result};

pub const FRAC_BITS: usize = 256;

fn one_scaled() -> BigUint {
    BigUint::one() << FRAC_BITS
}

/// A real `x ∈ [0,1)` known to lie in `[(m − r)/2^256, (m + r)/2^256]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HighPrecision {
    mantissa: BigUint,
    radius: BigUint,
}

impl HighPrecision {
    /// Raw constructor; `mantissa` is reduced modulo 2^256.
    pub fn from_parts(mantissa: BigUint, radius: u64) -> Self {
        HighPrecision::with_radius(mantissa, BigUint::from(radius))
    }

    pub fn with_radius(mantissa: BigUint, radius: BigUint) -> Self {
        let mask = one_scaled() - 1u32;
        HighPrecision {
            mantissa: mantissa & mask,
            radius,
        }
    }

    /// `(p/q) mod 1`. Exact (zero radius) when `q` divides `p · 2^256`.
    pub fn from_ratio(p: &BigUint, q: &BigUint) -> Result<Self> {
        if q.is_zero() {
            return Err(Error::Config("zero denominator"));
        }
        let r = p % q;
        let (m, rem) = (r << FRAC_BITS).div_rem(q);
        let radius = if rem.is_zero() { 0 } else { 1 };
        Ok(HighPrecision::from_parts(m, radius))
    }

    pub fn from_ratio_u64(p: u64, q: u64) -> Result<Self> {
        HighPrecision::from_ratio(&BigUint::from(p), &BigUint::from(q))
    }

    /// (√5 − 1)/2.
    pub fn golden() -> Self {
        let s = (BigUint::from(5u32) << (2 * FRAC_BITS)).sqrt();
        HighPrecision::from_parts((s - one_scaled()) >> 1, 1)
    }

    /// √2 − 1.
    pub fn sqrt2_minus_1() -> Self {
        let s = (BigUint::from(2u32) << (2 * FRAC_BITS)).sqrt();
        HighPrecision::from_parts(s - one_scaled(), 1)
    }

    /// Fractional part of a decimal literal such as `0.6180339887` or `12.5`.
    pub fn from_decimal(text: &str) -> Result<Self> {
        let text = text.trim();
        let (int_part, frac_part) = match text.split_once('.') {
            Some((i, f)) => (i, f),
            None => (text, ""),
        };
        let all_digits = |s: &str| s.bytes().all(|c| c.is_ascii_digit());
        if (int_part.is_empty() && frac_part.is_empty()) || !all_digits(int_part) || !all_digits(frac_part)
        {
            return Err(Error::Config("malformed decimal literal"));
        }
        let mut num = BigUint::zero();
        for c in frac_part.bytes() {
            num = num * 10u32 + (c - b'0') as u32;
        }
        let den = BigUint::from(10u32).pow(frac_part.len() as u32);
        HighPrecision::from_ratio(&num, &den)
    }

    /// The number `[0; a_1, …, a_d]`, treated as an approximation of an
    /// irrational with these leading partial quotients.
    pub fn from_partial_quotients(digits: &[u64]) -> Result<Self> {
        if digits.is_empty() || digits.contains(&0) {
            return Err(Error::Config("partial quotients must be positive"));
        }
        let (mut p_prev, mut p) = (BigUint::one(), BigUint::zero());
        let (mut q_prev, mut q) = (BigUint::zero(), BigUint::one());
        for &a in digits {
            let p_next = &p * a + &p_prev;
            let q_next = &q * a + &q_prev;
            p_prev = core::mem::replace(&mut p, p_next);
            q_prev = core::mem::replace(&mut q, q_next);
        }
        let base = HighPrecision::from_ratio(&p, &q)?;
        // |α − p_d/q_d| < 1/q_d².
        let slack = one_scaled() / (&q * &q);
        Ok(HighPrecision::with_radius(base.mantissa, slack + 1u32))
    }

    /// Rounds an `f64`; the radius covers the float's own ulp.
    pub fn from_f64(x: f64) -> Self {
        let t = TorusPoint::from_f64(x);
        HighPrecision::with_radius(BigUint::from(t.frac()) << 128, BigUint::one() << 204)
    }

    pub fn mantissa(&self) -> &BigUint {
        &self.mantissa
    }

    pub fn radius(&self) -> &BigUint {
        &self.radius
    }

    pub fn is_exact(&self) -> bool {
        self.radius.is_zero()
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    /// `k · x mod 1`.
    pub fn mul_int_mod1(&self, k: i64) -> Self {
        let mag = &self.mantissa * k.unsigned_abs();
        let mask = one_scaled() - 1u32;
        let reduced = mag & &mask;
        let m = if k < 0 && !reduced.is_zero() {
            one_scaled() - reduced
        } else {
            reduced
        };
        HighPrecision::with_radius(m, &self.radius * k.unsigned_abs())
    }

    /// `x · n mod 1` for a big integer `n`, returned as a raw 256-bit fraction.
    pub fn mul_big_mod1(&self, n: &BigUint) -> BigUint {
        (&self.mantissa * n) & (one_scaled() - 1u32)
    }

    pub fn add_mod1(&self, other: &HighPrecision) -> Self {
        HighPrecision::with_radius(&self.mantissa + &other.mantissa, &self.radius + &other.radius)
    }

    /// Rounds to the nearest 128-bit torus point.
    pub fn to_torus(&self) -> TorusPoint {
        let rounded = (&self.mantissa + (BigUint::one() << 127u32)) >> 128u32;
        let words: Vec<u64> = rounded.to_u64_digits();
        let lo = words.first().copied().unwrap_or(0) as u128;
        let hi = words.get(1).copied().unwrap_or(0) as u128;
        TorusPoint::from_frac((hi << 64) | lo)
    }

    pub fn to_f64(&self) -> f64 {
        self.to_torus().to_f64()
    }

    /// Lower and upper numerators over 2^256 (the lower one clamped at 0).
    pub fn bounds(&self) -> (BigUint, BigUint) {
        let r = &self.radius;
        let lo = if &self.mantissa >= r {
            &self.mantissa - r
        } else {
            BigUint::zero()
        };
        (lo, &self.mantissa + r)
    }
}

/// Converts a raw 256-bit fraction to a float in [0,1).
pub fn frac256_to_f64(x: &BigUint) -> f64 {
    let top = (x >> 128u32).to_u128().unwrap_or(0);
    TorusPoint::from_frac(top).to_f64()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_value() {
        let g = HighPrecision::golden().to_f64();
        assert!((g - 0.618_033_988_749_894_8).abs() < 2e-16);
        let s = HighPrecision::sqrt2_minus_1().to_f64();
        assert!((s - (core::f64::consts::SQRT_2 - 1.0)).abs() < 2e-16);
    }

    #[test]
    fn exact_dyadic_has_zero_radius() {
        let h = HighPrecision::from_ratio_u64(1, 2).unwrap();
        assert!(h.is_exact());
        assert_eq!(h.to_torus(), TorusPoint::HALF);
        assert!(!HighPrecision::from_ratio_u64(1, 3).unwrap().is_exact());
    }

    #[test]
    fn decimals() {
        let h = HighPrecision::from_decimal("2.25").unwrap();
        assert!(h.is_exact());
        assert!((h.to_f64() - 0.25).abs() < 1e-18);
        assert!(HighPrecision::from_decimal("0.3x").is_err());
        assert!(HighPrecision::from_decimal(".").is_err());
    }

    #[test]
    fn integer_multiples_wrap() {
        let g = HighPrecision::golden();
        let three = g.mul_int_mod1(3).to_f64();
        assert!((three - (3.0 * 0.618_033_988_749_894_8 - 1.0)).abs() < 1e-15);
        let minus = g.mul_int_mod1(-1).add_mod1(&g);
        assert!(minus.is_zero());
    }

    #[test]
    fn partial_quotients_reconstruct() {
        let h = HighPrecision::from_partial_quotients(&[1; 200]).unwrap();
        let g = HighPrecision::golden();
        let diff = h.to_torus() - g.to_torus();
        assert!(diff.dist_to_zero() < 1e-37);
    }
}
