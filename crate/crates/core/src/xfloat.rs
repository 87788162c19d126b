//! Complex numbers with a separate binary exponent, for products whose
//! magnitude leaves the f64 range (λ^c with c ~ n², factorial ratios).

use core::cmp::Ordering;
use core::fmt;
use core::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub};

use num_complex::Complex64;

/// `mantissa · 2^exp` with `max(|re|, |im|)` of the mantissa in `[0.5, 1)`,
/// or exactly zero with `exp = 0`.
#[derive(Copy, Clone, PartialEq)]
pub struct XComplex {
    m: Complex64,
    e: i64,
}

impl fmt::Debug for XComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} + {}i)·2^{}", self.m.re, self.m.im, self.e)
    }
}

fn ldexp(x: f64, k: i64) -> f64 {
    libm::ldexp(x, k.clamp(-1100, 1100) as i32)
}

impl XComplex {
    pub const ZERO: XComplex = XComplex {
        m: Complex64::new(0.0, 0.0),
        e: 0,
    };
    pub const ONE: XComplex = XComplex {
        m: Complex64::new(0.5, 0.0),
        e: 1,
    };

    fn normalized(m: Complex64, e: i64) -> XComplex {
        let a = m.re.abs().max(m.im.abs());
        if a == 0.0 || !a.is_finite() {
            return XComplex::ZERO;
        }
        let (_, k) = libm::frexp(a);
        XComplex {
            m: Complex64::new(libm::ldexp(m.re, -k), libm::ldexp(m.im, -k)),
            e: e + k as i64,
        }
    }

    pub fn new(z: Complex64) -> XComplex {
        XComplex::normalized(z, 0)
    }

    pub fn from_f64(x: f64) -> XComplex {
        XComplex::new(Complex64::new(x, 0.0))
    }

    /// `2^k`.
    pub fn pow2(k: i64) -> XComplex {
        XComplex {
            m: Complex64::new(0.5, 0.0),
            e: k + 1,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.m.re == 0.0 && self.m.im == 0.0
    }

    pub fn mantissa(&self) -> Complex64 {
        self.m
    }

    pub fn exponent(&self) -> i64 {
        self.e
    }

    /// Nearest `Complex64`; saturates to ±∞ or flushes to 0.
    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(ldexp(self.m.re, self.e), ldexp(self.m.im, self.e))
    }

    /// log₂ |z|, −∞ at zero.
    pub fn log2_abs(&self) -> f64 {
        if self.is_zero() {
            f64::NEG_INFINITY
        } else {
            libm::log2(self.m.norm()) + self.e as f64
        }
    }

    /// ln |z|, −∞ at zero.
    pub fn ln_abs(&self) -> f64 {
        self.log2_abs() * core::f64::consts::LN_2
    }

    /// |z| as an extended real.
    pub fn abs(&self) -> XComplex {
        XComplex::normalized(Complex64::new(self.m.norm(), 0.0), self.e)
    }

    pub fn conj(&self) -> XComplex {
        XComplex {
            m: self.m.conj(),
            e: self.e,
        }
    }

    pub fn scale_pow2(&self, k: i64) -> XComplex {
        if self.is_zero() {
            *self
        } else {
            XComplex { m: self.m, e: self.e + k }
        }
    }

    pub fn recip(&self) -> XComplex {
        XComplex::normalized(Complex64::new(1.0, 0.0) / self.m, -self.e)
    }

    pub fn powu(&self, k: u128) -> XComplex {
        let mut base = *self;
        let mut acc = XComplex::ONE;
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc * base;
            }
            k >>= 1;
            if k > 0 {
                base = base * base;
            }
        }
        acc
    }

    pub fn powi(&self, k: i128) -> XComplex {
        if k >= 0 {
            self.powu(k as u128)
        } else {
            self.recip().powu(k.unsigned_abs())
        }
    }

    /// Compares magnitudes.
    pub fn cmp_abs(&self, other: &XComplex) -> Ordering {
        self.log2_abs().total_cmp(&other.log2_abs())
    }
}

impl From<Complex64> for XComplex {
    fn from(z: Complex64) -> Self {
        XComplex::new(z)
    }
}

impl From<f64> for XComplex {
    fn from(x: f64) -> Self {
        XComplex::from_f64(x)
    }
}

impl Mul for XComplex {
    type Output = XComplex;
    fn mul(self, rhs: XComplex) -> XComplex {
        XComplex::normalized(self.m * rhs.m, self.e + rhs.e)
    }
}

impl MulAssign for XComplex {
    fn mul_assign(&mut self, rhs: XComplex) {
        *self = *self * rhs;
    }
}

impl Div for XComplex {
    type Output = XComplex;
    fn div(self, rhs: XComplex) -> XComplex {
        XComplex::normalized(self.m / rhs.m, self.e - rhs.e)
    }
}

impl Add for XComplex {
    type Output = XComplex;
    fn add(self, rhs: XComplex) -> XComplex {
        if self.is_zero() {
            return rhs;
        }
        if rhs.is_zero() {
            return self;
        }
        let (big, small) = if self.e >= rhs.e { (self, rhs) } else { (rhs, self) };
        let shift = small.e - big.e;
        if shift < -110 {
            return big;
        }
        let s = Complex64::new(ldexp(small.m.re, shift), ldexp(small.m.im, shift));
        XComplex::normalized(big.m + s, big.e)
    }
}

impl AddAssign for XComplex {
    fn add_assign(&mut self, rhs: XComplex) {
        *self = *self + rhs;
    }
}

impl Neg for XComplex {
    type Output = XComplex;
    fn neg(self) -> XComplex {
        XComplex { m: -self.m, e: self.e }
    }
}

impl Sub for XComplex {
    type Output = XComplex;
    fn sub(self, rhs: XComplex) -> XComplex {
        self + (-rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip() {
        let z = Complex64::new(3.25, -0.75);
        assert_eq!(XComplex::new(z).to_complex(), z);
        assert!(XComplex::from_f64(0.0).is_zero());
    }

    #[test]
    fn beyond_f64_range() {
        let big = XComplex::from_f64(2.0).powu(3000);
        assert_eq!(big.log2_abs(), 3000.0);
        let back = big * XComplex::from_f64(0.5).powu(2999);
        assert_eq!(back.to_complex(), Complex64::new(2.0, 0.0));
        assert_eq!(XComplex::from_f64(2.0).powi(-3), XComplex::from_f64(0.125));
    }

    #[test]
    fn addition_aligns() {
        let a = XComplex::from_f64(1.5) + XComplex::from_f64(-0.25);
        assert_eq!(a.to_complex(), Complex64::new(1.25, 0.0));
        let tiny = XComplex::pow2(-500);
        assert_eq!((XComplex::ONE + tiny).to_complex().re, 1.0);
        assert!((XComplex::ONE - XComplex::ONE).is_zero());
    }

    #[test]
    fn powers_of_i() {
        let i = XComplex::new(Complex64::new(0.0, 1.0));
        assert_eq!(i.powu(4).to_complex(), Complex64::new(1.0, 0.0));
    }
}
