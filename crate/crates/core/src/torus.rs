//! Exact dynamics on the circle 𝕋 = ℝ/ℤ.
//!
//! Points are 128-bit fixed-point fractions, so a rotation step is a wrapping
//! integer addition and interval membership is an integer comparison. The
//! doubling map acts on an explicit bit stream: shifting by one bit is one
//! application of x ↦ 2x mod 1, and the leading 128 bits of the shifted stream
//! are the point itself.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, AddAssign, Neg, Sub};

use rand_core::RngCore;

use crate::{Error, Result};

/// 2^128 as a float.
pub const TWO_POW_128: f64 = 340_282_366_920_938_463_463_374_607_431_768_211_456.0;

/// A point of ℝ/ℤ stored as `frac / 2^128`.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TorusPoint(u128);

impl TorusPoint {
    pub const ZERO: TorusPoint = TorusPoint(0);
    pub const HALF: TorusPoint = TorusPoint(1 << 127);

    pub const fn from_frac(frac: u128) -> Self {
        TorusPoint(frac)
    }

    pub const fn frac(self) -> u128 {
        self.0
    }

    /// Nearest representable point to `x mod 1` (rounded toward zero).
    pub fn from_f64(x: f64) -> Self {
        let y = x - libm::floor(x);
        let scaled = y * TWO_POW_128;
        if scaled >= TWO_POW_128 {
            TorusPoint(0)
        } else {
            TorusPoint(scaled as u128)
        }
    }

    /// `floor((p mod q) · 2^128 / q) / 2^128`, exact for every `q < 2^64`.
    pub fn from_ratio(p: i128, q: u64) -> Self {
        assert!(q > 0, "zero denominator");
        let q128 = q as u128;
        let r = p.rem_euclid(q as i128) as u128;
        let hi_num = r << 64;
        let hi = hi_num / q128;
        let rem = hi_num % q128;
        let lo = (rem << 64) / q128;
        TorusPoint((hi << 64) | lo)
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / TWO_POW_128
    }

    /// `k · x mod 1`, exact on the stored representation.
    pub fn mul_int(self, k: i128) -> Self {
        TorusPoint(self.0.wrapping_mul(k as u128))
    }

    /// Application of the doubling map to the stored bits.
    pub fn doubled(self) -> Self {
        TorusPoint(self.0 << 1)
    }

    /// Distance to the nearest integer, as a raw fraction.
    pub fn dist_to_zero_frac(self) -> u128 {
        self.0.min(self.0.wrapping_neg())
    }

    /// ‖x‖, the distance to the nearest integer.
    pub fn dist_to_zero(self) -> f64 {
        self.dist_to_zero_frac() as f64 / TWO_POW_128
    }

    /// Torus distance between two points.
    pub fn distance(self, other: TorusPoint) -> f64 {
        (self - other).dist_to_zero()
    }
}

impl Add for TorusPoint {
    type Output = TorusPoint;
    fn add(self, rhs: TorusPoint) -> TorusPoint {
        TorusPoint(self.0.wrapping_add(rhs.0))
    }
}

impl AddAssign for TorusPoint {
    fn add_assign(&mut self, rhs: TorusPoint) {
        self.0 = self.0.wrapping_add(rhs.0);
    }
}

impl Sub for TorusPoint {
    type Output = TorusPoint;
    fn sub(self, rhs: TorusPoint) -> TorusPoint {
        TorusPoint(self.0.wrapping_sub(rhs.0))
    }
}

impl Neg for TorusPoint {
    type Output = TorusPoint;
    fn neg(self) -> TorusPoint {
        TorusPoint(self.0.wrapping_neg())
    }
}

/// Half-open arc `[lo, hi)` of the circle, read counter-clockwise from `lo`.
///
/// An upper endpoint of `0` stands for `1`, so `[b, 0)` is `[b, 1)`;
/// `lo == hi` is the whole circle.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    pub lo: TorusPoint,
    pub hi: TorusPoint,
}

impl Interval {
    pub fn new(lo: TorusPoint, hi: TorusPoint) -> Self {
        Interval { lo, hi }
    }

    pub fn is_full(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: TorusPoint) -> bool {
        self.is_full() || (x - self.lo).0 < (self.hi - self.lo).0
    }

    pub fn measure(&self) -> f64 {
        if self.is_full() {
            1.0
        } else {
            (self.hi - self.lo).to_f64()
        }
    }
}

/// Checks that `a1`, `a2` are two nonempty arcs partitioning the circle.
pub fn check_partition(a1: &Interval, a2: &Interval) -> Result<()> {
    if a1.is_full() || a2.is_full() {
        return Err(Error::Config("intervals must be proper arcs"));
    }
    if a1.hi != a2.lo || a2.hi != a1.lo {
        return Err(Error::Config("intervals must be disjoint and cover [0,1)"));
    }
    Ok(())
}

/// Finite binary expansion ω = Σ x_n / 2^(n+1), most significant bit first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitStream {
    words: Vec<u64>,
    len: usize,
}

impl BitStream {
    /// Builds a stream from explicit 0/1 values.
    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        let mut words = vec![0u64; bits.len().div_ceil(64)];
        for (i, &b) in bits.iter().enumerate() {
            match b {
                0 => {}
                1 => words[i / 64] |= 1 << (63 - i % 64),
                _ => return Err(Error::Config("bits must be 0 or 1")),
            }
        }
        Ok(BitStream {
            words,
            len: bits.len(),
        })
    }

    /// `len` i.i.d. fair bits.
    pub fn random<R: RngCore + ?Sized>(len: usize, rng: &mut R) -> Self {
        let mut words: Vec<u64> = (0..len.div_ceil(64)).map(|_| rng.next_u64()).collect();
        if len % 64 != 0 {
            if let Some(last) = words.last_mut() {
                *last &= !(u64::MAX >> (len % 64));
            }
        }
        BitStream { words, len }
    }

    /// Explicit leading bits followed by random fill up to `len`.
    pub fn with_prefix<R: RngCore + ?Sized>(prefix: &[u8], len: usize, rng: &mut R) -> Result<Self> {
        let mut s = BitStream::random(len.max(prefix.len()), rng);
        for (i, &b) in prefix.iter().enumerate() {
            let mask = 1u64 << (63 - i % 64);
            match b {
                0 => s.words[i / 64] &= !mask,
                1 => s.words[i / 64] |= mask,
                _ => return Err(Error::Config("bits must be 0 or 1")),
            }
        }
        Ok(s)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn bit(&self, i: usize) -> u8 {
        if i >= self.len {
            return 0;
        }
        ((self.words[i / 64] >> (63 - i % 64)) & 1) as u8
    }

    fn word(&self, k: usize) -> u64 {
        self.words.get(k).copied().unwrap_or(0)
    }

    /// The point τ^i ω, reading 128 bits from position `i`; bits past the end
    /// read as zero.
    pub fn point_at(&self, i: usize) -> TorusPoint {
        let k = i / 64;
        let s = (i % 64) as u32;
        let hi = ((self.word(k) as u128) << 64) | self.word(k + 1) as u128;
        let v = if s == 0 {
            hi
        } else {
            (hi << s) | (self.word(k + 2) >> (64 - s)) as u128
        };
        TorusPoint(v)
    }
}

/// Guard bits kept past the horizon of a doubling-map orbit.
pub const GUARD_BITS: usize = 128;

/// A measure-preserving map of (𝕋, m).
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Transformation {
    /// x ↦ x + α with α stored as a 128-bit fraction.
    Rotation { alpha: TorusPoint },
    /// x ↦ x + p/q with exact period q (`p/q` in lowest terms).
    RationalRotation { p: u64, q: u64 },
    /// x ↦ 2x mod 1.
    Doubling,
}

impl Transformation {
    pub fn rotation(alpha: TorusPoint) -> Self {
        Transformation::Rotation { alpha }
    }

    /// Rational rotation; the fraction is reduced.
    pub fn rational(p: u64, q: u64) -> Result<Self> {
        if q == 0 {
            return Err(Error::Config("zero denominator"));
        }
        let g = num_integer::gcd(p % q, q);
        Ok(Transformation::RationalRotation {
            p: (p % q) / g,
            q: q / g,
        })
    }
}

/// Initial condition: a point for rotations, a bit stream for the doubling map.
#[derive(Copy, Clone, Debug)]
pub enum Start<'a> {
    Point(TorusPoint),
    Bits(&'a BitStream),
}

/// Iterator over τ^0 ω, τ^1 ω, …
#[derive(Clone, Debug)]
pub enum OrbitIter<'a> {
    Rotation {
        current: TorusPoint,
        alpha: TorusPoint,
        remaining: usize,
    },
    Rational {
        base: TorusPoint,
        p: u64,
        q: u64,
        index: u64,
        remaining: usize,
    },
    Doubling {
        bits: &'a BitStream,
        position: usize,
        end: usize,
    },
}

impl Iterator for OrbitIter<'_> {
    type Item = TorusPoint;

    fn next(&mut self) -> Option<TorusPoint> {
        match self {
            OrbitIter::Rotation {
                current,
                alpha,
                remaining,
            } => {
                if *remaining == 0 {
                    return None;
                }
                *remaining -= 1;
                let x = *current;
                *current += *alpha;
                Some(x)
            }
            OrbitIter::Rational {
                base,
                p,
                q,
                index,
                remaining,
            } => {
                if *remaining == 0 {
                    return None;
                }
                *remaining -= 1;
                let x = *base + TorusPoint::from_ratio(*index as i128, *q);
                *index = ((*index as u128 + *p as u128) % *q as u128) as u64;
                Some(x)
            }
            OrbitIter::Doubling {
                bits,
                position,
                end,
            } => {
                if *position >= *end {
                    return None;
                }
                let x = bits.point_at(*position);
                *position += 1;
                Some(x)
            }
        }
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = match self {
            OrbitIter::Rotation { remaining, .. } | OrbitIter::Rational { remaining, .. } => *remaining,
            OrbitIter::Doubling { position, end, .. } => end - position,
        };
        (n, Some(n))
    }
}

impl ExactSizeIterator for OrbitIter<'_> {}

/// Lazily iterates the first `n` orbit points.
pub fn orbit_iter<'a>(t: &Transformation, start: Start<'a>, n: usize) -> Result<OrbitIter<'a>> {
    if n == 0 {
        return Err(Error::Config("orbit length must be at least 1"));
    }
    let point = |s: Start<'_>| match s {
        Start::Point(p) => p,
        Start::Bits(b) => b.point_at(0),
    };
    Ok(match *t {
        Transformation::Rotation { alpha } => OrbitIter::Rotation {
            current: point(start),
            alpha,
            remaining: n,
        },
        Transformation::RationalRotation { p, q } => OrbitIter::Rational {
            base: point(start),
            p,
            q,
            index: 0,
            remaining: n,
        },
        Transformation::Doubling => {
            let bits = match start {
                Start::Bits(b) => b,
                Start::Point(_) => {
                    return Err(Error::Config("the doubling map needs a bit-stream start"))
                }
            };
            let needed = n + GUARD_BITS;
            if bits.len() < needed {
                return Err(Error::Horizon {
                    needed,
                    available: bits.len(),
                });
            }
            OrbitIter::Doubling {
                bits,
                position: 0,
                end: n,
            }
        }
    })
}

/// τ^0 ω, …, τ^(n−1) ω.
pub fn orbit(t: &Transformation, start: Start<'_>, n: usize) -> Result<Vec<TorusPoint>> {
    Ok(orbit_iter(t, start, n)?.collect())
}

/// Cumulative visit counts: entry `i − 1` holds `Card{0 ≤ j < i : τ^j ω ∈ A_k}`.
pub fn membership_counts(
    t: &Transformation,
    start: Start<'_>,
    n: usize,
    a1: &Interval,
    a2: &Interval,
) -> Result<(Vec<u64>, Vec<u64>)> {
    check_partition(a1, a2)?;
    let mut c1 = Vec::with_capacity(n);
    let mut c2 = Vec::with_capacity(n);
    let (mut k1, mut k2) = (0u64, 0u64);
    for x in orbit_iter(t, start, n)? {
        if a1.contains(x) {
            k1 += 1;
        } else {
            k2 += 1;
        }
        c1.push(k1);
        c2.push(k2);
    }
    Ok((c1, c2))
}

/// True iff τ^j ω ∈ [0, 1/2) exactly when bit j of ω is 0, for all j < n.
///
/// Only the leading bit of each shifted stream matters, so short streams are
/// read with zero padding.
pub fn iid_bit_check(omega: &BitStream, n: usize) -> bool {
    let a1 = Interval::new(TorusPoint::ZERO, TorusPoint::HALF);
    (0..n).all(|j| a1.contains(omega.point_at(j)) == (omega.bit(j) == 0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::sample_rng;

    #[test]
    fn quarter_rotation_cycles() {
        let t = Transformation::rotation(TorusPoint::from_ratio(1, 4));
        let o = orbit(&t, Start::Point(TorusPoint::ZERO), 4).unwrap();
        let expected: Vec<_> = (0..4).map(|k| TorusPoint::from_ratio(k, 4)).collect();
        assert_eq!(o, expected);
    }

    #[test]
    fn doubling_leading_bit_decides_half() {
        let bits = BitStream::from_bits(&[0, 1, 1, 0]).unwrap();
        let mut rng = sample_rng(0, 0);
        let long = BitStream::with_prefix(&[0, 1, 1, 0], 200, &mut rng).unwrap();
        assert!(bits.point_at(0) < TorusPoint::HALF);
        let o = orbit(&Transformation::Doubling, Start::Bits(&long), 2).unwrap();
        assert!(o[0] < TorusPoint::HALF);
        assert!(o[1] >= TorusPoint::HALF);
    }

    #[test]
    fn short_stream_is_a_horizon_error() {
        let bits = BitStream::from_bits(&[0, 1, 1, 0]).unwrap();
        let err = orbit(&Transformation::Doubling, Start::Bits(&bits), 2).unwrap_err();
        assert_eq!(
            err,
            Error::Horizon {
                needed: 130,
                available: 4
            }
        );
    }

    #[test]
    fn doubling_needs_bits() {
        let err = orbit(&Transformation::Doubling, Start::Point(TorusPoint::HALF), 3).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn zero_length_orbit_is_rejected() {
        let t = Transformation::rotation(TorusPoint::HALF);
        assert!(orbit(&t, Start::Point(TorusPoint::ZERO), 0).is_err());
    }

    #[test]
    fn counts_first_point() {
        let t = Transformation::rotation(TorusPoint::from_f64(0.3));
        let a1 = Interval::new(TorusPoint::ZERO, TorusPoint::HALF);
        let a2 = Interval::new(TorusPoint::HALF, TorusPoint::ZERO);
        let (c1, c2) = membership_counts(&t, Start::Point(TorusPoint::from_f64(0.1)), 1, &a1, &a2).unwrap();
        assert_eq!((c1, c2), (vec![1], vec![0]));
    }

    #[test]
    fn counts_follow_bits() {
        let mut rng = sample_rng(1, 0);
        let bits = BitStream::with_prefix(&[0, 1, 1, 0], 256, &mut rng).unwrap();
        let a1 = Interval::new(TorusPoint::ZERO, TorusPoint::HALF);
        let a2 = Interval::new(TorusPoint::HALF, TorusPoint::ZERO);
        let (c1, _) = membership_counts(&Transformation::Doubling, Start::Bits(&bits), 4, &a1, &a2).unwrap();
        assert_eq!(c1, vec![1, 1, 1, 2]);
    }

    #[test]
    fn overlapping_intervals_rejected() {
        let t = Transformation::rotation(TorusPoint::HALF);
        let a1 = Interval::new(TorusPoint::ZERO, TorusPoint::HALF);
        let a2 = Interval::new(TorusPoint::from_f64(0.25), TorusPoint::ZERO);
        let err = membership_counts(&t, Start::Point(TorusPoint::ZERO), 3, &a1, &a2).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        let full = Interval::new(TorusPoint::ZERO, TorusPoint::ZERO);
        assert!(check_partition(&full, &a1).is_err());
    }

    #[test]
    fn iid_bits() {
        assert!(iid_bit_check(&BitStream::from_bits(&[0, 1]).unwrap(), 2));
        assert!(iid_bit_check(&BitStream::from_bits(&[1, 1, 1, 1]).unwrap(), 4));
        let mut rng = sample_rng(9, 9);
        assert!(iid_bit_check(&BitStream::random(10_000, &mut rng), 10_000));
    }

    #[test]
    fn rational_rotation_has_exact_period() {
        let t = Transformation::rational(2, 7).unwrap();
        let o = orbit(&t, Start::Point(TorusPoint::from_f64(0.123)), 22).unwrap();
        for i in 0..15 {
            assert_eq!(o[i], o[i + 7]);
        }
        assert_ne!(o[0], o[1]);
    }

    #[test]
    fn interval_wraps() {
        let arc = Interval::new(TorusPoint::from_f64(0.75), TorusPoint::from_f64(0.25));
        assert!(arc.contains(TorusPoint::from_f64(0.9)));
        assert!(arc.contains(TorusPoint::from_f64(0.1)));
        assert!(!arc.contains(TorusPoint::from_f64(0.5)));
        assert!((arc.measure() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn from_ratio_matches_float() {
        for q in 1..50u64 {
            for p in 0..q {
                let x = TorusPoint::from_ratio(p as i128, q).to_f64();
                assert!((x - p as f64 / q as f64).abs() < 1e-15);
            }
        }
    }
}
