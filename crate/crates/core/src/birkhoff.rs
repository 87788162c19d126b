//! Step functions on 𝕋 and their Birkhoff sums.
//!
//! For the two-set partition `A1 = [0,b)`, `A2 = [b,1)` the sums are kept as
//! integer visit counters; `S_n = (a1(n) − n b)/(1 − b)` is derived on demand.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use num_integer::Integer;
use num_rational::Rational64;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::torus::{membership_counts, Interval, Start, TorusPoint, Transformation, TWO_POW_128};
use crate::{Error, Result};

/// `e^{−2πi t}` for a phase `t = frac/2^128`.
pub fn phase_exp(t: TorusPoint) -> Complex64 {
    let (s, c) = libm::sincos(2.0 * PI * t.to_f64());
    Complex64::new(c, -s)
}

/// Piecewise constant, right-continuous function on 𝕋.
///
/// Piece `i` is `[x_i, x_{i+1})`; the last piece wraps round to `x_0 + 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct StepFunction {
    breakpoints: Vec<TorusPoint>,
    values: Vec<f64>,
    jumps: Vec<f64>,
    variation: f64,
}

impl StepFunction {
    pub fn new(breakpoints: Vec<TorusPoint>, values: Vec<f64>) -> Result<Self> {
        if breakpoints.is_empty() || breakpoints.len() != values.len() {
            return Err(Error::Config("need one value per breakpoint"));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("breakpoints must be strictly increasing"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("values must be finite"));
        }
        let l = values.len();
        let jumps: Vec<f64> = (0..l).map(|i| values[i] - values[(i + l - 1) % l]).collect();
        let variation = jumps.iter().map(|d| d.abs()).sum();
        Ok(StepFunction {
            breakpoints,
            values,
            jumps,
            variation,
        })
    }

    /// `1_{[0,b)} − (b/(1−b)) 1_{[b,1)}`.
    pub fn favourite(b: TorusPoint) -> Result<Self> {
        if b == TorusPoint::ZERO {
            return Err(Error::Config("b must lie in (0,1)"));
        }
        let bf = b.to_f64();
        StepFunction::new(vec![TorusPoint::ZERO, b], vec![1.0, -bf / (1.0 - bf)])
    }

    pub fn zero() -> Self {
        StepFunction::new(vec![TorusPoint::ZERO], vec![0.0]).unwrap()
    }

    pub fn breakpoints(&self) -> &[TorusPoint] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// δ_f(x_i) = f(x_i⁺) − f(x_i⁻), one entry per breakpoint.
    pub fn jumps(&self) -> &[f64] {
        &self.jumps
    }

    /// Breakpoints where the function actually jumps.
    pub fn jump_points(&self) -> Vec<(TorusPoint, f64)> {
        self.breakpoints
            .iter()
            .zip(&self.jumps)
            .filter(|(_, &d)| d != 0.0)
            .map(|(&x, &d)| (x, d))
            .collect()
    }

    /// V(f) = Σ |δ_f|.
    pub fn variation(&self) -> f64 {
        self.variation
    }

    pub fn pieces(&self) -> usize {
        self.values.len()
    }

    fn piece_index(&self, x: TorusPoint) -> usize {
        match self.breakpoints.binary_search(&x) {
            Ok(i) => i,
            Err(0) => self.values.len() - 1,
            Err(i) => i - 1,
        }
    }

    pub fn eval(&self, x: TorusPoint) -> f64 {
        self.values[self.piece_index(x)]
    }

    /// Length of piece `i` as a fraction of the circle.
    pub fn piece_length(&self, i: usize) -> f64 {
        let l = self.values.len();
        if l == 1 {
            return 1.0;
        }
        (self.breakpoints[(i + 1) % l] - self.breakpoints[i]).frac() as f64 / TWO_POW_128
    }

    /// ∫ f dm.
    pub fn mean(&self) -> f64 {
        (0..self.pieces()).map(|i| self.values[i] * self.piece_length(i)).sum()
    }

    /// ∫ f² dm.
    pub fn l2_norm_sq(&self) -> f64 {
        (0..self.pieces())
            .map(|i| self.values[i] * self.values[i] * self.piece_length(i))
            .sum()
    }

    /// γ_r = r c_r = (1/2πi) Σ δ_f(x_i) e^{−2πi r x_i}.
    ///
    /// `r` enters only through `r x_i mod 1`, so it is taken modulo 2^128.
    pub fn gamma(&self, r_wrapped: u128) -> Complex64 {
        let sum: Complex64 = self
            .breakpoints
            .iter()
            .zip(&self.jumps)
            .map(|(x, &d)| phase_exp(TorusPoint::from_frac(x.frac().wrapping_mul(r_wrapped))) * d)
            .sum();
        sum / Complex64::new(0.0, 2.0 * PI)
    }

    /// c_r = ∫ f(t) e^{−2πi r t} dt.
    pub fn fourier(&self, r: i64) -> Complex64 {
        if r == 0 {
            return Complex64::new(self.mean(), 0.0);
        }
        self.gamma(r as i128 as u128) / r as f64
    }

    /// ∫ f(x) f(x + t) dx, by intersecting pieces.
    pub fn autocorrelation(&self, t: TorusPoint) -> f64 {
        let l = self.pieces();
        let mut acc = 0.0;
        for i in 0..l {
            for j in 0..l {
                // x ∈ I_i and x + t ∈ I_j, i.e. x ∈ I_i ∩ (I_j − t).
                let a = self.breakpoints[i];
                let b = self.breakpoints[j] - t;
                let overlap = arc_overlap(a, self.piece_length(i), b, self.piece_length(j));
                acc += self.values[i] * self.values[j] * overlap;
            }
        }
        acc
    }
}

/// Measure of `[a, a + la) ∩ [b, b + lb)` on the circle.
fn arc_overlap(a: TorusPoint, la: f64, b: TorusPoint, lb: f64) -> f64 {
    let d = (a - b).to_f64();
    let first = ((d + la).min(lb) - d).max(0.0);
    let second = (d - 1.0 + la).min(lb).max(0.0);
    first + second
}

/// The split point b of `A1 = [0,b)`, `A2 = [b,1)`, exact when rational.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct Split {
    point: TorusPoint,
    ratio: Option<(u64, u64)>,
}

impl Split {
    pub fn rational(p: u64, q: u64) -> Result<Self> {
        if q == 0 || p == 0 || p >= q {
            return Err(Error::Config("b must lie in (0,1)"));
        }
        let g = p.gcd(&q);
        Ok(Split {
            point: TorusPoint::from_ratio(p as i128, q),
            ratio: Some((p / g, q / g)),
        })
    }

    pub fn real(point: TorusPoint) -> Result<Self> {
        if point == TorusPoint::ZERO {
            return Err(Error::Config("b must lie in (0,1)"));
        }
        Ok(Split { point, ratio: None })
    }

    pub fn point(&self) -> TorusPoint {
        self.point
    }

    pub fn ratio(&self) -> Option<(u64, u64)> {
        self.ratio
    }

    pub fn to_f64(&self) -> f64 {
        match self.ratio {
            Some((p, q)) => p as f64 / q as f64,
            None => self.point.to_f64(),
        }
    }

    /// m(A1)/m(A2) = b/(1 − b).
    pub fn weight(&self) -> f64 {
        match self.ratio {
            Some((p, q)) => p as f64 / (q - p) as f64,
            None => {
                let b = self.point.to_f64();
                b / (1.0 - b)
            }
        }
    }

    pub fn sets(&self) -> (Interval, Interval) {
        (
            Interval::new(TorusPoint::ZERO, self.point),
            Interval::new(self.point, TorusPoint::ZERO),
        )
    }

    pub fn step_function(&self) -> StepFunction {
        StepFunction::new(vec![TorusPoint::ZERO, self.point], vec![1.0, -self.weight()]).unwrap()
    }

    pub fn rational_step_function(&self) -> Option<RationalStepFunction> {
        let (p, q) = self.ratio?;
        RationalStepFunction::favourite(Rational64::new(p as i64, q as i64)).ok()
    }

    /// `a1 − n b`, exactly rounded from the 128-bit representation.
    fn excess(&self, a1: u64, n: u64) -> f64 {
        let b = self.point.frac();
        let (hi, lo) = (b >> 64, b & u64::MAX as u128);
        let x = n as u128 * hi;
        let y = n as u128 * lo;
        let int = x >> 64;
        let frac = (x & u64::MAX as u128) as f64 / 18_446_744_073_709_551_616.0 + y as f64 / TWO_POW_128;
        (a1 as i128 - int as i128) as f64 - frac
    }

    /// S_n from the counters.
    pub fn sum(&self, a1: u64, n: u64) -> f64 {
        match self.ratio {
            Some((p, q)) => {
                let num = q as i128 * a1 as i128 - n as i128 * p as i128;
                num as f64 / (q - p) as f64
            }
            None => self.excess(a1, n) / (1.0 - self.point.to_f64()),
        }
    }

    /// S_n as an exact fraction `(num, den)` when b is rational.
    pub fn sum_exact(&self, a1: u64, n: u64) -> Option<(i128, i128)> {
        let (p, q) = self.ratio?;
        Some((
            q as i128 * a1 as i128 - n as i128 * p as i128,
            (q - p) as i128,
        ))
    }
}

/// One CSV-ready row of a [`BirkhoffSeries`].
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct SeriesRow {
    pub n: u64,
    pub a1: u64,
    pub a2: u64,
    pub s: f64,
    pub runmax: f64,
    pub runmin: f64,
}

/// Visit counters of `A1` along an orbit, indexed from `n = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct BirkhoffSeries {
    split: Split,
    a1: Vec<u64>,
    runmax: Vec<f64>,
    runmin: Vec<f64>,
}

impl BirkhoffSeries {
    pub fn len(&self) -> usize {
        self.a1.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn split(&self) -> &Split {
        &self.split
    }

    pub fn a1(&self, n: usize) -> u64 {
        self.a1[n]
    }

    pub fn a2(&self, n: usize) -> u64 {
        n as u64 - self.a1[n]
    }

    pub fn s(&self, n: usize) -> f64 {
        self.split.sum(self.a1[n], n as u64)
    }

    pub fn s_exact(&self, n: usize) -> Option<(i128, i128)> {
        self.split.sum_exact(self.a1[n], n as u64)
    }

    /// max_{0 ≤ m ≤ n} S_m.
    pub fn runmax(&self, n: usize) -> f64 {
        self.runmax[n]
    }

    pub fn runmin(&self, n: usize) -> f64 {
        self.runmin[n]
    }

    pub fn range(&self, n: usize) -> f64 {
        self.runmax[n] - self.runmin[n]
    }

    pub fn row(&self, n: usize) -> SeriesRow {
        SeriesRow {
            n: n as u64,
            a1: self.a1(n),
            a2: self.a2(n),
            s: self.s(n),
            runmax: self.runmax(n),
            runmin: self.runmin(n),
        }
    }

    pub fn rows(&self) -> impl Iterator<Item = SeriesRow> + '_ {
        (0..=self.len()).map(move |n| self.row(n))
    }
}

/// Birkhoff sums of `1_{A1} − (m(A1)/m(A2)) 1_{A2}` for n = 0..=N.
pub fn birkhoff_sums(t: &Transformation, split: Split, start: Start<'_>, n: usize) -> Result<BirkhoffSeries> {
    let (a1_set, a2_set) = split.sets();
    let (c1, _) = membership_counts(t, start, n, &a1_set, &a2_set)?;
    let mut a1 = Vec::with_capacity(n + 1);
    a1.push(0);
    a1.extend(c1);
    let mut runmax = Vec::with_capacity(n + 1);
    let mut runmin = Vec::with_capacity(n + 1);
    let (mut hi, mut lo) = (0.0f64, 0.0f64);
    for (m, &k) in a1.iter().enumerate() {
        let s = split.sum(k, m as u64);
        hi = hi.max(s);
        lo = lo.min(s);
        runmax.push(hi);
        runmin.push(lo);
    }
    Ok(BirkhoffSeries {
        split,
        a1,
        runmax,
        runmin,
    })
}

/// S_0, …, S_N for a general step function, by direct evaluation.
pub fn birkhoff_values(t: &Transformation, f: &StepFunction, start: Start<'_>, n: usize) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(0.0);
    let mut acc = 0.0;
    for x in crate::torus::orbit_iter(t, start, n)? {
        acc += f.eval(x);
        out.push(acc);
    }
    Ok(out)
}

/// `S_n f` under rotation by α, as a step function of the starting point.
///
/// Its breakpoints are `x_j − iα` for `i < n`; the value at the first one is
/// evaluated directly and the rest follow by adding jumps.
pub fn birkhoff_step_function(alpha: TorusPoint, f: &StepFunction, n: usize) -> Result<StepFunction> {
    if n == 0 {
        return Ok(StepFunction::zero());
    }
    let jumps = f.jump_points();
    if jumps.is_empty() {
        return StepFunction::new(vec![TorusPoint::ZERO], vec![f.values()[0] * n as f64]);
    }
    let mut events: Vec<(TorusPoint, f64)> = Vec::with_capacity(jumps.len() * n);
    let mut shift = TorusPoint::ZERO;
    for _ in 0..n {
        for &(x, d) in &jumps {
            events.push((x - shift, d));
        }
        shift += alpha;
    }
    events.sort_unstable_by_key(|e| e.0);
    let mut merged: Vec<(TorusPoint, f64)> = Vec::with_capacity(events.len());
    for (x, d) in events {
        match merged.last_mut() {
            Some(last) if last.0 == x => last.1 += d,
            _ => merged.push((x, d)),
        }
    }
    let start = merged[0].0;
    let mut value = 0.0;
    let mut y = start;
    for _ in 0..n {
        value += f.eval(y);
        y += alpha;
    }
    let mut breakpoints = Vec::with_capacity(merged.len());
    let mut values = Vec::with_capacity(merged.len());
    for (i, (x, d)) in merged.into_iter().enumerate() {
        if i > 0 {
            value += d;
        }
        breakpoints.push(x);
        values.push(value);
    }
    StepFunction::new(breakpoints, values)
}

/// `(k, q_k, S_{q_k})` for every convergent denominator within the series.
pub fn denjoy_koksma_table(series: &BirkhoffSeries, denominators: &[u128]) -> Vec<(usize, u128, f64)> {
    denominators
        .iter()
        .enumerate()
        .filter(|(_, &q)| q as usize <= series.len())
        .map(|(k, &q)| (k, q, series.s(q as usize)))
        .collect()
}

/// Outcome of the jump-coset test.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum OrenVerdict {
    BoundedPredicted,
    UnboundedPredicted,
    Inconclusive,
}

/// Jump points related by integer multiples of α.
#[derive(Clone, Debug, PartialEq)]
pub struct Coset {
    /// `(point, k, δ_f(point))` with `point ≡ representative + kα`.
    pub members: Vec<(TorusPoint, i64, f64)>,
    /// Δ_f on this coset.
    pub delta_sum: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrenReport {
    pub verdict: OrenVerdict,
    pub cosets: Vec<Coset>,
    /// Smallest pair distance that fell between the tolerance and the gray band.
    pub ambiguous_distance: Option<f64>,
    pub search_bound: i64,
}

pub const OREN_SEARCH_BOUND: i64 = 10_000;
/// Pair distances at most this are treated as exact coincidences.
pub const OREN_TOLERANCE: f64 = 5.421_010_862_427_522e-20; // 2^-64
/// Pair distances up to this are too close to call.
pub const OREN_GRAY_BAND: f64 = 3.552_713_678_800_501e-15; // 2^-48

/// Groups the jumps of `f` into ℤα-cosets within `|k| ≤ bound` and sums δ_f
/// on each coset; bounded sums are predicted exactly when every sum vanishes.
pub fn oren_analysis(f: &StepFunction, alpha: TorusPoint, bound: i64, tol: f64) -> OrenReport {
    let jumps = f.jump_points();
    let l = jumps.len();
    let gray = OREN_GRAY_BAND.max(tol * 2.0);
    // parent[i] = (root, shift) with jumps[i] ≡ jumps[root] + shift·α.
    let mut link: Vec<Option<(usize, i64)>> = vec![None; l];
    let mut ambiguous: Option<f64> = None;
    for j in 1..l {
        for i in 0..j {
            if link[i].is_some() {
                continue;
            }
            let diff = jumps[j].0 - jumps[i].0;
            let mut best = (f64::INFINITY, 0i64);
            let mut kp = TorusPoint::ZERO;
            let mut km = TorusPoint::ZERO;
            for k in 0..=bound {
                let dp = (diff - kp).dist_to_zero();
                if dp < best.0 {
                    best = (dp, k);
                }
                let dm = (diff - km).dist_to_zero();
                if dm < best.0 {
                    best = (dm, -k);
                }
                kp += alpha;
                km = km - alpha;
            }
            if best.0 <= tol {
                link[j] = Some((i, best.1));
                break;
            } else if best.0 <= gray {
                ambiguous = Some(ambiguous.map_or(best.0, |a: f64| a.min(best.0)));
            }
        }
    }
    let mut cosets: Vec<Coset> = Vec::new();
    let mut coset_of = vec![0usize; l];
    for j in 0..l {
        match link[j] {
            None => {
                coset_of[j] = cosets.len();
                cosets.push(Coset {
                    members: vec![(jumps[j].0, 0, jumps[j].1)],
                    delta_sum: jumps[j].1,
                });
            }
            Some((i, k)) => {
                let c = coset_of[i];
                let base = cosets[c].members.iter().find(|m| m.0 == jumps[i].0).unwrap().1;
                coset_of[j] = c;
                cosets[c].members.push((jumps[j].0, base + k, jumps[j].1));
                cosets[c].delta_sum += jumps[j].1;
            }
        }
    }
    let scale = f.variation().max(1.0) * 1e-12;
    let verdict = if ambiguous.is_some() {
        OrenVerdict::Inconclusive
    } else if cosets.iter().all(|c| c.delta_sum.abs() <= scale) {
        OrenVerdict::BoundedPredicted
    } else {
        OrenVerdict::UnboundedPredicted
    };
    OrenReport {
        verdict,
        cosets,
        ambiguous_distance: ambiguous,
        search_bound: bound,
    }
}

/// c_r for 1 ≤ r ≤ R; c_{−r} = conj(c_r) for real f.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierData {
    pub coeffs: Vec<Complex64>,
    /// V(f)/(2π), the bound on every |γ_r|.
    pub gamma_bound: f64,
}

impl FourierData {
    pub fn c(&self, r: i64) -> Option<Complex64> {
        let c = *self.coeffs.get(r.unsigned_abs().checked_sub(1)? as usize)?;
        Some(if r < 0 { c.conj() } else { c })
    }

    pub fn gamma(&self, r: i64) -> Option<Complex64> {
        self.c(r).map(|c| c * r as f64)
    }
}

/// Exact piecewise Fourier coefficients.
pub fn fourier_coeffs(f: &StepFunction, r_max: usize) -> FourierData {
    FourierData {
        coeffs: (1..=r_max as i64).map(|r| f.fourier(r)).collect(),
        gamma_bound: f.variation() / (2.0 * PI),
    }
}

/// `(1/(1−b)) (1 − e^{−2πirb})/(2πir)`, the coefficients of the two-set function.
pub fn favourite_fourier(split: &Split, r: i64) -> Complex64 {
    let b = split.to_f64();
    let phase = TorusPoint::from_frac(split.point().frac().wrapping_mul(r as i128 as u128));
    let num = Complex64::new(1.0, 0.0) - phase_exp(phase);
    num / Complex64::new(0.0, 2.0 * PI * r as f64) / (1.0 - b)
}

pub fn favourite_fourier_coeffs(split: &Split, r_max: usize) -> FourierData {
    let b = split.to_f64();
    FourierData {
        coeffs: (1..=r_max as i64).map(|r| favourite_fourier(split, r)).collect(),
        gamma_bound: 2.0 / (1.0 - b) / (2.0 * PI),
    }
}

/// Below this ‖rα‖ a frequency is treated as resonant and skipped.
pub const RESONANCE_GUARD: f64 = 7.888_609_052_210_118e-31; // 2^-100

#[derive(Clone, Debug, PartialEq)]
pub struct VarianceReport {
    /// Σ_{0<|r|≤R} |c_r|² |1 − e^{2πirnα}|²/|1 − e^{2πirα}|².
    pub value: f64,
    pub r_max: usize,
    /// Frequencies dropped by the resonance guard.
    pub excluded: Vec<i64>,
    /// Estimate of the neglected frequencies |r| > R.
    pub tail_estimate: f64,
}

/// `‖S_n f‖₂²` under rotation by α via Parseval, truncated at R.
pub fn variance_exact(alpha: TorusPoint, f: &StepFunction, n: u64, r_max: usize) -> VarianceReport {
    let mut value = 0.0;
    let mut excluded = Vec::new();
    if n == 0 {
        return VarianceReport {
            value,
            r_max,
            excluded,
            tail_estimate: 0.0,
        };
    }
    let ratio = |r: u128| -> Option<f64> {
        let ra = alpha.mul_int(r as i128);
        let d = ra.dist_to_zero();
        if d < RESONANCE_GUARD {
            return None;
        }
        let num = libm::sin(PI * ra.mul_int(n as i128).dist_to_zero());
        let den = libm::sin(PI * d);
        Some(num * num / (den * den))
    };
    for r in 1..=r_max as u128 {
        match ratio(r) {
            Some(k) => value += 2.0 * f.gamma(r).norm_sqr() / (r * r) as f64 * k,
            None => {
                excluded.push(r as i64);
                excluded.push(-(r as i64));
            }
        }
    }
    // Sample the window (R, 16R] with a fixed stride, then bound the rest.
    let v = f.variation() / (2.0 * PI);
    let hi = 16 * r_max as u128;
    let stride = ((hi - r_max as u128) / 4096).max(1);
    let mut sampled = 0.0;
    let mut r = r_max as u128 + 1;
    while r <= hi {
        let d = alpha.mul_int(r as i128).dist_to_zero().max(RESONANCE_GUARD);
        let m = (n as f64).min(0.5 / d);
        sampled += 2.0 * v * v * m * m / (r * r) as f64 * stride as f64;
        r += stride;
    }
    let rest = 2.0 * v * v * (n as f64) * (n as f64) / hi as f64;
    VarianceReport {
        value,
        r_max,
        excluded,
        tail_estimate: sampled + rest,
    }
}

/// `‖S_n f‖₂²` for n = 0..=N from the exact autocorrelations
/// `C(k) = ∫ f·f(· + kα)`, using `‖S_{n+1}‖² = ‖S_n‖² + C(0) + 2 Σ_{1≤k≤n} C(k)`.
pub fn l2_norms_sq(alpha: TorusPoint, f: &StepFunction, n: usize) -> Vec<f64> {
    let c0 = f.l2_norm_sq();
    let mut out = Vec::with_capacity(n + 1);
    out.push(0.0);
    let mut acc = 0.0;
    let mut cum = 0.0;
    let mut shift = TorusPoint::ZERO;
    for k in 0..n {
        if k > 0 {
            cum += f.autocorrelation(shift);
        }
        acc += c0 + 2.0 * cum;
        out.push(acc.max(0.0));
        shift += alpha;
    }
    out
}

/// ∫ (S_n f)² over a midpoint grid with `2^log2_points` nodes.
pub fn grid_l2_norm_sq(alpha: TorusPoint, f: &StepFunction, n: usize, log2_points: u32) -> f64 {
    let m = 1u128 << log2_points;
    let step = TorusPoint::from_frac(1u128 << (128 - log2_points));
    let mut x = TorusPoint::from_frac(1u128 << (127 - log2_points));
    let mut acc = 0.0;
    for _ in 0..m {
        let mut y = x;
        let mut s = 0.0;
        for _ in 0..n {
            s += f.eval(y);
            y += alpha;
        }
        acc += s * s;
        x += step;
    }
    acc / m as f64
}

/// Step function with rational breakpoints and values, for exact checks.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalStepFunction {
    breakpoints: Vec<Rational64>,
    values: Vec<Rational64>,
}

fn frac_part(x: Rational64) -> Rational64 {
    x - x.floor()
}

impl RationalStepFunction {
    pub fn new(breakpoints: Vec<Rational64>, values: Vec<Rational64>) -> Result<Self> {
        if breakpoints.is_empty() || breakpoints.len() != values.len() {
            return Err(Error::Config("need one value per breakpoint"));
        }
        let one = Rational64::from_integer(1);
        if breakpoints.iter().any(|x| x.is_negative() || *x >= one) {
            return Err(Error::Config("breakpoints must lie in [0,1)"));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("breakpoints must be strictly increasing"));
        }
        Ok(RationalStepFunction { breakpoints, values })
    }

    /// `1_{[0,b)} − (b/(1−b)) 1_{[b,1)}`, centred exactly.
    pub fn favourite(b: Rational64) -> Result<Self> {
        let one = Rational64::from_integer(1);
        if !b.is_positive() || b >= one {
            return Err(Error::Config("b must lie in (0,1)"));
        }
        RationalStepFunction::new(vec![Rational64::zero(), b], vec![one, -b / (one - b)])
    }

    pub fn breakpoints(&self) -> &[Rational64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[Rational64] {
        &self.values
    }

    pub fn eval(&self, x: Rational64) -> Rational64 {
        let x = frac_part(x);
        let i = match self.breakpoints.binary_search(&x) {
            Ok(i) => i,
            Err(0) => self.values.len() - 1,
            Err(i) => i - 1,
        };
        self.values[i]
    }

    pub fn mean(&self) -> Rational64 {
        let l = self.values.len();
        let one = Rational64::from_integer(1);
        (0..l)
            .map(|i| {
                let len = if l == 1 {
                    one
                } else {
                    frac_part(self.breakpoints[(i + 1) % l] - self.breakpoints[i])
                };
                self.values[i] * len
            })
            .sum()
    }

    pub fn min_value(&self) -> Rational64 {
        *self.values.iter().min().unwrap()
    }

    pub fn max_value(&self) -> Rational64 {
        *self.values.iter().max().unwrap()
    }

    pub fn to_float(&self) -> StepFunction {
        let bps = self
            .breakpoints
            .iter()
            .map(|x| TorusPoint::from_ratio(*x.numer() as i128, *x.denom() as u64))
            .collect();
        let vals = self.values.iter().map(|v| v.to_f64().unwrap()).collect();
        StepFunction::new(bps, vals).unwrap()
    }
}

/// Exact Birkhoff sums `S_0..=S_N` under rotation by a rational α.
pub fn rational_birkhoff_sums(alpha: Rational64, f: &RationalStepFunction, x: Rational64, n: usize) -> Vec<Rational64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = Rational64::zero();
    out.push(acc);
    let mut y = frac_part(x);
    for _ in 0..n {
        acc += f.eval(y);
        out.push(acc);
        y = frac_part(y + alpha);
    }
    out
}

/// A transfer function `h` with `f = h − h∘τ`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoboundaryWitness {
    pub h: RationalStepFunction,
    /// sup over the checked grid of |f − (h − h∘τ)|.
    pub residual: Rational64,
    pub grid_points: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum CoboundaryOutcome {
    Solution(CoboundaryWitness),
    /// `Σ_{j<q} f(x + jα) ≠ 0` at `x`.
    NoSolution { x: Rational64, period_sum: Rational64 },
}

/// Solves `f = h − h∘τ` for rotation by `α = p/q`.
///
/// A solution exists exactly when the period sum `Σ_{j<q} f(x + jα)` vanishes
/// identically; it is checked at every breakpoint of its own refinement, and
/// then `h(x) = −(1/q) Σ_{j<q} (j+1) f(x + jα)` works. The residual is
/// evaluated exactly on the `grid`-point lattice `{i/grid}`.
pub fn rational_coboundary(alpha: Rational64, f: &RationalStepFunction, grid: usize) -> Result<CoboundaryOutcome> {
    let alpha = frac_part(alpha);
    let q = *alpha.denom();
    let mut refinement: Vec<Rational64> = Vec::new();
    for &x in f.breakpoints() {
        for j in 0..q {
            refinement.push(frac_part(x - alpha * j));
        }
    }
    refinement.sort();
    refinement.dedup();

    let period_sum = |x: Rational64| -> Rational64 { (0..q).map(|j| f.eval(x + alpha * j)).sum() };
    for &x in &refinement {
        let s = period_sum(x);
        if !s.is_zero() {
            return Ok(CoboundaryOutcome::NoSolution { x, period_sum: s });
        }
    }

    let qr = Rational64::from_integer(q);
    let h_at = |x: Rational64| -> Rational64 {
        -(0..q)
            .map(|j| Rational64::from_integer(j + 1) * f.eval(x + alpha * j))
            .sum::<Rational64>()
            / qr
    };
    let values = refinement.iter().map(|&x| h_at(x)).collect();
    let h = RationalStepFunction::new(refinement, values)?;

    if grid == 0 {
        return Err(Error::Config("grid must be non-empty"));
    }
    let mut residual = Rational64::zero();
    for i in 0..grid {
        let x = Rational64::new(i as i64, grid as i64);
        let r = (f.eval(x) - (h.eval(x) - h.eval(x + alpha))).abs();
        residual = residual.max(r);
    }
    Ok(CoboundaryOutcome::Solution(CoboundaryWitness {
        h,
        residual,
        grid_points: grid,
    }))
}

/// Partial sums `c_{q2^j}(g) = Σ_{i≤j} c_{q2^i}(f)` of a would-be transfer
/// function for the doubling map.
#[derive(Clone, Debug, PartialEq)]
pub struct DoublingObstruction {
    pub q: u64,
    pub terms: Vec<Complex64>,
    pub partial_sums: Vec<Complex64>,
    /// −sin²(πqb)/(qπ(1−b)).
    pub bound: f64,
    /// Every partial sum has imaginary part at most `bound` (up to 10⁻¹²).
    pub bounded_away: bool,
}

impl DoublingObstruction {
    /// The coefficients along `q 2^j` stay away from 0, so no L² transfer
    /// function exists and the limiting variance is positive.
    pub fn no_l2_solution(&self) -> bool {
        self.bounded_away && self.bound < 0.0
    }
}

pub fn doubling_coboundary_obstruction(split: &Split, q: u64, k_max: u32) -> Result<DoublingObstruction> {
    if q % 2 == 0 {
        return Err(Error::Config("q must be odd"));
    }
    let qb = split.point().mul_int(q as i128);
    let on_lattice = match split.ratio() {
        Some((p, d)) => (q as u128 * p as u128) % d as u128 == 0,
        None => qb.dist_to_zero() < 1e-15,
    };
    if on_lattice {
        return Err(Error::Config("b must not lie in (1/q)Z"));
    }
    if k_max > 100 {
        return Err(Error::Config("k_max too large for 128-bit phases"));
    }
    let b = split.to_f64();
    let s = libm::sin(PI * qb.dist_to_zero());
    let bound = -s * s / (q as f64 * PI * (1.0 - b));
    let mut terms = Vec::new();
    let mut partial_sums = Vec::new();
    let mut acc = Complex64::zero();
    for j in 0..=k_max {
        let r = (q as i128) << j;
        let c = favourite_fourier(split, r as i64);
        acc += c;
        terms.push(c);
        partial_sums.push(acc);
    }
    let bounded_away = partial_sums.iter().all(|c| c.im <= bound + 1e-12);
    Ok(DoublingObstruction {
        q,
        terms,
        partial_sums,
        bound,
        bounded_away,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::precision::HighPrecision;
    use crate::rng::{sample_rng, uniform_u128};

    fn r(n: i64, d: i64) -> Rational64 {
        Rational64::new(n, d)
    }

    #[test]
    fn favourite_values() {
        let f = StepFunction::favourite(TorusPoint::HALF).unwrap();
        assert_eq!(f.values(), &[1.0, -1.0]);
        assert_eq!(f.variation(), 4.0);
        let third = RationalStepFunction::favourite(r(1, 3)).unwrap();
        assert_eq!(third.values()[1], r(-1, 2));
        assert!(third.mean().is_zero());
        assert!(StepFunction::favourite(TorusPoint::ZERO).is_err());
    }

    #[test]
    fn jumps_at_zero_and_b() {
        let f = Split::rational(1, 2).unwrap().step_function();
        assert_eq!(f.jumps(), &[2.0, -2.0]);
    }

    #[test]
    fn first_sum_is_f_of_omega() {
        let split = Split::rational(1, 3).unwrap();
        let t = Transformation::rotation(HighPrecision::golden().to_torus());
        let w = TorusPoint::from_f64(0.5);
        let s = birkhoff_sums(&t, split, Start::Point(w), 1).unwrap();
        assert_eq!(s.s(0), 0.0);
        assert_eq!(s.s(1), -0.5);
    }

    #[test]
    fn period_five_sum_vanishes() {
        let split = Split::rational(2, 5).unwrap();
        let t = Transformation::rational(1, 5).unwrap();
        let s = birkhoff_sums(&t, split, Start::Point(TorusPoint::from_ratio(1, 20)), 5).unwrap();
        assert_eq!(s.s_exact(5).unwrap().0, 0);
    }

    #[test]
    fn counters_match_direct_evaluation() {
        let split = Split::rational(1, 3).unwrap();
        let f = split.step_function();
        let t = Transformation::rotation(HighPrecision::golden().to_torus());
        let w = TorusPoint::from_f64(0.123);
        let s = birkhoff_sums(&t, split, Start::Point(w), 2000).unwrap();
        let direct = birkhoff_values(&t, &f, Start::Point(w), 2000).unwrap();
        for n in 0..=2000 {
            assert!((s.s(n) - direct[n]).abs() < 1e-9);
            assert_eq!(s.a1(n) + s.a2(n), n as u64);
        }
    }

    #[test]
    fn real_split_sum_matches_float() {
        let split = Split::real(HighPrecision::golden().mul_int_mod1(3).to_torus()).unwrap();
        let b = split.to_f64();
        let v = split.sum(700, 1000);
        assert!((v - (700.0 - 1000.0 * b) / (1.0 - b)).abs() < 1e-9);
    }

    #[test]
    fn oren_three_alpha_is_bounded() {
        let alpha = HighPrecision::golden();
        let b = alpha.mul_int_mod1(3).to_torus();
        let f = StepFunction::favourite(b).unwrap();
        let rep = oren_analysis(&f, alpha.to_torus(), OREN_SEARCH_BOUND, OREN_TOLERANCE);
        assert_eq!(rep.verdict, OrenVerdict::BoundedPredicted);
        assert_eq!(rep.cosets.len(), 1);
        assert_eq!(rep.cosets[0].members[1].1, 3);
    }

    #[test]
    fn oren_half_is_unbounded() {
        let alpha = HighPrecision::golden().to_torus();
        let f = StepFunction::favourite(TorusPoint::HALF).unwrap();
        let rep = oren_analysis(&f, alpha, 1000, OREN_TOLERANCE);
        assert_eq!(rep.verdict, OrenVerdict::UnboundedPredicted);
        assert_eq!(rep.cosets.len(), 2);
        assert_eq!(rep.cosets[0].delta_sum, 2.0);
        assert_eq!(rep.cosets[1].delta_sum, -2.0);
    }

    #[test]
    fn oren_near_miss_is_inconclusive() {
        let alpha = HighPrecision::golden().to_torus();
        let b = alpha.mul_int(2) + TorusPoint::from_frac(1u128 << 70);
        let f = StepFunction::favourite(b).unwrap();
        let rep = oren_analysis(&f, alpha, 100, OREN_TOLERANCE);
        assert_eq!(rep.verdict, OrenVerdict::Inconclusive);
    }

    fn trapezoid_fourier(f: &StepFunction, r: i64, nodes: usize) -> Complex64 {
        let h = 1.0 / nodes as f64;
        (0..nodes)
            .map(|i| {
                let t = i as f64 * h;
                f.eval(TorusPoint::from_f64(t)) * Complex64::from_polar(1.0, -2.0 * PI * r as f64 * t)
            })
            .sum::<Complex64>()
            * h
    }

    #[test]
    fn fourier_of_half() {
        let split = Split::rational(1, 2).unwrap();
        let f = split.step_function();
        let c1 = f.fourier(1);
        assert!((c1 - Complex64::new(0.0, -2.0 / PI)).norm() < 1e-15);
        let quad = trapezoid_fourier(&f, 1, 1 << 16);
        assert!((c1 - quad).norm() < 1e-4);
        assert!(f.fourier(2).norm() < 1e-15);
        assert!(favourite_fourier(&split, 2).norm() < 1e-15);
    }

    #[test]
    fn closed_form_matches_piecewise() {
        let split = Split::rational(2, 7).unwrap();
        let f = split.step_function();
        for r in [-9i64, -1, 1, 3, 17, 1000] {
            assert!((favourite_fourier(&split, r) - f.fourier(r)).norm() < 1e-13);
        }
        let data = fourier_coeffs(&f, 200);
        for r in 1..=200 {
            assert!(data.gamma(r).unwrap().norm() <= data.gamma_bound + 1e-12);
        }
    }

    #[test]
    fn variance_of_single_step() {
        let alpha = HighPrecision::golden().to_torus();
        let f = Split::rational(1, 2).unwrap().step_function();
        assert_eq!(variance_exact(alpha, &f, 0, 10).value, 0.0);
        let v = variance_exact(alpha, &f, 1, 100_000);
        assert!((v.value - 1.0).abs() < 1e-5);
        assert!(v.tail_estimate > 0.0 && v.tail_estimate < 1e-4);
    }

    #[test]
    fn variance_routes_agree() {
        let alpha = HighPrecision::golden().to_torus();
        let f = Split::rational(1, 3).unwrap().step_function();
        let exact = l2_norms_sq(alpha, &f, 60);
        for n in [1usize, 2, 5, 13, 34, 60] {
            let parseval = variance_exact(alpha, &f, n as u64, 20_000).value;
            let grid = grid_l2_norm_sq(alpha, &f, n, 14);
            assert!((parseval - exact[n]).abs() < 0.01 * exact[n], "n={n}");
            assert!((grid - exact[n]).abs() < 0.01 * exact[n], "n={n}");
        }
    }

    #[test]
    fn autocorrelation_at_zero_is_l2() {
        let f = Split::rational(1, 3).unwrap().step_function();
        assert!((f.autocorrelation(TorusPoint::ZERO) - f.l2_norm_sq()).abs() < 1e-15);
        assert!((f.l2_norm_sq() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn coboundary_for_two_fifths() {
        let f = RationalStepFunction::favourite(r(2, 5)).unwrap();
        match rational_coboundary(r(1, 5), &f, 1000).unwrap() {
            CoboundaryOutcome::Solution(w) => {
                assert!(w.residual.is_zero());
                let x = r(3, 17);
                let sums = rational_birkhoff_sums(r(1, 5), &f, x, 15);
                for (n, s) in sums.iter().enumerate() {
                    assert_eq!(*s, w.h.eval(x) - w.h.eval(x + r(n as i64, 5)));
                }
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn no_coboundary_for_half() {
        let f = RationalStepFunction::favourite(r(1, 2)).unwrap();
        match rational_coboundary(r(1, 5), &f, 10).unwrap() {
            CoboundaryOutcome::NoSolution { x, period_sum } => {
                let direct: Rational64 = (0..5).map(|j| f.eval(x + r(j, 5))).sum();
                assert_eq!(direct, period_sum);
                assert!(!period_sum.is_zero());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn integer_rotation_needs_zero_function() {
        let f = RationalStepFunction::favourite(r(1, 2)).unwrap();
        assert!(matches!(
            rational_coboundary(r(0, 1), &f, 10).unwrap(),
            CoboundaryOutcome::NoSolution { .. }
        ));
        let zero = RationalStepFunction::new(vec![r(0, 1)], vec![r(0, 1)]).unwrap();
        assert!(matches!(
            rational_coboundary(r(0, 1), &zero, 10).unwrap(),
            CoboundaryOutcome::Solution(_)
        ));
    }

    #[test]
    fn doubling_obstruction_for_half() {
        let split = Split::rational(1, 2).unwrap();
        let rep = doubling_coboundary_obstruction(&split, 3, 10).unwrap();
        let bound = -2.0 / (3.0 * PI);
        assert!((rep.bound - bound).abs() < 1e-15);
        assert_eq!(rep.partial_sums[0], rep.terms[0]);
        assert!(rep.no_l2_solution());
        assert!(rep.partial_sums.iter().all(|c| c.im <= bound + 1e-12));
        assert!(doubling_coboundary_obstruction(&split, 4, 10).is_err());
        let third = Split::rational(1, 3).unwrap();
        assert!(doubling_coboundary_obstruction(&third, 3, 10).is_err());
    }

    #[test]
    fn sum_step_function_matches_direct_sums() {
        let alpha = HighPrecision::golden().to_torus();
        let f = Split::rational(1, 3).unwrap().step_function();
        let t = Transformation::rotation(alpha);
        let s = birkhoff_step_function(alpha, &f, 50).unwrap();
        let mut rng = sample_rng(3, 1);
        for _ in 0..200 {
            let w = TorusPoint::from_frac(uniform_u128(&mut rng));
            let direct = birkhoff_values(&t, &f, Start::Point(w), 50).unwrap()[50];
            assert!((s.eval(w) - direct).abs() < 1e-9);
        }
        let norms = l2_norms_sq(alpha, &f, 50);
        assert!((s.l2_norm_sq() - norms[50]).abs() < 1e-9);
    }

    #[test]
    fn denjoy_koksma_small() {
        let alpha = HighPrecision::golden();
        let t = Transformation::rotation(alpha.to_torus());
        let mut rng = sample_rng(9, 0);
        let fib: Vec<u128> = {
            let mut v = vec![1u128, 1];
            while v.len() < 20 {
                let k = v.len();
                v.push(v[k - 1] + v[k - 2]);
            }
            v
        };
        let w = TorusPoint::from_frac(uniform_u128(&mut rng));
        let s = birkhoff_sums(&t, Split::rational(1, 2).unwrap(), Start::Point(w), 10_000).unwrap();
        for (_, _, v) in denjoy_koksma_table(&s, &fib) {
            assert!(v.abs() <= 4.0);
        }
    }
}
