//! Monte-Carlo distribution experiments for normalized Birkhoff sums.
//!
//! Sample `i` of an experiment draws its starting point from
//! `sample_rng(seed, i)`, so results do not depend on how samples are
//! scheduled across threads.

use alloc::vec;
use alloc::vec::Vec;

use crate::birkhoff::{birkhoff_step_function, birkhoff_sums, l2_norms_sq, Split, StepFunction};
use crate::cf::{convergents, select_growth_indices, ContinuedFraction, GrowthIndices};
use crate::rng::{sample_rng, uniform_u128};
use crate::stats::{ks_normal, mean_variance, Histogram};
use crate::torus::{BitStream, Start, TorusPoint, Transformation, GUARD_BITS};
use crate::{Error, Result};

/// Minimum sample count for which a KS distance is reported.
pub const MIN_KS_SAMPLES: usize = 1000;

/// How `S_n` is scaled before comparing with N(0,1).
#[derive(Copy, Clone, Debug, PartialEq)]
pub enum Normalization {
    /// Divide by √n.
    SqrtN,
    /// Divide by the exact ‖S_n‖₂ (rotations only).
    L2Norm,
    /// Divide by √k, the index of `n` along a subsequence.
    SqrtIndex(u64),
    /// Divide by a given constant.
    Fixed(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct CltExperiment {
    pub transformation: Transformation,
    pub f: StepFunction,
    pub normalization: Normalization,
    pub n: usize,
    pub samples: usize,
    pub seed: u64,
}

/// Above this, rotation sums are evaluated orbit by orbit instead of through
/// a precomputed step function.
const MAX_TABULATED_N: usize = 1 << 20;

/// An experiment with its normalizing constant fixed and, for rotations, the
/// sum `S_n` tabulated as a step function of ω.
#[derive(Clone, Debug)]
pub struct PreparedExperiment {
    exp: CltExperiment,
    scale: f64,
    table: Option<StepFunction>,
}

impl CltExperiment {
    pub fn prepare(&self) -> Result<PreparedExperiment> {
        if self.n == 0 {
            return Err(Error::Config("n must be at least 1"));
        }
        if self.samples == 0 {
            return Err(Error::Config("need at least one sample"));
        }
        let table = match self.transformation {
            Transformation::Rotation { alpha } if self.n <= MAX_TABULATED_N => {
                Some(birkhoff_step_function(alpha, &self.f, self.n)?)
            }
            _ => None,
        };
        let scale = match self.normalization {
            Normalization::SqrtN => libm::sqrt(self.n as f64),
            Normalization::SqrtIndex(k) => libm::sqrt(k as f64),
            Normalization::Fixed(c) => c,
            Normalization::L2Norm => match (&table, self.transformation) {
                (Some(t), _) => libm::sqrt(t.l2_norm_sq()),
                (None, Transformation::Rotation { alpha }) => {
                    libm::sqrt(l2_norms_sq(alpha, &self.f, self.n)[self.n])
                }
                _ => return Err(Error::Config("L2 normalization needs a rotation")),
            },
        };
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::Config("degenerate normalization"));
        }
        Ok(PreparedExperiment {
            exp: self.clone(),
            scale,
            table,
        })
    }
}

impl PreparedExperiment {
    pub fn experiment(&self) -> &CltExperiment {
        &self.exp
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Unnormalized `S_n(ω_i)`.
    pub fn raw_sample(&self, index: u64) -> Result<f64> {
        let exp = &self.exp;
        let mut rng = sample_rng(exp.seed, index);
        match exp.transformation {
            Transformation::Doubling => {
                let bits = BitStream::random(exp.n + GUARD_BITS, &mut rng);
                let mut s = 0.0;
                for x in crate::torus::orbit_iter(&exp.transformation, Start::Bits(&bits), exp.n)? {
                    s += exp.f.eval(x);
                }
                Ok(s)
            }
            _ => {
                let w = TorusPoint::from_frac(uniform_u128(&mut rng));
                if let Some(t) = &self.table {
                    return Ok(t.eval(w));
                }
                let mut s = 0.0;
                for x in crate::torus::orbit_iter(&exp.transformation, Start::Point(w), exp.n)? {
                    s += exp.f.eval(x);
                }
                Ok(s)
            }
        }
    }

    /// Normalized sample `S_n(ω_i)/a_n`.
    pub fn sample(&self, index: u64) -> Result<f64> {
        Ok(self.raw_sample(index)? / self.scale)
    }

    /// All samples in index order, computed sequentially.
    pub fn run(&self) -> Result<Vec<f64>> {
        (0..self.exp.samples as u64).map(|i| self.sample(i)).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DistributionSummary {
    pub mean: f64,
    pub variance: f64,
    /// Reported only with at least [`MIN_KS_SAMPLES`] samples.
    pub ks: Option<f64>,
    pub n: usize,
    pub samples: usize,
    pub seed: u64,
    pub histogram: Histogram,
}

/// Moments, KS distance to Φ and a 40-bin histogram on [−4, 4].
pub fn summarize(exp: &CltExperiment, values: &[f64]) -> DistributionSummary {
    let (mean, variance) = mean_variance(values);
    let ks = (values.len() >= MIN_KS_SAMPLES).then(|| ks_normal(values));
    DistributionSummary {
        mean,
        variance,
        ks,
        n: exp.n,
        samples: values.len(),
        seed: exp.seed,
        histogram: Histogram::build(values, -4.0, 4.0, 40),
    }
}

pub fn empirical_distribution(exp: &CltExperiment) -> Result<DistributionSummary> {
    let values = exp.prepare()?.run()?;
    Ok(summarize(exp, &values))
}

/// Largest lag accepted by [`kac_sigma2`]; f∘τ^k has up to `L·2^k` pieces.
pub const MAX_KAC_LAG: u32 = 24;

/// ∫ f · (f∘τ^k) dm for the doubling map, computed piece by piece.
///
/// The breakpoints of f∘τ^k are `(x_i + m)/2^k`, generated in sorted order;
/// both functions are evaluated at the midpoint of each common piece.
pub fn lag_correlation(f: &StepFunction, k: u32) -> f64 {
    if k == 0 {
        return f.l2_norm_sq();
    }
    let cells = 1u128 << k;
    let width = if k == 128 { 0 } else { 1u128 << (128 - k) };
    let mut points: Vec<u128> = Vec::with_capacity(f.pieces() * cells as usize + f.pieces() + 1);
    let mut gi = 0usize;
    let bps = f.breakpoints();
    for m in 0..cells {
        for x in bps {
            let p = (x.frac() >> k) + m * width;
            while gi < bps.len() && bps[gi].frac() < p {
                points.push(bps[gi].frac());
                gi += 1;
            }
            points.push(p);
        }
    }
    points.extend(bps[gi..].iter().map(|x| x.frac()));
    points.dedup();
    let mut acc = 0.0;
    let l = points.len();
    for i in 0..l {
        let lo = points[i];
        let len = points[(i + 1) % l].wrapping_sub(lo);
        let len = if l == 1 { u128::MAX } else { len };
        let mid = TorusPoint::from_frac(lo.wrapping_add(len / 2));
        let g = f.eval(TorusPoint::from_frac(mid.frac() << k));
        acc += f.eval(mid) * g * (len as f64 / crate::torus::TWO_POW_128);
    }
    acc
}

/// σ² = ‖f‖₂² + 2 Σ_{1 ≤ k ≤ max_lag} ∫ f·(f∘τ^k) for the doubling map.
pub fn kac_sigma2(f: &StepFunction, max_lag: u32) -> Result<f64> {
    if max_lag > MAX_KAC_LAG {
        return Err(Error::Config("max_lag above 24"));
    }
    let mut s = f.l2_norm_sq();
    for k in 1..=max_lag {
        s += 2.0 * lag_correlation(f, k);
    }
    Ok(s.max(0.0))
}

#[derive(Clone, Debug, PartialEq)]
pub struct RangeProbe {
    /// `(n, runmax(n), runmin(n))` per checkpoint.
    pub rows: Vec<(usize, f64, f64)>,
    /// Extrema unchanged (within `plateau_tolerance`) over the last two decades.
    pub plateau: bool,
    pub plateau_tolerance: f64,
}

/// Relative slack allowed when calling the extrema constant: orbit points keep
/// filling gaps of size about 1/n, so a bounded sum still creeps slightly.
pub const PLATEAU_SLACK: f64 = 1e-3;

pub fn range_growth_probe(
    t: &Transformation,
    split: Split,
    start: Start<'_>,
    checkpoints: &[usize],
) -> Result<RangeProbe> {
    if checkpoints.is_empty() || checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config("checkpoints must be increasing"));
    }
    let last = *checkpoints.last().unwrap();
    let series = birkhoff_sums(t, split, start, last)?;
    let rows: Vec<(usize, f64, f64)> = checkpoints
        .iter()
        .map(|&n| (n, series.runmax(n), series.runmin(n)))
        .collect();
    let base = last / 100;
    let tol = PLATEAU_SLACK * series.range(last).max(1.0);
    let plateau = base > 0
        && (series.runmax(last) - series.runmax(base)) <= tol
        && (series.runmin(base) - series.runmin(last)) <= tol;
    Ok(RangeProbe {
        rows,
        plateau,
        plateau_tolerance: tol,
    })
}

/// m(n) = k with q_k ≤ n < q_{k+1}.
pub fn convergent_index(q: &[u128], n: u128) -> usize {
    q.partition_point(|&qk| qk <= n).saturating_sub(1)
}

#[derive(Clone, Debug, PartialEq)]
pub struct WSetRow {
    pub c: f64,
    /// Fraction of n ≤ N with ‖S_n‖₂ ≥ c (log m(n))^{−1/2} m(n)^{1/2}.
    pub density_m: f64,
    /// Same with m(n) replaced by log n.
    pub density_log: f64,
}

fn threshold(c: f64, m: f64) -> f64 {
    if c == 0.0 {
        return 0.0;
    }
    let lm = libm::log(m);
    if !(lm > 0.0) {
        return f64::INFINITY;
    }
    c * libm::sqrt(m / lm)
}

/// Density of `{n ≤ N : ‖S_n f‖₂ ≥ c (log m(n))^{−1/2} m(n)^{1/2}}` per c.
pub fn w_set_report(cf: &ContinuedFraction, f: &StepFunction, n_max: usize, c_grid: &[f64]) -> Result<Vec<WSetRow>> {
    if n_max == 0 {
        return Err(Error::Config("N must be at least 1"));
    }
    let conv = convergents(cf);
    let q: Vec<u128> = (0..conv.len()).map_while(|k| conv.q_u128(k)).collect();
    if q.last().map_or(true, |&qk| qk <= n_max as u128) {
        return Err(Error::Precision("continued fraction shorter than requested horizon"));
    }
    let alpha = cf.alpha().to_torus();
    let norms: Vec<f64> = l2_norms_sq(alpha, f, n_max).into_iter().map(libm::sqrt).collect();
    let rows = c_grid
        .iter()
        .map(|&c| {
            let (mut hit_m, mut hit_log) = (0usize, 0usize);
            for n in 1..=n_max {
                let m = convergent_index(&q, n as u128) as f64;
                if norms[n] >= threshold(c, m) {
                    hit_m += 1;
                }
                if norms[n] >= threshold(c, libm::log(n as f64)) {
                    hit_log += 1;
                }
            }
            WSetRow {
                c,
                density_m: hit_m as f64 / n_max as f64,
                density_log: hit_log as f64 / n_max as f64,
            }
        })
        .collect();
    Ok(rows)
}

/// `L_0 = 0`, `L_n = Σ_{k ≤ n} q_{t_k}`.
#[derive(Clone, Debug, PartialEq)]
pub struct SubsequenceScale {
    pub selection: GrowthIndices,
    pub l: Vec<u128>,
}

pub fn subsequence_scale(cf: &ContinuedFraction, beta: f64, count: usize) -> Result<SubsequenceScale> {
    let selection = select_growth_indices(cf, beta, count);
    let conv = convergents(cf);
    let mut l = vec![0u128];
    for &t in &selection.t {
        let q = conv.q_u128(t).ok_or(Error::Precision("q_t exceeds 128 bits"))?;
        let next = l.last().unwrap().checked_add(q).ok_or(Error::Precision("L_n exceeds 128 bits"))?;
        l.push(next);
    }
    Ok(SubsequenceScale { selection, l })
}

#[derive(Clone, Debug, PartialEq)]
pub struct LnScaleReport {
    pub scale: SubsequenceScale,
    pub hypothesis_met: bool,
    /// L_n actually used (the last one available).
    pub horizon: u128,
    /// Exact ‖S_{L_n}‖₂².
    pub l2_norm_sq: f64,
    /// Σ_{k ≤ n} Σ_{0<|r|≤R} |γ_{r q_{t_k}}(f)|²/r².
    pub variance_equivalent: f64,
    pub summary: Option<DistributionSummary>,
}

/// Distribution of `S_{L_n}/‖S_{L_n}‖₂` along the growth-index subsequence.
///
/// No Monte-Carlo run is made when the selector fails (for example with
/// bounded partial quotients); the report then carries the flag alone.
pub fn ln_scale_experiment(
    cf: &ContinuedFraction,
    f: &StepFunction,
    beta: f64,
    count: usize,
    r_max: u64,
    samples: usize,
    seed: u64,
) -> Result<LnScaleReport> {
    let scale = subsequence_scale(cf, beta, count)?;
    let hypothesis_met = scale.selection.hypothesis_met;
    let horizon = *scale.l.last().unwrap();
    let conv = convergents(cf);
    let variance_equivalent = scale
        .selection
        .t
        .iter()
        .map(|&t| {
            let q = conv.q_wrapped(t);
            (1..=r_max)
                .map(|r| 2.0 * f.gamma(q.wrapping_mul(r as u128)).norm_sqr() / (r as f64 * r as f64))
                .sum::<f64>()
        })
        .sum();
    if !hypothesis_met || horizon == 0 {
        return Ok(LnScaleReport {
            scale,
            hypothesis_met,
            horizon,
            l2_norm_sq: f64::NAN,
            variance_equivalent,
            summary: None,
        });
    }
    if horizon > MAX_TABULATED_N as u128 {
        return Err(Error::Size {
            needed: horizon.min(usize::MAX as u128) as usize,
            available: MAX_TABULATED_N,
        });
    }
    let exp = CltExperiment {
        transformation: Transformation::rotation(cf.alpha().to_torus()),
        f: f.clone(),
        normalization: Normalization::L2Norm,
        n: horizon as usize,
        samples,
        seed,
    };
    let prepared = exp.prepare()?;
    let l2 = prepared.scale() * prepared.scale();
    let values = prepared.run()?;
    Ok(LnScaleReport {
        scale,
        hypothesis_met,
        horizon,
        l2_norm_sq: l2,
        variance_equivalent,
        summary: Some(summarize(&exp, &values)),
    })
}

/// `min_{1 ≤ j < q'} sin²(π j p'/q') / ((1 − b)² π²)` for `b = p'/q'`, the
/// lower bound on |γ_{q_t}(f)|² whenever `q' ∤ q_t`.
pub fn gamma_lower_bound(p: u64, q: u64) -> f64 {
    let b = p as f64 / q as f64;
    let pi = core::f64::consts::PI;
    (1..q)
        .map(|j| {
            let s = libm::sin(pi * ((j * p) % q) as f64 / q as f64);
            s * s
        })
        .fold(f64::INFINITY, f64::min)
        / ((1.0 - b) * (1.0 - b) * pi * pi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cf::cf_expand;
    use crate::precision::HighPrecision;

    fn golden() -> ContinuedFraction {
        cf_expand(&HighPrecision::golden(), 60).unwrap()
    }

    #[test]
    fn single_step_distribution() {
        let split = Split::rational(1, 3).unwrap();
        let exp = CltExperiment {
            transformation: Transformation::Doubling,
            f: split.step_function(),
            normalization: Normalization::Fixed(1.0),
            n: 1,
            samples: 3000,
            seed: 1,
        };
        let values = exp.prepare().unwrap().run().unwrap();
        let ones = values.iter().filter(|&&v| v == 1.0).count();
        assert!(values.iter().all(|&v| v == 1.0 || v == -0.5));
        let p = ones as f64 / values.len() as f64;
        assert!((p - 1.0 / 3.0).abs() < 0.03);
    }

    #[test]
    fn degenerate_normalization_flagged() {
        let exp = CltExperiment {
            transformation: Transformation::rotation(HighPrecision::golden().to_torus()),
            f: StepFunction::zero(),
            normalization: Normalization::L2Norm,
            n: 10,
            samples: 10,
            seed: 1,
        };
        assert!(exp.prepare().is_err());
    }

    #[test]
    fn samples_are_index_addressed() {
        let exp = CltExperiment {
            transformation: Transformation::Doubling,
            f: Split::rational(1, 2).unwrap().step_function(),
            normalization: Normalization::SqrtN,
            n: 64,
            samples: 20,
            seed: 11,
        };
        let p = exp.prepare().unwrap();
        let all = p.run().unwrap();
        assert_eq!(all[13], p.sample(13).unwrap());
    }

    #[test]
    fn half_has_unit_sigma_and_zero_lags() {
        let f = Split::rational(1, 2).unwrap().step_function();
        for k in 1..=12 {
            assert_eq!(lag_correlation(&f, k), 0.0);
        }
        assert_eq!(kac_sigma2(&f, 16).unwrap(), 1.0);
        assert_eq!(kac_sigma2(&StepFunction::zero(), 4).unwrap(), 0.0);
        assert!(kac_sigma2(&f, 25).is_err());
    }

    #[test]
    fn third_has_positive_sigma() {
        let f = Split::rational(1, 3).unwrap().step_function();
        let s = kac_sigma2(&f, 16).unwrap();
        assert!(s > 0.0);
        // Direct midpoint quadrature of the first lag.
        let m = 1 << 16;
        let mut acc = 0.0;
        for i in 0..m {
            let x = (i as f64 + 0.5) / m as f64;
            let fx = f.eval(TorusPoint::from_f64(x));
            let gx = f.eval(TorusPoint::from_f64(2.0 * x));
            acc += fx * gx;
        }
        assert!((acc / m as f64 - lag_correlation(&f, 1)).abs() < 1e-4);
    }

    #[test]
    fn convergent_index_brackets() {
        let q = [1u128, 1, 2, 3, 5, 8, 13];
        assert_eq!(convergent_index(&q, 1), 1);
        assert_eq!(convergent_index(&q, 4), 3);
        assert_eq!(convergent_index(&q, 12), 5);
    }

    #[test]
    fn w_set_extremes() {
        let f = Split::rational(1, 3).unwrap().step_function();
        let rows = w_set_report(&golden(), &f, 500, &[0.0, 1e9]).unwrap();
        assert_eq!(rows[0].density_m, 1.0);
        assert_eq!(rows[0].density_log, 1.0);
        assert_eq!(rows[1].density_m, 0.0);
    }

    #[test]
    fn golden_fails_growth_hypothesis() {
        let f = Split::rational(1, 3).unwrap().step_function();
        let rep = ln_scale_experiment(&golden(), &f, 1.5, 4, 100, 100, 1).unwrap();
        assert!(!rep.hypothesis_met);
        assert!(rep.summary.is_none());
    }

    #[test]
    fn subsequence_scale_for_doubling_quotients() {
        let digits: Vec<u64> = (0..14).map(|j| 1u64 << j).collect();
        let cf = cf_expand(&HighPrecision::from_partial_quotients(&digits).unwrap(), 14).unwrap();
        let s = subsequence_scale(&cf, 1.5, 5).unwrap();
        assert_eq!(s.l[0], 0);
        assert!(s.l.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(s.l, [0, 1, 4, 17, 124, 1849]);
    }

    #[test]
    fn gamma_bound_for_thirds() {
        // b = 1/3: sin²(π/3) = 3/4, (1−b)² = 4/9.
        let expected = 0.75 / (4.0 / 9.0) / (core::f64::consts::PI * core::f64::consts::PI);
        assert!((gamma_lower_bound(1, 3) - expected).abs() < 1e-15);
        let f = Split::rational(1, 3).unwrap().step_function();
        for q in [1u128, 2, 4, 5, 7, 8] {
            assert!(f.gamma(q).norm_sqr() >= gamma_lower_bound(1, 3) - 1e-15);
        }
    }
}
