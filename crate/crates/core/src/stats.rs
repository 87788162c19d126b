//! Sample statistics: moments, histograms, the Kolmogorov–Smirnov distance to
//! the standard normal, and the star discrepancy of a point set in [0,1).

use alloc::vec;
use alloc::vec::Vec;

/// Φ, the standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / core::f64::consts::SQRT_2)
}

fn sort_floats(xs: &mut [f64]) {
    xs.sort_unstable_by(|a, b| a.total_cmp(b));
}

/// Two-sided KS statistic `sup_x |F_n(x) − cdf(x)|` of a sample.
pub fn ks_statistic<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> f64 {
    let mut xs = sample.to_vec();
    sort_floats(&mut xs);
    let n = xs.len() as f64;
    xs.iter().enumerate().fold(0.0, |acc: f64, (i, &x)| {
        let c = cdf(x);
        let above = (i + 1) as f64 / n - c;
        let below = c - i as f64 / n;
        acc.max(above).max(below)
    })
}

pub fn ks_normal(sample: &[f64]) -> f64 {
    ks_statistic(sample, normal_cdf)
}

/// Star discrepancy `sup_{0 ≤ t ≤ 1} |#{x_i < t}/N − t|` of points in [0,1).
pub fn star_discrepancy(points: &[f64]) -> f64 {
    if points.is_empty() {
        return 1.0;
    }
    let mut xs = points.to_vec();
    sort_floats(&mut xs);
    let n = xs.len() as f64;
    xs.iter().enumerate().fold(0.0, |acc: f64, (i, &x)| {
        acc.max((i + 1) as f64 / n - x).max(x - i as f64 / n)
    })
}

/// Mean and unbiased variance.
pub fn mean_variance(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, ss / (n - 1.0))
}

/// Fixed-width histogram; samples outside `[lo, hi)` go to the end bins.
#[derive(Clone, Debug, PartialEq)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn build(xs: &[f64], lo: f64, hi: f64, bins: usize) -> Histogram {
        let bins = bins.max(1);
        let width = (hi - lo) / bins as f64;
        let edges = (0..=bins).map(|i| lo + width * i as f64).collect();
        let mut counts = vec![0u64; bins];
        for &x in xs {
            let k = ((x - lo) / width).floor();
            let k = if k.is_nan() || k < 0.0 {
                0
            } else {
                (k as usize).min(bins - 1)
            };
            counts[k] += 1;
        }
        Histogram { edges, counts }
    }

    /// `(left, right, count)` rows.
    pub fn rows(&self) -> impl Iterator<Item = (f64, f64, u64)> + '_ {
        self.counts
            .iter()
            .enumerate()
            .map(move |(i, &c)| (self.edges[i], self.edges[i + 1], c))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{sample_rng, standard_normal};

    #[test]
    fn phi_values() {
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-15);
        assert!((normal_cdf(1.96) - 0.975_002_104_851_78).abs() < 1e-12);
    }

    #[test]
    fn ks_of_a_single_point() {
        // F_1 jumps from 0 to 1 at x = 0, Φ(0) = 1/2.
        assert!((ks_normal(&[0.0]) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn ks_of_normal_sample_is_small() {
        let mut rng = sample_rng(5, 0);
        let xs: Vec<f64> = (0..20_000).map(|_| standard_normal(&mut rng)).collect();
        assert!(ks_normal(&xs) < 0.015);
    }

    #[test]
    fn discrepancy_of_zeros_is_one() {
        assert_eq!(star_discrepancy(&[0.0; 10]), 1.0);
    }

    #[test]
    fn discrepancy_of_midpoints() {
        let n = 16;
        let xs: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        assert!((star_discrepancy(&xs) - 0.5 / n as f64).abs() < 1e-15);
    }

    #[test]
    fn moments() {
        let (m, v) = mean_variance(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((v - 5.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn histogram_clamps() {
        let h = Histogram::build(&[-10.0, 0.1, 0.9, 10.0], 0.0, 1.0, 2);
        assert_eq!(h.counts, vec![2, 2]);
        assert_eq!(h.rows().count(), 2);
    }
}
