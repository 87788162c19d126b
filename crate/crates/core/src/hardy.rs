//! Truncated H²(𝔻) model for random products of adjoint multipliers.
//!
//! An element of H² is stored through its first N Taylor coefficients. The
//! adjoint of multiplication by φ lowers degrees,
//! `(M_φ* x)_n = Σ_k conj(a_k) x_{n+k}`, so on polynomial inputs it is exact.
//! Products `T_n(ω) = (M_{φ1}*)^{a1(n,ω)} (M_{φ2}*)^{a2(n,ω)}` are driven by
//! the visits of an orbit to `A1 = [0,b)` and `A2 = [b,1)`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::Zero;

use crate::birkhoff::{
    birkhoff_sums, oren_analysis, rational_coboundary, CoboundaryOutcome, OrenVerdict, Split,
    OREN_SEARCH_BOUND, OREN_TOLERANCE,
};
use crate::clt::kac_sigma2;
use crate::torus::{orbit_iter, Start, Transformation};
use crate::{Error, Result};

type C = Complex64;

/// Truncation error accepted for Taylor expansions of non-polynomial symbols.
pub const TAYLOR_TAIL: f64 = 1e-16;
/// Default number of boundary samples for sup-norms.
pub const BOUNDARY_SAMPLES: usize = 4096;
/// Default truncation dimension.
pub const TRUNCATION: usize = 512;
/// Tolerance for the strict inequalities of the classifier.
pub const CLASSIFY_TOLERANCE: f64 = 1e-9;
/// Relative agreement required between the two product routes.
pub const PRODUCT_TOLERANCE: f64 = 1e-8;

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

/// First N Taylor coefficients of an H² element.
#[derive(Clone, Debug, PartialEq)]
pub struct CoeffVector(pub Vec<C>);

impl CoeffVector {
    pub fn zeros(n: usize) -> Self {
        CoeffVector(vec![C::zero(); n])
    }

    pub fn basis(n: usize, k: usize) -> Self {
        let mut v = CoeffVector::zeros(n);
        v.0[k] = c(1.0, 0.0);
        v
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.norm_sqr())
    }

    /// ⟨x, y⟩ = Σ x_j conj(y_j) over the common length.
    pub fn inner(&self, other: &CoeffVector) -> C {
        self.0.iter().zip(&other.0).map(|(x, y)| x * y.conj()).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// max_j |x_j − y_j| over the common length.
    pub fn max_abs_diff(&self, other: &CoeffVector) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    pub fn truncated(&self, n: usize) -> CoeffVector {
        let mut v = self.0.clone();
        v.resize(n, C::zero());
        CoeffVector(v)
    }

    pub fn scaled(&self, s: C) -> CoeffVector {
        CoeffVector(self.0.iter().map(|z| z * s).collect())
    }

    /// Index past the last nonzero coefficient.
    pub fn support_len(&self) -> usize {
        self.0.iter().rposition(|z| !z.is_zero()).map_or(0, |i| i + 1)
    }
}

/// Closed form of a symbol, used for exact evaluation.
#[derive(Clone, Debug, PartialEq)]
pub enum SymbolForm {
    Polynomial(Vec<C>),
    /// `e^{a0 + a1 z}`.
    Exp { a0: C, a1: C },
    /// `num(z)/den(z)` with `den` zero-free on the closed disk.
    Ratio { num: Vec<C>, den: Vec<C> },
}

fn horner(p: &[C], z: C) -> C {
    p.iter().rev().fold(C::zero(), |acc, a| acc * z + a)
}

/// Product of two series truncated to `len` terms.
pub fn convolve(a: &[C], b: &[C], len: usize) -> Vec<C> {
    let n = (a.len() + b.len()).saturating_sub(1).min(len);
    let mut out = vec![C::zero(); n];
    for (i, x) in a.iter().enumerate().take(n) {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(n - i) {
            out[i + j] += x * y;
        }
    }
    out
}

/// Taylor coefficients of `p^k`, truncated to `len` terms.
pub fn series_power(p: &[C], k: u64, len: usize) -> Vec<C> {
    let mut result = vec![c(1.0, 0.0)];
    let mut base: Vec<C> = p.iter().take(len).copied().collect();
    let mut k = k;
    while k > 0 {
        if k & 1 == 1 {
            result = convolve(&result, &base, len);
        }
        k >>= 1;
        if k > 0 {
            base = convolve(&base, &base, len);
        }
    }
    result
}

/// Boundary point `e^{2πi j/m}`.
pub fn boundary_point(j: usize, m: usize) -> C {
    let (s, co) = libm::sincos(2.0 * PI * j as f64 / m as f64);
    c(co, s)
}

/// A bounded analytic function on 𝔻 with its truncated Taylor series.
#[derive(Clone, Debug, PartialEq)]
pub struct AnalyticSymbol {
    form: SymbolForm,
    taylor: Vec<C>,
    tail_bound: f64,
}

impl AnalyticSymbol {
    pub fn polynomial(coeffs: Vec<C>) -> Result<Self> {
        let mut coeffs = coeffs;
        while coeffs.len() > 1 && coeffs.last().is_some_and(|z| z.is_zero()) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            return Err(Error::Config("empty polynomial"));
        }
        Ok(AnalyticSymbol {
            form: SymbolForm::Polynomial(coeffs.clone()),
            taylor: coeffs,
            tail_bound: 0.0,
        })
    }

    /// Real polynomial from its coefficients.
    pub fn real_polynomial(coeffs: &[f64]) -> Result<Self> {
        AnalyticSymbol::polynomial(coeffs.iter().map(|&x| c(x, 0.0)).collect())
    }

    /// `e^{a0 + a1 z}`, expanded until the dropped tail is below 10⁻¹⁶ on the
    /// closed disk.
    pub fn exp_affine(a0: C, a1: C) -> Result<Self> {
        let scale = a0.exp();
        let r = a1.norm();
        let mut taylor = vec![scale];
        let mut term = scale;
        let mut k = 0usize;
        // |tail| ≤ |e^{a0}| |a1|^{k+1}/(k+1)! e^{|a1|}.
        let mut bound = scale.norm() * libm::exp(r) * r;
        while bound > TAYLOR_TAIL * scale.norm().max(1.0) {
            k += 1;
            if k > 4096 {
                return Err(Error::Precision("exponential symbol needs too many Taylor terms"));
            }
            term = term * a1 / k as f64;
            taylor.push(term);
            bound *= r / (k + 1) as f64;
        }
        Ok(AnalyticSymbol {
            form: SymbolForm::Exp { a0, a1 },
            taylor,
            tail_bound: bound,
        })
    }

    /// `num/den` with `den` zero-free on the closed disk, expanded by series
    /// inversion of `den`.
    pub fn ratio(num: Vec<C>, den: Vec<C>) -> Result<Self> {
        let den_poly = AnalyticSymbol::polynomial(den)?;
        let num_poly = AnalyticSymbol::polynomial(num)?;
        let min_den = (0..BOUNDARY_SAMPLES)
            .map(|j| den_poly.eval(boundary_point(j, BOUNDARY_SAMPLES)).norm())
            .fold(f64::INFINITY, f64::min);
        if !(min_den > 1e-9) || den_poly.winding_number(BOUNDARY_SAMPLES) != Some(0) {
            return Err(Error::Config("denominator must be zero-free on the closed disk"));
        }
        let d = den_poly.taylor.clone();
        let d0 = d[0];
        let mut inv = vec![c(1.0, 0.0) / d0];
        let num_l1: f64 = num_poly.taylor.iter().map(|z| z.norm()).sum();
        let mut small_run = 0usize;
        loop {
            let k = inv.len();
            if k > 1 << 16 {
                return Err(Error::Precision("denominator series converges too slowly"));
            }
            let mut s = C::zero();
            for j in 1..d.len().min(k + 1) {
                s += d[j] * inv[k - j];
            }
            let ck = -s / d0;
            inv.push(ck);
            if ck.norm() * num_l1 < TAYLOR_TAIL * 1e-3 {
                small_run += 1;
            } else {
                small_run = 0;
            }
            if small_run >= d.len() + 8 {
                break;
            }
        }
        // Once `deg den` consecutive terms are negligible the recurrence keeps
        // them negligible; the remaining tail is bounded by the last run.
        let tail: f64 = inv[inv.len() - small_run..].iter().map(|z| z.norm()).sum::<f64>() * num_l1;
        let taylor = convolve(&num_poly.taylor, &inv, usize::MAX);
        Ok(AnalyticSymbol {
            form: SymbolForm::Ratio {
                num: num_poly.taylor,
                den: d,
            },
            taylor,
            tail_bound: tail,
        })
    }

    pub fn form(&self) -> &SymbolForm {
        &self.form
    }

    pub fn taylor(&self) -> &[C] {
        &self.taylor
    }

    pub fn degree(&self) -> usize {
        self.taylor.len() - 1
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn is_constant(&self) -> bool {
        self.taylor[1..].iter().all(|z| z.norm() <= TAYLOR_TAIL)
    }

    /// Exact evaluation from the closed form.
    pub fn eval(&self, z: C) -> C {
        match &self.form {
            SymbolForm::Polynomial(p) => horner(p, z),
            SymbolForm::Exp { a0, a1 } => (a0 + a1 * z).exp(),
            SymbolForm::Ratio { num, den } => horner(num, z) / horner(den, z),
        }
    }

    /// Evaluation of the truncated Taylor series.
    pub fn eval_taylor(&self, z: C) -> C {
        horner(&self.taylor, z)
    }

    /// log|φ| at `m` equispaced boundary points (−∞ at zeros).
    pub fn boundary_log_moduli(&self, m: usize) -> Vec<f64> {
        (0..m).map(|j| libm::log(self.eval(boundary_point(j, m)).norm())).collect()
    }

    /// max |φ| over `m` boundary points, i.e. ‖φ‖_∞.
    pub fn sup_norm(&self, m: usize) -> f64 {
        (0..m)
            .map(|j| self.eval(boundary_point(j, m)).norm())
            .fold(0.0, f64::max)
    }

    /// Zeros inside 𝔻 by the argument principle; `None` if φ nearly vanishes
    /// on the sampled boundary.
    pub fn winding_number(&self, m: usize) -> Option<i64> {
        let vals: Vec<C> = (0..m).map(|j| self.eval(boundary_point(j, m))).collect();
        if vals.iter().any(|v| v.norm() < 1e-12) {
            return None;
        }
        let mut total = 0.0;
        for j in 0..m {
            total += (vals[(j + 1) % m] / vals[j]).arg();
        }
        Some(libm::round(total / (2.0 * PI)) as i64)
    }

    /// inf |φ| over the closed disk: 0 with zeros inside, else the boundary
    /// minimum.
    pub fn inf_modulus(&self, m: usize) -> f64 {
        match self.winding_number(m) {
            Some(0) => (0..m)
                .map(|j| self.eval(boundary_point(j, m)).norm())
                .fold(f64::INFINITY, f64::min),
            _ => 0.0,
        }
    }

    /// Number of leading zero Taylor coefficients.
    pub fn zero_order(&self) -> usize {
        self.taylor.iter().take_while(|z| z.is_zero()).count()
    }
}

/// P_N k_λ with `k_λ(z) = 1/(1 − conj(λ) z)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Kernel {
    pub lambda: C,
    pub coeffs: CoeffVector,
    /// ‖k_λ − P_N k_λ‖ = |λ|^N / √(1 − |λ|²).
    pub tail: f64,
}

impl Kernel {
    pub fn new(lambda: C, n: usize) -> Result<Self> {
        let r = lambda.norm();
        if !(r < 1.0) {
            return Err(Error::Config("kernel point must lie in the open disk"));
        }
        let lc = lambda.conj();
        let mut coeffs = Vec::with_capacity(n);
        let mut p = c(1.0, 0.0);
        for _ in 0..n {
            coeffs.push(p);
            p *= lc;
        }
        Ok(Kernel {
            lambda,
            coeffs: CoeffVector(coeffs),
            tail: libm::pow(r, n as f64) / libm::sqrt(1.0 - r * r),
        })
    }

    /// ‖k_λ‖ = (1 − |λ|²)^{−1/2}.
    pub fn exact_norm(&self) -> f64 {
        1.0 / libm::sqrt(1.0 - self.lambda.norm_sqr())
    }
}

/// `(M_φ* x)_n = Σ_k conj(a_k) x_{n+k}`, same length as `x`.
pub fn adjoint_apply_coeffs(a: &[C], x: &CoeffVector) -> CoeffVector {
    let n = x.len();
    let mut out = vec![C::zero(); n];
    for (j, o) in out.iter_mut().enumerate() {
        let mut s = C::zero();
        for (k, ak) in a.iter().enumerate().take(n - j) {
            s += ak.conj() * x.0[j + k];
        }
        *o = s;
    }
    CoeffVector(out)
}

pub fn adjoint_apply(phi: &AnalyticSymbol, x: &CoeffVector) -> CoeffVector {
    adjoint_apply_coeffs(phi.taylor(), x)
}

/// `M_φ x = φ·x`, of length `len(x) + deg φ`.
pub fn multiply_apply(phi: &AnalyticSymbol, x: &CoeffVector) -> CoeffVector {
    CoeffVector(convolve(phi.taylor(), &x.0, usize::MAX))
}

/// Two symbols, the partition they are attached to, and the driving map.
#[derive(Clone, Debug, PartialEq)]
pub struct HardyProductSpec {
    pub phi1: AnalyticSymbol,
    pub phi2: AnalyticSymbol,
    pub split: Split,
    pub transformation: Transformation,
    pub truncation: usize,
    pub boundary_samples: usize,
}

pub const BUILTIN_PAIRS: [&str; 4] = ["mixing-demo", "remark-3.8", "example-5.1", "norm-decay"];

/// Symbols of a named pair.
pub fn builtin_symbols(name: &str) -> Result<(AnalyticSymbol, AnalyticSymbol)> {
    match name {
        "mixing-demo" => Ok((
            AnalyticSymbol::real_polynomial(&[0.0, 2.0])?,
            AnalyticSymbol::real_polynomial(&[1.0, 0.5])?,
        )),
        "remark-3.8" => Ok((
            AnalyticSymbol::ratio(vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(1.5, 0.0), c(0.25, 0.0)])?,
            AnalyticSymbol::real_polynomial(&[1.5, 0.25])?,
        )),
        "example-5.1" => Ok((
            AnalyticSymbol::exp_affine(c(1.0, 0.0), c(-1.0, 0.0))?,
            AnalyticSymbol::exp_affine(c(-0.5, 0.0), c(0.5, 0.0))?,
        )),
        "norm-decay" => Ok((
            AnalyticSymbol::real_polynomial(&[0.0, 0.25])?,
            AnalyticSymbol::real_polynomial(&[0.25, 0.25])?,
        )),
        _ => Err(Error::Config("unknown symbol pair")),
    }
}

/// `φ1 = e^{s(1−z)}`, `φ2 = e^{−s(m1/m2)(1−z)}`, so that
/// `|φ1*|^{m1} |φ2*|^{m2} = 1` on the circle.
pub fn balanced_exponential_pair(s: f64, split: &Split) -> Result<(AnalyticSymbol, AnalyticSymbol)> {
    if s == 0.0 {
        return Err(Error::Config("s must be nonzero"));
    }
    let w = split.weight();
    Ok((
        AnalyticSymbol::exp_affine(c(s, 0.0), c(-s, 0.0))?,
        AnalyticSymbol::exp_affine(c(-s * w, 0.0), c(s * w, 0.0))?,
    ))
}

impl HardyProductSpec {
    /// Named pair on `A1 = [0,1/2)` under the doubling map.
    pub fn builtin(name: &str) -> Result<Self> {
        let (phi1, phi2) = builtin_symbols(name)?;
        Ok(HardyProductSpec {
            phi1,
            phi2,
            split: Split::rational(1, 2)?,
            transformation: Transformation::Doubling,
            truncation: TRUNCATION,
            boundary_samples: BOUNDARY_SAMPLES,
        })
    }

    pub fn m1(&self) -> f64 {
        self.split.to_f64()
    }

    pub fn m2(&self) -> f64 {
        1.0 - self.split.to_f64()
    }

    /// `true` for each orbit point in A1.
    pub fn steps(&self, start: Start<'_>, n: usize) -> Result<Vec<bool>> {
        let (a1, _) = self.split.sets();
        Ok(orbit_iter(&self.transformation, start, n)?.map(|x| a1.contains(x)).collect())
    }

    fn boundary(&self) -> (Vec<f64>, Vec<f64>) {
        (
            self.phi1.boundary_log_moduli(self.boundary_samples),
            self.phi2.boundary_log_moduli(self.boundary_samples),
        )
    }
}

/// `a L1 + b L2` with `0·(−∞) = 0`.
fn weighted_log(a: f64, l1: f64, b: f64, l2: f64) -> f64 {
    let t1 = if a == 0.0 { 0.0 } else { a * l1 };
    let t2 = if b == 0.0 { 0.0 } else { b * l2 };
    t1 + t2
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProductOutcome {
    /// Factors applied one at a time in orbit order.
    pub step: CoeffVector,
    /// One application of the adjoint of `φ1^{a1} φ2^{a2}`.
    pub closed: CoeffVector,
    pub a1: u64,
    pub a2: u64,
    /// max |step − closed| / max |closed|.
    pub relative_difference: f64,
}

/// `T_n(ω) x` by both routes; a disagreement beyond [`PRODUCT_TOLERANCE`] is
/// reported as an internal-consistency error.
pub fn product_apply(spec: &HardyProductSpec, start: Start<'_>, n: usize, x: &CoeffVector) -> Result<ProductOutcome> {
    let steps = spec.steps(start, n)?;
    let mut step = x.clone();
    for &in_a1 in &steps {
        step = adjoint_apply(if in_a1 { &spec.phi1 } else { &spec.phi2 }, &step);
    }
    let a1 = steps.iter().filter(|&&s| s).count() as u64;
    let a2 = n as u64 - a1;
    let len = x.len();
    let psi = convolve(
        &series_power(spec.phi1.taylor(), a1, len),
        &series_power(spec.phi2.taylor(), a2, len),
        len,
    );
    let closed = adjoint_apply_coeffs(&psi, x);
    let scale = closed.max_abs().max(step.max_abs());
    let relative_difference = if scale == 0.0 {
        0.0
    } else {
        step.max_abs_diff(&closed) / scale
    };
    if !(relative_difference <= PRODUCT_TOLERANCE) {
        return Err(Error::Consistency {
            what: "step-by-step and closed-form products disagree",
            deviation: relative_difference,
        });
    }
    Ok(ProductOutcome {
        step,
        closed,
        a1,
        a2,
        relative_difference,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct EigenTrajectory {
    pub z: Vec<C>,
    /// `log_modulus[i][k]` = a1(k) log|φ1(z_i)| + a2(k) log|φ2(z_i)|, k = 0..=n.
    pub log_modulus: Vec<Vec<f64>>,
    /// log-modulus at n divided by n.
    pub slope: Vec<f64>,
    /// m1 log|φ1(z)| + m2 log|φ2(z)|.
    pub predicted: Vec<f64>,
}

/// Log-moduli of the eigenvalues `conj(φ1(z))^{a1} conj(φ2(z))^{a2}` of
/// `T_n(ω)` at the kernels `k_z`.
pub fn eigen_trajectory(spec: &HardyProductSpec, start: Start<'_>, z_grid: &[C], n: usize) -> Result<EigenTrajectory> {
    if z_grid.iter().any(|z| !(z.norm() < 1.0)) {
        return Err(Error::Config("grid points must lie in the open disk"));
    }
    let steps = spec.steps(start, n)?;
    let logs: Vec<(f64, f64)> = z_grid
        .iter()
        .map(|&z| {
            (
                libm::log(spec.phi1.eval(z).norm()),
                libm::log(spec.phi2.eval(z).norm()),
            )
        })
        .collect();
    let mut log_modulus = vec![Vec::with_capacity(n + 1); z_grid.len()];
    let (mut a1, mut a2) = (0.0, 0.0);
    for k in 0..=n {
        if k > 0 {
            if steps[k - 1] {
                a1 += 1.0;
            } else {
                a2 += 1.0;
            }
        }
        for (i, &(l1, l2)) in logs.iter().enumerate() {
            log_modulus[i].push(weighted_log(a1, l1, a2, l2));
        }
    }
    let slope = log_modulus.iter().map(|row| row[n] / n as f64).collect();
    let predicted = logs
        .iter()
        .map(|&(l1, l2)| weighted_log(spec.m1(), l1, spec.m2(), l2))
        .collect();
    Ok(EigenTrajectory {
        z: z_grid.to_vec(),
        log_modulus,
        slope,
        predicted,
    })
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct NormRow {
    pub n: usize,
    pub a1: u64,
    pub a2: u64,
    /// log ‖T_n(ω)‖ = log sup_𝕋 |φ1|^{a1} |φ2|^{a2}.
    pub log_norm: f64,
    /// log ‖T_n(ω)^{−1}‖, +∞ when a symbol has zeros in the disk.
    pub log_inverse_norm: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NormTrajectory {
    pub rows: Vec<NormRow>,
    /// sup_𝕋 (m1 log|φ1*| + m2 log|φ2*|), the limit of log‖T_n‖/n.
    pub slope_limit: f64,
}

fn log_norm_from(l1: &[f64], l2: &[f64], a1: f64, a2: f64) -> f64 {
    l1.iter()
        .zip(l2)
        .map(|(&x, &y)| weighted_log(a1, x, a2, y))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// ‖T_n(ω)‖ and ‖T_n(ω)^{−1}‖ at the given checkpoints.
pub fn norm_trajectory(spec: &HardyProductSpec, start: Start<'_>, checkpoints: &[usize]) -> Result<NormTrajectory> {
    if checkpoints.is_empty() || checkpoints.windows(2).any(|w| w[0] >= w[1]) || checkpoints[0] == 0 {
        return Err(Error::Config("checkpoints must be positive and increasing"));
    }
    let n = *checkpoints.last().unwrap();
    let steps = spec.steps(start, n)?;
    let (l1, l2) = spec.boundary();
    let invertible = spec.phi1.winding_number(spec.boundary_samples) == Some(0)
        && spec.phi2.winding_number(spec.boundary_samples) == Some(0);
    let neg1: Vec<f64> = l1.iter().map(|x| -x).collect();
    let neg2: Vec<f64> = l2.iter().map(|x| -x).collect();
    let mut rows = Vec::with_capacity(checkpoints.len());
    let mut a1 = 0u64;
    let mut done = 0usize;
    for &cp in checkpoints {
        a1 += steps[done..cp].iter().filter(|&&s| s).count() as u64;
        done = cp;
        let a2 = cp as u64 - a1;
        let log_inverse_norm = if invertible {
            log_norm_from(&neg1, &neg2, a1 as f64, a2 as f64)
        } else {
            f64::INFINITY
        };
        rows.push(NormRow {
            n: cp,
            a1,
            a2,
            log_norm: log_norm_from(&l1, &l2, a1 as f64, a2 as f64),
            log_inverse_norm,
        });
    }
    Ok(NormTrajectory {
        rows,
        slope_limit: log_norm_from(&l1, &l2, spec.m1(), spec.m2()),
    })
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    MixingByEigenvalues,
    LimitCaseInnerProduct,
    LimitCaseOuterSide,
    NonUniversalNormDecay,
    NonUniversalBounded,
    TrivialContraction,
    TrivialExpansion,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Evidence {
    /// Grid point minimizing g(λ) = |φ1(λ)|^{m1} |φ2(λ)|^{m2}, with log g.
    pub lambda: (C, f64),
    /// Grid point maximizing g, with log g.
    pub mu: (C, f64),
    /// Range of m1 log|φ1*| + m2 log|φ2*| over the boundary samples.
    pub boundary_log_min: f64,
    pub boundary_log_max: f64,
    /// ‖φ1‖_∞, ‖φ2‖_∞.
    pub sup_norms: [f64; 2],
    /// inf over the closed disk of |φ1|, |φ2|.
    pub inf_moduli: [f64; 2],
    /// Zeros inside the disk, when the boundary count is reliable.
    pub zeros_inside: [Option<i64>; 2],
    /// φ_i(𝔻) ∩ 𝕋 ≠ ∅.
    pub images_meet_circle: [bool; 2],
    /// Whether the Birkhoff sums of the partition function are bounded, when
    /// decidable for the driving map.
    pub birkhoff_bounded: Option<bool>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Classification {
    pub verdict: Verdict,
    pub evidence: Evidence,
}

/// Polar grid of radii {0, 0.1, …, 0.9, 0.95, 0.99} × 16 angles.
pub fn default_lambda_grid() -> Vec<C> {
    let mut grid = vec![C::zero()];
    let radii = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99];
    for &r in &radii {
        for k in 0..16 {
            grid.push(C::from_polar(r, 2.0 * PI * k as f64 / 16.0));
        }
    }
    grid
}

/// Bounded Birkhoff sums of `1_{A1} − (m1/m2) 1_{A2}`, when decidable.
pub fn birkhoff_sums_bounded(t: &Transformation, split: &Split) -> Option<bool> {
    match *t {
        Transformation::Rotation { alpha } => {
            match oren_analysis(&split.step_function(), alpha, OREN_SEARCH_BOUND, OREN_TOLERANCE).verdict {
                OrenVerdict::BoundedPredicted => Some(true),
                OrenVerdict::UnboundedPredicted => Some(false),
                OrenVerdict::Inconclusive => None,
            }
        }
        Transformation::RationalRotation { p, q } => {
            let f = split.rational_step_function()?;
            let alpha = Rational64::new(p as i64, q as i64);
            match rational_coboundary(alpha, &f, 1).ok()? {
                CoboundaryOutcome::Solution(_) => Some(true),
                CoboundaryOutcome::NoSolution { .. } => Some(false),
            }
        }
        Transformation::Doubling => {
            // A positive limiting variance forces unbounded sums.
            let s = kac_sigma2(&split.step_function(), 16).ok()?;
            if s > 1e-6 {
                Some(false)
            } else {
                None
            }
        }
    }
}

/// Sorts a symbol pair into the cases of the dichotomy.
///
/// Order: norm decay, contraction, expansion, eigenvalue mixing, boundary
/// limit case (bounded sums first), zero-free expansion on average, and
/// otherwise inconclusive.
pub fn classify(spec: &HardyProductSpec, lambda_grid: &[C]) -> Result<Classification> {
    if lambda_grid.is_empty() || spec.boundary_samples == 0 {
        return Err(Error::Config("grids must be non-empty"));
    }
    if lambda_grid.iter().any(|z| !(z.norm() < 1.0)) {
        return Err(Error::Config("grid points must lie in the open disk"));
    }
    let tau = CLASSIFY_TOLERANCE;
    let (m1, m2) = (spec.m1(), spec.m2());
    let m = spec.boundary_samples;
    let log_g = |z: C| {
        weighted_log(
            m1,
            libm::log(spec.phi1.eval(z).norm()),
            m2,
            libm::log(spec.phi2.eval(z).norm()),
        )
    };
    let mut lambda = (lambda_grid[0], log_g(lambda_grid[0]));
    let mut mu = lambda;
    for &z in &lambda_grid[1..] {
        let v = log_g(z);
        if v < lambda.1 {
            lambda = (z, v);
        }
        if v > mu.1 {
            mu = (z, v);
        }
    }
    let (l1, l2) = spec.boundary();
    let boundary: Vec<f64> = l1.iter().zip(&l2).map(|(&a, &b)| weighted_log(m1, a, m2, b)).collect();
    let boundary_log_min = boundary.iter().copied().fold(f64::INFINITY, f64::min);
    let boundary_log_max = boundary.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sup_norms = [spec.phi1.sup_norm(m), spec.phi2.sup_norm(m)];
    let inf_moduli = [spec.phi1.inf_modulus(m), spec.phi2.inf_modulus(m)];
    let zeros_inside = [spec.phi1.winding_number(m), spec.phi2.winding_number(m)];
    let meets = |i: usize, sym: &AnalyticSymbol| !sym.is_constant() && inf_moduli[i] < 1.0 && sup_norms[i] > 1.0;
    let images_meet_circle = [meets(0, &spec.phi1), meets(1, &spec.phi2)];
    let zero_free = zeros_inside == [Some(0), Some(0)];
    let boundary_is_one = boundary_log_min >= -tau && boundary_log_max <= tau;
    let birkhoff_bounded = if boundary_is_one {
        birkhoff_sums_bounded(&spec.transformation, &spec.split)
    } else {
        None
    };

    let norm_product = m1 * libm::log(sup_norms[0]) + m2 * libm::log(sup_norms[1]);
    let verdict = if norm_product < libm::log(1.0 - tau) {
        Verdict::NonUniversalNormDecay
    } else if sup_norms[0] <= 1.0 + tau && sup_norms[1] <= 1.0 + tau {
        Verdict::TrivialContraction
    } else if inf_moduli[0] >= 1.0 - tau && inf_moduli[1] >= 1.0 - tau {
        Verdict::TrivialExpansion
    } else if lambda.1 < libm::log(1.0 - tau) && mu.1 > libm::log(1.0 + tau) {
        Verdict::MixingByEigenvalues
    } else if boundary_is_one {
        if birkhoff_bounded == Some(true) {
            Verdict::NonUniversalBounded
        } else if mu.1 <= tau {
            Verdict::LimitCaseInnerProduct
        } else {
            Verdict::LimitCaseOuterSide
        }
    } else if zero_free && boundary_log_min >= -tau {
        Verdict::TrivialExpansion
    } else {
        Verdict::Inconclusive
    };
    Ok(Classification {
        verdict,
        evidence: Evidence {
            lambda,
            mu,
            boundary_log_min,
            boundary_log_max,
            sup_norms,
            inf_moduli,
            zeros_inside,
            images_meet_circle,
            birkhoff_bounded,
        },
    })
}

/// Orbit length used by [`classify_orbit`].
pub const ORBIT_EVIDENCE_STEPS: usize = 2000;

#[derive(Clone, Debug, PartialEq)]
pub struct OrbitVerdict {
    pub verdict: Verdict,
    /// The symbol-level verdict before the orbit check.
    pub symbol_verdict: Verdict,
    pub confirmed: bool,
}

/// The classifier verdict, kept only if the orbit of ω shows the behaviour it
/// predicts: eigenvalue moduli on both sides of 1 for mixing, decaying
/// norms, bounded norms or inverse norms, or a decaying eigenvalue in the
/// inner limit case. Otherwise the verdict is `Inconclusive`.
pub fn classify_orbit(spec: &HardyProductSpec, start: Start<'_>, lambda_grid: &[C], n: usize) -> Result<OrbitVerdict> {
    let cls = classify(spec, lambda_grid)?;
    let tau = CLASSIFY_TOLERANCE;
    let ev = &cls.evidence;
    let half = (n / 2).max(1);
    let confirmed = match cls.verdict {
        Verdict::MixingByEigenvalues | Verdict::LimitCaseInnerProduct | Verdict::LimitCaseOuterSide => {
            let tr = eigen_trajectory(spec, start, &[ev.lambda.0, ev.mu.0], n)?;
            match cls.verdict {
                Verdict::MixingByEigenvalues => tr.log_modulus[0][n] < 0.0 && tr.log_modulus[1][n] > 0.0,
                // Only the decaying eigen-direction is an orbit property here:
                // at the largest g ≤ 1 the log-modulus is a1 log|φ1| + a2 log|φ2|,
                // which swings with the sign of S_n.
                Verdict::LimitCaseInnerProduct => tr.log_modulus[0][n] < 0.0,
                _ => tr.log_modulus[1][n] >= -tau * n as f64,
            }
        }
        Verdict::NonUniversalNormDecay => {
            let tr = norm_trajectory(spec, start, &[half, n])?;
            tr.rows[1].log_norm < tr.rows[0].log_norm && tr.rows[1].log_norm < 0.0
        }
        Verdict::TrivialContraction => {
            let tr = norm_trajectory(spec, start, &[half, n])?;
            tr.rows.iter().all(|r| r.log_norm <= tau)
        }
        Verdict::TrivialExpansion => {
            let tr = norm_trajectory(spec, start, &[half, n])?;
            tr.rows.iter().all(|r| r.log_inverse_norm <= tau)
        }
        Verdict::NonUniversalBounded => matches!(
            nonuniversality_certificate(spec, start, n)?,
            CertificateOutcome::Certificate(_)
        ),
        Verdict::Inconclusive => true,
    };
    Ok(OrbitVerdict {
        verdict: if confirmed { cls.verdict } else { Verdict::Inconclusive },
        symbol_verdict: cls.verdict,
        confirmed,
    })
}

/// Floor applied to |φ*| inside the Herglotz integral.
pub const LOG_FLOOR: f64 = 1e-12;

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct OuterFactor {
    /// Q_φ(z) = exp((1/2π) ∫ (e^{it}+z)/(e^{it}−z) log|φ*(e^{it})| dt).
    pub value: C,
    /// φ(z)/Q_φ(z).
    pub inner: C,
    /// A boundary sample fell below [`LOG_FLOOR`].
    pub regularized: bool,
}

/// Outer factor by trapezoid quadrature with `m_quad` nodes.
pub fn outer_factor(phi: &AnalyticSymbol, z: C, m_quad: usize) -> Result<OuterFactor> {
    if z.norm() > 0.95 {
        return Err(Error::Config("outer factor is evaluated for |z| ≤ 0.95"));
    }
    if m_quad == 0 {
        return Err(Error::Config("need at least one quadrature node"));
    }
    let mut regularized = false;
    let mut acc = C::zero();
    for j in 0..m_quad {
        let w = boundary_point(j, m_quad);
        let modulus = phi.eval(w).norm();
        let lm = if modulus < LOG_FLOOR {
            regularized = true;
            libm::log(LOG_FLOOR)
        } else {
            libm::log(modulus)
        };
        acc += (w + z) / (w - z) * lm;
    }
    let value = (acc / m_quad as f64).exp();
    Ok(OuterFactor {
        value,
        inner: phi.eval(z) / value,
        regularized,
    })
}

/// `(M_{φ1}*)^n x` when the inner part of φ1 is `z^m` and `x` lies in the
/// model space `(z^{mn} H²)^⊥`, i.e. is supported on coordinates `< m·n`.
/// The result vanishes identically.
pub fn model_space_annihilation(phi1: &AnalyticSymbol, x: &CoeffVector, n: usize) -> Result<CoeffVector> {
    let m = phi1.zero_order();
    if m == 0 || phi1.winding_number(BOUNDARY_SAMPLES) != Some(m as i64) {
        return Err(Error::Config("inner part is not a monomial z^m with m ≥ 1"));
    }
    if x.support_len() > m * n {
        return Err(Error::Config("vector is not supported on the model space"));
    }
    let mut y = x.clone();
    for _ in 0..n {
        y = adjoint_apply(phi1, &y);
    }
    Ok(y)
}

/// Which indices `n` the right-inverse probe inspects.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum SubsequenceRule {
    /// New strict maxima of S_n f(ω).
    RecordHigh,
    /// New strict minima of S_n f(ω).
    RecordLow,
    /// Returns to S_n f(ω) = 0.
    Balanced,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RightInverseRow {
    pub n: usize,
    /// S_n f(ω) = a1 − a2.
    pub s: i64,
    pub z: C,
    /// ‖T_n S_n k_z − k_z‖/‖k_z‖ on the first N coordinates.
    pub residual: f64,
    /// ‖S_n k_z‖ in the working buffer.
    pub norm: f64,
    /// |φ1(z)|^{−S_n}‖k_z‖ (or the φ2 branch for S_n < 0).
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RightInverseReport {
    pub rows: Vec<RightInverseRow>,
    /// For each z, the norms along the selected n end below where they start.
    pub decaying: Vec<bool>,
    pub buffer_len: usize,
}

/// Largest orbit length the probe accepts.
pub const RIGHT_INVERSE_MAX_N: usize = 1000;
const RIGHT_INVERSE_MAX_BUFFER: usize = 1 << 14;

/// Coefficients below this (relative) are dropped from the product symbol.
const INNER_TRIM: f64 = 1e-14;

/// Right inverses `S_n(ω)` of `T_n(ω)` on kernels when `φ = φ1 φ2` is inner
/// and `m1 = m2`:
/// for `S_n ≥ 0`, `S_n k_z = conj(φ1(z))^{−S_n} M_φ^{a2} k_z`;
/// for `S_n < 0`, `S_n k_z = conj(φ2(z))^{S_n} M_φ^{a1} k_z`.
/// `T_n(ω)` is then applied through the adjoint of `φ1^{a1} φ2^{a2}`.
pub fn right_inverse_probe(
    spec: &HardyProductSpec,
    start: Start<'_>,
    n_max: usize,
    rule: SubsequenceRule,
    z_set: &[C],
    max_checks: usize,
) -> Result<RightInverseReport> {
    if spec.split.ratio() != Some((1, 2)) {
        return Err(Error::Config("the right-inverse probe needs m1 = m2 = 1/2"));
    }
    if n_max == 0 || n_max > RIGHT_INVERSE_MAX_N {
        return Err(Error::Config("n must lie in 1..=1000"));
    }
    let full = convolve(spec.phi1.taylor(), spec.phi2.taylor(), usize::MAX);
    let top = full.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut phi: Vec<C> = full.into_iter().map(|z| if z.norm() < INNER_TRIM * top { C::zero() } else { z }).collect();
    while phi.len() > 1 && phi.last().is_some_and(|z| z.is_zero()) {
        phi.pop();
    }
    let phi_sym = AnalyticSymbol::polynomial(phi.clone())?;
    let m = spec.boundary_samples;
    let inner_dev = (0..m)
        .map(|j| (phi_sym.eval_taylor(boundary_point(j, m)).norm() - 1.0).abs())
        .fold(0.0, f64::max);
    if inner_dev > 1e-9 {
        return Err(Error::Config("φ1 φ2 is not inner"));
    }
    for &z in z_set {
        if !(z.norm() < 1.0) || spec.phi1.eval(z).norm() < 1e-12 || spec.phi2.eval(z).norm() < 1e-12 {
            return Err(Error::Config("z must lie in the disk away from zeros of φ1, φ2"));
        }
    }
    let nt = spec.truncation;
    let deg = phi_sym.degree().max(1);
    let buffer_len = nt + n_max * deg + 64;
    if buffer_len > RIGHT_INVERSE_MAX_BUFFER {
        return Err(Error::Size {
            needed: buffer_len,
            available: RIGHT_INVERSE_MAX_BUFFER,
        });
    }

    let steps = spec.steps(start, n_max)?;
    let mut selected = Vec::new();
    let (mut a1, mut a2) = (0i64, 0i64);
    let (mut hi, mut lo) = (0i64, 0i64);
    for (k, &s) in steps.iter().enumerate() {
        if s {
            a1 += 1;
        } else {
            a2 += 1;
        }
        let sn = a1 - a2;
        let pick = match rule {
            SubsequenceRule::RecordHigh => sn > hi,
            SubsequenceRule::RecordLow => sn < lo,
            SubsequenceRule::Balanced => sn == 0,
        };
        hi = hi.max(sn);
        lo = lo.min(sn);
        if pick {
            selected.push((k + 1, a1 as u64, a2 as u64));
        }
    }
    if selected.len() > max_checks && max_checks > 0 {
        let stride = selected.len() as f64 / max_checks as f64;
        selected = (0..max_checks)
            .map(|i| selected[((i as f64 + 1.0) * stride) as usize - 1])
            .collect();
    }

    let mut rows = Vec::new();
    for &z in z_set {
        let kernel = Kernel::new(z, buffer_len)?;
        for &(n, a1, a2) in &selected {
            let s = a1 as i64 - a2 as i64;
            let (power, coeff, bound_base) = if s >= 0 {
                (a2, spec.phi1.eval(z).conj().powi(-(s as i32)), spec.phi1.eval(z).norm())
            } else {
                (a1, spec.phi2.eval(z).conj().powi(s as i32), spec.phi2.eval(z).norm())
            };
            let lifted = CoeffVector(convolve(&series_power(&phi, power, buffer_len), &kernel.coeffs.0, buffer_len));
            let y = lifted.scaled(coeff);
            // φ1^{a1} φ2^{a2} = φ^{min(a1,a2)} φ_i^{|S_n|}; expanding the
            // unbalanced powers separately loses everything to cancellation.
            let (common, extra) = if s >= 0 {
                (a2, series_power(spec.phi1.taylor(), s as u64, buffer_len))
            } else {
                (a1, series_power(spec.phi2.taylor(), s.unsigned_abs(), buffer_len))
            };
            let psi = convolve(&series_power(&phi, common, buffer_len), &extra, buffer_len);
            let back = adjoint_apply_coeffs(&psi, &y).truncated(nt);
            let target = kernel.coeffs.truncated(nt);
            let residual = CoeffVector(back.0.iter().zip(&target.0).map(|(a, b)| a - b).collect()).norm() / target.norm();
            rows.push(RightInverseRow {
                n,
                s,
                z,
                residual,
                norm: y.norm(),
                bound: libm::pow(bound_base, -(s.abs() as f64)) * kernel.exact_norm(),
            });
        }
    }
    let decaying = z_set
        .iter()
        .map(|&z| {
            let norms: Vec<f64> = rows.iter().filter(|r| r.z == z).map(|r| r.norm).collect();
            norms.len() >= 2 && norms[norms.len() - 1] < norms[0]
        })
        .collect();
    Ok(RightInverseReport {
        rows,
        decaying,
        buffer_len,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundedOrbitCertificate {
    /// sup_{n ≤ N} |S_n f(ω)| observed along the orbit.
    pub sup_birkhoff: f64,
    /// log ‖F1‖_∞ and log ‖F2‖_∞ (outer factors share the boundary modulus).
    pub log_sup_outer: [f64; 2],
    /// log of the bound `exp(S max(log‖F1‖, (m2/m1) log‖F2‖, 0))`.
    pub log_bound: f64,
    /// max_{n ≤ N} log ‖T_n(ω)‖.
    pub max_log_norm: f64,
    pub steps: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum CertificateOutcome {
    Certificate(BoundedOrbitCertificate),
    /// Names the hypothesis that failed.
    NoCertificate(&'static str),
}

/// Certifies that every orbit of `(T_n(ω))` is bounded when
/// `|φ1*|^{m1} |φ2*|^{m2} = 1` and the Birkhoff sums are bounded.
///
/// On the circle `a1 L1 + a2 L2 = S_n·L1` with `L_i = log|φ_i*|`, so
/// `‖T_n(ω)‖ ≤ exp(|S_n| max(sup L1, (m2/m1) sup L2))`.
pub fn nonuniversality_certificate(spec: &HardyProductSpec, start: Start<'_>, steps: usize) -> Result<CertificateOutcome> {
    if steps == 0 {
        return Err(Error::Config("need at least one step"));
    }
    let (m1, m2) = (spec.m1(), spec.m2());
    let (l1, l2) = spec.boundary();
    let deviation = l1
        .iter()
        .zip(&l2)
        .map(|(&a, &b)| weighted_log(m1, a, m2, b).abs())
        .fold(0.0, f64::max);
    if !(deviation <= CLASSIFY_TOLERANCE) {
        return Ok(CertificateOutcome::NoCertificate("boundary product is not 1"));
    }
    if birkhoff_sums_bounded(&spec.transformation, &spec.split) != Some(true) {
        return Ok(CertificateOutcome::NoCertificate("Birkhoff sums unbounded"));
    }
    let series = birkhoff_sums(&spec.transformation, spec.split, start, steps)?;
    let sup_birkhoff = (0..=steps).map(|n| series.s(n).abs()).fold(0.0, f64::max);
    let sup1 = l1.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sup2 = l2.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let log_bound = sup_birkhoff * sup1.max(m2 / m1 * sup2).max(0.0);
    let mut max_log_norm = f64::NEG_INFINITY;
    for n in 1..=steps {
        let a1 = series.a1(n) as f64;
        let a2 = series.a2(n) as f64;
        let v = log_norm_from(&l1, &l2, a1, a2);
        max_log_norm = max_log_norm.max(v);
        let slack = 1e-9 * (1.0 + log_bound.abs()) + a2 * deviation / m2;
        if v > log_bound + slack {
            return Err(Error::Consistency {
                what: "norm trajectory exceeds the certified bound",
                deviation: v - log_bound,
            });
        }
    }
    Ok(CertificateOutcome::Certificate(BoundedOrbitCertificate {
        sup_birkhoff,
        log_sup_outer: [sup1, sup2],
        log_bound,
        max_log_norm,
        steps,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::sample_rng;
    use crate::torus::BitStream;

    fn poly(c: &[f64]) -> AnalyticSymbol {
        AnalyticSymbol::real_polynomial(c).unwrap()
    }

    #[test]
    fn shift_and_identity() {
        let x = CoeffVector(vec![c(1.0, 0.0), c(2.0, 0.0), c(3.0, 1.0)]);
        let y = adjoint_apply(&poly(&[0.0, 1.0]), &x);
        assert_eq!(y.0, vec![c(2.0, 0.0), c(3.0, 1.0), C::zero()]);
        assert_eq!(adjoint_apply(&poly(&[1.0]), &x), x);
    }

    #[test]
    fn eigen_relation_for_two_z() {
        let k = Kernel::new(c(0.5, 0.0), 512).unwrap();
        let y = adjoint_apply(&poly(&[0.0, 2.0]), &k.coeffs);
        let r = (0..500).map(|j| (y.0[j] - k.coeffs.0[j]).norm()).fold(0.0, f64::max);
        assert!(r <= 1e-9);
    }

    #[test]
    fn adjoint_pairing() {
        let mut rng = sample_rng(1, 0);
        let phi = poly(&[0.3, -1.0, 0.5, 2.0]);
        let rand = |rng: &mut _| crate::rng::standard_normal(rng);
        let x = CoeffVector((0..40).map(|_| c(rand(&mut rng), rand(&mut rng))).collect());
        let mut y = CoeffVector((0..40).map(|_| c(rand(&mut rng), rand(&mut rng))).collect());
        let mx = multiply_apply(&phi, &x);
        y = y.truncated(mx.len());
        let lhs = mx.inner(&y);
        let rhs = x.truncated(mx.len()).inner(&adjoint_apply(&phi, &y));
        assert!((lhs - rhs).norm() < 1e-12 * lhs.norm().max(1.0));
    }

    #[test]
    fn exp_series_matches_closed_form() {
        let e = AnalyticSymbol::exp_affine(c(1.0, 0.0), c(-1.0, 0.0)).unwrap();
        for z in [c(0.3, 0.2), c(-0.9, 0.1), c(0.0, 0.99)] {
            assert!((e.eval(z) - e.eval_taylor(z)).norm() < 1e-14);
        }
        assert!(e.tail_bound() < 1e-15);
    }

    #[test]
    fn ratio_series_matches_closed_form() {
        let (phi1, phi2) = builtin_symbols("remark-3.8").unwrap();
        for z in [c(0.3, 0.2), c(-0.9, 0.1), c(0.0, 0.99)] {
            assert!((phi1.eval(z) - phi1.eval_taylor(z)).norm() < 1e-14);
            assert!((phi1.eval(z) * phi2.eval(z) - z).norm() < 1e-14);
        }
        assert!(AnalyticSymbol::ratio(vec![c(1.0, 0.0)], vec![c(0.5, 0.0), c(1.0, 0.0)]).is_err());
    }

    #[test]
    fn power_series() {
        let p = series_power(&[c(1.0, 0.0), c(1.0, 0.0)], 5, 10);
        let binom = [1.0, 5.0, 10.0, 10.0, 5.0, 1.0];
        for (a, b) in p.iter().zip(binom) {
            assert_eq!(a.re, b);
        }
    }

    #[test]
    fn two_z_and_half_z_product() {
        let spec = HardyProductSpec {
            phi1: poly(&[0.0, 2.0]),
            phi2: poly(&[0.0, 0.5]),
            split: Split::rational(1, 2).unwrap(),
            transformation: Transformation::Doubling,
            truncation: 64,
            boundary_samples: 256,
        };
        let mut rng = sample_rng(2, 0);
        let bits = BitStream::random(20 + 128, &mut rng);
        let x = CoeffVector((0..64).map(|j| c(j as f64 + 1.0, 0.0)).collect());
        let out = product_apply(&spec, Start::Bits(&bits), 20, &x).unwrap();
        let s = out.a1 as i32 - out.a2 as i32;
        let scale = libm::pow(2.0, s as f64);
        for j in 0..44 {
            assert!((out.closed.0[j] - x.0[j + 20] * scale).norm() < 1e-9 * scale.max(1.0));
        }
    }

    #[test]
    fn eigen_slopes() {
        let spec = HardyProductSpec::builtin("mixing-demo").unwrap();
        let mut rng = sample_rng(4, 0);
        let bits = BitStream::random(2000 + 128, &mut rng);
        let tr = eigen_trajectory(&spec, Start::Bits(&bits), &[C::zero(), c(0.9, 0.0)], 2000).unwrap();
        assert!(tr.log_modulus[0][1..].iter().all(|v| *v == f64::NEG_INFINITY));
        let expected = 0.5 * libm::log(1.8 * 1.45);
        assert!((tr.predicted[1] - expected).abs() < 1e-12);
        assert!((tr.slope[1] - expected).abs() < 0.05);
    }

    #[test]
    fn classifier_cases() {
        let grid = default_lambda_grid();
        let verdict = |name: &str| classify(&HardyProductSpec::builtin(name).unwrap(), &grid).unwrap();
        let mix = verdict("mixing-demo");
        assert_eq!(mix.verdict, Verdict::MixingByEigenvalues);
        assert_eq!(mix.evidence.lambda.0, C::zero());
        let rem = verdict("remark-3.8");
        assert_eq!(rem.verdict, Verdict::LimitCaseInnerProduct);
        assert_eq!(rem.evidence.images_meet_circle, [false, false]);
        assert_eq!(verdict("example-5.1").verdict, Verdict::TrivialExpansion);
        assert_eq!(verdict("norm-decay").verdict, Verdict::NonUniversalNormDecay);
    }

    #[test]
    fn outer_factors() {
        let z = c(0.3, -0.4);
        let outer = outer_factor(&poly(&[2.0, 1.0]), z, 1 << 14).unwrap();
        assert!((outer.value - c(2.0, 0.0) - z).norm() < 1e-6);
        let prod = outer_factor(&poly(&[0.0, 2.0, 1.0]), z, 1 << 14).unwrap();
        assert!((prod.inner - z).norm() < 1e-6);
        let inner = outer_factor(&poly(&[0.0, 0.0, 0.0, 1.0]), z, 1 << 14).unwrap();
        assert!((inner.value - c(1.0, 0.0)).norm() < 1e-12);
        assert!(outer_factor(&poly(&[1.0]), c(0.96, 0.0), 8).is_err());
    }

    #[test]
    fn model_space() {
        let x = CoeffVector::basis(16, 0);
        assert_eq!(model_space_annihilation(&poly(&[0.0, 1.0]), &x, 1).unwrap().max_abs(), 0.0);
        let phi = poly(&[0.0, 0.0, 1.0, 0.5]);
        let x = CoeffVector((0..16).map(|j| if j < 4 { c(j as f64 + 1.0, -1.0) } else { C::zero() }).collect());
        assert!(model_space_annihilation(&phi, &x, 2).unwrap().max_abs() <= 1e-12);
        let outside = CoeffVector::basis(16, 4);
        assert!(model_space_annihilation(&phi, &outside, 2).is_err());
        let mut y = outside.clone();
        for _ in 0..2 {
            y = adjoint_apply(&phi, &y);
        }
        assert!(y.max_abs() > 0.5);
    }

    #[test]
    fn right_inverse_on_kernels() {
        let mut spec = HardyProductSpec::builtin("remark-3.8").unwrap();
        spec.truncation = 32;
        let mut rng = sample_rng(6, 0);
        let bits = BitStream::random(400 + 128, &mut rng);
        for rule in [SubsequenceRule::Balanced, SubsequenceRule::RecordLow] {
            let rep = right_inverse_probe(&spec, Start::Bits(&bits), 400, rule, &[c(0.5, 0.0)], 4).unwrap();
            assert!(!rep.rows.is_empty());
            for r in &rep.rows {
                assert!(r.residual < 1e-9, "{r:?}");
                assert!((r.norm - r.bound).abs() <= 1e-9 * r.bound);
            }
            if rule == SubsequenceRule::RecordLow {
                assert_eq!(rep.decaying, vec![true]);
            }
        }
    }

    #[test]
    fn inner_isometry() {
        let mut rng = sample_rng(8, 0);
        let x = CoeffVector((0..30).map(|_| c(crate::rng::standard_normal(&mut rng), 0.0)).collect());
        assert!((multiply_apply(&poly(&[0.0, 1.0]), &x).norm() - x.norm()).abs() < 1e-12);
    }
}
