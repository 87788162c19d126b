//! Truncated model of H(ℂ): polynomials of degree < N acted on by the
//! derivative D, symbols φ(D) of exponential type, and affine compositions
//! `T_{λ,b} f = f(λz + b)`.
//!
//! `D T_{λ,b} = λ T_{λ,b} D`, so a random word in `T_{λ,b}` and `D` collapses to
//! `λ^c f^{(a2)}(λ^{a1} z + r)`. Coefficients are [`XComplex`] because λ^c
//! and factorial ratios leave the f64 range for n in the hundreds.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::birkhoff::Split;
use crate::torus::{orbit_iter, Start, Transformation};
use crate::xfloat::XComplex;
use crate::{Error, Result};

type C = Complex64;

/// Default truncation for entire-function experiments.
pub const TRUNCATION: usize = 1024;
/// Relative agreement required between the direct and closed products.
pub const PRODUCT_TOLERANCE: f64 = 1e-9;

/// Coefficients of a polynomial of degree < N.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyVector {
    coeffs: Vec<XComplex>,
}

impl PolyVector {
    pub fn zeros(n: usize) -> Self {
        PolyVector {
            coeffs: vec![XComplex::ZERO; n],
        }
    }

    /// `z^k` in P_N.
    pub fn monomial(n: usize, k: usize) -> Result<Self> {
        if k >= n {
            return Err(Error::Size { needed: k + 1, available: n });
        }
        let mut p = PolyVector::zeros(n);
        p.coeffs[k] = XComplex::ONE;
        Ok(p)
    }

    pub fn from_complex(coeffs: &[C], n: usize) -> Result<Self> {
        if coeffs.len() > n {
            return Err(Error::Size {
                needed: coeffs.len(),
                available: n,
            });
        }
        let mut p = PolyVector::zeros(n);
        for (slot, &c) in p.coeffs.iter_mut().zip(coeffs) {
            *slot = XComplex::new(c);
        }
        Ok(p)
    }

    pub fn from_xcomplex(coeffs: Vec<XComplex>) -> Self {
        PolyVector { coeffs }
    }

    /// Truncation dimension N.
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> &[XComplex] {
        &self.coeffs
    }

    pub fn coeff(&self, j: usize) -> XComplex {
        self.coeffs.get(j).copied().unwrap_or(XComplex::ZERO)
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|c| !c.is_zero())
    }

    pub fn is_zero(&self) -> bool {
        self.degree().is_none()
    }

    /// ln of `Σ |c_j| R^j`, the computable upper bound for `sup_{|z|≤R} |f|`.
    pub fn log_seminorm(&self, radius: f64) -> f64 {
        let lr = libm::log2(radius);
        let terms: Vec<f64> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(j, c)| c.log2_abs() + j as f64 * lr)
            .collect();
        let top = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if top == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        let s: f64 = terms.iter().map(|t| libm::exp2(t - top)).sum();
        (top + libm::log2(s)) * core::f64::consts::LN_2
    }

    /// `Σ |c_j| R^j`, saturating outside the f64 range.
    pub fn seminorm(&self, radius: f64) -> f64 {
        libm::exp(self.log_seminorm(radius))
    }

    /// f(z), evaluated by Horner's rule.
    pub fn eval(&self, z: C) -> XComplex {
        let z = XComplex::new(z);
        self.coeffs.iter().rev().fold(XComplex::ZERO, |acc, &c| acc * z + c)
    }

    pub fn derivative(&self) -> PolyVector {
        let n = self.len();
        let mut out = PolyVector::zeros(n);
        for j in 1..n {
            out.coeffs[j - 1] = self.coeffs[j] * XComplex::from_f64(j as f64);
        }
        out
    }

    /// `f^{(k)}`; zero once k exceeds the degree.
    pub fn derivative_n(&self, k: usize) -> PolyVector {
        let n = self.len();
        let mut out = PolyVector::zeros(n);
        for j in 0..n.saturating_sub(k) {
            let c = self.coeffs[j + k];
            if c.is_zero() {
                continue;
            }
            // (j+k)!/j!
            let mut fac = XComplex::ONE;
            for i in 1..=k {
                fac *= XComplex::from_f64((j + i) as f64);
            }
            out.coeffs[j] = c * fac;
        }
        out
    }

    pub fn scaled(&self, s: XComplex) -> PolyVector {
        PolyVector {
            coeffs: self.coeffs.iter().map(|&c| c * s).collect(),
        }
    }

    /// `f(μz + r)`: a Taylor shift by `r` followed by scaling `z ↦ μz`.
    pub fn substitute(&self, mu: XComplex, r: XComplex) -> PolyVector {
        let mut a = self.coeffs.clone();
        let Some(d) = self.degree() else {
            return self.clone();
        };
        if !r.is_zero() {
            for i in 0..d {
                for k in (i..d).rev() {
                    let t = r * a[k + 1];
                    a[k] += t;
                }
            }
        }
        let mut p = XComplex::ONE;
        for c in a.iter_mut().take(d + 1) {
            *c = *c * p;
            p *= mu;
        }
        PolyVector { coeffs: a }
    }

    /// Coefficient-wise difference.
    pub fn sub(&self, other: &PolyVector) -> PolyVector {
        PolyVector {
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(&a, &b)| a - b).collect(),
        }
    }
}

/// `max_j |x_j − y_j| w^j / max_j |y_j| w^j` with `log2 w = log2_weight`,
/// i.e. the max-coefficient relative error of `x(wz)` against `y(wz)`.
pub fn weighted_relative_difference(x: &PolyVector, y: &PolyVector, log2_weight: f64) -> f64 {
    let diff = x.sub(y);
    let weighted_max = |p: &PolyVector| {
        p.coeffs()
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(j, c)| c.log2_abs() + j as f64 * log2_weight)
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let num = weighted_max(&diff);
    let den = weighted_max(y).max(weighted_max(x));
    if num == f64::NEG_INFINITY {
        0.0
    } else if den == f64::NEG_INFINITY {
        f64::INFINITY
    } else {
        libm::exp2(num - den)
    }
}

/// An entire function of exponential type through its Taylor coefficients.
/// Only the first N coefficients act on P_N, where D is nilpotent.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpTypeSymbol {
    taylor: Vec<C>,
    /// `(M, A)` with `|φ(z)| ≤ M e^{A|z|}`, if declared.
    pub type_constants: Option<(f64, f64)>,
}

impl ExpTypeSymbol {
    pub fn from_taylor(taylor: Vec<C>) -> Result<Self> {
        if taylor.is_empty() {
            return Err(Error::Config("symbol needs at least one coefficient"));
        }
        Ok(ExpTypeSymbol {
            taylor,
            type_constants: None,
        })
    }

    pub fn polynomial(coeffs: &[f64]) -> Result<Self> {
        let mut s = ExpTypeSymbol::from_taylor(coeffs.iter().map(|&x| C::new(x, 0.0)).collect())?;
        s.type_constants = Some((coeffs.iter().map(|x| x.abs()).sum::<f64>().max(1.0), 1.0));
        Ok(s)
    }

    /// `φ(λ) = λ`, so `φ(D) = D`.
    pub fn derivative() -> Self {
        ExpTypeSymbol {
            taylor: vec![C::new(0.0, 0.0), C::new(1.0, 0.0)],
            type_constants: Some((1.0, 1.0)),
        }
    }

    /// `φ(λ) = e^{aλ}` with `terms` Taylor coefficients; `φ(D)` is translation
    /// by `a`.
    pub fn exp(a: C, terms: usize) -> Result<Self> {
        if terms == 0 {
            return Err(Error::Config("need at least one term"));
        }
        let mut taylor = Vec::with_capacity(terms);
        let mut t = C::new(1.0, 0.0);
        for k in 0..terms {
            taylor.push(t);
            t = t * a / (k + 1) as f64;
        }
        Ok(ExpTypeSymbol {
            taylor,
            type_constants: Some((1.0, a.norm())),
        })
    }

    pub fn taylor(&self) -> &[C] {
        &self.taylor
    }

    pub fn is_constant(&self) -> bool {
        self.taylor[1..].iter().all(|c| *c == C::new(0.0, 0.0))
    }

    /// Sum of the stored Taylor series at λ.
    pub fn eval(&self, lambda: C) -> C {
        self.taylor.iter().rev().fold(C::new(0.0, 0.0), |acc, a| acc * lambda + a)
    }
}

/// `φ(D) f = Σ_k a_k f^{(k)}`, exact on P_N.
pub fn apply_phi_d(phi: &ExpTypeSymbol, f: &PolyVector) -> PolyVector {
    let n = f.len();
    let mut out = PolyVector::zeros(n);
    let Some(d) = f.degree() else {
        return out;
    };
    for (j, slot) in out.coeffs.iter_mut().enumerate().take(d + 1) {
        let mut acc = XComplex::ZERO;
        let mut fac = XComplex::ONE;
        for (k, &a) in phi.taylor.iter().enumerate() {
            if j + k > d {
                break;
            }
            if k > 0 {
                fac *= XComplex::from_f64((j + k) as f64);
            }
            if a != C::new(0.0, 0.0) {
                acc += XComplex::new(a) * fac * f.coeffs[j + k];
            }
        }
        *slot = acc;
    }
    out
}

/// `T_{λ,b} f = f(λz + b)`.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct AffineOp {
    lambda: C,
    b: C,
}

impl AffineOp {
    pub fn new(lambda: C, b: C) -> Result<Self> {
        if lambda == C::new(0.0, 0.0) {
            return Err(Error::Config("λ must be nonzero"));
        }
        Ok(AffineOp { lambda, b })
    }

    pub fn lambda(&self) -> C {
        self.lambda
    }

    pub fn b(&self) -> C {
        self.b
    }

    /// `(λ^n, b Σ_{k<n} λ^k)`, the map with `T^n f = f(λ^n z + r)`.
    pub fn iterate(&self, n: u64) -> (XComplex, XComplex) {
        let lam = XComplex::new(self.lambda);
        (lam.powu(n as u128), affine_offset(self.lambda, self.b, n))
    }
}

/// `b Σ_{k<n} λ^k`.
pub fn affine_offset(lambda: C, b: C, n: u64) -> XComplex {
    let lam = XComplex::new(lambda);
    let mut sum = XComplex::ZERO;
    let mut p = XComplex::ONE;
    for _ in 0..n {
        sum += p;
        p *= lam;
    }
    sum * XComplex::new(b)
}

pub fn apply_affine(op: &AffineOp, f: &PolyVector) -> PolyVector {
    f.substitute(XComplex::new(op.lambda), XComplex::new(op.b))
}

/// One factor of a random product.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum EntireStep {
    /// `T_{λ,b}`, applied on visits to A1.
    Affine,
    /// `D`, applied on visits to A2.
    Derivative,
}

/// `A1 ↦ T_{λ,b}`, `A2 ↦ D` along orbits of a transformation.
#[derive(Clone, Debug, PartialEq)]
pub struct EntireProductSpec {
    pub op: AffineOp,
    pub split: Split,
    pub transformation: Transformation,
    pub truncation: usize,
}

impl EntireProductSpec {
    /// Factors in the order they are applied.
    pub fn pattern(&self, start: Start<'_>, n: usize) -> Result<Vec<EntireStep>> {
        let (a1, _) = self.split.sets();
        Ok(orbit_iter(&self.transformation, start, n)?
            .map(|x| if a1.contains(x) { EntireStep::Affine } else { EntireStep::Derivative })
            .collect())
    }
}

/// `T_n(ω) f = λ^c f^{(a2)}(λ^{a1} z + r)`.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalForm {
    pub a1: u64,
    pub a2: u64,
    /// Number of pairs (i < j) with step i = T and step j = D: moving each
    /// later D to the right past an earlier T costs one factor λ.
    pub c: u128,
    /// `b Σ_{k<a1} λ^k`.
    pub r: XComplex,
    pub lambda: C,
}

impl NormalForm {
    pub fn from_pattern(op: &AffineOp, pattern: &[EntireStep]) -> NormalForm {
        let (mut a1, mut a2, mut c) = (0u64, 0u64, 0u128);
        for s in pattern {
            match s {
                EntireStep::Affine => a1 += 1,
                EntireStep::Derivative => {
                    a2 += 1;
                    c += a1 as u128;
                }
            }
        }
        NormalForm {
            a1,
            a2,
            c,
            r: affine_offset(op.lambda, op.b, a1),
            lambda: op.lambda,
        }
    }

    pub fn apply(&self, f: &PolyVector) -> PolyVector {
        let lam = XComplex::new(self.lambda);
        f.derivative_n(self.a2 as usize)
            .substitute(lam.powu(self.a1 as u128), self.r)
            .scaled(lam.powu(self.c))
    }

    /// log₂|λ^{a1}|, the weight used to compare products coefficient-wise.
    pub fn log2_scale(&self) -> f64 {
        self.a1 as f64 * libm::log2(self.lambda.norm())
    }
}

/// Applies the pattern one factor at a time.
pub fn apply_pattern(op: &AffineOp, pattern: &[EntireStep], f: &PolyVector) -> PolyVector {
    let mut g = f.clone();
    for s in pattern {
        g = match s {
            EntireStep::Affine => apply_affine(op, &g),
            EntireStep::Derivative => g.derivative(),
        };
    }
    g
}

#[derive(Clone, Debug, PartialEq)]
pub struct EntireProduct {
    pub direct: PolyVector,
    pub normal_form: NormalForm,
    pub closed: PolyVector,
    /// [`weighted_relative_difference`] of direct against closed.
    pub relative_difference: f64,
}

/// `T_n(ω) f` step by step and through the normal form; they must agree.
pub fn noncommuting_product(op: &AffineOp, pattern: &[EntireStep], f: &PolyVector) -> Result<EntireProduct> {
    if pattern.is_empty() {
        return Err(Error::Config("n must be at least 1"));
    }
    if f.len() <= pattern.len() {
        return Err(Error::Size {
            needed: pattern.len() + 1,
            available: f.len(),
        });
    }
    let direct = apply_pattern(op, pattern, f);
    let normal_form = NormalForm::from_pattern(op, pattern);
    let closed = normal_form.apply(f);
    let relative_difference = weighted_relative_difference(&direct, &closed, normal_form.log2_scale());
    if !(relative_difference <= PRODUCT_TOLERANCE) {
        return Err(Error::Consistency {
            what: "direct and normal-form products disagree",
            deviation: relative_difference,
        });
    }
    Ok(EntireProduct {
        direct,
        normal_form,
        closed,
        relative_difference,
    })
}

/// `S_n(ω) z^k = (k!/(k+a2)!) λ^{−c} λ^{−k a1} Σ_{j≤k} C(k+a2, j) z^{k+a2−j} (−r)^j`,
/// a right inverse of `T_n(ω)` on `z^k`.
pub fn right_inverse(op: &AffineOp, pattern: &[EntireStep], k: usize, truncation: usize) -> Result<PolyVector> {
    let nf = NormalForm::from_pattern(op, pattern);
    right_inverse_from(&nf, k, truncation)
}

pub fn right_inverse_from(nf: &NormalForm, k: usize, truncation: usize) -> Result<PolyVector> {
    let a2 = nf.a2 as usize;
    if k + a2 >= truncation {
        return Err(Error::Size {
            needed: k + a2 + 1,
            available: truncation,
        });
    }
    let lam = XComplex::new(nf.lambda);
    let front = lam.powu(nf.c).recip() * lam.powu(nf.a1 as u128 * k as u128).recip();
    // t_j = k!/(j!(k+a2−j)!) = (k!/(k+a2)!) C(k+a2, j)
    let mut t = XComplex::ONE;
    for i in 1..=a2 {
        t = t / XComplex::from_f64((k + i) as f64);
    }
    let mut out = PolyVector::zeros(truncation);
    out.coeffs[k + a2] = front * t;
    if !nf.r.is_zero() {
        let minus_r = -nf.r;
        let mut rp = XComplex::ONE;
        for j in 1..=k {
            t = t * XComplex::from_f64((k + a2 + 1 - j) as f64) / XComplex::from_f64(j as f64);
            rp *= minus_r;
            out.coeffs[k + a2 - j] = front * t * rp;
        }
    }
    Ok(out)
}

/// How `T_n(ω)` is applied when checking a right inverse.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum ProductRoute {
    /// One factor at a time.
    Direct,
    /// Through the normal form.
    NormalForm,
}

/// max_j |(T_n(ω) S_n(ω) z^k)_j − δ_{jk}|.
///
/// Both routes are well conditioned for |λ| ≥ 1. For |λ| < 1 the inverse has
/// coefficients of size |λ|^{−c−k a1} and recovering z^k cancels about
/// a1·log2(1/|λ|) bits, so the check is only meaningful for short words.
pub fn right_inverse_residual(
    op: &AffineOp,
    pattern: &[EntireStep],
    k: usize,
    truncation: usize,
    route: ProductRoute,
) -> Result<f64> {
    let s = right_inverse(op, pattern, k, truncation)?;
    let back = match route {
        ProductRoute::Direct => apply_pattern(op, pattern, &s),
        ProductRoute::NormalForm => NormalForm::from_pattern(op, pattern).apply(&s),
    };
    let target = PolyVector::monomial(truncation, k)?;
    Ok(back
        .sub(&target)
        .coeffs()
        .iter()
        .map(|c| c.to_complex().norm())
        .fold(0.0, f64::max))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeminormRow {
    pub n: usize,
    pub a1: u64,
    pub a2: u64,
    pub c: u128,
    /// ln p_R(S_n(ω) z^k) for k = 0..=k_max.
    pub log_seminorms: Vec<f64>,
}

impl SeminormRow {
    pub fn max_log(&self) -> f64 {
        self.log_seminorms.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Seminorms of the right inverses along every prefix of the pattern.
pub fn seminorm_trajectory(
    op: &AffineOp,
    pattern: &[EntireStep],
    k_max: usize,
    radius: f64,
    truncation: usize,
) -> Result<Vec<SeminormRow>> {
    let mut rows = Vec::with_capacity(pattern.len());
    for n in 1..=pattern.len() {
        let nf = NormalForm::from_pattern(op, &pattern[..n]);
        let log_seminorms = (0..=k_max)
            .map(|k| right_inverse_from(&nf, k, truncation).map(|p| p.log_seminorm(radius)))
            .collect::<Result<Vec<_>>>()?;
        rows.push(SeminormRow {
            n,
            a1: nf.a1,
            a2: nf.a2,
            c: nf.c,
            log_seminorms,
        });
    }
    Ok(rows)
}

/// Whether `max_k p_R(S_n z^k)` never rises from `n0` on (by more than the
/// relative `slack`) and ends strictly below its value at `n0`.
pub fn seminorms_decreasing(rows: &[SeminormRow], n0: usize, slack: f64) -> bool {
    let tail: Vec<f64> = rows.iter().filter(|r| r.n >= n0).map(SeminormRow::max_log).collect();
    if tail.len() < 2 {
        return false;
    }
    let allowed = libm::log1p(slack);
    tail.windows(2).all(|w| w[1] <= w[0] + allowed) && tail[tail.len() - 1] < tail[0]
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum EntireVerdict {
    MixingByEigenvalues,
    /// No witness on one side; the grid should be refined or enlarged.
    RefineGrid { above: bool, below: bool },
}

#[derive(Clone, Debug, PartialEq)]
pub struct EntireClassification {
    pub verdict: EntireVerdict,
    /// Grid point with g < 1 and ln g there.
    pub below: Option<(C, f64)>,
    /// Grid point with g > 1 and ln g there.
    pub above: Option<(C, f64)>,
}

/// Polar grid on the disk of the given radius (11 radii × 16 angles, plus 0).
pub fn entire_grid(radius: f64) -> Vec<C> {
    let mut grid = vec![C::new(0.0, 0.0)];
    for i in 1..=10 {
        let r = radius * i as f64 / 10.0;
        for k in 0..16 {
            grid.push(C::from_polar(r, 2.0 * PI * k as f64 / 16.0));
        }
    }
    grid
}

/// Looks for λ with `g(λ) = |φ1(λ)|^{m1} |φ2(λ)|^{m2}` on both sides of 1;
/// the exponentials `e_λ` are eigenvectors of both φ_i(D).
pub fn phi_d_classifier(phi1: &ExpTypeSymbol, phi2: &ExpTypeSymbol, m1: f64, m2: f64, grid: &[C]) -> Result<EntireClassification> {
    if grid.is_empty() {
        return Err(Error::Config("grid must be non-empty"));
    }
    if !(m1 > 0.0 && m2 > 0.0) {
        return Err(Error::Config("measures must be positive"));
    }
    let term = |m: f64, v: C| {
        let n = v.norm();
        if n == 0.0 {
            f64::NEG_INFINITY
        } else {
            m * libm::log(n)
        }
    };
    let mut below: Option<(C, f64)> = None;
    let mut above: Option<(C, f64)> = None;
    for &z in grid {
        let lg = term(m1, phi1.eval(z)) + term(m2, phi2.eval(z));
        if lg < 0.0 && below.is_none_or(|(_, v)| lg < v) {
            below = Some((z, lg));
        }
        if lg > 0.0 && above.is_none_or(|(_, v)| lg > v) {
            above = Some((z, lg));
        }
    }
    let verdict = if below.is_some() && above.is_some() {
        EntireVerdict::MixingByEigenvalues
    } else {
        EntireVerdict::RefineGrid {
            above: above.is_some(),
            below: below.is_some(),
        }
    };
    Ok(EntireClassification { verdict, below, above })
}

/// `P_N e_λ` with `e_λ(z) = e^{λz}`.
pub fn exponential(lambda: C, truncation: usize) -> PolyVector {
    let lam = XComplex::new(lambda);
    let mut coeffs = Vec::with_capacity(truncation);
    let mut t = XComplex::ONE;
    for j in 0..truncation {
        coeffs.push(t);
        t = t * lam / XComplex::from_f64((j + 1) as f64);
    }
    PolyVector::from_xcomplex(coeffs)
}

/// `p_R(φ(D) P_N e_λ − φ(λ) P_N e_λ)`.
pub fn eigen_residual(phi: &ExpTypeSymbol, lambda: C, truncation: usize, radius: f64) -> f64 {
    let e = exponential(lambda, truncation);
    let lhs = apply_phi_d(phi, &e);
    let rhs = e.scaled(XComplex::new(phi.eval(lambda)));
    lhs.sub(&rhs).seminorm(radius)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{sample_rng, uniform01};

    fn real(p: &PolyVector) -> Vec<f64> {
        let d = p.degree().map_or(0, |d| d + 1);
        p.coeffs()[..d].iter().map(|c| c.to_complex().re).collect()
    }

    fn poly(c: &[f64], n: usize) -> PolyVector {
        PolyVector::from_complex(&c.iter().map(|&x| C::new(x, 0.0)).collect::<Vec<_>>(), n).unwrap()
    }

    fn random_pattern(seed: u64, n: usize) -> Vec<EntireStep> {
        let mut rng = sample_rng(seed, 0);
        (0..n)
            .map(|_| if uniform01(&mut rng) < 0.5 { EntireStep::Affine } else { EntireStep::Derivative })
            .collect()
    }

    #[test]
    fn derivative_symbol() {
        let f = PolyVector::monomial(8, 5).unwrap();
        assert_eq!(real(&apply_phi_d(&ExpTypeSymbol::derivative(), &f)), vec![0.0, 0.0, 0.0, 0.0, 5.0]);
        let one = ExpTypeSymbol::polynomial(&[1.0]).unwrap();
        assert_eq!(apply_phi_d(&one, &f), f);
    }

    #[test]
    fn exp_is_translation() {
        let f = PolyVector::monomial(16, 2).unwrap();
        let g = apply_phi_d(&ExpTypeSymbol::exp(C::new(1.0, 0.0), 3).unwrap(), &f);
        let r = real(&g);
        for (a, b) in r.iter().zip([1.0, 2.0, 1.0]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn affine_substitution() {
        let op = AffineOp::new(C::new(2.0, 0.0), C::new(1.0, 0.0)).unwrap();
        assert_eq!(real(&apply_affine(&op, &PolyVector::monomial(8, 2).unwrap())), vec![1.0, 4.0, 4.0]);
        let id = AffineOp::new(C::new(1.0, 0.0), C::new(0.0, 0.0)).unwrap();
        let f = poly(&[1.0, -2.0, 3.0], 8);
        assert_eq!(apply_affine(&id, &f), f);
    }

    #[test]
    fn iterate_law() {
        let op = AffineOp::new(C::new(2.0, 0.0), C::new(1.0, 0.0)).unwrap();
        let f = poly(&[0.5, -1.0, 0.0, 2.0], 8);
        let thrice = apply_affine(&op, &apply_affine(&op, &apply_affine(&op, &f)));
        let (mu, r) = op.iterate(3);
        assert_eq!(r.to_complex(), C::new(7.0, 0.0));
        assert_eq!(thrice, f.substitute(mu, r));
    }

    #[test]
    fn commutation_example() {
        let op = AffineOp::new(C::new(2.0, 0.0), C::new(1.0, 0.0)).unwrap();
        let f = PolyVector::monomial(8, 2).unwrap();
        let dt = apply_affine(&op, &f).derivative();
        assert_eq!(real(&dt), vec![4.0, 8.0]);
        let td = apply_affine(&op, &f.derivative()).scaled(XComplex::from_f64(2.0));
        assert_eq!(dt, td);
    }

    #[test]
    fn pure_patterns() {
        let op = AffineOp::new(C::new(2.0, 0.0), C::new(1.0, 0.0)).unwrap();
        let f = poly(&[1.0, 1.0, 1.0, 1.0, 1.0], 16);
        let t = noncommuting_product(&op, &[EntireStep::Affine; 3], &f).unwrap();
        assert_eq!(t.normal_form.c, 0);
        let d = noncommuting_product(&op, &[EntireStep::Derivative; 3], &f).unwrap();
        assert_eq!(d.normal_form.c, 0);
        assert_eq!(real(&d.closed), vec![6.0, 24.0]);
        let mixed = [EntireStep::Affine, EntireStep::Derivative, EntireStep::Affine, EntireStep::Derivative];
        assert_eq!(NormalForm::from_pattern(&op, &mixed).c, 3);
    }

    #[test]
    fn random_products_agree() {
        let op = AffineOp::new(C::new(2.0, 0.0), C::new(1.0, 0.0)).unwrap();
        for seed in 0..5 {
            let pattern = random_pattern(seed, 60);
            let mut rng = sample_rng(seed, 1);
            let coeffs: Vec<f64> = (0..70).map(|_| uniform01(&mut rng) - 0.5).collect();
            let f = poly(&coeffs, 128);
            let out = noncommuting_product(&op, &pattern, &f).unwrap();
            let a2 = out.normal_form.a2 as usize;
            assert_eq!(out.direct.degree(), 69usize.checked_sub(a2));
        }
    }

    #[test]
    fn antiderivative() {
        let op = AffineOp::new(C::new(2.0, 0.0), C::new(1.0, 0.0)).unwrap();
        let s = right_inverse(&op, &[EntireStep::Derivative], 0, 8).unwrap();
        assert_eq!(real(&s), vec![0.0, 1.0]);
        assert!(right_inverse(&op, &[EntireStep::Derivative; 8], 0, 8).is_err());
    }

    #[test]
    fn right_inverse_identity() {
        let cases = [
            (2.0, 1.0, ProductRoute::Direct),
            (2.0, 0.0, ProductRoute::Direct),
            (0.5, 1.0, ProductRoute::NormalForm),
            (2.0, 1.0, ProductRoute::NormalForm),
        ];
        for (lambda, b, route) in cases {
            let op = AffineOp::new(C::new(lambda, 0.0), C::new(b, 0.0)).unwrap();
            let (n, k_max) = if lambda < 1.0 { (12, 2) } else { (80, 8) };
            for seed in 0..4 {
                let pattern = random_pattern(100 + seed, n);
                for k in 0..=k_max {
                    let res = right_inverse_residual(&op, &pattern, k, 256, route).unwrap();
                    assert!(res < 1e-6, "λ={lambda} k={k} residual {res}");
                }
            }
        }
    }

    #[test]
    fn classifier_translation_and_derivative() {
        let e = ExpTypeSymbol::exp(C::new(1.0, 0.0), 64).unwrap();
        let cls = phi_d_classifier(&e, &ExpTypeSymbol::derivative(), 0.5, 0.5, &entire_grid(4.0)).unwrap();
        assert_eq!(cls.verdict, EntireVerdict::MixingByEigenvalues);
        assert_eq!(cls.below.unwrap().1, f64::NEG_INFINITY);
        let g3 = 0.5 * (3.0 + libm::log(3.0));
        assert!(cls.above.unwrap().1 >= g3);
        let balanced = ExpTypeSymbol::exp(C::new(-1.0, 0.0), 64).unwrap();
        let flat = phi_d_classifier(&e, &balanced, 0.5, 0.5, &[C::new(0.0, 0.0)]).unwrap();
        assert_eq!(flat.verdict, EntireVerdict::RefineGrid { above: false, below: false });
    }

    #[test]
    fn exponential_eigenvectors() {
        let phi = ExpTypeSymbol::exp(C::new(0.5, 0.25), 40).unwrap();
        for lambda in [C::new(2.0, 0.0), C::new(-1.0, 1.0), C::new(0.0, -1.9)] {
            assert!(eigen_residual(&phi, lambda, 512, 1.0) <= 1e-6);
        }
    }
}
