use ergolin_core::birkhoff::{birkhoff_sums, birkhoff_values, fourier_coeffs, Split, StepFunction};
use ergolin_core::cf::{cf_expand, cf_of_ratio, convergents, ostrowski, ExpansionStatus};
use ergolin_core::entire::{
    apply_affine, apply_pattern, noncommuting_product, AffineOp, EntireStep, NormalForm, PolyVector,
};
use ergolin_core::hardy::{adjoint_apply, multiply_apply, AnalyticSymbol, CoeffVector, Kernel};
use ergolin_core::precision::HighPrecision;
use ergolin_core::stats::{ks_normal, star_discrepancy};
use ergolin_core::torus::{orbit, BitStream, Start, TorusPoint, Transformation};
use ergolin_core::xfloat::XComplex;
use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rotation_orbit_is_exact(alpha in any::<u128>(), start in any::<u128>(), n in 1usize..500) {
        let a = TorusPoint::from_frac(alpha);
        let w = TorusPoint::from_frac(start);
        let pts = orbit(&Transformation::rotation(a), Start::Point(w), n).unwrap();
        for (i, p) in pts.iter().enumerate() {
            prop_assert_eq!(*p, w + a.mul_int(i as i128));
        }
    }

    #[test]
    fn rational_rotation_has_period_q(p in 1u64..50, q in 2u64..50, start in any::<u128>()) {
        prop_assume!(p < q && num_integer::gcd(p, q) == 1);
        let t = Transformation::rational(p, q).unwrap();
        let pts = orbit(&t, Start::Point(TorusPoint::from_frac(start)), q as usize + 1).unwrap();
        prop_assert_eq!(pts[0], pts[q as usize]);
    }

    #[test]
    fn doubling_reads_bits(bits in prop::collection::vec(0u8..2, 140..200)) {
        let s = BitStream::from_bits(&bits).unwrap();
        let pts = orbit(&Transformation::Doubling, Start::Bits(&s), 12).unwrap();
        for (j, p) in pts.iter().enumerate() {
            prop_assert_eq!((*p >= TorusPoint::HALF) as u8, bits[j]);
        }
    }

    #[test]
    fn counters_match_direct_sums(alpha in any::<u128>(), start in any::<u128>(), b in 1u128..u128::MAX, n in 1usize..400) {
        let t = Transformation::rotation(TorusPoint::from_frac(alpha));
        let split = Split::real(TorusPoint::from_frac(b)).unwrap();
        let w = Start::Point(TorusPoint::from_frac(start));
        let series = birkhoff_sums(&t, split, w, n).unwrap();
        prop_assert_eq!(series.a1(n) + series.a2(n), n as u64);
        let direct = birkhoff_values(&t, &split.step_function(), w, n).unwrap()[n];
        prop_assert!((series.s(n) - direct).abs() <= 1e-9 * (1.0 + direct.abs()));
        prop_assert!(series.runmin(n) <= series.s(n) && series.s(n) <= series.runmax(n));
    }

    #[test]
    fn convergents_of_rationals(p in 1u64..1_000_000, q in 2u64..1_000_000) {
        prop_assume!(p < q);
        let cf = cf_of_ratio(p, q).unwrap();
        prop_assert_eq!(cf.status(), ExpansionStatus::Terminated);
        // The rounded 256-bit value loses at most the final digit.
        let rounded = cf_expand(&HighPrecision::from_ratio_u64(p, q).unwrap(), 64).unwrap();
        let k = rounded.depth();
        prop_assert!(k + 1 >= cf.depth());
        prop_assert_eq!(rounded.partial_quotients(), &cf.partial_quotients()[..k]);
        let conv = convergents(&cf);
        for n in 1..conv.len() {
            prop_assert_eq!(conv.determinant(n).abs(), BigInt::one());
        }
        let g = num_integer::gcd(p, q);
        let last = conv.len() - 1;
        prop_assert_eq!(&conv.p[last], &BigUint::from(p / g));
        prop_assert_eq!(&conv.q[last], &BigUint::from(q / g));
    }

    #[test]
    fn ostrowski_reconstructs(frac in any::<u128>()) {
        let cf = cf_expand(&HighPrecision::golden(), 120).unwrap();
        let conv = convergents(&cf);
        let b = HighPrecision::from_parts(BigUint::from(frac) << 128u32, 0);
        let exp = ostrowski(&b, &cf).unwrap();
        let back = exp.reconstruct(&cf, &conv);
        let err = back.distance(TorusPoint::from_frac(frac));
        prop_assert!(err <= 1e-20, "error {}", err);
        for (k, &d) in exp.digits.iter().enumerate() {
            prop_assert!(d <= cf.a(k + 1).unwrap_or(u64::MAX));
        }
    }

    #[test]
    fn fourier_bounded_by_variation(cuts in prop::collection::btree_set(1u128..u128::MAX, 1..6), seed in any::<u64>()) {
        let mut bps = vec![TorusPoint::ZERO];
        bps.extend(cuts.iter().map(|&x| TorusPoint::from_frac(x)));
        let vals: Vec<f64> = (0..bps.len()).map(|i| ((seed >> (i * 5)) % 7) as f64 - 3.0).collect();
        let f = StepFunction::new(bps, vals).unwrap();
        let data = fourier_coeffs(&f, 64);
        for r in 1..=64i64 {
            let g = data.gamma(r).unwrap();
            prop_assert!(g.norm() <= f.variation() / (2.0 * std::f64::consts::PI) + 1e-12);
        }
    }

    #[test]
    fn adjoint_pairing(coeffs in prop::collection::vec(-2.0f64..2.0, 1..6), xs in prop::collection::vec(-1.0f64..1.0, 8..40)) {
        let phi = AnalyticSymbol::real_polynomial(&coeffs).unwrap();
        let x = CoeffVector(xs.iter().map(|&v| c(v, -v / 2.0)).collect());
        let y = CoeffVector(xs.iter().rev().map(|&v| c(v * v, v)).collect());
        let mx = multiply_apply(&phi, &x);
        let y = y.truncated(mx.len());
        let lhs = mx.inner(&y);
        let rhs = x.truncated(mx.len()).inner(&adjoint_apply(&phi, &y));
        prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + lhs.norm()));
    }

    #[test]
    fn kernels_are_eigenvectors(coeffs in prop::collection::vec(-2.0f64..2.0, 1..6), r in 0.0f64..0.8, t in 0.0f64..6.3) {
        let phi = AnalyticSymbol::real_polynomial(&coeffs).unwrap();
        let lambda = Complex64::from_polar(r, t);
        let k = Kernel::new(lambda, 256).unwrap();
        let y = adjoint_apply(&phi, &k.coeffs);
        let ev = phi.eval(lambda).conj();
        for j in 0..256 - coeffs.len() {
            prop_assert!((y.0[j] - ev * k.coeffs.0[j]).norm() <= 1e-12);
        }
    }

    #[test]
    fn commutation_on_monomials(lr in -2.0f64..2.0, li in -2.0f64..2.0, br in -2.0f64..2.0, bi in -2.0f64..2.0, k in 0usize..40) {
        prop_assume!(lr.abs() + li.abs() > 0.1);
        let op = AffineOp::new(c(lr, li), c(br, bi)).unwrap();
        let f = PolyVector::monomial(64, k).unwrap();
        let dt = apply_affine(&op, &f).derivative();
        let td = apply_affine(&op, &f.derivative()).scaled(XComplex::new(c(lr, li)));
        let scale = dt.coeffs().iter().chain(td.coeffs()).map(|z| z.log2_abs()).fold(f64::NEG_INFINITY, f64::max);
        for (a, b) in dt.coeffs().iter().zip(td.coeffs()) {
            let d = (*a - *b).log2_abs();
            prop_assert!(d <= scale - 39.0, "difference 2^{} at scale 2^{}", d, scale);
        }
    }

    #[test]
    fn degree_bookkeeping(pattern in prop::collection::vec(any::<bool>(), 1..40), deg in 0usize..30) {
        let op = AffineOp::new(c(2.0, 0.0), c(1.0, 0.0)).unwrap();
        let steps: Vec<EntireStep> = pattern.iter().map(|&t| if t { EntireStep::Affine } else { EntireStep::Derivative }).collect();
        let f = PolyVector::monomial(64, deg).unwrap();
        let a2 = steps.iter().filter(|s| **s == EntireStep::Derivative).count();
        let out = apply_pattern(&op, &steps, &f);
        prop_assert_eq!(out.degree(), deg.checked_sub(a2));
    }

    #[test]
    fn normal_form_matches_direct(pattern in prop::collection::vec(any::<bool>(), 1..60), seed in any::<u64>()) {
        let op = AffineOp::new(c(2.0, 0.0), c(1.0, 0.0)).unwrap();
        let steps: Vec<EntireStep> = pattern.iter().map(|&t| if t { EntireStep::Affine } else { EntireStep::Derivative }).collect();
        let coeffs: Vec<Complex64> = (0..70).map(|i| c(((seed >> (i % 60)) & 7) as f64 - 3.5, (i % 3) as f64)).collect();
        let f = PolyVector::from_complex(&coeffs, 128).unwrap();
        let out = noncommuting_product(&op, &steps, &f).unwrap();
        let nf = NormalForm::from_pattern(&op, &steps);
        let t_before_d: u128 = (0..steps.len())
            .map(|j| if steps[j] == EntireStep::Derivative { steps[..j].iter().filter(|s| **s == EntireStep::Affine).count() as u128 } else { 0 })
            .sum();
        prop_assert_eq!(nf.c, t_before_d);
        prop_assert!(nf.c <= nf.a1 as u128 * nf.a2 as u128);
        prop_assert!(out.relative_difference <= 1e-9);
    }

    #[test]
    fn xcomplex_arithmetic(a in -1e6f64..1e6, b in -1e6f64..1e6, x in -1e6f64..1e6, y in -1e6f64..1e6) {
        let (p, q) = (c(a, b), c(x, y));
        let (xp, xq) = (XComplex::new(p), XComplex::new(q));
        prop_assert!(((xp * xq).to_complex() - p * q).norm() <= 1e-15 * (p * q).norm().max(1e-300) + 1e-300);
        prop_assert!(((xp + xq).to_complex() - (p + q)).norm() <= 1e-15 * (p.norm() + q.norm()));
    }

    #[test]
    fn statistics_ranges(xs in prop::collection::vec(-5.0f64..5.0, 1..200), us in prop::collection::vec(0.0f64..1.0, 1..200)) {
        let ks = ks_normal(&xs);
        prop_assert!((0.0..=1.0).contains(&ks));
        let d = star_discrepancy(&us);
        prop_assert!(d >= 0.5 / us.len() as f64 - 1e-15 && d <= 1.0);
    }
}

#[test]
fn exact_commutation_oracle() {
    // D∘T − λ T∘D on z^k with λ = 2, b = 1, computed in exact integers.
    let binom_shift = |k: usize| -> Vec<BigInt> {
        // (2z + 1)^k
        let mut row = vec![BigInt::one()];
        for _ in 0..k {
            let mut next = vec![BigInt::zero(); row.len() + 1];
            for (i, v) in row.iter().enumerate() {
                next[i] += v;
                next[i + 1] += v * 2;
            }
            row = next;
        }
        row
    };
    let op = AffineOp::new(c(2.0, 0.0), c(1.0, 0.0)).unwrap();
    for k in 1..40 {
        let t = binom_shift(k);
        let dt: Vec<BigInt> = (1..t.len()).map(|j| &t[j] * j).collect();
        let td: Vec<BigInt> = binom_shift(k - 1).iter().map(|v| v * k * 2).collect();
        assert_eq!(dt, td);
        let lib = apply_affine(&op, &PolyVector::monomial(64, k).unwrap()).derivative();
        for (j, v) in dt.iter().enumerate() {
            let exact: f64 = v.to_string().parse().unwrap();
            let got = lib.coeff(j).to_complex().re;
            assert!((got - exact).abs() <= 1e-12 * exact.abs(), "k={k} j={j}");
        }
    }
}
