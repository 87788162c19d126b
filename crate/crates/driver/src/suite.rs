//! The acceptance criteria as runnable checks.
//!
//! Each check returns its measurements alongside the verdict; a check passes
//! only when its condition holds and it finishes within its time budget.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use ergolin_core::birkhoff::{
    birkhoff_sums, doubling_coboundary_obstruction, oren_analysis, rational_birkhoff_sums, rational_coboundary,
    CoboundaryOutcome, OrenVerdict, RationalStepFunction, Split, OREN_SEARCH_BOUND, OREN_TOLERANCE,
};
use ergolin_core::cf::{cf_expand, convergents};
use ergolin_core::clt::{kac_sigma2, summarize, CltExperiment, Normalization, MAX_KAC_LAG, PLATEAU_SLACK};
use ergolin_core::entire::{
    noncommuting_product, right_inverse_residual, seminorm_trajectory, seminorms_decreasing, AffineOp,
    EntireProductSpec, ProductRoute,
};
use ergolin_core::hardy::{
    adjoint_apply, balanced_exponential_pair, classify, classify_orbit, default_lambda_grid,
    nonuniversality_certificate, norm_trajectory, product_apply, AnalyticSymbol, CertificateOutcome, CoeffVector,
    HardyProductSpec, Kernel, Verdict, BOUNDARY_SAMPLES, BUILTIN_PAIRS, ORBIT_EVIDENCE_STEPS,
};
use ergolin_core::precision::HighPrecision;
use ergolin_core::rng::{sample_rng, standard_normal};
use ergolin_core::torus::Transformation;
use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::Signed;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::commands::clt::run_samples;
use crate::commands::entire::random_poly;
use crate::config::Omega;
use crate::error::Result;
use crate::output::{num, nums};
use crate::parallel::pool;

/// What a check measured.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub passed: bool,
    pub detail: String,
    pub data: Value,
}

#[derive(Clone, Debug)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    /// Condition held and the budget was met.
    pub passed: bool,
    pub condition_held: bool,
    pub detail: String,
    pub elapsed: Duration,
    pub budget: Duration,
    pub data: Value,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "{:>2}  {:<4}  {:<34} {:>8.2}s / {:>3}s  {}",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.elapsed.as_secs_f64(),
            self.budget.as_secs(),
            self.detail
        )
    }

    pub fn to_json(&self) -> Value {
        json!({
            "id": self.id,
            "name": self.name,
            "passed": self.passed,
            "condition_held": self.condition_held,
            "detail": self.detail,
            "elapsed_seconds": num(self.elapsed.as_secs_f64()),
            "budget_seconds": self.budget.as_secs(),
            "data": self.data,
        })
    }
}

pub struct Criterion {
    pub id: u8,
    pub name: &'static str,
    pub budget_seconds: u64,
    run: fn(u64) -> Result<Outcome>,
}

pub const CRITERIA: [Criterion; 12] = [
    Criterion { id: 1, name: "denjoy-koksma certificate", budget_seconds: 5, run: denjoy_koksma },
    Criterion { id: 2, name: "oren dichotomy", budget_seconds: 30, run: oren_dichotomy },
    Criterion { id: 3, name: "rational coboundary", budget_seconds: 1, run: rational_rotation_coboundary },
    Criterion { id: 4, name: "kac clt", budget_seconds: 60, run: kac_clt },
    Criterion { id: 5, name: "doubling obstruction", budget_seconds: 1, run: doubling_obstruction },
    Criterion { id: 6, name: "kernel eigen-relation", budget_seconds: 1, run: kernel_eigen_relation },
    Criterion { id: 7, name: "product cross-check", budget_seconds: 5, run: product_cross_check },
    Criterion { id: 8, name: "classifier cases", budget_seconds: 30, run: classifier_cases },
    Criterion { id: 9, name: "log-norm slope", budget_seconds: 30, run: log_norm_slope },
    Criterion { id: 10, name: "non-universality certificate", budget_seconds: 30, run: certificate },
    Criterion { id: 11, name: "entire normal form", budget_seconds: 60, run: entire_normal_form },
    Criterion { id: 12, name: "zero-one echo", budget_seconds: 30, run: zero_one_echo },
];

pub fn run_criterion(id: u8, seed: u64) -> Option<CriterionResult> {
    let c = CRITERIA.iter().find(|c| c.id == id)?;
    let start = Instant::now();
    let outcome = (c.run)(seed).unwrap_or_else(|e| Outcome {
        passed: false,
        detail: format!("error: {e}"),
        data: Value::Null,
    });
    let elapsed = start.elapsed();
    let budget = Duration::from_secs(c.budget_seconds);
    let mut detail = outcome.detail;
    if elapsed > budget {
        detail.push_str("; over time budget");
    }
    Some(CriterionResult {
        id: c.id,
        name: c.name,
        passed: outcome.passed && elapsed <= budget,
        condition_held: outcome.passed,
        detail,
        elapsed,
        budget,
        data: outcome.data,
    })
}

/// Runs the selected criteria (all when `only` is empty) one after another,
/// so that each one's timing is its own.
pub fn run_suite(seed: u64, only: &[u8]) -> Vec<CriterionResult> {
    CRITERIA
        .iter()
        .filter(|c| only.is_empty() || only.contains(&c.id))
        .filter_map(|c| run_criterion(c.id, seed))
        .collect()
}

pub fn table(results: &[CriterionResult]) -> String {
    let mut s = String::from(" #  RESULT  CRITERION                          TIME / BUDGET  DETAIL\n");
    for r in results {
        s.push_str(&r.line());
        s.push('\n');
    }
    let passed = results.iter().filter(|r| r.passed).count();
    s.push_str(&format!("{passed}/{} passed\n", results.len()));
    s
}

/// Runs `f` on sample indices `0..count` in the shared pool.
fn per_sample<T, F>(count: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> ergolin_core::Result<T> + Sync + Send,
{
    Ok(pool()?.install(|| (0..count).into_par_iter().map(f).collect::<ergolin_core::Result<Vec<T>>>())?)
}

fn golden_rotation() -> (HighPrecision, Transformation) {
    let alpha = HighPrecision::golden();
    let t = Transformation::rotation(alpha.to_torus());
    (alpha, t)
}

fn denjoy_koksma(seed: u64) -> Result<Outcome> {
    const N: usize = 1_000_000;
    let (alpha, t) = golden_rotation();
    let split = Split::rational(1, 2)?;
    let conv = convergents(&cf_expand(&alpha, 40)?);
    let qs: Vec<usize> = (0..conv.len())
        .map_while(|k| conv.q_u128(k))
        .filter(|&q| q <= N as u128)
        .map(|q| q as usize)
        .collect();
    // |S_q| ≤ 4 checked on the exact fraction num/den.
    let worst = per_sample(16, |i| {
        let omega = Omega::random(&t, N, seed, i);
        let series = birkhoff_sums(&t, split, omega.start(), N)?;
        let mut worst = 0.0f64;
        let mut ok = true;
        for &q in &qs {
            let (num, den) = series.s_exact(q).expect("rational split");
            ok &= num.abs() <= 4 * den;
            worst = worst.max(num.abs() as f64 / den as f64);
        }
        Ok((ok, worst))
    })?;
    let passed = worst.iter().all(|w| w.0);
    let max = worst.iter().map(|w| w.1).fold(0.0, f64::max);
    Ok(Outcome {
        passed,
        detail: format!("max |S_qk| = {max} over {} denominators, 16 ω", qs.len()),
        data: json!({"denominators": qs, "max_abs": nums(&worst.iter().map(|w| w.1).collect::<Vec<_>>())}),
    })
}

fn oren_dichotomy(seed: u64) -> Result<Outcome> {
    const N: usize = 1_000_000;
    const SAMPLES: u64 = 8;
    let (alpha, t) = golden_rotation();

    let bounded_split = Split::real(alpha.mul_int_mod1(3).to_torus())?;
    let bounded_verdict = oren_analysis(
        &bounded_split.step_function(),
        alpha.to_torus(),
        OREN_SEARCH_BOUND,
        OREN_TOLERANCE,
    )
    .verdict;
    // Extrema frozen over [1e5, 1e6] up to the plateau slack.
    let drift = per_sample(SAMPLES, |i| {
        let omega = Omega::random(&t, N, seed, i);
        let s = birkhoff_sums(&t, bounded_split, omega.start(), N)?;
        let tol = PLATEAU_SLACK * s.range(N).max(1.0);
        let d = (s.runmax(N) - s.runmax(N / 10)).max(s.runmin(N / 10) - s.runmin(N));
        Ok((d, tol))
    })?;
    let bounded_ok = bounded_verdict == OrenVerdict::BoundedPredicted && drift.iter().all(|(d, tol)| d <= tol);

    let half = Split::rational(1, 2)?;
    let unbounded_verdict =
        oren_analysis(&half.step_function(), alpha.to_torus(), OREN_SEARCH_BOUND, OREN_TOLERANCE).verdict;
    let growth = per_sample(SAMPLES, |i| {
        let omega = Omega::random(&t, N, seed, SAMPLES + i);
        let s = birkhoff_sums(&t, half, omega.start(), N)?;
        Ok(s.range(N) / s.range(1000))
    })?;
    let unbounded_ok = unbounded_verdict == OrenVerdict::UnboundedPredicted && growth.iter().all(|&g| g >= 2.0);

    let max_drift = drift.iter().map(|d| d.0).fold(0.0, f64::max);
    let min_growth = growth.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(Outcome {
        passed: bounded_ok && unbounded_ok,
        detail: format!(
            "b=3α: {bounded_verdict:?}, max extrema drift {max_drift:.3e}; b=1/2: {unbounded_verdict:?}, min range ratio {min_growth:.3}"
        ),
        data: json!({
            "bounded": {"verdict": format!("{bounded_verdict:?}"), "drift": nums(&drift.iter().map(|d| d.0).collect::<Vec<_>>())},
            "unbounded": {"verdict": format!("{unbounded_verdict:?}"), "range_ratio": nums(&growth)},
        }),
    })
}

fn rational_rotation_coboundary(_seed: u64) -> Result<Outcome> {
    let alpha = Rational64::new(1, 5);
    let f = RationalStepFunction::favourite(Rational64::new(2, 5))?;
    let CoboundaryOutcome::Solution(w) = rational_coboundary(alpha, &f, 1000)? else {
        return Ok(Outcome { passed: false, detail: "no transfer function found".into(), data: Value::Null });
    };
    let spread = w.h.max_value() - w.h.min_value();
    let mut sup = Rational64::from_integer(0);
    for i in 0..1000 {
        let x = Rational64::new(i, 1000);
        for s in rational_birkhoff_sums(alpha, &f, x, 100) {
            sup = sup.max(s.abs());
        }
    }
    let exact = w.residual == Rational64::from_integer(0);
    Ok(Outcome {
        passed: exact && sup <= spread,
        detail: format!("residual {} on {} points; sup|S_n| = {sup} ≤ {spread}", w.residual, w.grid_points),
        data: json!({"residual": w.residual.to_string(), "sup_abs_sum": sup.to_string(), "h_spread": spread.to_string()}),
    })
}

fn kac_clt(seed: u64) -> Result<Outcome> {
    let f = Split::rational(1, 2)?.step_function();
    let exp = CltExperiment {
        transformation: Transformation::Doubling,
        f: f.clone(),
        normalization: Normalization::SqrtN,
        n: 4096,
        samples: 20_000,
        seed,
    };
    let values = run_samples(&exp)?;
    let s = summarize(&exp, &values);
    let ks = s.ks.unwrap_or(f64::INFINITY);
    let sigma2 = kac_sigma2(&f, MAX_KAC_LAG)?;
    Ok(Outcome {
        passed: (0.95..=1.05).contains(&s.variance) && ks <= 0.02,
        detail: format!("variance {:.4}, KS {:.4}, σ² {:.6}", s.variance, ks, sigma2),
        data: json!({"variance": num(s.variance), "mean": num(s.mean), "ks": num(ks), "sigma2": num(sigma2)}),
    })
}

fn doubling_obstruction(_seed: u64) -> Result<Outcome> {
    let ob = doubling_coboundary_obstruction(&Split::rational(1, 2)?, 3, 12)?;
    let limit = -2.0 / (3.0 * PI) + 1e-12;
    let max_im = ob.partial_sums.iter().map(|c| c.im).fold(f64::NEG_INFINITY, f64::max);
    Ok(Outcome {
        passed: ob.partial_sums.len() == 13 && max_im <= limit,
        detail: format!("max Im c = {max_im:.15} vs −2/(3π) = {:.15}", -2.0 / (3.0 * PI)),
        data: json!({"imaginary_parts": nums(&ob.partial_sums.iter().map(|c| c.im).collect::<Vec<_>>())}),
    })
}

fn kernel_eigen_relation(_seed: u64) -> Result<Outcome> {
    const N: usize = 512;
    let symbols = [
        AnalyticSymbol::real_polynomial(&[0.0, 2.0])?,
        AnalyticSymbol::real_polynomial(&[1.0, 0.5])?,
        AnalyticSymbol::real_polynomial(&[1.5, 0.25])?,
    ];
    let mut worst = 0.0f64;
    for phi in &symbols {
        for r in [0.2, 0.4, 0.6, 0.8] {
            for j in 0..4 {
                let lambda = Complex64::from_polar(r, PI / 2.0 * j as f64 + PI / 8.0);
                let k = Kernel::new(lambda, N)?;
                let y = adjoint_apply(phi, &k.coeffs);
                let ev = phi.eval(lambda).conj();
                for i in 0..N - phi.degree() {
                    worst = worst.max((y.0[i] - ev * k.coeffs.0[i]).norm());
                }
            }
        }
    }
    Ok(Outcome {
        passed: worst <= 1e-9,
        detail: format!("max residual {worst:.3e} over 3 symbols × 16 kernels"),
        data: json!({"max_residual": num(worst)}),
    })
}

fn product_cross_check(seed: u64) -> Result<Outcome> {
    const N: usize = 200;
    let mut spec = HardyProductSpec::builtin("mixing-demo")?;
    spec.truncation = 256;
    let diffs = per_sample(8, |i| {
        let omega = Omega::random(&spec.transformation, N, seed, i);
        let mut rng = sample_rng(seed, 1000 + i);
        let x = CoeffVector(
            (0..spec.truncation)
                .map(|_| Complex64::new(standard_normal(&mut rng), standard_normal(&mut rng)))
                .collect(),
        );
        Ok(product_apply(&spec, omega.start(), N, &x)?.relative_difference)
    })?;
    let worst = diffs.iter().copied().fold(0.0, f64::max);
    Ok(Outcome {
        passed: worst <= 1e-8,
        detail: format!("max relative difference {worst:.3e} over 8 ω"),
        data: json!({"relative_difference": nums(&diffs)}),
    })
}

fn classifier_cases(seed: u64) -> Result<Outcome> {
    let grid = default_lambda_grid();
    let verdict = |name: &str| -> Result<(HardyProductSpec, ergolin_core::hardy::Classification)> {
        let spec = HardyProductSpec::builtin(name)?;
        let c = classify(&spec, &grid)?;
        Ok((spec, c))
    };
    let (_, mixing) = verdict("mixing-demo")?;
    let (_, remark) = verdict("remark-3.8")?;
    let (example, _) = verdict("example-5.1")?;
    let (decay_spec, decay) = verdict("norm-decay")?;

    let mixing_ok = mixing.verdict == Verdict::MixingByEigenvalues;
    let remark_ok = remark.verdict == Verdict::LimitCaseInnerProduct && remark.evidence.images_meet_circle == [false, false];

    let checkpoints: Vec<usize> = (100..=1000).collect();
    let inverse_dev = per_sample(8, |i| {
        let omega = Omega::random(&example.transformation, 1000, seed, i);
        let tr = norm_trajectory(&example, omega.start(), &checkpoints)?;
        Ok(tr.rows.iter().map(|r| (r.log_inverse_norm.exp() - 1.0).abs()).fold(0.0, f64::max))
    })?;
    let inverse_ok = inverse_dev.iter().all(|&d| d <= 1e-9);

    let decay_norms = per_sample(8, |i| {
        let omega = Omega::random(&decay_spec.transformation, 200, seed, 100 + i);
        let tr = norm_trajectory(&decay_spec, omega.start(), &[200])?;
        Ok(tr.rows[0].log_norm.exp())
    })?;
    let decay_ok = decay.verdict == Verdict::NonUniversalNormDecay && decay_norms.iter().all(|&x| x <= 1e-6);

    let max_dev = inverse_dev.iter().copied().fold(0.0, f64::max);
    let max_norm = decay_norms.iter().copied().fold(0.0, f64::max);
    Ok(Outcome {
        passed: mixing_ok && remark_ok && inverse_ok && decay_ok,
        detail: format!(
            "{:?}; {:?} images {:?}; max |‖T_n⁻¹‖−1| {max_dev:.1e}; {:?} max ‖T_200‖ {max_norm:.1e}",
            mixing.verdict, remark.verdict, remark.evidence.images_meet_circle, decay.verdict
        ),
        data: json!({
            "mixing_demo": format!("{:?}", mixing.verdict),
            "remark": format!("{:?}", remark.verdict),
            "remark_images_meet_circle": remark.evidence.images_meet_circle,
            "example_inverse_norm_deviation": nums(&inverse_dev),
            "norm_decay": format!("{:?}", decay.verdict),
            "norm_decay_t200": nums(&decay_norms),
        }),
    })
}

fn log_norm_slope(seed: u64) -> Result<Outcome> {
    const N: usize = 10_000;
    let spec = HardyProductSpec::builtin("example-5.1")?;
    let slopes = per_sample(8, |i| {
        let omega = Omega::random(&spec.transformation, N, seed, i);
        let tr = norm_trajectory(&spec, omega.start(), &[N])?;
        Ok(tr.rows[0].log_norm / N as f64)
    })?;
    let worst = slopes.iter().map(|s| (s - 0.5).abs()).fold(0.0, f64::max);
    Ok(Outcome {
        passed: worst <= 0.05,
        detail: format!("max |slope − 1/2| = {worst:.4} over 8 ω"),
        data: json!({"slopes": nums(&slopes)}),
    })
}

fn certificate(seed: u64) -> Result<Outcome> {
    const N: usize = 10_000;
    let (alpha, t) = golden_rotation();
    let split = Split::real(alpha.mul_int_mod1(2).to_torus())?;
    let (phi1, phi2) = balanced_exponential_pair(1.0, &split)?;
    let nonconstant = !phi1.is_constant() && !phi2.is_constant();
    let spec = HardyProductSpec {
        phi1,
        phi2,
        split,
        transformation: t,
        truncation: 64,
        boundary_samples: BOUNDARY_SAMPLES,
    };
    let outcomes = per_sample(8, |i| {
        let omega = Omega::random(&spec.transformation, N, seed, i);
        nonuniversality_certificate(&spec, omega.start(), N)
    })?;
    let mut margins = Vec::new();
    let mut ok = nonconstant;
    let mut reason = String::new();
    for o in &outcomes {
        match o {
            CertificateOutcome::Certificate(c) => {
                margins.push(c.log_bound - c.max_log_norm);
                ok &= c.max_log_norm <= c.log_bound && c.steps == N;
            }
            CertificateOutcome::NoCertificate(why) => {
                ok = false;
                reason = why.to_string();
            }
        }
    }
    let min_margin = margins.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(Outcome {
        passed: ok,
        detail: if reason.is_empty() {
            format!("8/8 certificates; min log margin {min_margin:.4}")
        } else {
            format!("no certificate: {reason}")
        },
        data: json!({"log_margins": nums(&margins)}),
    })
}

fn entire_normal_form(seed: u64) -> Result<Outcome> {
    const N: usize = 100;
    const TRUNC: usize = 1024;
    const PATTERNS: u64 = 50;
    let half = Split::rational(1, 2)?;
    let spec = |lambda: f64| -> Result<EntireProductSpec> {
        Ok(EntireProductSpec {
            op: AffineOp::new(Complex64::new(lambda, 0.0), Complex64::new(1.0, 0.0))?,
            split: half,
            transformation: Transformation::Doubling,
            truncation: TRUNC,
        })
    };
    let grow = spec(2.0)?;
    let shrink = spec(0.5)?;
    let rows = per_sample(PATTERNS, |i| {
        let omega = Omega::random(&Transformation::Doubling, N, seed, i);
        let pattern = grow.pattern(omega.start(), N)?;
        let f = random_poly(150, TRUNC, seed, 10_000 + i)?;
        let product = noncommuting_product(&grow.op, &pattern, &f)?.relative_difference;
        let mut residual = 0.0f64;
        for k in 0..=8 {
            residual = residual.max(right_inverse_residual(&grow.op, &pattern, k, TRUNC, ProductRoute::Direct)?);
        }
        let up = seminorm_trajectory(&grow.op, &pattern, 8, 5.0, TRUNC)?;
        let down = seminorm_trajectory(&shrink.op, &pattern, 8, 5.0, TRUNC)?;
        Ok((
            product,
            residual,
            seminorms_decreasing(&up, 50, 0.0),
            seminorms_decreasing(&down, 50, 0.0),
            down.last().map_or(f64::NAN, |r| r.max_log()) - down[49].max_log(),
        ))
    })?;
    let max_product = rows.iter().map(|r| r.0).fold(0.0, f64::max);
    let max_residual = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    let up_ok = rows.iter().filter(|r| r.2).count();
    let down_ok = rows.iter().filter(|r| r.3).count();
    let min_rise = rows.iter().map(|r| r.4).fold(f64::INFINITY, f64::min);
    let passed = max_product <= 1e-9 && max_residual <= 1e-6 && up_ok == PATTERNS as usize && down_ok == PATTERNS as usize;
    Ok(Outcome {
        passed,
        detail: format!(
            "product diff {max_product:.1e}; TS residual {max_residual:.1e}; p_5 decreasing from n=50: λ=2 {up_ok}/{PATTERNS}, λ=1/2 {down_ok}/{PATTERNS} (ln p_5 rises by ≥ {min_rise:.1})"
        ),
        data: json!({
            "product_relative_difference": num(max_product),
            "right_inverse_residual": num(max_residual),
            "decreasing_lambda_2": up_ok,
            "decreasing_lambda_half": down_ok,
            "min_log_rise_lambda_half": num(min_rise),
        }),
    })
}

fn zero_one_echo(seed: u64) -> Result<Outcome> {
    let grid = default_lambda_grid();
    let mut summary = Vec::new();
    let mut ok = true;
    for name in BUILTIN_PAIRS {
        let spec = HardyProductSpec::builtin(name)?;
        let verdicts = per_sample(32, |i| {
            let omega = Omega::random(&spec.transformation, ORBIT_EVIDENCE_STEPS, seed, i);
            Ok(classify_orbit(&spec, omega.start(), &grid, ORBIT_EVIDENCE_STEPS)?.verdict)
        })?;
        let same = verdicts.windows(2).all(|w| w[0] == w[1]);
        ok &= same;
        summary.push(json!({"pair": name, "verdict": format!("{:?}", verdicts[0]), "identical": same}));
    }
    let names: Vec<String> = summary
        .iter()
        .map(|s| format!("{}={}", s["pair"].as_str().unwrap_or(""), s["verdict"].as_str().unwrap_or("")))
        .collect();
    Ok(Outcome {
        passed: ok,
        detail: format!("32 ω each: {}", names.join(", ")),
        data: Value::Array(summary),
    })
}
