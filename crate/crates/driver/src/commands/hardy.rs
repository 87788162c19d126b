use ergolin_core::hardy::{
    balanced_exponential_pair, builtin_symbols, classify, classify_orbit, default_lambda_grid, eigen_trajectory,
    nonuniversality_certificate, norm_trajectory, outer_factor, product_apply, right_inverse_probe,
    CertificateOutcome, Classification, CoeffVector, HardyProductSpec, SubsequenceRule, BOUNDARY_SAMPLES,
    ORBIT_EVIDENCE_STEPS, TRUNCATION,
};
use ergolin_core::rng::{sample_rng, standard_normal};
use ergolin_core::torus::Transformation;
use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::{json, Value};

use super::{complex_list, ActionTable};
use crate::config::{parse_split, Alpha, Config, Omega};
use crate::error::{DriverError, Result};
use crate::output::{complex, field, num, write_csv, write_json};
use crate::parallel::pool;

pub const ACTIONS: ActionTable = &[
    ("classify", &["pair", "map", "alpha", "b", "truncation", "out"]),
    ("product", &["pair", "map", "alpha", "b", "truncation", "n", "omega", "seed", "out"]),
    ("eigen", &["pair", "map", "alpha", "b", "truncation", "n", "z", "omega", "seed", "out"]),
    ("norms", &["pair", "map", "alpha", "b", "truncation", "checkpoints", "omega", "seed", "out"]),
    ("right-inverse", &["pair", "map", "alpha", "b", "truncation", "n", "rule", "z", "max-checks", "omega", "seed", "out"]),
    ("certificate", &["pair", "map", "alpha", "b", "truncation", "n", "omega", "seed", "out"]),
    ("orbit-verdict", &["pair", "map", "alpha", "b", "truncation", "n", "samples", "seed", "out"]),
    ("outer", &["pair", "map", "alpha", "b", "truncation", "z", "quad", "out"]),
];

/// Symbols, partition and driving map from `pair`, `map`, `alpha`, `b`.
///
/// `pair` is a built-in name or `balanced:<s>`; the default setting is the
/// doubling map with `A1 = [0, 1/2)`.
pub fn spec_from(cfg: &Config, default_pair: &str) -> Result<HardyProductSpec> {
    let (transformation, alpha) = match cfg.str_or("map", "doubling") {
        "doubling" => (Transformation::Doubling, cfg.str("alpha").map(Alpha::parse).transpose()?),
        "rotation" => {
            let a = Alpha::parse(cfg.str_or("alpha", "golden"))?;
            (a.transformation()?, Some(a))
        }
        other => return Err(DriverError::config(format!("unknown map `{other}` (rotation|doubling)"))),
    };
    let split = parse_split(cfg.str_or("b", "1/2"), alpha.as_ref())?;
    let name = cfg.str_or("pair", default_pair);
    let (phi1, phi2) = match name.strip_prefix("balanced:") {
        Some(s) => {
            let s: f64 = s
                .parse()
                .map_err(|_| DriverError::config(format!("bad exponent in `{name}`")))?;
            balanced_exponential_pair(s, &split)?
        }
        None => builtin_symbols(name)?,
    };
    Ok(HardyProductSpec {
        phi1,
        phi2,
        split,
        transformation,
        truncation: cfg.get_or("truncation", TRUNCATION)?,
        boundary_samples: BOUNDARY_SAMPLES,
    })
}

pub fn classification_json(c: &Classification) -> Value {
    let e = &c.evidence;
    json!({
        "verdict": format!("{:?}", c.verdict),
        "evidence": {
            "lambda": {"point": complex(e.lambda.0), "log_g": num(e.lambda.1)},
            "mu": {"point": complex(e.mu.0), "log_g": num(e.mu.1)},
            "boundary_log_min": num(e.boundary_log_min),
            "boundary_log_max": num(e.boundary_log_max),
            "sup_norms": [num(e.sup_norms[0]), num(e.sup_norms[1])],
            "inf_moduli": [num(e.inf_moduli[0]), num(e.inf_moduli[1])],
            "zeros_inside": e.zeros_inside,
            "images_meet_circle": e.images_meet_circle,
            "birkhoff_bounded": e.birkhoff_bounded,
        },
    })
}

fn rule(text: &str) -> Result<SubsequenceRule> {
    match text {
        "record-high" => Ok(SubsequenceRule::RecordHigh),
        "record-low" => Ok(SubsequenceRule::RecordLow),
        "balanced" => Ok(SubsequenceRule::Balanced),
        other => Err(DriverError::config(format!(
            "unknown rule `{other}` (record-high|record-low|balanced)"
        ))),
    }
}

fn default_z() -> Vec<Complex64> {
    vec![
        Complex64::new(0.0, 0.0),
        Complex64::new(0.5, 0.0),
        Complex64::new(-0.5, 0.0),
        Complex64::new(0.0, 0.5),
        Complex64::new(0.9, 0.0),
    ]
}

pub fn run(action: &str, cfg: &Config) -> Result<()> {
    // Right inverses only exist for inner symbols.
    let default_pair = if action == "right-inverse" { "remark-3.8" } else { "mixing-demo" };
    let spec = spec_from(cfg, default_pair)?;
    let out = cfg.str("out");
    let n: usize = cfg.get_or("n", 1000)?;
    match action {
        "classify" => write_json(out, &classification_json(&classify(&spec, &default_lambda_grid())?)),
        "product" => {
            let omega = Omega::from_config(cfg, &spec.transformation, n)?;
            let mut rng = sample_rng(cfg.get_or("seed", 0)?, 1);
            let x = CoeffVector(
                (0..spec.truncation)
                    .map(|_| Complex64::new(standard_normal(&mut rng), standard_normal(&mut rng)))
                    .collect(),
            );
            let p = product_apply(&spec, omega.start(), n, &x)?;
            write_json(
                out,
                &json!({
                    "n": n,
                    "a1": p.a1,
                    "a2": p.a2,
                    "relative_difference": num(p.relative_difference),
                    "norm_in": num(x.norm()),
                    "norm_out": num(p.closed.norm()),
                }),
            )
        }
        "eigen" => {
            let z = complex_list(cfg, "z")?.unwrap_or_else(default_z);
            let omega = Omega::from_config(cfg, &spec.transformation, n)?;
            let tr = eigen_trajectory(&spec, omega.start(), &z, n)?;
            let mut header = vec!["n".to_string()];
            header.extend((0..z.len()).map(|i| format!("log_modulus_{i}")));
            let header: Vec<&str> = header.iter().map(String::as_str).collect();
            let rows = (0..=n).map(|k| {
                let mut row = vec![k.to_string()];
                row.extend(tr.log_modulus.iter().map(|lm| field(lm[k])));
                row
            });
            write_csv(out, &header, rows)
        }
        "norms" => {
            let checkpoints: Vec<usize> = cfg
                .list("checkpoints")?
                .unwrap_or_else(|| (1..=10).map(|k| 100 * k).collect());
            let last = checkpoints.last().copied().unwrap_or(0);
            let omega = Omega::from_config(cfg, &spec.transformation, last)?;
            let tr = norm_trajectory(&spec, omega.start(), &checkpoints)?;
            let rows = tr.rows.iter().map(|r| {
                vec![r.n.to_string(), r.a1.to_string(), r.a2.to_string(), field(r.log_norm), field(r.log_inverse_norm)]
            });
            write_csv(out, &["n", "a1", "a2", "log_norm", "log_inverse_norm"], rows)
        }
        "right-inverse" => {
            let z = complex_list(cfg, "z")?.unwrap_or_else(|| vec![Complex64::new(0.3, 0.0), Complex64::new(0.0, 0.5)]);
            let omega = Omega::from_config(cfg, &spec.transformation, n)?;
            let rep = right_inverse_probe(
                &spec,
                omega.start(),
                n,
                rule(cfg.str_or("rule", "record-high"))?,
                &z,
                cfg.get_or("max-checks", 16)?,
            )?;
            let rows = rep.rows.iter().map(|r| {
                vec![
                    r.n.to_string(),
                    r.s.to_string(),
                    field(r.z.re),
                    field(r.z.im),
                    field(r.residual),
                    field(r.norm),
                    field(r.bound),
                ]
            });
            write_csv(out, &["n", "s", "z_re", "z_im", "residual", "norm", "bound"], rows)
        }
        "certificate" => {
            let omega = Omega::from_config(cfg, &spec.transformation, n)?;
            let value = match nonuniversality_certificate(&spec, omega.start(), n)? {
                CertificateOutcome::Certificate(c) => json!({
                    "certificate": true,
                    "sup_birkhoff": num(c.sup_birkhoff),
                    "log_sup_outer": [num(c.log_sup_outer[0]), num(c.log_sup_outer[1])],
                    "log_bound": num(c.log_bound),
                    "max_log_norm": num(c.max_log_norm),
                    "steps": c.steps,
                }),
                CertificateOutcome::NoCertificate(why) => json!({"certificate": false, "reason": why}),
            };
            write_json(out, &value)
        }
        "orbit-verdict" => {
            let n = cfg.get_or("n", ORBIT_EVIDENCE_STEPS)?;
            let samples: u64 = cfg.get_or("samples", 32)?;
            let seed = cfg.get_or("seed", 0)?;
            let grid = default_lambda_grid();
            let verdicts = pool()?.install(|| {
                (0..samples)
                    .into_par_iter()
                    .map(|i| {
                        let omega = Omega::random(&spec.transformation, n, seed, i);
                        classify_orbit(&spec, omega.start(), &grid, n)
                    })
                    .collect::<ergolin_core::Result<Vec<_>>>()
            })?;
            let names: Vec<String> = verdicts.iter().map(|v| format!("{:?}", v.verdict)).collect();
            let identical = names.windows(2).all(|w| w[0] == w[1]);
            write_json(
                out,
                &json!({
                    "symbol_verdict": verdicts.first().map(|v| format!("{:?}", v.symbol_verdict)),
                    "verdicts": names,
                    "identical": identical,
                }),
            )
        }
        "outer" => {
            let z = complex_list(cfg, "z")?.unwrap_or_else(|| vec![Complex64::new(0.5, 0.0)]);
            let quad: usize = cfg.get_or("quad", 4096)?;
            let mut rows = Vec::new();
            for (i, phi) in [&spec.phi1, &spec.phi2].into_iter().enumerate() {
                for &w in &z {
                    let o = outer_factor(phi, w, quad)?;
                    rows.push(json!({
                        "symbol": i + 1,
                        "z": complex(w),
                        "outer": complex(o.value),
                        "inner": complex(o.inner),
                        "regularized": o.regularized,
                    }));
                }
            }
            write_json(out, &Value::Array(rows))
        }
        _ => Err(DriverError::config(format!("unknown hardy action `{action}`"))),
    }
}
