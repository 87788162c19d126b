use ergolin_core::entire::{
    entire_grid, noncommuting_product, phi_d_classifier, seminorm_trajectory, AffineOp, EntireProductSpec,
    EntireVerdict, ExpTypeSymbol, PolyVector, TRUNCATION,
};
use ergolin_core::rng::{sample_rng, standard_normal};
use ergolin_core::torus::Transformation;
use num_complex::Complex64;
use serde_json::json;

use super::{parse_complex, ActionTable};
use crate::config::{parse_split, Alpha, Config, Omega};
use crate::error::{DriverError, Result};
use crate::output::{complex, field, num, write_csv, write_json};

pub const ACTIONS: ActionTable = &[
    ("product", &["lambda", "shift", "map", "alpha", "b", "n", "truncation", "degree", "omega", "seed", "out"]),
    ("right-inverse", &["lambda", "shift", "map", "alpha", "b", "n", "truncation", "k-max", "radius", "omega", "seed", "out"]),
    ("classify", &["symbol1", "symbol2", "b", "radius", "truncation", "out"]),
];

/// `T_{λ,shift}` on visits to `A1 = [0, b)`, `D` on `A2`.
pub fn spec_from(cfg: &Config) -> Result<EntireProductSpec> {
    let (transformation, alpha) = match cfg.str_or("map", "doubling") {
        "doubling" => (Transformation::Doubling, cfg.str("alpha").map(Alpha::parse).transpose()?),
        "rotation" => {
            let a = Alpha::parse(cfg.str_or("alpha", "golden"))?;
            (a.transformation()?, Some(a))
        }
        other => return Err(DriverError::config(format!("unknown map `{other}` (rotation|doubling)"))),
    };
    Ok(EntireProductSpec {
        op: AffineOp::new(parse_complex(cfg.str_or("lambda", "2"))?, parse_complex(cfg.str_or("shift", "1"))?)?,
        split: parse_split(cfg.str_or("b", "1/2"), alpha.as_ref())?,
        transformation,
        truncation: cfg.get_or("truncation", TRUNCATION)?,
    })
}

/// `derivative`, `exp:<a>` or `poly:<c0>,<c1>,…`.
pub fn parse_symbol(text: &str, terms: usize) -> Result<ExpTypeSymbol> {
    if text == "derivative" {
        return Ok(ExpTypeSymbol::derivative());
    }
    if let Some(a) = text.strip_prefix("exp:") {
        return Ok(ExpTypeSymbol::exp(parse_complex(a)?, terms)?);
    }
    if let Some(c) = text.strip_prefix("poly:") {
        let coeffs = c
            .split(',')
            .map(|x| x.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| DriverError::config(format!("bad polynomial `{text}`")))?;
        return Ok(ExpTypeSymbol::polynomial(&coeffs)?);
    }
    Err(DriverError::config(format!(
        "unknown symbol `{text}` (derivative|exp:<a>|poly:<c0>,<c1>,…)"
    )))
}

/// Standard complex Gaussian coefficients up to `degree`.
pub fn random_poly(degree: usize, truncation: usize, seed: u64, index: u64) -> ergolin_core::Result<PolyVector> {
    let mut rng = sample_rng(seed, index);
    let coeffs: Vec<Complex64> = (0..=degree)
        .map(|_| Complex64::new(standard_normal(&mut rng), standard_normal(&mut rng)))
        .collect();
    PolyVector::from_complex(&coeffs, truncation)
}

pub fn run(action: &str, cfg: &Config) -> Result<()> {
    let out = cfg.str("out");
    match action {
        "product" => {
            let spec = spec_from(cfg)?;
            let n: usize = cfg.get_or("n", 100)?;
            let omega = Omega::from_config(cfg, &spec.transformation, n)?;
            let pattern = spec.pattern(omega.start(), n)?;
            let f = random_poly(cfg.get_or("degree", 150)?, spec.truncation, cfg.get_or("seed", 0)?, 1)?;
            let p = noncommuting_product(&spec.op, &pattern, &f)?;
            let nf = &p.normal_form;
            write_json(
                out,
                &json!({
                    "n": n,
                    "a1": nf.a1,
                    "a2": nf.a2,
                    "c": nf.c.to_string(),
                    "offset": complex(nf.r.to_complex()),
                    "relative_difference": num(p.relative_difference),
                    "log2_weight": num(nf.log2_scale()),
                }),
            )
        }
        "right-inverse" => {
            let spec = spec_from(cfg)?;
            let n: usize = cfg.get_or("n", 100)?;
            let k_max: usize = cfg.get_or("k-max", 8)?;
            let omega = Omega::from_config(cfg, &spec.transformation, n)?;
            let pattern = spec.pattern(omega.start(), n)?;
            let rows = seminorm_trajectory(&spec.op, &pattern, k_max, cfg.get_or("radius", 5.0)?, spec.truncation)?;
            let mut header: Vec<String> = ["n", "c", "a1", "a2"].iter().map(|s| s.to_string()).collect();
            header.extend((0..=k_max).map(|k| format!("log_p_{k}")));
            let header: Vec<&str> = header.iter().map(String::as_str).collect();
            write_csv(
                out,
                &header,
                rows.iter().map(|r| {
                    let mut row = vec![r.n.to_string(), r.c.to_string(), r.a1.to_string(), r.a2.to_string()];
                    row.extend(r.log_seminorms.iter().map(|&x| field(x)));
                    row
                }),
            )
        }
        "classify" => {
            let terms: usize = cfg.get_or("truncation", 64)?;
            let phi1 = parse_symbol(cfg.str_or("symbol1", "derivative"), terms)?;
            let phi2 = parse_symbol(cfg.str_or("symbol2", "exp:1"), terms)?;
            let split = parse_split(cfg.str_or("b", "1/2"), None)?;
            let m1 = split.to_f64();
            let cls = phi_d_classifier(&phi1, &phi2, m1, 1.0 - m1, &entire_grid(cfg.get_or("radius", 4.0)?))?;
            let verdict = match cls.verdict {
                EntireVerdict::MixingByEigenvalues => "MixingByEigenvalues".to_string(),
                EntireVerdict::RefineGrid { .. } => "RefineGrid".to_string(),
            };
            let witness = |w: Option<(Complex64, f64)>| w.map(|(z, lg)| json!({"point": complex(z), "log_g": num(lg)}));
            write_json(
                out,
                &json!({"verdict": verdict, "below": witness(cls.below), "above": witness(cls.above)}),
            )
        }
        _ => Err(DriverError::config(format!("unknown entire action `{action}`"))),
    }
}
