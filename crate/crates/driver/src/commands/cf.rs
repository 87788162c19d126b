use ergolin_core::cf::{
    cf_expand, cf_of_ratio, convergents, discrepancy_qk_b, hypothesis_checks, ostrowski, qk_alpha_distance,
    qk_b_distances, ContinuedFraction, ExpansionStatus,
};
use serde_json::json;

use super::{high_precision_b, ActionTable};
use crate::config::{parse_split, Alpha, Config};
use crate::error::{DriverError, Result};
use crate::output::{field, num, nums, write_csv, write_json};

pub const ACTIONS: ActionTable = &[
    ("expand", &["alpha", "depth", "out"]),
    ("convergents", &["alpha", "depth", "out"]),
    ("ostrowski", &["alpha", "b", "depth", "out"]),
    ("discrepancy", &["alpha", "b", "k-max", "out"]),
    ("hypotheses", &["alpha", "b", "n", "etas", "r-max", "out"]),
];

pub const DEFAULT_DEPTH: usize = 64;

/// Euclid on `p/q`, or the certified expansion of a real α.
pub fn expansion(alpha: &Alpha, depth: usize) -> Result<ContinuedFraction> {
    Ok(match alpha {
        Alpha::Rational { p, q } => cf_of_ratio(*p, *q)?,
        Alpha::Real { value, .. } => cf_expand(value, depth)?,
    })
}

fn status_name(s: ExpansionStatus) -> &'static str {
    match s {
        ExpansionStatus::Complete => "Complete",
        ExpansionStatus::PrecisionExhausted => "PrecisionExhausted",
        ExpansionStatus::Terminated => "Terminated",
    }
}

pub fn run(action: &str, cfg: &Config) -> Result<()> {
    let alpha = Alpha::parse(cfg.str_or("alpha", "golden"))?;
    let out = cfg.str("out");
    match action {
        "expand" => {
            let cf = expansion(&alpha, cfg.get_or("depth", DEFAULT_DEPTH)?)?;
            write_json(
                out,
                &json!({
                    "alpha": num(cf.alpha().to_f64()),
                    "depth": cf.depth(),
                    "partial_quotients": cf.partial_quotients(),
                    "status": status_name(cf.status()),
                }),
            )
        }
        "convergents" => {
            let cf = expansion(&alpha, cfg.get_or("depth", DEFAULT_DEPTH)?)?;
            let conv = convergents(&cf);
            let rows = (0..conv.len()).map(|k| {
                vec![
                    k.to_string(),
                    cf.a(k).map_or(String::new(), |a| a.to_string()),
                    conv.p[k].to_string(),
                    conv.q[k].to_string(),
                    field(qk_alpha_distance(&cf, &conv, k)),
                ]
            });
            write_csv(out, &["k", "a_k", "p_k", "q_k", "dist_qk_alpha"], rows)
        }
        "ostrowski" => {
            let cf = expansion(&alpha, cfg.get_or("depth", DEFAULT_DEPTH)?)?;
            let b = high_precision_b(cfg.str_or("b", "0.5"), &alpha)?;
            let exp = ostrowski(&b, &cf)?;
            let conv = convergents(&cf);
            write_json(
                out,
                &json!({
                    "b": num(b.to_f64()),
                    "digits": exp.digits,
                    "residual": num(exp.residual),
                    "status": format!("{:?}", exp.status),
                    "tail_digit_ratio": num(exp.tail_digit_ratio(&cf)),
                    "vanishing_regime": exp.in_vanishing_regime(&cf),
                    "weight": exp.weight(&conv).to_string(),
                }),
            )
        }
        "discrepancy" => {
            let k_max: usize = cfg.get_or("k-max", 48)?;
            let cf = expansion(&alpha, k_max + 8)?;
            let b = high_precision_b(cfg.str_or("b", "0.5"), &alpha)?;
            write_json(
                out,
                &json!({
                    "b": num(b.to_f64()),
                    "k_max": k_max,
                    "star_discrepancy": num(discrepancy_qk_b(&cf, &b, k_max)?),
                    "dist_qk_b": nums(&qk_b_distances(&cf, &b, k_max)?),
                }),
            )
        }
        "hypotheses" => {
            let n: usize = cfg.get_or("n", 40)?;
            let cf = expansion(&alpha, n + 8)?;
            let split = parse_split(cfg.str_or("b", "0.5"), Some(&alpha))?;
            let etas: Vec<f64> = cfg.list("etas")?.unwrap_or_else(|| vec![0.01, 0.05, 0.1]);
            let report = hypothesis_checks(&cf, &split.step_function(), n, &etas, cfg.get_or("r-max", 16)?)?;
            let growth: Vec<_> = report
                .growth
                .iter()
                .map(|g| json!({"p": num(g.p), "a": num(g.a)}))
                .collect();
            let eta: Vec<_> = report
                .eta_curve
                .iter()
                .map(|e| json!({"eta": num(e.eta), "count": e.count, "fraction": num(e.fraction)}))
                .collect();
            write_json(
                out,
                &json!({
                    "growth": growth,
                    "eta_curve": eta,
                    "gamma_averages": nums(&report.gamma_averages),
                    "r_max": report.r_max,
                }),
            )
        }
        _ => Err(DriverError::config(format!("unknown cf action `{action}`"))),
    }
}
