use ergolin_core::birkhoff::{
    birkhoff_sums, denjoy_koksma_table, doubling_coboundary_obstruction, favourite_fourier_coeffs, oren_analysis,
    rational_birkhoff_sums, rational_coboundary, variance_exact, CoboundaryOutcome, RationalStepFunction,
    OREN_SEARCH_BOUND, OREN_TOLERANCE,
};
use ergolin_core::cf::convergents;
use num_rational::Rational64;
use num_traits::Signed;
use serde_json::{json, Value};

use super::cf::{expansion, DEFAULT_DEPTH};
use super::ActionTable;
use crate::config::{parse_rational, parse_split, transformation, Alpha, Config, Omega};
use crate::error::{DriverError, Result};
use crate::output::{complex, field, num, write_csv, write_json};

pub const ACTIONS: ActionTable = &[
    ("sums", &["map", "alpha", "b", "omega", "seed", "n", "stride", "out"]),
    ("oren", &["alpha", "b", "bound", "out"]),
    ("denjoy-koksma", &["alpha", "b", "omega", "seed", "n", "out"]),
    ("coboundary", &["alpha", "b", "grid", "n", "out"]),
    ("obstruction", &["b", "q", "k-max", "out"]),
    ("fourier", &["b", "r-max", "out"]),
    ("variance", &["alpha", "b", "n", "r-max", "out"]),
];

fn rational_text(r: &Rational64) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

fn step_function_json(f: &RationalStepFunction) -> Value {
    json!({
        "breakpoints": f.breakpoints().iter().map(rational_text).collect::<Vec<_>>(),
        "values": f.values().iter().map(rational_text).collect::<Vec<_>>(),
    })
}

pub fn run(action: &str, cfg: &Config) -> Result<()> {
    let out = cfg.str("out");
    match action {
        "sums" => {
            let (t, alpha) = transformation(cfg)?;
            let split = parse_split(cfg.str_or("b", "0.5"), alpha.as_ref())?;
            let n: usize = cfg.get_or("n", 1000)?;
            let stride: usize = cfg.get_or("stride", 1)?;
            if stride == 0 {
                return Err(DriverError::config("stride must be positive"));
            }
            let omega = Omega::from_config(cfg, &t, n)?;
            let series = birkhoff_sums(&t, split, omega.start(), n)?;
            let rows = series.rows().filter(|r| r.n as usize % stride == 0 || r.n as usize == n).map(|r| {
                vec![
                    r.n.to_string(),
                    r.a1.to_string(),
                    r.a2.to_string(),
                    field(r.s),
                    field(r.runmax),
                    field(r.runmin),
                ]
            });
            write_csv(out, &["n", "a1", "a2", "S", "runmax", "runmin"], rows)
        }
        "oren" => {
            let alpha = Alpha::parse(cfg.str_or("alpha", "golden"))?;
            let split = parse_split(cfg.str_or("b", "0.5"), Some(&alpha))?;
            let report = oren_analysis(
                &split.step_function(),
                alpha.torus(),
                cfg.get_or("bound", OREN_SEARCH_BOUND)?,
                OREN_TOLERANCE,
            );
            let cosets: Vec<Value> = report
                .cosets
                .iter()
                .map(|c| {
                    json!({
                        "delta_sum": num(c.delta_sum),
                        "members": c.members.iter().map(|(x, k, d)| json!({"point": num(x.to_f64()), "k": k, "jump": num(*d)})).collect::<Vec<_>>(),
                    })
                })
                .collect();
            write_json(
                out,
                &json!({
                    "verdict": format!("{:?}", report.verdict),
                    "cosets": cosets,
                    "ambiguous_distance": report.ambiguous_distance.map(num),
                    "search_bound": report.search_bound,
                }),
            )
        }
        "denjoy-koksma" => {
            let alpha = Alpha::parse(cfg.str_or("alpha", "golden"))?;
            let t = alpha.transformation()?;
            let split = parse_split(cfg.str_or("b", "0.5"), Some(&alpha))?;
            let n: usize = cfg.get_or("n", 1_000_000)?;
            let omega = Omega::from_config(cfg, &t, n)?;
            let series = birkhoff_sums(&t, split, omega.start(), n)?;
            let cf = expansion(&alpha, DEFAULT_DEPTH)?;
            let conv = convergents(&cf);
            let qs: Vec<u128> = (0..conv.len()).map_while(|k| conv.q_u128(k)).collect();
            let variation = split.step_function().variation();
            let rows = denjoy_koksma_table(&series, &qs)
                .into_iter()
                .map(|(k, q, s)| vec![k.to_string(), q.to_string(), field(s), field(variation)]);
            write_csv(out, &["k", "q_k", "S_qk", "variation"], rows)
        }
        "coboundary" => {
            let alpha = parse_rational(cfg.str_or("alpha", "1/5"))?;
            let b = parse_rational(cfg.str_or("b", "2/5"))?;
            let f = RationalStepFunction::favourite(b)?;
            let grid: usize = cfg.get_or("grid", 1000)?;
            let n: usize = cfg.get_or("n", 100)?;
            let value = match rational_coboundary(alpha, &f, grid)? {
                CoboundaryOutcome::Solution(w) => {
                    let spread = w.h.max_value() - w.h.min_value();
                    let mut sup = Rational64::from_integer(0);
                    for i in 0..grid {
                        let x = Rational64::new(i as i64, grid as i64);
                        for s in rational_birkhoff_sums(alpha, &f, x, n) {
                            sup = sup.max(s.abs());
                        }
                    }
                    json!({
                        "solution": true,
                        "h": step_function_json(&w.h),
                        "residual": rational_text(&w.residual),
                        "grid_points": w.grid_points,
                        "h_spread": rational_text(&spread),
                        "sup_abs_sum": rational_text(&sup),
                        "n": n,
                    })
                }
                CoboundaryOutcome::NoSolution { x, period_sum } => json!({
                    "solution": false,
                    "x": rational_text(&x),
                    "period_sum": rational_text(&period_sum),
                }),
            };
            write_json(out, &value)
        }
        "obstruction" => {
            let split = parse_split(cfg.str_or("b", "0.5"), None)?;
            let ob = doubling_coboundary_obstruction(&split, cfg.get_or("q", 3)?, cfg.get_or("k-max", 12)?)?;
            write_json(
                out,
                &json!({
                    "q": ob.q,
                    "terms": ob.terms.iter().map(|&z| complex(z)).collect::<Vec<_>>(),
                    "partial_sums": ob.partial_sums.iter().map(|&z| complex(z)).collect::<Vec<_>>(),
                    "bound": num(ob.bound),
                    "bounded_away": ob.bounded_away,
                    "no_l2_solution": ob.no_l2_solution(),
                }),
            )
        }
        "fourier" => {
            let split = parse_split(cfg.str_or("b", "0.5"), None)?;
            let data = favourite_fourier_coeffs(&split, cfg.get_or("r-max", 64)?);
            let rows = (1..=data.coeffs.len() as i64).map(|r| {
                let c = data.c(r).unwrap();
                let g = data.gamma(r).unwrap();
                vec![r.to_string(), field(c.re), field(c.im), field(g.norm()), field(data.gamma_bound)]
            });
            write_csv(out, &["r", "re_c", "im_c", "abs_gamma", "gamma_bound"], rows)
        }
        "variance" => {
            let alpha = Alpha::parse(cfg.str_or("alpha", "golden"))?;
            let split = parse_split(cfg.str_or("b", "0.5"), Some(&alpha))?;
            let n: u64 = cfg.get_or("n", 1000)?;
            let rep = variance_exact(alpha.torus(), &split.step_function(), n, cfg.get_or("r-max", 100_000)?);
            write_json(
                out,
                &json!({
                    "n": n,
                    "variance": num(rep.value),
                    "r_max": rep.r_max,
                    "excluded": rep.excluded,
                    "tail_estimate": num(rep.tail_estimate),
                }),
            )
        }
        _ => Err(DriverError::config(format!("unknown birkhoff action `{action}`"))),
    }
}
