use ergolin_core::clt::{
    kac_sigma2, lag_correlation, ln_scale_experiment, range_growth_probe, summarize, w_set_report, CltExperiment,
    DistributionSummary, Normalization, MAX_KAC_LAG,
};
use rayon::prelude::*;
use rayon::ThreadPool;
use serde_json::{json, Value};

use super::cf::expansion;
use super::ActionTable;
use crate::config::{parse_split, transformation, Alpha, Config, Omega};
use crate::error::{DriverError, Result};
use crate::output::{field, num, nums, write_csv, write_json};
use crate::parallel::pool;

pub const ACTIONS: ActionTable = &[
    ("distribution", &["map", "alpha", "b", "n", "samples", "seed", "normalization", "out"]),
    ("kac-sigma2", &["b", "lags", "out"]),
    ("range-growth", &["map", "alpha", "b", "omega", "seed", "checkpoints", "out"]),
    ("w-set", &["alpha", "b", "n", "c-grid", "out"]),
    ("ln-scale", &["alpha", "b", "beta", "count", "r-max", "samples", "seed", "out"]),
];

/// Samples `S_n(ω_i)/a_n` for every index, in parallel; the result does not
/// depend on the number of threads.
pub fn run_samples(exp: &CltExperiment) -> Result<Vec<f64>> {
    samples_in(&pool()?, exp)
}

pub fn samples_in(pool: &ThreadPool, exp: &CltExperiment) -> Result<Vec<f64>> {
    let prepared = exp.prepare()?;
    let values = pool.install(|| {
        (0..exp.samples as u64)
            .into_par_iter()
            .map(|i| prepared.sample(i))
            .collect::<ergolin_core::Result<Vec<f64>>>()
    })?;
    Ok(values)
}

fn normalization(text: &str) -> Result<Normalization> {
    match text {
        "sqrt-n" => Ok(Normalization::SqrtN),
        "l2" => Ok(Normalization::L2Norm),
        other => match other.strip_prefix("fixed:") {
            Some(v) => v
                .parse()
                .map(Normalization::Fixed)
                .map_err(|_| DriverError::config(format!("bad normalization constant `{v}`"))),
            None => Err(DriverError::config(format!(
                "unknown normalization `{other}` (sqrt-n|l2|fixed:<a>)"
            ))),
        },
    }
}

pub fn summary_json(s: &DistributionSummary) -> Value {
    let histogram: Vec<Value> = s
        .histogram
        .rows()
        .map(|(lo, hi, c)| json!({"lo": num(lo), "hi": num(hi), "count": c}))
        .collect();
    json!({
        "mean": num(s.mean),
        "variance": num(s.variance),
        "ks": s.ks.map(num),
        "n": s.n,
        "samples": s.samples,
        "seed": s.seed,
        "histogram": histogram,
    })
}

pub fn run(action: &str, cfg: &Config) -> Result<()> {
    let out = cfg.str("out");
    match action {
        "distribution" => {
            let (t, alpha) = transformation(cfg)?;
            let split = parse_split(cfg.str_or("b", "0.5"), alpha.as_ref())?;
            let exp = CltExperiment {
                transformation: t,
                f: split.step_function(),
                normalization: normalization(cfg.str_or("normalization", "sqrt-n"))?,
                n: cfg.get_or("n", 4096)?,
                samples: cfg.get_or("samples", 20_000)?,
                seed: cfg.get_or("seed", 0)?,
            };
            let values = run_samples(&exp)?;
            write_json(out, &summary_json(&summarize(&exp, &values)))
        }
        "kac-sigma2" => {
            let split = parse_split(cfg.str_or("b", "0.5"), None)?;
            let f = split.step_function();
            let lags: u32 = cfg.get_or("lags", MAX_KAC_LAG)?;
            let sigma2 = kac_sigma2(&f, lags)?;
            let corr: Vec<f64> = (0..=lags).map(|k| lag_correlation(&f, k)).collect();
            write_json(out, &json!({"sigma2": num(sigma2), "lags": lags, "correlations": nums(&corr)}))
        }
        "range-growth" => {
            let (t, alpha) = transformation(cfg)?;
            let split = parse_split(cfg.str_or("b", "0.5"), alpha.as_ref())?;
            let checkpoints: Vec<usize> = cfg
                .list("checkpoints")?
                .unwrap_or_else(|| vec![1_000, 10_000, 100_000, 1_000_000]);
            let last = checkpoints.last().copied().unwrap_or(0);
            let omega = Omega::from_config(cfg, &t, last)?;
            let probe = range_growth_probe(&t, split, omega.start(), &checkpoints)?;
            let rows: Vec<Value> = probe
                .rows
                .iter()
                .map(|&(n, hi, lo)| json!({"n": n, "runmax": num(hi), "runmin": num(lo), "range": num(hi - lo)}))
                .collect();
            write_json(
                out,
                &json!({"rows": rows, "plateau": probe.plateau, "plateau_tolerance": num(probe.plateau_tolerance)}),
            )
        }
        "w-set" => {
            let alpha = Alpha::parse(cfg.str_or("alpha", "golden"))?;
            let split = parse_split(cfg.str_or("b", "0.5"), Some(&alpha))?;
            let n: usize = cfg.get_or("n", 10_000)?;
            let cf = expansion(&alpha, 96)?;
            let c_grid: Vec<f64> = cfg.list("c-grid")?.unwrap_or_else(|| vec![0.05, 0.1, 0.2, 0.5, 1.0]);
            let rows = w_set_report(&cf, &split.step_function(), n, &c_grid)?;
            write_csv(
                out,
                &["c", "density_m", "density_log"],
                rows.iter().map(|r| vec![field(r.c), field(r.density_m), field(r.density_log)]),
            )
        }
        "ln-scale" => {
            let alpha = Alpha::parse(cfg.str_or("alpha", "cf:1,1,2,3,5,8,13,21,34,55,89"))?;
            let split = parse_split(cfg.str_or("b", "0.5"), Some(&alpha))?;
            let count: usize = cfg.get_or("count", 4)?;
            let cf = expansion(&alpha, 96)?;
            let rep = ln_scale_experiment(
                &cf,
                &split.step_function(),
                cfg.get_or("beta", 1.5)?,
                count,
                cfg.get_or("r-max", 64)?,
                cfg.get_or("samples", 2000)?,
                cfg.get_or("seed", 0)?,
            )?;
            write_json(
                out,
                &json!({
                    "t": rep.scale.selection.t,
                    "achieved_beta": num(rep.scale.selection.achieved_beta),
                    "hypothesis_met": rep.hypothesis_met,
                    "l": rep.scale.l.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
                    "horizon": rep.horizon.to_string(),
                    "l2_norm_sq": num(rep.l2_norm_sq),
                    "variance_equivalent": num(rep.variance_equivalent),
                    "summary": rep.summary.as_ref().map(summary_json),
                }),
            )
        }
        _ => Err(DriverError::config(format!("unknown clt action `{action}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parallel::pool_with;

    fn experiment(map: &str) -> CltExperiment {
        let mut cfg = Config::default();
        cfg.set("map", map.to_string());
        let (t, alpha) = transformation(&cfg).unwrap();
        CltExperiment {
            transformation: t,
            f: parse_split("0.5", alpha.as_ref()).unwrap().step_function(),
            normalization: Normalization::SqrtN,
            n: 2000,
            samples: 64,
            seed: 9,
        }
    }

    #[test]
    fn samples_do_not_depend_on_thread_count() {
        for map in ["rotation", "doubling"] {
            let exp = experiment(map);
            let one = samples_in(&pool_with(1).unwrap(), &exp).unwrap();
            let four = samples_in(&pool_with(4).unwrap(), &exp).unwrap();
            assert_eq!(one.len(), 64);
            assert!(one.iter().zip(&four).all(|(a, b)| a.to_bits() == b.to_bits()), "{map}");
        }
    }
}
