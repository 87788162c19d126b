use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::Value;

use crate::commands;
use crate::config::Config;
use crate::error::Result;
use crate::output::write_json;
use crate::suite::{run_suite, table};

#[derive(Debug, Parser)]
#[command(name = "ergolin", version, about = "Random products of operators driven by ergodic maps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Continued fractions: expand, convergents, ostrowski, discrepancy, hypotheses.
    Cf(Experiment),
    /// Birkhoff sums: sums, oren, denjoy-koksma, coboundary, obstruction, fourier, variance.
    Birkhoff(Experiment),
    /// Limit laws: distribution, kac-sigma2, range-growth, w-set, ln-scale.
    Clt(Experiment),
    /// Multiplier adjoints on H²: classify, product, eigen, norms, right-inverse,
    /// certificate, orbit-verdict, outer.
    Hardy(Experiment),
    /// Affine composition and differentiation on entire functions: product,
    /// right-inverse, classify.
    Entire(Experiment),
    /// Runs the acceptance criteria and prints a PASS/FAIL table.
    Suite(SuiteArgs),
}

#[derive(Debug, Args)]
struct Experiment {
    /// Action; each subcommand has a default.
    action: Option<String>,
    /// Flat `key = value` file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    params: Params,
}

/// Every configuration key; each action accepts a subset.
#[derive(Debug, Args)]
struct Params {
    #[arg(long)]
    map: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    b: Option<String>,
    #[arg(long)]
    omega: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    samples: Option<String>,
    #[arg(long)]
    stride: Option<String>,
    #[arg(long)]
    depth: Option<String>,
    #[arg(long)]
    k_max: Option<String>,
    #[arg(long)]
    etas: Option<String>,
    #[arg(long)]
    r_max: Option<String>,
    #[arg(long)]
    bound: Option<String>,
    #[arg(long)]
    grid: Option<String>,
    #[arg(long)]
    q: Option<String>,
    #[arg(long)]
    lags: Option<String>,
    #[arg(long)]
    checkpoints: Option<String>,
    #[arg(long)]
    c_grid: Option<String>,
    #[arg(long)]
    beta: Option<String>,
    #[arg(long)]
    count: Option<String>,
    #[arg(long)]
    normalization: Option<String>,
    #[arg(long)]
    pair: Option<String>,
    #[arg(long)]
    truncation: Option<String>,
    #[arg(long)]
    z: Option<String>,
    #[arg(long)]
    rule: Option<String>,
    #[arg(long)]
    max_checks: Option<String>,
    #[arg(long)]
    quad: Option<String>,
    #[arg(long)]
    lambda: Option<String>,
    #[arg(long)]
    shift: Option<String>,
    #[arg(long)]
    degree: Option<String>,
    #[arg(long)]
    radius: Option<String>,
    #[arg(long)]
    symbol1: Option<String>,
    #[arg(long)]
    symbol2: Option<String>,
    #[arg(long)]
    out: Option<String>,
}

impl Params {
    fn entries(&self) -> [(&'static str, &Option<String>); 34] {
        [
            ("map", &self.map),
            ("alpha", &self.alpha),
            ("b", &self.b),
            ("omega", &self.omega),
            ("seed", &self.seed),
            ("n", &self.n),
            ("samples", &self.samples),
            ("stride", &self.stride),
            ("depth", &self.depth),
            ("k-max", &self.k_max),
            ("etas", &self.etas),
            ("r-max", &self.r_max),
            ("bound", &self.bound),
            ("grid", &self.grid),
            ("q", &self.q),
            ("lags", &self.lags),
            ("checkpoints", &self.checkpoints),
            ("c-grid", &self.c_grid),
            ("beta", &self.beta),
            ("count", &self.count),
            ("normalization", &self.normalization),
            ("pair", &self.pair),
            ("truncation", &self.truncation),
            ("z", &self.z),
            ("rule", &self.rule),
            ("max-checks", &self.max_checks),
            ("quad", &self.quad),
            ("lambda", &self.lambda),
            ("shift", &self.shift),
            ("degree", &self.degree),
            ("radius", &self.radius),
            ("symbol1", &self.symbol1),
            ("symbol2", &self.symbol2),
            ("out", &self.out),
        ]
    }
}

#[derive(Debug, Args)]
struct SuiteArgs {
    /// Master seed for every ω sample.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Comma-separated criterion numbers; all when omitted.
    #[arg(long, value_delimiter = ',')]
    only: Vec<u8>,
    /// Also write the results as JSON to this path.
    #[arg(long)]
    out: Option<String>,
}

fn merged(exp: &Experiment) -> Result<Config> {
    let mut cfg = match &exp.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    for (key, value) in exp.params.entries() {
        if let Some(v) = value {
            cfg.set(key, v.clone());
        }
    }
    Ok(cfg)
}

fn experiment(command: &str, exp: &Experiment) -> Result<()> {
    let cfg = merged(exp)?;
    commands::run(command, exp.action.as_deref(), &cfg)
}

/// Exit code 0 when every selected criterion passes, 1 otherwise.
fn suite(args: &SuiteArgs) -> Result<i32> {
    let results = run_suite(args.seed, &args.only);
    print!("{}", table(&results));
    if let Some(path) = &args.out {
        let value = Value::Array(results.iter().map(|r| r.to_json()).collect());
        write_json(Some(path), &value)?;
    }
    Ok(if results.iter().all(|r| r.passed) { 0 } else { 1 })
}

/// Parses `args`, runs, and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = match &cli.command {
        Command::Cf(e) => experiment("cf", e).map(|_| 0),
        Command::Birkhoff(e) => experiment("birkhoff", e).map(|_| 0),
        Command::Clt(e) => experiment("clt", e).map(|_| 0),
        Command::Hardy(e) => experiment("hardy", e).map(|_| 0),
        Command::Entire(e) => experiment("entire", e).map(|_| 0),
        Command::Suite(s) => suite(s),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        e.exit_code()
    })
}

#[cfg(test)]
mod tests {
    use std::fs;
    use std::path::Path;

    use super::run;

    fn ergolin(args: &[&str]) -> i32 {
        run(std::iter::once("ergolin").chain(args.iter().copied()))
    }

    fn path(dir: &Path, name: &str) -> String {
        dir.join(name).to_string_lossy().into_owned()
    }

    #[test]
    fn birkhoff_sums_to_csv() {
        let dir = tempfile::tempdir().unwrap();
        let out = path(dir.path(), "sums.csv");
        let args = ["birkhoff", "--alpha", "golden", "--b", "0.5", "--omega", "0.3", "--n", "1000000", "--out", &out];
        assert_eq!(ergolin(&args), 0);
        let text = fs::read_to_string(&out).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("n,a1,a2,S,runmax,runmin"));
        assert_eq!(lines.count(), 1_000_001);
    }

    #[test]
    fn hardy_classify_limit_case() {
        let dir = tempfile::tempdir().unwrap();
        let out = path(dir.path(), "verdict.json");
        assert_eq!(ergolin(&["hardy", "classify", "--pair", "remark-3.8", "--out", &out]), 0);
        let value: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
        assert_eq!(value["verdict"], "LimitCaseInnerProduct");
    }

    #[test]
    fn reruns_are_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let runs: [&[&str]; 3] = [
            &["clt", "distribution", "--map", "doubling", "--n", "512", "--samples", "200", "--seed", "5"],
            &["birkhoff", "sums", "--alpha", "sqrt2", "--b", "0.3", "--n", "5000", "--seed", "5"],
            &["entire", "right-inverse", "--n", "12", "--seed", "5"],
        ];
        for (i, args) in runs.iter().enumerate() {
            let outputs: Vec<Vec<u8>> = (0..2)
                .map(|k| {
                    let out = path(dir.path(), &format!("{i}-{k}.out"));
                    let mut full = args.to_vec();
                    full.extend(["--out", out.as_str()]);
                    assert_eq!(ergolin(&full), 0, "{args:?}");
                    fs::read(&out).unwrap()
                })
                .collect();
            assert!(!outputs[0].is_empty());
            assert_eq!(outputs[0], outputs[1], "{args:?}");
        }
    }

    #[test]
    fn flags_override_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = path(dir.path(), "exp.conf");
        fs::write(&cfg, "# golden rotation\nalpha = golden\nn = 50\nb = 0.25\n").unwrap();
        let from_file = path(dir.path(), "file.csv");
        let overridden = path(dir.path(), "flag.csv");
        assert_eq!(ergolin(&["birkhoff", "sums", "--config", &cfg, "--omega", "0", "--out", &from_file]), 0);
        assert_eq!(
            ergolin(&["birkhoff", "sums", "--config", &cfg, "--omega", "0", "--n", "80", "--out", &overridden]),
            0
        );
        let rows = |p: &str| fs::read_to_string(p).unwrap().lines().count() - 1;
        assert_eq!(rows(&from_file), 51);
        assert_eq!(rows(&overridden), 81);
        let head = |p: &str| fs::read_to_string(p).unwrap().lines().take(52).collect::<Vec<_>>().join("\n");
        assert_eq!(head(&from_file), head(&overridden));
    }

    #[test]
    fn exit_codes() {
        let dir = tempfile::tempdir().unwrap();
        let out = path(dir.path(), "x");
        assert_eq!(ergolin(&["birkhoff", "sums", "--q", "3", "--out", &out]), 2);
        assert_eq!(ergolin(&["birkhoff", "no-such-action"]), 2);
        assert_eq!(ergolin(&["cf", "--bogus", "1"]), 2);
        assert_eq!(ergolin(&["cf", "convergents", "--alpha", "not-a-number"]), 2);
        assert_eq!(ergolin(&["cf", "discrepancy", "--alpha", "1/3", "--k-max", "20", "--out", &out]), 3);
        let cfg = path(dir.path(), "dup.conf");
        fs::write(&cfg, "n = 1\nn = 2\n").unwrap();
        assert_eq!(ergolin(&["birkhoff", "--config", &cfg]), 2);
        let missing = path(dir.path(), "missing.conf");
        assert_eq!(ergolin(&["birkhoff", "--config", &missing]), 1);
    }

    #[test]
    fn suite_subset() {
        let dir = tempfile::tempdir().unwrap();
        let out = path(dir.path(), "suite.json");
        assert_eq!(ergolin(&["suite", "--seed", "42", "--only", "3,5,6", "--out", &out]), 0);
        let value: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
        let results = value.as_array().unwrap();
        assert_eq!(results.len(), 3);
        assert!(results.iter().all(|r| r["passed"] == true));
    }
}
