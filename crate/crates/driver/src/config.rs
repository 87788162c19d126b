//! Flat `key = value` experiment configuration.
//!
//! A file holds one assignment per line; `#` starts a comment. Command-line
//! flags are merged on top of the file, and the merged set is checked against
//! the keys the selected action understands before anything runs.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use ergolin_core::birkhoff::Split;
use ergolin_core::precision::HighPrecision;
use ergolin_core::rng::{sample_rng, uniform_u128};
use ergolin_core::torus::{BitStream, Start, TorusPoint, Transformation, GUARD_BITS};
use num_rational::{Ratio, Rational64};

use crate::error::{DriverError, Result};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Config> {
        let mut values = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| DriverError::config(format!("line {}: expected key = value", lineno + 1)))?;
            let k = k.trim().to_string();
            if k.is_empty() {
                return Err(DriverError::config(format!("line {}: empty key", lineno + 1)));
            }
            if values.insert(k.clone(), v.trim().to_string()).is_some() {
                return Err(DriverError::config(format!("duplicate key `{k}`")));
            }
        }
        Ok(Config { values })
    }

    pub fn load(path: &Path) -> Result<Config> {
        Config::parse(&fs::read_to_string(path)?)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.values.insert(key.to_string(), value.into());
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.values.keys().map(String::as_str)
    }

    /// Rejects every key outside `allowed`.
    pub fn validate(&self, context: &str, allowed: &[&str]) -> Result<()> {
        let unknown: Vec<&str> = self.keys().filter(|k| !allowed.contains(k)).collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(DriverError::config(format!(
                "unknown key(s) for {context}: {} (accepted: {})",
                unknown.join(", "),
                allowed.join(", ")
            )))
        }
    }

    pub fn str(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn str_or<'a>(&'a self, key: &str, default: &'a str) -> &'a str {
        self.str(key).unwrap_or(default)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.str(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|_| DriverError::config(format!("cannot parse `{key}` = `{v}`")))
            })
            .transpose()
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T> {
        self.get(key)?
            .ok_or_else(|| DriverError::config(format!("missing required key `{key}`")))
    }

    /// Comma-separated list.
    pub fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>> {
        self.str(key)
            .map(|v| {
                v.split(',')
                    .map(|s| {
                        s.trim()
                            .parse::<T>()
                            .map_err(|_| DriverError::config(format!("cannot parse `{key}` entry `{s}`")))
                    })
                    .collect()
            })
            .transpose()
    }
}

/// A rotation number as written on the command line.
#[derive(Clone, Debug, PartialEq)]
pub enum Alpha {
    /// Irrational value (or a long decimal) known to 256 bits.
    Real { value: HighPrecision, partial_quotients: Option<Vec<u64>> },
    /// `p/q`, giving a periodic rotation.
    Rational { p: u64, q: u64 },
}

impl Alpha {
    /// `golden`, `sqrt2`, `cf:a1,a2,…`, `p/q`, or a decimal literal.
    pub fn parse(text: &str) -> Result<Alpha> {
        let text = text.trim();
        match text {
            "golden" => return Ok(Alpha::Real { value: HighPrecision::golden(), partial_quotients: None }),
            "sqrt2" => return Ok(Alpha::Real { value: HighPrecision::sqrt2_minus_1(), partial_quotients: None }),
            _ => {}
        }
        if let Some(digits) = text.strip_prefix("cf:") {
            let digits = digits
                .split(',')
                .map(|d| d.trim().parse::<u64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| DriverError::config(format!("bad partial quotients `{digits}`")))?;
            let value = HighPrecision::from_partial_quotients(&digits)?;
            return Ok(Alpha::Real { value, partial_quotients: Some(digits) });
        }
        if let Some((p, q)) = parse_ratio(text)? {
            if q == 0 {
                return Err(DriverError::config("alpha has zero denominator"));
            }
            let r = Ratio::<u64>::new(p % q, q);
            return Ok(Alpha::Rational { p: *r.numer(), q: *r.denom() });
        }
        let value = HighPrecision::from_decimal(text)?;
        Ok(Alpha::Real { value, partial_quotients: None })
    }

    pub fn torus(&self) -> TorusPoint {
        match self {
            Alpha::Real { value, .. } => value.to_torus(),
            Alpha::Rational { p, q } => TorusPoint::from_ratio(*p as i128, *q),
        }
    }

    pub fn high_precision(&self) -> Result<HighPrecision> {
        Ok(match self {
            Alpha::Real { value, .. } => value.clone(),
            Alpha::Rational { p, q } => HighPrecision::from_ratio_u64(*p, *q)?,
        })
    }

    pub fn rational(&self) -> Option<Rational64> {
        match self {
            Alpha::Rational { p, q } => Some(Rational64::new(*p as i64, *q as i64)),
            Alpha::Real { .. } => None,
        }
    }

    pub fn transformation(&self) -> Result<Transformation> {
        Ok(match self {
            Alpha::Real { value, .. } => Transformation::rotation(value.to_torus()),
            Alpha::Rational { p, q } => Transformation::rational(*p, *q)?,
        })
    }
}

/// `p/q` with non-negative integers, `None` when the text has no slash.
pub fn parse_ratio(text: &str) -> Result<Option<(u64, u64)>> {
    let Some((p, q)) = text.split_once('/') else {
        return Ok(None);
    };
    let p = p.trim().parse::<u64>();
    let q = q.trim().parse::<u64>();
    match (p, q) {
        (Ok(p), Ok(q)) => Ok(Some((p, q))),
        _ => Err(DriverError::config(format!("malformed fraction `{text}`"))),
    }
}

/// A decimal with at most 18 fractional digits as an exact fraction.
fn decimal_ratio(text: &str) -> Option<(u64, u64)> {
    let (int, frac) = text.split_once('.').unwrap_or((text, ""));
    if frac.len() > 18 || !int.bytes().all(|c| c.is_ascii_digit()) || !frac.bytes().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let int: u64 = if int.is_empty() { 0 } else { int.parse().ok()? };
    let q = 10u64.pow(frac.len() as u32);
    let f: u64 = if frac.is_empty() { 0 } else { frac.parse().ok()? };
    Some((int.checked_mul(q)?.checked_add(f)?, q))
}

/// The split point `b`: `p/q`, a decimal (kept exact when short), or
/// `<k>alpha` for `kα mod 1`.
pub fn parse_split(text: &str, alpha: Option<&Alpha>) -> Result<Split> {
    let text = text.trim();
    if let Some(k) = text.strip_suffix("alpha") {
        let alpha = alpha.ok_or_else(|| DriverError::config("`b` refers to alpha but none is set"))?;
        let k: i128 = if k.is_empty() {
            1
        } else {
            k.parse().map_err(|_| DriverError::config(format!("bad multiple in `{text}`")))?
        };
        return match alpha {
            Alpha::Rational { p, q } => {
                let num = (k * *p as i128).rem_euclid(*q as i128) as u64;
                Ok(Split::rational(num, *q)?)
            }
            Alpha::Real { value, .. } => {
                let k = i64::try_from(k).map_err(|_| DriverError::config("multiple too large"))?;
                Ok(Split::real(value.mul_int_mod1(k).to_torus())?)
            }
        };
    }
    if let Some((p, q)) = parse_ratio(text)? {
        return Ok(Split::rational(p, q)?);
    }
    if let Some((p, q)) = decimal_ratio(text) {
        return Ok(Split::rational(p, q)?);
    }
    Ok(Split::real(HighPrecision::from_decimal(text)?.to_torus())?)
}

/// Rational `b` for the exact coboundary solver.
pub fn parse_rational(text: &str) -> Result<Rational64> {
    let text = text.trim();
    let (p, q) = match parse_ratio(text)? {
        Some(r) => r,
        None => decimal_ratio(text).ok_or_else(|| DriverError::config(format!("`{text}` is not a short rational")))?,
    };
    if q == 0 || p > i64::MAX as u64 || q > i64::MAX as u64 {
        return Err(DriverError::config(format!("`{text}` is out of range")));
    }
    Ok(Rational64::new(p as i64, q as i64))
}

/// Initial condition owned by the driver.
#[derive(Clone, Debug)]
pub enum Omega {
    Point(TorusPoint),
    Bits(BitStream),
}

impl Omega {
    pub fn start(&self) -> Start<'_> {
        match self {
            Omega::Point(p) => Start::Point(*p),
            Omega::Bits(b) => Start::Bits(b),
        }
    }

    pub fn describe(&self) -> f64 {
        match self {
            Omega::Point(p) => p.to_f64(),
            Omega::Bits(b) => b.point_at(0).to_f64(),
        }
    }

    /// Sample `index` under `seed`, drawn the same way as the Monte-Carlo
    /// drivers: a uniform 128-bit point, or `n + 128` fair bits.
    pub fn random(t: &Transformation, n: usize, seed: u64, index: u64) -> Omega {
        let mut rng = sample_rng(seed, index);
        match t {
            Transformation::Doubling => Omega::Bits(BitStream::random(n + GUARD_BITS, &mut rng)),
            _ => Omega::Point(TorusPoint::from_frac(uniform_u128(&mut rng))),
        }
    }

    /// An explicit value; for the doubling map its 128 leading bits are kept
    /// and the rest of the stream is filled from the seed.
    pub fn explicit(t: &Transformation, text: &str, n: usize, seed: u64) -> Result<Omega> {
        let p = HighPrecision::from_decimal(text)?.to_torus();
        match t {
            Transformation::Doubling => {
                let prefix: Vec<u8> = (0..128).map(|i| ((p.frac() >> (127 - i)) & 1) as u8).collect();
                let mut rng = sample_rng(seed, 0);
                Ok(Omega::Bits(BitStream::with_prefix(&prefix, n + GUARD_BITS, &mut rng)?))
            }
            _ => Ok(Omega::Point(p)),
        }
    }

    /// `omega` from the config, or sample 0 of `seed`.
    pub fn from_config(cfg: &Config, t: &Transformation, n: usize) -> Result<Omega> {
        let seed = cfg.get_or("seed", 0u64)?;
        match cfg.str("omega") {
            Some("random") | None => Ok(Omega::random(t, n, seed, 0)),
            Some(v) => Omega::explicit(t, v, n, seed),
        }
    }
}

/// `map` (rotation by `alpha`, or doubling) from the config.
pub fn transformation(cfg: &Config) -> Result<(Transformation, Option<Alpha>)> {
    match cfg.str_or("map", "rotation") {
        "doubling" => {
            let alpha = cfg.str("alpha").map(Alpha::parse).transpose()?;
            Ok((Transformation::Doubling, alpha))
        }
        "rotation" => {
            let alpha = Alpha::parse(cfg.str_or("alpha", "golden"))?;
            Ok((alpha.transformation()?, Some(alpha)))
        }
        other => Err(DriverError::config(format!("unknown map `{other}` (rotation|doubling)"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_format() {
        let cfg = Config::parse("# experiment\nalpha = golden\n n=1000 # horizon\n\n").unwrap();
        assert_eq!(cfg.str("alpha"), Some("golden"));
        assert_eq!(cfg.require::<usize>("n").unwrap(), 1000);
        assert!(Config::parse("n = 1\nn = 2").is_err());
        assert!(Config::parse("just words").is_err());
        assert!(cfg.validate("test", &["alpha"]).is_err());
        assert!(cfg.validate("test", &["alpha", "n"]).is_ok());
    }

    #[test]
    fn split_forms() {
        assert_eq!(parse_split("0.5", None).unwrap().ratio(), Some((1, 2)));
        assert_eq!(parse_split("2/5", None).unwrap().ratio(), Some((2, 5)));
        let golden = Alpha::parse("golden").unwrap();
        let s = parse_split("3alpha", Some(&golden)).unwrap();
        assert!(s.ratio().is_none());
        let expected = (3.0 * golden.torus().to_f64()).fract();
        assert!((s.to_f64() - expected).abs() < 1e-15);
        assert!(parse_split("alpha", None).is_err());
        assert!(parse_split("1.5", None).is_err());
    }

    #[test]
    fn alpha_forms() {
        assert_eq!(Alpha::parse("2/10").unwrap(), Alpha::Rational { p: 1, q: 5 });
        assert!(matches!(Alpha::parse("cf:1,2,2").unwrap(), Alpha::Real { .. }));
        assert!((Alpha::parse("0.25").unwrap().torus().to_f64() - 0.25).abs() < 1e-18);
        assert!(Alpha::parse("x").is_err());
    }
}
