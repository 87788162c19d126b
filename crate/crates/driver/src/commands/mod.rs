//! Subcommands. Each one lists its actions with the keys they accept; the
//! first action is the default.

use ergolin_core::precision::HighPrecision;

use crate::config::{parse_ratio, Alpha, Config};
use crate::error::{DriverError, Result};

pub mod birkhoff;
pub mod cf;
pub mod clt;
pub mod entire;
pub mod hardy;

pub type ActionTable = &'static [(&'static str, &'static [&'static str])];

pub const COMMANDS: [(&str, ActionTable); 5] = [
    ("cf", cf::ACTIONS),
    ("birkhoff", birkhoff::ACTIONS),
    ("clt", clt::ACTIONS),
    ("hardy", hardy::ACTIONS),
    ("entire", entire::ACTIONS),
];

/// Resolves the action, rejects unknown keys, then runs.
pub fn run(command: &str, action: Option<&str>, cfg: &Config) -> Result<()> {
    let table = COMMANDS
        .iter()
        .find(|(name, _)| *name == command)
        .map(|(_, t)| *t)
        .ok_or_else(|| DriverError::config(format!("unknown command `{command}`")))?;
    let action = action.unwrap_or(table[0].0);
    let keys = table
        .iter()
        .find(|(name, _)| *name == action)
        .map(|(_, k)| *k)
        .ok_or_else(|| {
            let names: Vec<&str> = table.iter().map(|(n, _)| *n).collect();
            DriverError::config(format!("unknown action `{action}` for {command} ({})", names.join("|")))
        })?;
    cfg.validate(&format!("{command} {action}"), keys)?;
    match command {
        "cf" => cf::run(action, cfg),
        "birkhoff" => birkhoff::run(action, cfg),
        "clt" => clt::run(action, cfg),
        "hardy" => hardy::run(action, cfg),
        _ => entire::run(action, cfg),
    }
}

/// `b` as a 256-bit value: `p/q`, `<k>alpha`, or a decimal.
pub(crate) fn high_precision_b(text: &str, alpha: &Alpha) -> Result<HighPrecision> {
    let text = text.trim();
    if let Some(k) = text.strip_suffix("alpha") {
        let k: i64 = if k.is_empty() {
            1
        } else {
            k.parse().map_err(|_| DriverError::config(format!("bad multiple in `{text}`")))?
        };
        return Ok(alpha.high_precision()?.mul_int_mod1(k));
    }
    if let Some((p, q)) = parse_ratio(text)? {
        return Ok(HighPrecision::from_ratio_u64(p, q)?);
    }
    Ok(HighPrecision::from_decimal(text)?)
}

/// `re` or `re:im`.
pub(crate) fn parse_complex(text: &str) -> Result<num_complex::Complex64> {
    let bad = || DriverError::config(format!("bad complex number `{text}` (re or re:im)"));
    let (re, im) = text.split_once(':').unwrap_or((text, "0"));
    Ok(num_complex::Complex64::new(
        re.trim().parse().map_err(|_| bad())?,
        im.trim().parse().map_err(|_| bad())?,
    ))
}

pub(crate) fn complex_list(cfg: &Config, key: &str) -> Result<Option<Vec<num_complex::Complex64>>> {
    cfg.str(key)
        .map(|v| v.split(',').map(parse_complex).collect())
        .transpose()
}
