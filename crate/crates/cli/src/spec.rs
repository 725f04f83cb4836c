//! Parsing of command-line gain lists, controller specs and seed ranges.

use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;

use smdo_core::PiGains;

/// Gains as `kp1,ki1[,kp2,ki2,…]`.
pub fn parse_gains(text: &str) -> Result<Vec<PiGains>, String> {
    let values = text
        .split(',')
        .map(|v| {
            let v = v.trim();
            v.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| format!("`{v}` is not a finite number"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if values.len() % 2 != 0 {
        return Err(format!("expected kp,ki pairs, got {} values", values.len()));
    }
    Ok(values
        .chunks_exact(2)
        .map(|c| PiGains { kp: c[0], ki: c[1] })
        .collect())
}

/// One controller configuration: `[label=]kp1,ki1[,kp2,ki2][@ci|@noci]`.
/// Without a suffix the scenario's own conditional-integration setting
/// applies.
#[derive(Debug, Clone, PartialEq)]
pub struct ControllerSpec {
    pub label: Option<String>,
    pub gains: Vec<PiGains>,
    pub ci: Option<bool>,
}

impl FromStr for ControllerSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (label, rest) = match s.split_once('=') {
            Some((l, r)) if !l.trim().is_empty() => (Some(l.trim().to_string()), r),
            Some(_) => return Err("empty label".into()),
            None => (None, s),
        };
        let (gains, ci) = match rest.rsplit_once('@') {
            Some((g, "ci")) => (g, Some(true)),
            Some((g, "noci")) => (g, Some(false)),
            Some((_, other)) => {
                return Err(format!("unknown suffix `@{other}`, expected @ci or @noci"))
            }
            None => (rest, None),
        };
        Ok(Self {
            label,
            gains: parse_gains(gains)?,
            ci,
        })
    }
}

impl fmt::Display for ControllerSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(label) = &self.label {
            return f.write_str(label);
        }
        let values: Vec<String> = self
            .gains
            .iter()
            .flat_map(|g| [g.kp, g.ki])
            .map(|v| v.to_string())
            .collect();
        f.write_str(&values.join(","))?;
        match self.ci {
            Some(true) => f.write_str("@ci"),
            Some(false) => f.write_str("@noci"),
            None => Ok(()),
        }
    }
}

/// Inclusive seed range `a..b` (or `a..=b`), or a single seed.
pub fn parse_seed_range(text: &str) -> Result<RangeInclusive<u64>, String> {
    let parse = |v: &str| {
        v.trim()
            .parse::<u64>()
            .map_err(|_| format!("`{v}` is not a seed"))
    };
    let (a, b) = match text.split_once("..") {
        Some((a, b)) => (parse(a)?, parse(b.strip_prefix('=').unwrap_or(b))?),
        None => {
            let s = parse(text)?;
            (s, s)
        }
    };
    if a > b {
        return Err(format!("empty seed range {a}..{b}"));
    }
    Ok(a..=b)
}
