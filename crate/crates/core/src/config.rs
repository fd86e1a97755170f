//! Run configuration, from `key=value` lines or the equivalent JSON object.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Catalog entry, `family:key=value,...`.
    pub entry: String,
    pub n: usize,
    /// Constant of the equation; defaults to the entry's curvature constant.
    pub k: Option<f64>,
    /// Radius of a ball about the pole (radial checks).
    pub ball: Option<f64>,
    /// 2D domain, `shape:key=value,...`.
    pub domain: Option<String>,
    /// Spacings, coarse to fine.
    pub h: Vec<f64>,
    /// Overrides the default pass tolerance of a check.
    pub tolerance: Option<f64>,
    pub seed: u64,
    pub partitions: usize,
    pub out: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            entry: "space_form:k=0".into(),
            n: 2,
            k: None,
            ball: None,
            domain: None,
            h: Vec::new(),
            tolerance: None,
            seed: 0,
            partitions: 1,
            out: None,
            csv: None,
        }
    }
}

impl RunConfig {
    /// Parses either a JSON object or `key=value` lines (`#` comments,
    /// comma-separated lists for `h`).
    pub fn parse(text: &str) -> Result<Self> {
        let trimmed = text.trim_start();
        let value = if trimmed.starts_with('{') {
            serde_json::from_str(trimmed).map_err(|e| Error::Config(format!("invalid JSON config: {e}")))?
        } else {
            key_values(text)?
        };
        let cfg: RunConfig = serde_json::from_value(value).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Config(format!("n must be at least 2, got {}", self.n)));
        }
        if self.h.iter().any(|&h| !(h > 0.0)) {
            return Err(Error::Config("spacings must be positive".into()));
        }
        if self.h.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Config(format!("spacings must be strictly decreasing, got {:?}", self.h)));
        }
        if self.partitions == 0 {
            return Err(Error::Config("partitions must be at least 1".into()));
        }
        Ok(())
    }
}

/// Parses a comma list of spacings; `1/64` is accepted.
pub fn parse_spacings(text: &str) -> Result<Vec<f64>> {
    text.split(',').map(str::trim).filter(|s| !s.is_empty()).map(parse_number).collect()
}

pub fn parse_number(s: &str) -> Result<f64> {
    let bad = || Error::Config(format!("not a number: `{s}`"));
    match s.split_once('/') {
        Some((a, b)) => {
            let (a, b): (f64, f64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
            Ok(a / b)
        }
        None => s.trim().parse().map_err(|_| bad()),
    }
}

fn key_values(text: &str) -> Result<Value> {
    let mut map = Map::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key=value", lineno + 1)))?;
        let (key, value) = (key.trim(), value.trim());
        let v = match key {
            "h" => Value::from(parse_spacings(value)?),
            "n" | "seed" | "partitions" => Value::from(
                value.parse::<u64>().map_err(|_| Error::Config(format!("line {}: `{key}` must be an integer", lineno + 1)))?,
            ),
            "k" | "ball" | "tolerance" => Value::from(parse_number(value)?),
            _ => Value::from(value),
        };
        map.insert(key.to_string(), v);
    }
    Ok(Value::Object(map))
}
