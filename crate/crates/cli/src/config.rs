use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    #[serde(default)]
    pub scale: Scale,
}

impl GridSpec {
    pub fn validate(&self, name: &str) -> Result<()> {
        if self.count == 0 {
            return Err(CliError::Config(format!("grid `{name}` needs count >= 1")));
        }
        if !self.start.is_finite() || !self.stop.is_finite() {
            return Err(CliError::Config(format!("grid `{name}` has non-finite endpoints")));
        }
        if self.scale == Scale::Log && (self.start <= 0.0 || self.stop <= 0.0) {
            return Err(CliError::Config(format!("log grid `{name}` needs positive endpoints")));
        }
        Ok(())
    }

    /// Grid points; the first and last are the endpoints exactly.
    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let last = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                if i == 0 {
                    return self.start;
                }
                if i == self.count - 1 {
                    return self.stop;
                }
                let t = i as f64 / last;
                match self.scale {
                    Scale::Linear => self.start + t * (self.stop - self.start),
                    Scale::Log => (self.start.ln() + t * (self.stop.ln() - self.start.ln())).exp(),
                }
            })
            .collect()
    }
}

impl FromStr for GridSpec {
    type Err = CliError;

    /// `START:STOP:COUNT[:log|:linear]`
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if !(3..=4).contains(&parts.len()) {
            return Err(CliError::Config(format!("grid `{s}` is not START:STOP:COUNT[:log]")));
        }
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| CliError::Config(format!("bad number `{t}` in grid `{s}`")));
        let count = parts[2].trim().parse::<usize>().map_err(|_| CliError::Config(format!("bad count in grid `{s}`")))?;
        let scale = match parts.get(3).map(|t| t.trim()) {
            None | Some("linear") | Some("lin") => Scale::Linear,
            Some("log") => Scale::Log,
            Some(other) => return Err(CliError::Config(format!("unknown grid scale `{other}`"))),
        };
        Ok(GridSpec { start: num(parts[0])?, stop: num(parts[1])?, count, scale })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(CliError::Config(format!("unknown format `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Threads {
    #[default]
    Auto,
    Fixed(usize),
}

impl Serialize for Threads {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Threads::Auto => s.serialize_str("auto"),
            Threads::Fixed(n) => s.serialize_u64(*n as u64),
        }
    }
}

impl<'de> Deserialize<'de> for Threads {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            N(usize),
            S(String),
        }
        match Raw::deserialize(d)? {
            Raw::N(0) => Err(serde::de::Error::custom("threads must be >= 1")),
            Raw::N(n) => Ok(Threads::Fixed(n)),
            Raw::S(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

impl FromStr for Threads {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(Threads::Auto);
        }
        match s.parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Threads::Fixed(n)),
            _ => Err(CliError::Config(format!("threads must be `auto` or a positive integer, got `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default)]
    pub subcommand: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default)]
    pub grids: BTreeMap<String, GridSpec>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
    #[serde(default)]
    pub threads: Threads,
    /// Gaussian state files for `distinguish`.
    #[serde(default)]
    pub state_a: Option<PathBuf>,
    #[serde(default)]
    pub state_b: Option<PathBuf>,
    /// Reserved; no pipeline draws random numbers.
    #[serde(default)]
    pub seed: Option<u64>,
}

impl SweepConfig {
    pub fn new(subcommand: &str) -> Self {
        SweepConfig { subcommand: subcommand.to_string(), ..Default::default() }
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn param(mut self, name: &str, value: f64) -> Self {
        self.params.insert(name.to_string(), value);
        self
    }

    pub fn grid(mut self, name: &str, start: f64, stop: f64, count: usize, scale: Scale) -> Self {
        self.grids.insert(name.to_string(), GridSpec { start, stop, count, scale });
        self
    }

    pub fn threads(mut self, threads: Threads) -> Self {
        self.threads = threads;
        self
    }
}

/// Splits `NAME=VALUE`.
pub fn split_assignment(s: &str) -> Result<(String, &str)> {
    let (name, value) = s.split_once('=').ok_or_else(|| CliError::Config(format!("expected NAME=VALUE, got `{s}`")))?;
    let name = name.trim();
    if name.is_empty() {
        return Err(CliError::Config(format!("empty name in `{s}`")));
    }
    Ok((name.to_string(), value.trim()))
}

pub fn parse_param(s: &str) -> Result<(String, f64)> {
    let (name, v) = split_assignment(s)?;
    let v = v.parse::<f64>().map_err(|_| CliError::Config(format!("bad value for `{name}`: `{v}`")))?;
    Ok((name, v))
}

pub fn parse_grid(s: &str) -> Result<(String, GridSpec)> {
    let (name, v) = split_assignment(s)?;
    Ok((name, v.parse()?))
}
