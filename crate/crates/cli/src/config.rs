//! Shared flags, the flat `key=value` config file, and their resolution.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Serialize;

use crate::report::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Table,
    Json,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        <Format as ValueEnum>::from_str(s, true)
    }
}

#[derive(Args, Clone, Debug, Default)]
pub struct Shared {
    /// Tensor order k (legs per side).
    #[arg(long, global = true)]
    pub k: Option<usize>,
    /// Dimension N of each leg.
    #[arg(long = "N", value_name = "N", global = true)]
    pub n: Option<usize>,
    /// Entry law: complex-ginibre, real-ginibre, or diluted:p=..,base=...
    #[arg(long, global = true)]
    pub model: Option<String>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, value_enum, global = true)]
    pub format: Option<Format>,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Flat key=value file; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Binary dump of the first sampled matrix.
    #[arg(long, global = true)]
    pub dump: Option<PathBuf>,
}

const KEYS: [&str; 9] = ["k", "N", "model", "seed", "trials", "tol", "format", "out", "dump"];

/// Parses `key = value` lines; `#` starts a comment.
pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
    let mut out = BTreeMap::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::usage(format!("{}:{}: expected key=value", path.display(), no + 1)));
        };
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(CliError::usage(format!("{}:{}: unknown key '{key}'", path.display(), no + 1)));
        }
        out.insert(key.to_string(), value.trim().to_string());
    }
    Ok(out)
}

fn parsed<T: std::str::FromStr>(file: &BTreeMap<String, String>, key: &str) -> Result<Option<T>, CliError>
where
    T::Err: std::fmt::Display,
{
    file.get(key).map(|v| v.parse::<T>().map_err(|e| CliError::usage(format!("config key {key}: {e}")))).transpose()
}

impl Shared {
    /// Fills every unset flag from the config file, if one was given.
    pub fn merged(&self) -> Result<Shared, CliError> {
        let Some(path) = &self.config else {
            return Ok(self.clone());
        };
        let file = read_config_file(path)?;
        Ok(Shared {
            k: self.k.or(parsed(&file, "k")?),
            n: self.n.or(parsed(&file, "N")?),
            model: self.model.clone().or(parsed(&file, "model")?),
            seed: self.seed.or(parsed(&file, "seed")?),
            trials: self.trials.or(parsed(&file, "trials")?),
            tol: self.tol.or(parsed(&file, "tol")?),
            format: self.format.or(parsed(&file, "format")?),
            out: self.out.clone().or(parsed(&file, "out")?),
            dump: self.dump.clone().or(parsed(&file, "dump")?),
            config: self.config.clone(),
        })
    }
}

/// Fully resolved settings, embedded in every report.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub k: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub model: String,
    pub seed: Option<u64>,
    pub trials: usize,
    pub tol: f64,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub dump: Option<PathBuf>,
    /// Command-specific settings.
    pub params: serde_json::Value,
}

/// Per-command fallbacks for the shared flags.
pub struct Defaults {
    pub k: usize,
    pub n: usize,
    pub trials: usize,
    pub tol: f64,
    pub seed: Option<u64>,
}

impl RunConfig {
    pub fn resolve(command: &str, s: &Shared, d: Defaults) -> Result<RunConfig, CliError> {
        let s = s.merged()?;
        let model = s.model.unwrap_or_else(|| "complex-ginibre".into());
        // normalize the spelling so reports are canonical
        let model = model
            .parse::<tensor_flattenings::TensorModel>()
            .map_err(|e| CliError::usage(format!("--model: {e}")))?
            .to_string();
        Ok(RunConfig {
            command: command.into(),
            k: s.k.unwrap_or(d.k),
            n: s.n.unwrap_or(d.n),
            model,
            seed: s.seed.or(d.seed),
            trials: s.trials.unwrap_or(d.trials),
            tol: s.tol.unwrap_or(d.tol),
            format: s.format.unwrap_or(Format::Table),
            out: s.out,
            dump: s.dump,
            params: serde_json::Value::Null,
        })
    }

    pub fn model(&self) -> tensor_flattenings::TensorModel {
        self.model.parse().expect("model validated in resolve")
    }

    /// The seed, which stochastic runs must be given explicitly.
    pub fn require_seed(&self) -> Result<u64, CliError> {
        self.seed.ok_or_else(|| CliError::usage(format!("{} draws random tensors: pass --seed", self.command)))
    }
}
