//! Run configuration read from `--config`, merged under explicit flags.

use std::fs;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::Deserialize;
use serde_json::Value;
use softsqueeze::{BetaProfile, ErrorKind, IntegratorConfig};

use crate::parse;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] softsqueeze::Error),
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Validation(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Validation(_) => 4,
            CliError::Core(e) => match e.kind() {
                ErrorKind::Config => 2,
                ErrorKind::Numeric => 3,
                ErrorKind::Validation => 4,
            },
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Real number given as a JSON number or a string such as `"pi/2"`.
#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
#[serde(try_from = "Value")]
pub struct Real(pub f64);

impl TryFrom<Value> for Real {
    type Error = String;

    fn try_from(v: Value) -> Result<Self, String> {
        match v {
            Value::Number(n) => n
                .as_f64()
                .map(Real)
                .ok_or_else(|| format!("bad number {n}")),
            Value::String(s) => parse::real(&s).map(Real),
            other => Err(format!("expected a number or string, got {other}")),
        }
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Inline profile object, inline JSON string or path to a JSON file.
    pub profile: Option<Value>,
    pub from: Option<Real>,
    pub to: Option<Real>,
    pub integrator: Option<IntegratorConfig>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    /// Echoed into JSON reports.
    pub seed: Option<u64>,
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("invalid config {}: {e}", path.display())))
    }
}

/// Inline JSON when the text starts with `{`, otherwise a file path.
pub fn load_profile(spec: &str) -> CliResult<BetaProfile> {
    let text = if spec.trim_start().starts_with('{') {
        spec.to_string()
    } else {
        fs::read_to_string(spec)
            .map_err(|e| CliError::Config(format!("cannot read profile {spec}: {e}")))?
    };
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("invalid profile: {e}")))
}

pub fn profile_from_value(v: &Value) -> CliResult<BetaProfile> {
    match v {
        Value::String(s) => load_profile(s),
        other => serde_json::from_value(other.clone())
            .map_err(|e| CliError::Config(format!("invalid profile: {e}"))),
    }
}

/// Flags first, then the config file, then the library default.
pub fn integrator(
    steps: Option<usize>,
    rtol: Option<f64>,
    atol: Option<f64>,
    cfg: &RunConfig,
) -> CliResult<IntegratorConfig> {
    let chosen = match (steps, rtol, atol) {
        (Some(_), Some(_), _) | (Some(_), _, Some(_)) => {
            return Err(CliError::Config(
                "--steps conflicts with --rtol/--atol".into(),
            ))
        }
        (Some(n), None, None) => IntegratorConfig::rk4(n),
        (None, None, None) => cfg.integrator.unwrap_or_default(),
        (None, r, a) => IntegratorConfig::adaptive(r.unwrap_or(1e-12), a.unwrap_or(1e-14)),
    };
    chosen.validate()?;
    Ok(chosen)
}
