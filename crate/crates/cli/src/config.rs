//! Pipeline configuration: defaults, overridden by a `key=value` config
//! file, overridden by command-line flags. Environment variables are never
//! consulted.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use flowclust::{GSpec, PhiSpec, SymmetrizationMethod};

use crate::CliError;

/// Raw `key=value` pairs from a config file.
#[derive(Debug, Default, Clone)]
pub struct FileConfig {
    values: HashMap<String, String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
        let mut values = HashMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::usage(format!(
                    "config {} line {}: expected key=value",
                    path.display(),
                    lineno + 1
                ))
            })?;
            values.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(FileConfig { values })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }
}

/// Takes the flag value if present, else the config-file value, else the
/// default.
pub fn resolve<T, F>(
    flag: Option<T>,
    config: &FileConfig,
    key: &str,
    default: Option<T>,
    parse: F,
) -> Result<T, CliError>
where
    F: Fn(&str) -> Result<T, CliError>,
{
    if let Some(v) = flag {
        return Ok(v);
    }
    if let Some(raw) = config.get(key) {
        return parse(raw);
    }
    default.ok_or_else(|| CliError::usage(format!("missing required option --{key}")))
}

pub fn parse_f64(key: &str) -> impl Fn(&str) -> Result<f64, CliError> + '_ {
    move |raw| {
        raw.parse()
            .map_err(|_| CliError::usage(format!("--{key}: invalid number '{raw}'")))
    }
}

pub fn parse_usize(key: &str) -> impl Fn(&str) -> Result<usize, CliError> + '_ {
    move |raw| {
        raw.parse()
            .map_err(|_| CliError::usage(format!("--{key}: invalid integer '{raw}'")))
    }
}

pub fn parse_bool(key: &str) -> impl Fn(&str) -> Result<bool, CliError> + '_ {
    move |raw| match raw {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(CliError::usage(format!("--{key}: invalid boolean '{raw}'"))),
    }
}

pub fn parse_path(raw: &str) -> Result<PathBuf, CliError> {
    Ok(PathBuf::from(raw))
}

/// Whether the ingested exchange matrix keeps or strips its diagonal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiagonalPolicy {
    Keep,
    Strip,
}

impl DiagonalPolicy {
    pub fn parse(raw: &str) -> Result<Self, CliError> {
        match raw {
            "keep" => Ok(DiagonalPolicy::Keep),
            "strip" => Ok(DiagonalPolicy::Strip),
            _ => Err(CliError::usage(format!(
                "--diagonal: expected keep or strip, got '{raw}'"
            ))),
        }
    }
}

pub fn parse_symmetrization(raw: &str) -> Result<SymmetrizationMethod, CliError> {
    SymmetrizationMethod::parse(raw).map_err(|e| CliError::usage(e.to_string()))
}

/// Distance selection: the spectral families plus the two non-spectral
/// constructions. Custom spectral weights are not reachable from the CLI.
#[derive(Debug, Clone)]
pub enum FamilyChoice {
    Natural(GSpec),
    ShortestPath,
    Jump,
}

impl FamilyChoice {
    pub fn parse(raw: &str, rho: Option<f64>) -> Result<Self, CliError> {
        match raw {
            "chi2" => Ok(FamilyChoice::Natural(GSpec::Chi2)),
            "diffusive" => Ok(FamilyChoice::Natural(GSpec::Diffusive)),
            "frozen" => Ok(FamilyChoice::Natural(GSpec::Frozen)),
            "commute" => Ok(FamilyChoice::Natural(GSpec::Commute)),
            "sif" => Ok(FamilyChoice::Natural(GSpec::Sif)),
            "absorption" => {
                let rho = rho.ok_or_else(|| {
                    CliError::usage("--family absorption requires --rho".into())
                })?;
                Ok(FamilyChoice::Natural(GSpec::Absorption { rho }))
            }
            "shortest_path" => Ok(FamilyChoice::ShortestPath),
            "jump" => Ok(FamilyChoice::Jump),
            _ => Err(CliError::usage(format!(
                "--family: unknown family '{raw}' (expected chi2, diffusive, frozen, commute, absorption, sif, shortest_path or jump)"
            ))),
        }
    }
}

/// `power:<a>` or `exp:<b>`.
pub fn parse_schoenberg(raw: &str) -> Result<PhiSpec, CliError> {
    let (kind, value) = raw.split_once(':').ok_or_else(|| {
        CliError::usage(format!(
            "--schoenberg: expected power:<a> or exp:<b>, got '{raw}'"
        ))
    })?;
    let value: f64 = value
        .parse()
        .map_err(|_| CliError::usage(format!("--schoenberg: invalid parameter '{raw}'")))?;
    match kind {
        "power" => Ok(PhiSpec::Power { a: value }),
        "exp" | "saturating_exp" => Ok(PhiSpec::SaturatingExp { b: value }),
        _ => Err(CliError::usage(format!(
            "--schoenberg: unknown transform '{kind}'"
        ))),
    }
}

/// Comma-separated list of relative temperatures.
pub fn parse_trel_list(raw: &str) -> Result<Vec<f64>, CliError> {
    raw.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| CliError::usage(format!("--snapshot-trel: invalid number '{s}'")))
        })
        .collect()
}
