//! Flat `key = value` configuration files.
//!
//! ```text
//! # defaults apply to every key left out
//! snr_db = 75
//! a_k = 0.6
//! lambda_c = 5.09e-6
//! ```
//!
//! Keys follow the usual symbols of the system model:
//!
//! | key | field | unit |
//! |---|---|---|
//! | `lambda_c` | BS density | 1/m^2 |
//! | `sigma2` | user scatter variance | m^2 |
//! | `K` | NOMA pairs per cluster | |
//! | `M` | array elements | |
//! | `R_L` | LOS disc radius | m |
//! | `C_L`, `C_N` | path-loss intercepts | linear |
//! | `f_m` | carrier frequency; sets free-space intercepts unless `C_L`/`C_N` are given | Hz |
//! | `alpha_L`, `alpha_N` | path-loss exponents | |
//! | `N_L`, `N_N` | Nakagami shapes | |
//! | `a_k`, `a_j` | power coefficients | |
//! | `tau_k`, `tau_j` | SINR thresholds | linear |
//! | `snr_db` | transmit SNR | dB |
//! | `q_over_lambda` | misalignment half-width | |
//! | `B` | bandwidth | Hz |
//! | `R_k`, `R_j` | rate requirements | bit/s |

use std::fmt::Write as _;
use std::path::Path;

use mmnoma_core::model::free_space_intercept;
use mmnoma_core::{ConfigError, SystemConfig};
use thiserror::Error;

pub const KEYS: [&str; 21] = [
    "lambda_c",
    "sigma2",
    "K",
    "M",
    "R_L",
    "C_L",
    "C_N",
    "f_m",
    "alpha_L",
    "alpha_N",
    "N_L",
    "N_N",
    "a_k",
    "a_j",
    "tau_k",
    "tau_j",
    "snr_db",
    "q_over_lambda",
    "B",
    "R_k",
    "R_j",
];

#[derive(Debug, Error)]
pub enum ConfigFileError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { key: String, line: usize },
    #[error("line {line}: `{key}` is set twice")]
    Duplicate { key: String, line: usize },
    #[error("line {line}: cannot parse `{value}` for `{key}`")]
    Parse { key: String, value: String, line: usize },
    #[error("{}: {source}", location(*.line, .key))]
    Invalid {
        key: String,
        line: Option<usize>,
        #[source]
        source: ConfigError,
    },
}

fn location(line: Option<usize>, key: &str) -> String {
    match line {
        Some(l) => format!("line {l}: `{key}`"),
        None => format!("`{key}`"),
    }
}

/// A validated configuration plus anything worth telling the user.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: SystemConfig,
    pub warnings: Vec<String>,
}

pub fn load_config(path: &Path) -> Result<LoadedConfig, ConfigFileError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigFileError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_config(&text)
}

/// Parses config text on top of the defaults and validates the result.
pub fn parse_config(text: &str) -> Result<LoadedConfig, ConfigFileError> {
    let mut entries: Vec<(String, f64, usize)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or(ConfigFileError::Syntax { line })?;
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            return Err(ConfigFileError::UnknownKey {
                key: key.to_string(),
                line,
            });
        }
        if entries.iter().any(|(k, _, _)| k == key) {
            return Err(ConfigFileError::Duplicate {
                key: key.to_string(),
                line,
            });
        }
        let parsed: f64 = value.parse().map_err(|_| ConfigFileError::Parse {
            key: key.to_string(),
            value: value.to_string(),
            line,
        })?;
        entries.push((key.to_string(), parsed, line));
    }
    build(SystemConfig::default(), &entries)
}

/// Applies `(key, value, line)` entries to `base`, resolves `a_j` and the
/// carrier frequency, and validates.
pub fn build(base: SystemConfig, entries: &[(String, f64, usize)]) -> Result<LoadedConfig, ConfigFileError> {
    let mut cfg = base;
    let mut warnings = Vec::new();
    let get = |k: &str| entries.iter().find(|(key, _, _)| key == k).map(|(_, v, l)| (*v, *l));

    if let Some((f, line)) = get("f_m") {
        if !(f > 0.0 && f.is_finite()) {
            return Err(ConfigFileError::Parse {
                key: "f_m".into(),
                value: f.to_string(),
                line,
            });
        }
        let c = free_space_intercept(f);
        cfg.path_loss.intercept_los = c;
        cfg.path_loss.intercept_nlos = c;
    }
    for (key, value, line) in entries {
        if key == "f_m" || key == "a_j" {
            continue;
        }
        set_param(&mut cfg, key, *value).map_err(|_| ConfigFileError::Parse {
            key: key.clone(),
            value: value.to_string(),
            line: *line,
        })?;
    }
    let implied = 1.0 - cfg.alloc_near;
    match (get("a_k"), get("a_j")) {
        (Some(_), Some((aj, _))) if (aj - implied).abs() > mmnoma_core::model::ALLOCATION_SUM_TOL => {
            warnings.push(format!(
                "a_j = {aj} is inconsistent with a_k + a_j = 1; using a_j = {implied}"
            ));
            cfg.alloc_far = implied;
        }
        (None, Some((aj, _))) => {
            cfg.alloc_far = aj;
            cfg.alloc_near = 1.0 - aj;
        }
        _ => cfg.alloc_far = implied,
    }

    cfg.validate().map_err(|source| {
        let key = source.key().to_string();
        let line = get(&key).map(|(_, l)| l);
        ConfigFileError::Invalid { key, line, source }
    })?;
    Ok(LoadedConfig { config: cfg, warnings })
}

/// Error of [`set_param`]: the key is unknown or the value does not fit it.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("unknown parameter `{0}`")]
    Unknown(String),
    #[error("`{key}` needs a non-negative integer, got {value}")]
    NotInteger { key: String, value: f64 },
}

fn as_count(key: &str, value: f64) -> Result<u32, ParamError> {
    if value >= 0.0 && value.fract() == 0.0 && value <= u32::MAX as f64 {
        Ok(value as u32)
    } else {
        Err(ParamError::NotInteger {
            key: key.to_string(),
            value,
        })
    }
}

/// Sets one field by its config key. `a_k` also updates `a_j = 1 - a_k`
/// and vice versa, so a sweep over either keeps the split consistent.
/// `f_m` resets both intercepts to their free-space values.
pub fn set_param(cfg: &mut SystemConfig, key: &str, value: f64) -> Result<(), ParamError> {
    match key {
        "lambda_c" => cfg.bs_density = value,
        "sigma2" => cfg.user_variance = value,
        "K" => cfg.num_pairs = as_count(key, value)?,
        "M" => cfg.antennas = as_count(key, value)?,
        "R_L" => cfg.los_radius = value,
        "C_L" => cfg.path_loss.intercept_los = value,
        "C_N" => cfg.path_loss.intercept_nlos = value,
        "f_m" => {
            let c = free_space_intercept(value);
            cfg.path_loss.intercept_los = c;
            cfg.path_loss.intercept_nlos = c;
        }
        "alpha_L" => cfg.path_loss.exponent_los = value,
        "alpha_N" => cfg.path_loss.exponent_nlos = value,
        "N_L" => cfg.path_loss.shape_los = as_count(key, value)?,
        "N_N" => cfg.path_loss.shape_nlos = as_count(key, value)?,
        "a_k" => {
            cfg.alloc_near = value;
            cfg.alloc_far = 1.0 - value;
        }
        "a_j" => {
            cfg.alloc_far = value;
            cfg.alloc_near = 1.0 - value;
        }
        "tau_k" => cfg.threshold_near = value,
        "tau_j" => cfg.threshold_far = value,
        "snr_db" => cfg.snr_db = value,
        "q_over_lambda" => cfg.angular_ratio = value,
        "B" => cfg.bandwidth = value,
        "R_k" => cfg.rate_near = value,
        "R_j" => cfg.rate_far = value,
        other => return Err(ParamError::Unknown(other.to_string())),
    }
    Ok(())
}

/// Canonical `key = value` listing; floats use their shortest round-trip form.
pub fn render_config(cfg: &SystemConfig) -> String {
    let p = &cfg.path_loss;
    let pairs: [(&str, String); 20] = [
        ("lambda_c", format!("{:?}", cfg.bs_density)),
        ("sigma2", format!("{:?}", cfg.user_variance)),
        ("K", cfg.num_pairs.to_string()),
        ("M", cfg.antennas.to_string()),
        ("R_L", format!("{:?}", cfg.los_radius)),
        ("C_L", format!("{:?}", p.intercept_los)),
        ("C_N", format!("{:?}", p.intercept_nlos)),
        ("alpha_L", format!("{:?}", p.exponent_los)),
        ("alpha_N", format!("{:?}", p.exponent_nlos)),
        ("N_L", p.shape_los.to_string()),
        ("N_N", p.shape_nlos.to_string()),
        ("a_k", format!("{:?}", cfg.alloc_near)),
        ("a_j", format!("{:?}", cfg.alloc_far)),
        ("tau_k", format!("{:?}", cfg.threshold_near)),
        ("tau_j", format!("{:?}", cfg.threshold_far)),
        ("snr_db", format!("{:?}", cfg.snr_db)),
        ("q_over_lambda", format!("{:?}", cfg.angular_ratio)),
        ("B", format!("{:?}", cfg.bandwidth)),
        ("R_k", format!("{:?}", cfg.rate_near)),
        ("R_j", format!("{:?}", cfg.rate_far)),
    ];
    let mut out = String::new();
    for (k, v) in pairs {
        let _ = writeln!(out, "{k} = {v}");
    }
    out
}
