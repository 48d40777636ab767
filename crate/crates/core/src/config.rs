//! Plain-text run configuration.
//!
//! ```text
//! # comment
//! trials = 1000000
//! lambda = 3
//! severity_mean = 10
//! severity_sd = 30
//! k_values = 1, 1.5, 2, 3
//! mode = riemann          # or random
//! seed = 0
//! confidence_level = 0.95
//! chunk_trials = 65536
//! contract = contract_1, 34, 34, 0, 34
//! ```
//!
//! `contract` lines read `name, occ_attach, occ_limit, agg_attach, agg_limit`
//! and may repeat. `mode`, `seed`, `confidence_level` and `chunk_trials` are
//! optional.

use std::collections::HashSet;
use std::fmt::Write as _;

use thiserror::Error;

use crate::distributions::Frequency;
use crate::engine::{Severity, SimulationPlan, DEFAULT_CHUNK_TRIALS, DEFAULT_CONFIDENCE_LEVEL};
use crate::sampling::{PowerTransform, SampleMode, SamplingScheme};
use crate::terms::Contract;

const REQUIRED: [&str; 6] = [
    "trials",
    "lambda",
    "severity_mean",
    "severity_sd",
    "k_values",
    "contract",
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },

    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },

    #[error("line {line}: `{key}` is set more than once")]
    DuplicateKey { line: usize, key: String },

    #[error("line {line}: invalid value `{value}` for `{key}`: {reason}")]
    InvalidValue {
        line: usize,
        key: String,
        value: String,
        reason: String,
    },

    #[error("missing required keys: {}", .0.join(", "))]
    MissingKeys(Vec<&'static str>),
}

#[derive(Default)]
struct Raw {
    trials: Option<usize>,
    lambda: Option<Frequency>,
    severity_mean: Option<(usize, String, f64)>,
    severity_sd: Option<(usize, String, f64)>,
    k_values: Option<Vec<PowerTransform>>,
    scheme: Option<SamplingScheme>,
    seed: Option<u64>,
    confidence_level: Option<f64>,
    chunk_trials: Option<usize>,
    contracts: Vec<Contract>,
}

fn invalid(line: usize, key: &str, value: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::InvalidValue {
        line,
        key: key.to_string(),
        value: value.to_string(),
        reason: reason.into(),
    }
}

fn number(line: usize, key: &str, value: &str) -> Result<f64, ConfigError> {
    let x: f64 = value
        .parse()
        .map_err(|_| invalid(line, key, value, "not a number"))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(invalid(line, key, value, "must be finite"))
    }
}

fn integer<T: std::str::FromStr>(line: usize, key: &str, value: &str) -> Result<T, ConfigError> {
    value
        .parse()
        .map_err(|_| invalid(line, key, value, "not a non-negative integer"))
}

fn set_once<T>(slot: &mut Option<T>, value: T, line: usize, key: &str) -> Result<(), ConfigError> {
    if slot.is_some() {
        return Err(ConfigError::DuplicateKey {
            line,
            key: key.to_string(),
        });
    }
    *slot = Some(value);
    Ok(())
}

fn parse_contract(line: usize, value: &str) -> Result<Contract, ConfigError> {
    let fields: Vec<&str> = value.split(',').map(str::trim).collect();
    if fields.len() != 5 {
        return Err(invalid(
            line,
            "contract",
            value,
            "expected `name, occ_attach, occ_limit, agg_attach, agg_limit`",
        ));
    }
    let name = fields[0];
    if name.is_empty() || name.chars().any(char::is_whitespace) {
        return Err(invalid(
            line,
            "contract",
            value,
            "name must be non-empty without spaces",
        ));
    }
    let mut terms = [0.0; 4];
    for (slot, field) in terms.iter_mut().zip(&fields[1..]) {
        *slot = number(line, "contract", field)?;
    }
    Contract::new(name, terms[0], terms[1], terms[2], terms[3])
        .map_err(|e| invalid(line, "contract", value, e.to_string()))
}

/// Parses and validates a configuration, applying defaults for optional keys.
pub fn parse_config(text: &str) -> Result<SimulationPlan, ConfigError> {
    let mut raw = Raw::default();
    let mut names = HashSet::new();

    for (index, full_line) in text.lines().enumerate() {
        let line = index + 1;
        let content = full_line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(ConfigError::Syntax {
                line,
                text: content.to_string(),
            });
        };
        let (key, value) = (key.trim(), value.trim());
        match key {
            "trials" => {
                let n: usize = integer(line, key, value)?;
                if n < 2 {
                    return Err(invalid(line, key, value, "at least 2 trials are needed"));
                }
                set_once(&mut raw.trials, n, line, key)?;
            }
            "lambda" => {
                let f = Frequency::new(number(line, key, value)?)
                    .map_err(|e| invalid(line, key, value, e.to_string()))?;
                set_once(&mut raw.lambda, f, line, key)?;
            }
            "severity_mean" => {
                let x = number(line, key, value)?;
                if x <= 0.0 {
                    return Err(invalid(line, key, value, "must be positive"));
                }
                set_once(
                    &mut raw.severity_mean,
                    (line, value.to_string(), x),
                    line,
                    key,
                )?;
            }
            "severity_sd" => {
                let x = number(line, key, value)?;
                if x <= 0.0 {
                    return Err(invalid(line, key, value, "must be positive"));
                }
                set_once(
                    &mut raw.severity_sd,
                    (line, value.to_string(), x),
                    line,
                    key,
                )?;
            }
            "k_values" => {
                let ks = value
                    .split(',')
                    .map(|item| {
                        let item = item.trim();
                        let k = number(line, key, item)?;
                        PowerTransform::new(k)
                            .map_err(|_| invalid(line, key, item, "every k must satisfy k >= 1"))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                set_once(&mut raw.k_values, ks, line, key)?;
            }
            "mode" => {
                let scheme = value
                    .parse::<SamplingScheme>()
                    .map_err(|reason| invalid(line, key, value, reason))?;
                set_once(&mut raw.scheme, scheme, line, key)?;
            }
            "seed" => {
                let seed: u64 = integer(line, key, value)?;
                set_once(&mut raw.seed, seed, line, key)?;
            }
            "confidence_level" => {
                let level = number(line, key, value)?;
                if !(level > 0.0 && level < 1.0) {
                    return Err(invalid(
                        line,
                        key,
                        value,
                        "must lie strictly between 0 and 1",
                    ));
                }
                set_once(&mut raw.confidence_level, level, line, key)?;
            }
            "chunk_trials" => {
                let n: usize = integer(line, key, value)?;
                if n == 0 {
                    return Err(invalid(line, key, value, "must be positive"));
                }
                set_once(&mut raw.chunk_trials, n, line, key)?;
            }
            "contract" => {
                let contract = parse_contract(line, value)?;
                if !names.insert(contract.name.clone()) {
                    return Err(invalid(line, key, value, "duplicate contract name"));
                }
                raw.contracts.push(contract);
            }
            _ => {
                return Err(ConfigError::UnknownKey {
                    line,
                    key: key.to_string(),
                })
            }
        }
    }

    let present = [
        raw.trials.is_some(),
        raw.lambda.is_some(),
        raw.severity_mean.is_some(),
        raw.severity_sd.is_some(),
        raw.k_values.is_some(),
        !raw.contracts.is_empty(),
    ];
    let missing: Vec<&'static str> = REQUIRED
        .iter()
        .zip(present)
        .filter(|(_, ok)| !ok)
        .map(|(k, _)| *k)
        .collect();
    if !missing.is_empty() {
        return Err(ConfigError::MissingKeys(missing));
    }

    let (_, _, mean) = raw.severity_mean.expect("checked");
    let (sd_line, sd_text, sd) = raw.severity_sd.expect("checked");
    let severity = Severity::fit(mean, sd)
        .map_err(|e| invalid(sd_line, "severity_sd", &sd_text, e.to_string()))?;

    Ok(SimulationPlan {
        num_trials: raw.trials.expect("checked"),
        frequency: raw.lambda.expect("checked"),
        severity,
        k_values: raw.k_values.expect("checked"),
        mode: SampleMode {
            scheme: raw.scheme.unwrap_or_default(),
            seed: raw.seed.unwrap_or(0),
        },
        contracts: raw.contracts,
        confidence_level: raw.confidence_level.unwrap_or(DEFAULT_CONFIDENCE_LEVEL),
        chunk_trials: raw.chunk_trials.unwrap_or(DEFAULT_CHUNK_TRIALS),
    })
}

/// Writes a plan in the format read by [`parse_config`].
pub fn serialize_plan(plan: &SimulationPlan) -> String {
    let mut out = String::new();
    let ks: Vec<String> = plan.k_values.iter().map(|t| t.k().to_string()).collect();
    // writing to a String cannot fail
    let _ = writeln!(out, "trials = {}", plan.num_trials);
    let _ = writeln!(out, "lambda = {}", plan.frequency.lambda());
    let _ = writeln!(out, "severity_mean = {}", plan.severity.mean);
    let _ = writeln!(out, "severity_sd = {}", plan.severity.sd);
    let _ = writeln!(out, "k_values = {}", ks.join(", "));
    let _ = writeln!(out, "mode = {}", plan.mode.scheme);
    let _ = writeln!(out, "seed = {}", plan.mode.seed);
    let _ = writeln!(out, "confidence_level = {}", plan.confidence_level);
    let _ = writeln!(out, "chunk_trials = {}", plan.chunk_trials);
    for c in &plan.contracts {
        let _ = writeln!(
            out,
            "contract = {}, {}, {}, {}, {}",
            c.name, c.occurrence.attach, c.occurrence.limit, c.aggregate.attach, c.aggregate.limit
        );
    }
    out
}
