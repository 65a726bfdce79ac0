//! Flat `key = value` configuration with command-line overrides.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use thiserror::Error;

/// Where a key came from, for error messages.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Origin {
    File { line: usize, column: usize },
    Arg { index: usize, column: usize },
    Default,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::File { line, column } => write!(f, "line {line}, column {column}"),
            Origin::Arg { index, column } => write!(f, "argument {index}, column {column}"),
            Origin::Default => write!(f, "default"),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("{origin}: {message}")]
    Syntax { origin: Origin, message: String },
    #[error("{origin}: unknown key `{key}` for experiment `{experiment}` (accepted: {accepted})")]
    UnknownKey { origin: Origin, key: String, experiment: String, accepted: String },
    #[error("{origin}: bad value `{value}` for `{key}`: {reason}")]
    BadValue { origin: Origin, key: String, value: String, reason: String },
    #[error("missing key `{0}`")]
    Missing(&'static str),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Entry {
    pub value: String,
    /// Position of the key.
    pub origin: Origin,
    /// Position of the value, used for bad-value errors.
    pub value_origin: Origin,
}

impl Entry {
    /// An entry whose key and value share one origin.
    pub fn at(value: impl Into<String>, origin: Origin) -> Self {
        Self { value: value.into(), origin, value_origin: origin }
    }
}

fn is_key(s: &str) -> bool {
    let mut c = s.chars();
    matches!(c.next(), Some(ch) if ch.is_ascii_alphabetic() || ch == '_')
        && c.all(|ch| ch.is_ascii_alphanumeric() || ch == '_' || ch == '-')
}

/// Splits `key = value` at the first `=`; `line_origin(col)` places errors.
fn split_pair(text: &str, origin: impl Fn(usize) -> Origin) -> Result<(String, Entry), ConfigError> {
    let Some(eq) = text.find('=') else {
        return Err(ConfigError::Syntax { origin: origin(1), message: "expected `key = value`".into() });
    };
    let raw_key = &text[..eq];
    let key = raw_key.trim();
    let key_col = raw_key.len() - raw_key.trim_start().len() + 1;
    if key.is_empty() {
        return Err(ConfigError::Syntax { origin: origin(key_col), message: "empty key".into() });
    }
    if !is_key(key) {
        let bad = key.char_indices().find(|&(i, ch)| !(ch.is_ascii_alphanumeric() || ch == '_' || ch == '-') || (i == 0 && !ch.is_ascii_alphabetic() && ch != '_'));
        let col = key_col + bad.map_or(0, |b| b.0);
        return Err(ConfigError::Syntax { origin: origin(col), message: format!("invalid key `{key}`") });
    }
    let raw_val = &text[eq + 1..];
    let value = raw_val.trim();
    let val_col = eq + 2 + (raw_val.len() - raw_val.trim_start().len());
    if value.is_empty() {
        return Err(ConfigError::Syntax { origin: origin(val_col), message: format!("missing value for `{key}`") });
    }
    Ok((key.to_string(), Entry { value: value.to_string(), origin: origin(key_col), value_origin: origin(val_col) }))
}

/// Parses the file format: one `key = value` per line, `#` starts a comment.
pub fn parse_text(text: &str) -> Result<Vec<(String, Entry)>, ConfigError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let body = line.split('#').next().unwrap_or("");
        if body.trim().is_empty() {
            continue;
        }
        out.push(split_pair(body, |column| Origin::File { line: i + 1, column })?);
    }
    Ok(out)
}

pub fn parse_arg(index: usize, arg: &str) -> Result<(String, Entry), ConfigError> {
    split_pair(arg, |column| Origin::Arg { index, column })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Experiment {
    LpCheck,
    UniformCheck,
    SplitCheck,
    Norm,
    Apply,
    DecomposeCheck,
    RatioProbe,
    Sharpness,
}

impl Experiment {
    pub const ALL: [Experiment; 8] = [
        Experiment::LpCheck,
        Experiment::UniformCheck,
        Experiment::SplitCheck,
        Experiment::Norm,
        Experiment::Apply,
        Experiment::DecomposeCheck,
        Experiment::RatioProbe,
        Experiment::Sharpness,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Experiment::LpCheck => "lp-check",
            Experiment::UniformCheck => "uniform-check",
            Experiment::SplitCheck => "split-check",
            Experiment::Norm => "norm",
            Experiment::Apply => "apply",
            Experiment::DecomposeCheck => "decompose-check",
            Experiment::RatioProbe => "ratio-probe",
            Experiment::Sharpness => "sharpness",
        }
    }

    /// Experiment-specific keys; `n`, `T`, `N`, `seed`, `output_dir` and `experiment`
    /// are accepted everywhere.
    pub fn keys(&self) -> &'static [&'static str] {
        match self {
            Experiment::LpCheck => &["K", "points"],
            Experiment::UniformCheck => &["points"],
            Experiment::SplitCheck => &["j_min", "j_max", "points", "debug_corrupt"],
            Experiment::Norm => &["symbol", "m", "mp", "rho", "s0", "s1", "s2", "variant", "eps", "j_max", "j0"],
            Experiment::Apply => &["symbol", "eps"],
            Experiment::DecomposeCheck => &["j0", "rho", "band", "j_low"],
            Experiment::RatioProbe => &["pairing", "j_max", "trials", "s0", "s1", "s2"],
            Experiment::Sharpness => &[
                "family", "s1", "p", "q", "r", "e_min", "e_max", "a", "b", "a1", "a2", "b1", "b2", "m", "mp", "s0",
                "rho", "ell_max",
            ],
        }
    }
}

impl FromStr for Experiment {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Experiment::ALL.iter().copied().find(|e| e.name() == s).ok_or_else(|| {
            let names: Vec<&str> = Experiment::ALL.iter().map(|e| e.name()).collect();
            format!("unknown experiment `{s}` (one of: {})", names.join(", "))
        })
    }
}

const COMMON: [&str; 6] = ["experiment", "n", "T", "N", "seed", "output_dir"];

/// A validated configuration: every key belongs to the named experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub n: usize,
    pub extent: Option<f64>,
    pub points: Option<usize>,
    pub seed: u64,
    pub output_dir: PathBuf,
    params: BTreeMap<String, Entry>,
}

impl ExperimentConfig {
    /// Later entries override earlier ones.
    pub fn build(entries: Vec<(String, Entry)>) -> Result<Self, ConfigError> {
        let mut map: BTreeMap<String, Entry> = BTreeMap::new();
        for (k, e) in entries {
            map.insert(k, e);
        }
        let exp_entry = map.get("experiment").cloned().ok_or(ConfigError::Missing("experiment"))?;
        let experiment: Experiment = exp_entry.value.parse().map_err(|reason| ConfigError::BadValue {
            origin: exp_entry.value_origin,
            key: "experiment".into(),
            value: exp_entry.value.clone(),
            reason,
        })?;
        for (k, e) in &map {
            if !COMMON.contains(&k.as_str()) && !experiment.keys().contains(&k.as_str()) {
                let mut accepted: Vec<&str> = COMMON[1..].to_vec();
                accepted.extend_from_slice(experiment.keys());
                return Err(ConfigError::UnknownKey {
                    origin: e.origin,
                    key: k.clone(),
                    experiment: experiment.name().into(),
                    accepted: accepted.join(", "),
                });
            }
        }
        let mut cfg = Self {
            experiment,
            n: 1,
            extent: None,
            points: None,
            seed: 0,
            output_dir: PathBuf::from("out"),
            params: map,
        };
        cfg.n = cfg.get("n", 1usize)?;
        if !(cfg.n == 1 || cfg.n == 2) {
            return Err(cfg.bad("n", "must be 1 or 2"));
        }
        cfg.extent = cfg.opt("T")?;
        cfg.points = cfg.opt("N")?;
        cfg.seed = cfg.get("seed", 0u64)?;
        if let Some(e) = cfg.params.get("output_dir") {
            cfg.output_dir = PathBuf::from(&e.value);
        }
        Ok(cfg)
    }

    fn bad(&self, key: &str, reason: &str) -> ConfigError {
        let e = &self.params[key];
        ConfigError::BadValue { origin: e.value_origin, key: key.into(), value: e.value.clone(), reason: reason.into() }
    }

    pub fn has(&self, key: &str) -> bool {
        self.params.contains_key(key)
    }

    pub fn opt<T: FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T::Err: fmt::Display,
    {
        match self.params.get(key) {
            None => Ok(None),
            Some(e) => e.value.parse::<T>().map(Some).map_err(|err| ConfigError::BadValue {
                origin: e.value_origin,
                key: key.into(),
                value: e.value.clone(),
                reason: err.to_string(),
            }),
        }
    }

    pub fn get<T: FromStr>(&self, key: &str, default: T) -> Result<T, ConfigError>
    where
        T::Err: fmt::Display,
    {
        Ok(self.opt(key)?.unwrap_or(default))
    }

    /// String value restricted to `choices`.
    pub fn choice(&self, key: &str, default: &'static str, choices: &[&'static str]) -> Result<&str, ConfigError> {
        match self.params.get(key) {
            None => Ok(default),
            Some(e) if choices.contains(&e.value.as_str()) => Ok(e.value.as_str()),
            Some(_) => Err(self.bad(key, &format!("expected one of {}", choices.join(", ")))),
        }
    }

    /// Checks a numeric constraint, reporting the key's origin on failure.
    pub fn ensure(&self, key: &str, ok: bool, reason: &str) -> Result<(), ConfigError> {
        if ok {
            Ok(())
        } else if self.params.contains_key(key) {
            Err(self.bad(key, reason))
        } else {
            Err(ConfigError::BadValue { origin: Origin::Default, key: key.into(), value: String::new(), reason: reason.into() })
        }
    }
}
