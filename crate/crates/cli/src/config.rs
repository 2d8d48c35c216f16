//! Flat `key = value` experiment configuration.
//!
//! Blank lines and `#` comments are ignored. List-valued keys (`model`,
//! `mode`, `strategy`) take comma-separated values and the experiment runs
//! their cartesian product.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use aqcast_core::models::ModelKind;
use aqcast_core::nn::AdamConfig;
use aqcast_core::windowing::{FeatureMode, Strategy};
use chrono::{NaiveDate, NaiveDateTime};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("config key `{0}` given twice")]
    DuplicateKey(String),
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("bad value for `{key}`: {message}")]
    Value { key: String, message: String },
    #[error("config key `{0}` is required")]
    Missing(String),
}

const KEYS: &[&str] = &[
    "model",
    "mode",
    "strategy",
    "features",
    "lookback",
    "horizon",
    "epochs",
    "batch_size",
    "trials",
    "train_end",
    "seasonal_months",
    "learning_rate",
    "beta1",
    "beta2",
    "epsilon",
    "input",
    "seed",
    "shuffle_seed",
    "impute_k",
    "save_checkpoints",
    "hidden_fnn",
    "hidden_lstm",
    "hidden_bdlstm",
    "hidden_edlstm",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Multivariate,
    Univariate,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Multivariate => "multivariate",
            Mode::Univariate => "univariate",
        }
    }
}

pub fn strategy_name(s: Strategy) -> &'static str {
    match s {
        Strategy::Plain => "plain",
        Strategy::Shuffled => "shuffled",
        Strategy::Seasonal => "seasonal",
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub models: Vec<ModelKind>,
    pub modes: Vec<Mode>,
    pub strategies: Vec<Strategy>,
    /// Overrides the multivariate input columns.
    pub features: Option<Vec<String>>,
    pub lookback: usize,
    pub horizon: usize,
    /// `None` picks the per-run default, see [`ExperimentConfig::epochs_for`].
    pub epochs: Option<usize>,
    pub batch_size: usize,
    pub trials: usize,
    pub train_end: NaiveDateTime,
    pub seasonal_months: Option<(u32, u32)>,
    pub adam: AdamConfig,
    pub input: Option<PathBuf>,
    pub seed: u64,
    pub shuffle_seed: Option<u64>,
    pub impute_k: usize,
    pub save_checkpoints: bool,
    pub hidden: BTreeMap<String, Vec<usize>>,
    /// Keys and values as written, for the manifest.
    pub entries: BTreeMap<String, String>,
}

/// Accepts `YYYY-MM-DDTHH:MM`, `YYYY-MM-DD HH:MM` or a bare date. A bare
/// date means midnight, or the last minute of the day when `end_of_day`.
pub fn parse_instant(text: &str, end_of_day: bool) -> Option<NaiveDateTime> {
    let text = text.trim();
    for format in ["%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M", "%Y-%m-%dT%H:%M:%S"] {
        if let Ok(t) = NaiveDateTime::parse_from_str(text, format) {
            return Some(t);
        }
    }
    let date = NaiveDate::parse_from_str(text, "%Y-%m-%d").ok()?;
    if end_of_day {
        date.and_hms_opt(23, 59, 59)
    } else {
        date.and_hms_opt(0, 0, 0)
    }
}

fn value_error(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Value { key: key.to_string(), message: message.into() }
}

fn number<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, ConfigError> {
    v.parse().map_err(|_| value_error(key, format!("{v:?} is not a valid number")))
}

fn list(v: &str) -> impl Iterator<Item = &str> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty())
}

impl ExperimentConfig {
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or(ConfigError::Syntax { line: i + 1 })?;
            let key = key.trim().to_string();
            if !KEYS.contains(&key.as_str()) {
                return Err(ConfigError::UnknownKey(key));
            }
            if entries.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(ConfigError::DuplicateKey(key));
            }
        }
        Self::from_entries(entries, base_dir)
    }

    fn from_entries(entries: BTreeMap<String, String>, base_dir: &Path) -> Result<Self, ConfigError> {
        let get = |k: &str| entries.get(k).map(String::as_str);

        let models = match get("model") {
            None => vec![ModelKind::BdLstm],
            Some(v) => list(v)
                .map(|m| m.parse().map_err(|_| value_error("model", format!("unknown model {m:?}"))))
                .collect::<Result<_, _>>()?,
        };
        let modes = match get("mode") {
            None => vec![Mode::Multivariate],
            Some(v) => list(v)
                .map(|m| match m {
                    "multivariate" => Ok(Mode::Multivariate),
                    "univariate" => Ok(Mode::Univariate),
                    other => Err(value_error("mode", format!("unknown mode {other:?}"))),
                })
                .collect::<Result<_, _>>()?,
        };
        let strategies = match get("strategy") {
            None => vec![Strategy::Plain],
            Some(v) => list(v)
                .map(|s| match s {
                    "plain" => Ok(Strategy::Plain),
                    "shuffled" => Ok(Strategy::Shuffled),
                    "seasonal" => Ok(Strategy::Seasonal),
                    other => Err(value_error("strategy", format!("unknown strategy {other:?}"))),
                })
                .collect::<Result<_, _>>()?,
        };
        for (key, empty) in [("model", models.is_empty()), ("mode", modes.is_empty()), ("strategy", strategies.is_empty())] {
            if empty {
                return Err(value_error(key, "empty list"));
            }
        }

        let seasonal_months = get("seasonal_months")
            .map(|v| {
                let (a, b) = v.split_once('-').ok_or_else(|| value_error("seasonal_months", "expected START-END"))?;
                let (a, b): (u32, u32) = (number("seasonal_months", a.trim())?, number("seasonal_months", b.trim())?);
                if !(1..=12).contains(&a) || !(1..=12).contains(&b) || a > b {
                    return Err(value_error("seasonal_months", format!("{a}-{b} is not a month range")));
                }
                Ok((a, b))
            })
            .transpose()?;
        if strategies.contains(&Strategy::Seasonal) && seasonal_months.is_none() {
            return Err(value_error("strategy", "seasonal strategy requires seasonal_months"));
        }

        let train_end = match get("train_end") {
            Some(v) => parse_instant(v, false).ok_or_else(|| value_error("train_end", format!("{v:?} is not a date")))?,
            None => return Err(ConfigError::Missing("train_end".into())),
        };

        let positive = |key: &str, default: usize| -> Result<usize, ConfigError> {
            let v = get(key).map(|v| number::<usize>(key, v)).transpose()?.unwrap_or(default);
            if v == 0 {
                return Err(value_error(key, "must be at least 1"));
            }
            Ok(v)
        };
        let real = |key: &str, default: f64| -> Result<f64, ConfigError> {
            let v = get(key).map(|v| number::<f64>(key, v)).transpose()?.unwrap_or(default);
            if !v.is_finite() {
                return Err(value_error(key, "must be finite"));
            }
            Ok(v)
        };
        let defaults = AdamConfig::default();
        let adam = AdamConfig {
            learning_rate: real("learning_rate", defaults.learning_rate)?,
            beta1: real("beta1", defaults.beta1)?,
            beta2: real("beta2", defaults.beta2)?,
            epsilon: real("epsilon", defaults.epsilon)?,
        };

        let mut hidden = BTreeMap::new();
        for kind in ModelKind::ALL {
            let key = format!("hidden_{}", kind.name().to_lowercase());
            if let Some(v) = get(&key) {
                let sizes = list(v).map(|h| number(&key, h)).collect::<Result<Vec<usize>, _>>()?;
                hidden.insert(kind.name().to_string(), sizes);
            }
        }

        let save_checkpoints = match get("save_checkpoints") {
            None | Some("false") => false,
            Some("true") => true,
            Some(other) => return Err(value_error("save_checkpoints", format!("{other:?} is not true/false"))),
        };

        Ok(Self {
            models,
            modes,
            strategies,
            features: get("features").map(|v| list(v).map(String::from).collect()),
            lookback: positive("lookback", 5)?,
            horizon: positive("horizon", 10)?,
            epochs: get("epochs").map(|v| number("epochs", v)).transpose()?,
            batch_size: positive("batch_size", 20)?,
            trials: positive("trials", 30)?,
            train_end,
            seasonal_months,
            adam,
            input: get("input").map(|v| base_dir.join(v)),
            seed: get("seed").map(|v| number("seed", v)).transpose()?.unwrap_or(0),
            shuffle_seed: get("shuffle_seed").map(|v| number("shuffle_seed", v)).transpose()?,
            impute_k: positive("impute_k", 2)?,
            save_checkpoints,
            hidden,
            entries,
        })
    }

    /// Explicit `epochs`, else 50 for seasonal runs, 1000 for univariate runs
    /// and 200 otherwise.
    pub fn epochs_for(&self, mode: Mode, strategy: Strategy) -> usize {
        self.epochs.unwrap_or(match (strategy, mode) {
            (Strategy::Seasonal, _) => 50,
            (_, Mode::Univariate) => 1000,
            _ => 200,
        })
    }

    pub fn feature_mode(&self, mode: Mode) -> FeatureMode {
        match (mode, &self.features) {
            (Mode::Univariate, _) => FeatureMode::Univariate,
            (Mode::Multivariate, Some(columns)) => FeatureMode::Columns(columns.clone()),
            (Mode::Multivariate, None) => FeatureMode::Multivariate,
        }
    }

    pub fn hidden_for(&self, kind: ModelKind) -> Vec<usize> {
        self.hidden.get(kind.name()).cloned().unwrap_or_else(|| kind.default_hidden())
    }
}
