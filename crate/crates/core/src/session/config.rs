//! `key=value` server configuration. Blank lines and `#` comments are
//! ignored; unknown keys are errors so typos do not pass silently.

use chrono::NaiveDate;
use thiserror::Error;

use crate::behavior::{BehaviorConfig, BehaviorError, DEFAULT_TICK_MS};

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected key=value")]
    MissingEquals { line: usize },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: bad value for `{key}`: {value:?}")]
    BadValue {
        line: usize,
        key: String,
        value: String,
    },
    #[error(transparent)]
    Behavior(#[from] BehaviorError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ServerConfig {
    pub seed: u64,
    pub tick_ms: u64,
    pub behavior: BehaviorConfig,
    /// Estimated speaking time per word of a system utterance.
    pub ms_per_word: u64,
    /// Floor on a system utterance's duration.
    pub min_utterance_ms: u64,
    /// Session date for `hello` without one; the wall-clock date if unset.
    pub default_date: Option<NaiveDate>,
}

impl Default for ServerConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            tick_ms: DEFAULT_TICK_MS,
            behavior: BehaviorConfig::default(),
            ms_per_word: 300,
            min_utterance_ms: 1000,
            default_date: None,
        }
    }
}

impl ServerConfig {
    pub fn parse(source: &str) -> Result<Self, ConfigError> {
        let mut c = ServerConfig::default();
        for (i, raw) in source.lines().enumerate() {
            let line = i + 1;
            let text = raw.split('#').next().unwrap_or("").trim();
            if text.is_empty() {
                continue;
            }
            let (key, value) = text
                .split_once('=')
                .ok_or(ConfigError::MissingEquals { line })?;
            let (key, value) = (key.trim(), value.trim());
            let bad = || ConfigError::BadValue {
                line,
                key: key.to_owned(),
                value: value.to_owned(),
            };
            let int = || value.parse::<u64>().map_err(|_| bad());
            let float = || {
                value
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(bad)
            };
            match key {
                "seed" => c.seed = int()?,
                "tick_ms" => c.tick_ms = int()?.max(1),
                "ms_per_word" => c.ms_per_word = int()?,
                "min_utterance_ms" => c.min_utterance_ms = int()?,
                "default_date" => c.default_date = Some(value.parse().map_err(|_| bad())?),
                "silence_end_of_turn_s" => c.behavior.silence_end_of_turn_s = float()?,
                "gaze_interval_s" => c.behavior.gaze_interval_s = float()?,
                "gaze_outer_radius_m" => c.behavior.gaze_outer_radius_m = float()?,
                "gaze_inner_radius_m" => c.behavior.gaze_inner_radius_m = float()?,
                "gaze_width_m" => c.behavior.gaze_width_m = float()?,
                "nod_period_s" => c.behavior.nod_period_s = float()?,
                "gesture_count" => c.behavior.gesture_count = value.parse().map_err(|_| bad())?,
                _ => {
                    return Err(ConfigError::UnknownKey {
                        line,
                        key: key.to_owned(),
                    })
                }
            }
        }
        c.behavior.validate()?;
        Ok(c)
    }
}
