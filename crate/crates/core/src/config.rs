//! Whole-application configuration file.
//!
//! ```toml
//! [score]
//! betas = [1.0, 0.5]
//!
//! [corruption]
//! seed = 2024
//! target_error_rate = 0.30
//!
//! [transport]
//! model = "gpt-4"
//! max_in_flight = 2
//! ```
//!
//! Every section and field is optional. Auth tokens are never read from here.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corrupt::{CorruptError, CorruptionConfig};
use crate::llm::TransportConfig;
use crate::maxmatch::DEFAULT_BETAS;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScoreConfig {
    pub betas: Vec<f64>,
}

impl Default for ScoreConfig {
    fn default() -> Self {
        Self {
            betas: DEFAULT_BETAS.to_vec(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AppConfig {
    pub score: ScoreConfig,
    pub corruption: CorruptionConfig,
    pub transport: TransportConfig,
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot parse config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error(transparent)]
    Corruption(#[from] CorruptError),
    #[error("invalid transport config: {0}")]
    Transport(String),
    #[error("invalid score config: {0}")]
    Score(String),
}

impl AppConfig {
    pub fn from_toml_str(s: &str) -> Result<Self, ConfigError> {
        let mut cfg: Self = toml::from_str(s)?;
        cfg.corruption.normalize_weights()?;
        cfg.corruption.validate()?;
        cfg.transport.validate().map_err(ConfigError::Transport)?;
        if cfg.score.betas.is_empty() || cfg.score.betas.iter().any(|b| !(b.is_finite() && *b > 0.0)) {
            return Err(ConfigError::Score("betas must be a non-empty list of positive numbers".into()));
        }
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(AppConfig::from_toml_str("").unwrap(), AppConfig::default());
    }

    #[test]
    fn sections_override_defaults() {
        let cfg = AppConfig::from_toml_str(
            "[score]\nbetas = [2.0]\n[corruption]\nseed = 7\naction_weights = { Edit = 3.0, Add = 1.0 }\n\
             [transport]\nmax_in_flight = 1\n",
        )
        .unwrap();
        assert_eq!(cfg.score.betas, vec![2.0]);
        assert_eq!(cfg.corruption.seed, 7);
        assert!((cfg.corruption.action_weights["Edit"] - 0.75).abs() < 1e-12);
        assert_eq!(cfg.transport.max_in_flight, 1);
        assert_eq!(cfg.transport.model, "gpt-4");
    }

    #[test]
    fn bad_values_rejected() {
        assert!(matches!(AppConfig::from_toml_str("[score]\nbetas = []"), Err(ConfigError::Score(_))));
        assert!(matches!(
            AppConfig::from_toml_str("[transport]\nmax_in_flight = 0"),
            Err(ConfigError::Transport(_))
        ));
        assert!(matches!(AppConfig::from_toml_str("[nope]"), Err(ConfigError::Parse(_))));
        assert!(matches!(
            AppConfig::from_toml_str("[corruption]\naction_weights = { Bogus = 1.0 }"),
            Err(ConfigError::Corruption(_))
        ));
    }
}
