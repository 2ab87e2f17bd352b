//! Run configuration: a TOML document whose keys mirror this struct, every
//! key optional. Command-line flags override file values.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::categorize::ScoringMode;
use crate::evaluate::ModelConfig;
use crate::ingest::TargetRange;
use crate::prepare::{PrepareConfig, SplitMode};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("malformed config document: {detail}")]
    Malformed { detail: String },
    #[error("invalid config: {detail}")]
    Invalid { detail: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub availability_threshold: f64,
    pub test_fraction: f64,
    pub split_mode: SplitMode,
    pub min_rows: usize,
    pub seed: u64,
    pub target_min: f64,
    pub target_max: f64,
    pub category_scoring: ScoringMode,
    pub out_dir: PathBuf,
    /// Worker threads; 0 picks the machine default.
    pub threads: usize,
    /// Also write every fitted model as a JSON dump under `models/`.
    pub dump_models: bool,
    pub forest: ForestSection,
    pub boosting: BoostingSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            availability_threshold: 0.5,
            test_fraction: 0.2,
            split_mode: SplitMode::Random,
            min_rows: 40,
            seed: 0,
            target_min: 0.0,
            target_max: 112.0,
            category_scoring: ScoringMode::Importance,
            out_dir: PathBuf::from("out"),
            threads: 0,
            dump_models: false,
            forest: ForestSection::default(),
            boosting: BoostingSection::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForestSection {
    pub n_trees: usize,
    /// Candidate features per node; absent means `max(1, p/3)`.
    pub mtry: Option<usize>,
    pub min_samples_leaf: usize,
    /// 0 means unlimited depth.
    pub max_depth: usize,
}

impl Default for ForestSection {
    fn default() -> Self {
        ForestSection {
            n_trees: 300,
            mtry: None,
            min_samples_leaf: 2,
            max_depth: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoostingSection {
    pub rounds: usize,
    pub learning_rate: f64,
    /// 0 means unlimited depth.
    pub max_depth: usize,
    pub min_samples_leaf: usize,
}

impl Default for BoostingSection {
    fn default() -> Self {
        BoostingSection {
            rounds: 300,
            learning_rate: 0.1,
            max_depth: 4,
            min_samples_leaf: 1,
        }
    }
}

impl RunConfig {
    pub fn from_toml(raw: &str) -> Result<Self, ConfigError> {
        let config: RunConfig = toml::from_str(raw).map_err(|e| ConfigError::Malformed {
            detail: e.to_string(),
        })?;
        config.check()?;
        Ok(config)
    }

    pub fn check(&self) -> Result<(), ConfigError> {
        self.prepare_config()
            .check()
            .map_err(|e| ConfigError::Invalid { detail: e.to_string() })?;
        if self.target_min >= self.target_max {
            return Err(ConfigError::Invalid {
                detail: format!(
                    "target range [{}, {}] is empty",
                    self.target_min, self.target_max
                ),
            });
        }
        if self.forest.n_trees == 0 {
            return Err(ConfigError::Invalid {
                detail: "forest.n_trees must be at least 1".to_string(),
            });
        }
        if self.forest.min_samples_leaf == 0 || self.boosting.min_samples_leaf == 0 {
            return Err(ConfigError::Invalid {
                detail: "min_samples_leaf must be at least 1".to_string(),
            });
        }
        if !(self.boosting.learning_rate > 0.0 && self.boosting.learning_rate <= 1.0) {
            return Err(ConfigError::Invalid {
                detail: format!(
                    "boosting.learning_rate must lie in (0, 1], got {}",
                    self.boosting.learning_rate
                ),
            });
        }
        Ok(())
    }

    pub fn prepare_config(&self) -> PrepareConfig {
        PrepareConfig {
            availability_threshold: self.availability_threshold,
            test_fraction: self.test_fraction,
            split_mode: self.split_mode,
            min_rows: self.min_rows,
            seed: self.seed,
        }
    }

    pub fn target_range(&self) -> TargetRange {
        TargetRange {
            min: self.target_min,
            max: self.target_max,
        }
    }

    pub fn model_config(&self) -> ModelConfig {
        ModelConfig {
            forest_trees: self.forest.n_trees,
            forest_mtry: self.forest.mtry,
            forest_min_samples_leaf: self.forest.min_samples_leaf,
            forest_max_depth: (self.forest.max_depth > 0).then_some(self.forest.max_depth),
            boosting_rounds: self.boosting.rounds,
            learning_rate: self.boosting.learning_rate,
            boosting_max_depth: (self.boosting.max_depth > 0)
                .then_some(self.boosting.max_depth),
            boosting_min_samples_leaf: self.boosting.min_samples_leaf,
        }
    }
}
