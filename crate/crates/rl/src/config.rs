//! Training hyperparameters, read from a flat `key = value` file.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ppo::LossWeights;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub gamma: f64,
    pub clip: f64,
    pub w1: f64,
    pub w2: f64,
    pub w3_stage1: f64,
    pub w3_stage2: f64,
    pub w4: f64,
    pub lr: f64,
    pub episodes: u64,
    pub epochs: usize,
    /// Sampling weight of disturbance instances in stage 2.
    pub p_small: f64,
    /// Sampling weight of disruption instances in stage 2.
    pub p_large: f64,
    pub stage: u8,
    /// Stage 2 with mixed sampling and distillation; `false` retrains on
    /// disruptions alone without a teacher term.
    pub curriculum: bool,
    pub seed: u64,
    pub stations: usize,
    pub trains: usize,
    pub tau2_small: i64,
    pub tau2_large: i64,
    pub hidden: usize,
    pub include_flag: bool,
    pub eval_every: u64,
    pub validation_size: usize,
    pub validation_seed: u64,
    pub bn_momentum: f32,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            gamma: 0.9,
            clip: 0.2,
            w1: 2.0,
            w2: 2.0,
            w3_stage1: 0.1,
            w3_stage2: 0.03,
            w4: 1.0,
            lr: 1e-4,
            episodes: 5000,
            epochs: 10,
            p_small: 0.8,
            p_large: 0.2,
            stage: 1,
            curriculum: true,
            seed: 0,
            stations: 5,
            trains: 5,
            tau2_small: 60,
            tau2_large: 180,
            hidden: 128,
            include_flag: false,
            eval_every: 50,
            validation_size: 50,
            validation_seed: 1_000_000,
            bn_momentum: 0.9,
        }
    }
}

impl TrainConfig {
    pub fn check(&self) -> Result<(), ConfigError> {
        let bad = |m: &str| Err(ConfigError::Invalid(m.to_string()));
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return bad("gamma must lie in (0, 1]");
        }
        if !(self.clip > 0.0) {
            return bad("clip must be positive");
        }
        if (self.p_small + self.p_large - 1.0).abs() > 1e-9 || !(self.p_small > self.p_large) || self.p_large < 0.0 {
            return bad("sampling weights must sum to 1 with p_small > p_large >= 0");
        }
        if !matches!(self.stage, 1 | 2) {
            return bad("stage must be 1 or 2");
        }
        if self.stations < 2 || self.trains < 1 || self.hidden == 0 {
            return bad("need at least two stations, one train and a non-empty hidden layer");
        }
        if self.eval_every == 0 || self.validation_size == 0 {
            return bad("eval_every and validation_size must be positive");
        }
        if !(self.lr > 0.0) || !(0.0..1.0).contains(&self.bn_momentum) {
            return bad("lr must be positive and bn_momentum in [0, 1)");
        }
        Ok(())
    }

    /// Entropy weight of the configured stage.
    pub fn w3(&self) -> f64 {
        if self.stage == 1 {
            self.w3_stage1
        } else {
            self.w3_stage2
        }
    }

    pub fn distills(&self) -> bool {
        self.stage == 2 && self.curriculum
    }

    pub fn weights(&self) -> LossWeights {
        LossWeights { policy: self.w1, value: self.w2, entropy: self.w3(), distill: if self.distills() { self.w4 } else { 0.0 } }
    }

    pub fn from_text(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text)?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn to_text(&self) -> String {
        toml::to_string(self).expect("flat config serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        Self::from_text(&text)
    }
}
