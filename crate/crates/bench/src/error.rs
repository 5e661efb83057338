use thiserror::Error;

use ttr_core::instance_gen::GenError;
use ttr_core::io::IoError;
use ttr_core::lp::LpError;
use ttr_core::oracle::OracleError;
use ttr_core::orders::RuleError;
use ttr_core::timetable::TimetableError;
use ttr_core::ModelError;
use ttr_neural::CheckpointError;
use ttr_rl::{ConfigError, RolloutError, TrainError};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    File { path: String, source: std::io::Error },
    #[error(transparent)]
    Format(#[from] IoError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Generate(#[from] GenError),
    #[error(transparent)]
    Rule(#[from] RuleError),
    #[error(transparent)]
    Timetable(#[from] TimetableError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Rollout(#[from] RolloutError),
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error("{count} constraint violations, first: {first}")]
    Infeasible { count: usize, first: String },
}

impl BenchError {
    pub fn file(path: &std::path::Path, source: std::io::Error) -> Self {
        BenchError::File { path: path.display().to_string(), source }
    }

    /// Stable identifier printed in the error line.
    pub fn kind(&self) -> &'static str {
        match self {
            BenchError::Usage(_) => "usage",
            BenchError::File { .. } => "io",
            BenchError::Format(IoError::File { .. }) => "io",
            BenchError::Format(_) | BenchError::Csv(_) => "malformed",
            BenchError::Model(_) => "invalid-input",
            BenchError::Generate(_) => "generate",
            BenchError::Rule(_) => "rule",
            BenchError::Timetable(_) => "timetable",
            BenchError::Oracle(OracleError::GuardExceeded { .. }) => "guard",
            BenchError::Oracle(_) => "timetable",
            BenchError::Lp(_) => "lp",
            BenchError::Checkpoint(_) => "checkpoint",
            BenchError::Config(_) => "config",
            BenchError::Rollout(_) => "rollout",
            BenchError::Train(_) => "train",
            BenchError::Infeasible { .. } => "infeasible",
        }
    }

    /// `error: kind=<kind> message=<text>` on a single line.
    pub fn line(&self) -> String {
        let msg = self.to_string().split_whitespace().collect::<Vec<_>>().join(" ");
        format!("error: kind={} message={}", self.kind(), msg)
    }
}
