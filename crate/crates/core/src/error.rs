use thiserror::Error;

use crate::model::{Finding, TypeId};

#[derive(Debug, Error)]
pub enum Error {
    #[error("task {task_id}: gene {gene} is not a valid analyst index (m = {analysts})")]
    GeneOutOfRange {
        task_id: u64,
        gene: usize,
        analysts: usize,
    },

    #[error("length mismatch: expected {expected} genes, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("analyst {analyst_id} cannot execute this task type ({type_id})")]
    Infeasible { analyst_id: u64, type_id: TypeId },

    #[error("task {task_id} cannot be executed by any analyst")]
    NoCapableAnalyst { task_id: u64 },

    #[error("variance must be non-negative, got {0}")]
    NegativeVariance(f64),

    #[error("scenario failed validation with {} finding(s): {}", .0.len(), summarize(.0))]
    InvalidScenario(Vec<Finding>),

    #[error("unknown task type {0}")]
    UnknownTaskType(TypeId),

    #[error("unknown task {0}")]
    UnknownTask(u64),

    #[error("unknown analyst {0}")]
    UnknownAnalyst(u64),

    #[error("total analyst availability is zero")]
    ZeroAvailability,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("scenario generation failed: {0}")]
    Generation(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn summarize(findings: &[Finding]) -> String {
    findings
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
