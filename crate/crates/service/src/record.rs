use serde::{Deserialize, Serialize};

use taskalloc::ga::{GaConfig, GenerationStats};
use taskalloc::model::{Allocation, Scenario, UtilityBreakdown};
use taskalloc::objectives::ObjectiveSpec;
use taskalloc::scenario::{ScreeningOptions, Warning};
use taskalloc::workflow::{Amendment, ScheduleEntry};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunStatus {
    Pending,
    Running,
    Done,
    Failed,
    NonConverged,
}

impl RunStatus {
    fn rank(self) -> u8 {
        match self {
            RunStatus::Pending => 0,
            RunStatus::Running => 1,
            RunStatus::Done | RunStatus::Failed | RunStatus::NonConverged => 2,
        }
    }

    pub fn is_terminal(self) -> bool {
        self.rank() == 2
    }

    /// Forward moves only: pending, then running, then one terminal state.
    /// A pending run may fail without ever running.
    pub fn can_become(self, next: RunStatus) -> bool {
        next.rank() > self.rank()
    }
}

/// Everything known about one optimisation run. `scenario` is the screened
/// scenario, so `best` and `schedule` index into it directly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run_id: String,
    #[serde(default)]
    pub parent_id: Option<String>,
    /// Seconds since the Unix epoch.
    pub created_at: u64,
    pub status: RunStatus,
    #[serde(default)]
    pub reason: Option<String>,
    pub scenario: Scenario,
    pub spec: ObjectiveSpec,
    pub config: GaConfig,
    pub screening: ScreeningOptions,
    #[serde(default)]
    pub warnings: Vec<Warning>,
    #[serde(default)]
    pub dropped: Vec<u64>,
    /// Every amendment between the root run and this one, oldest first.
    #[serde(default)]
    pub amendments: Vec<Amendment>,
    /// The amended allocation a child run started from.
    #[serde(default)]
    pub incumbent: Option<Allocation>,
    #[serde(default)]
    pub incumbent_fitness: Option<f64>,
    #[serde(default)]
    pub stats: Vec<GenerationStats>,
    #[serde(default)]
    pub best: Option<Allocation>,
    #[serde(default)]
    pub best_fitness: Option<f64>,
    #[serde(default)]
    pub breakdown: Option<UtilityBreakdown>,
    #[serde(default)]
    pub schedule: Option<Vec<ScheduleEntry>>,
    #[serde(default)]
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("run {run_id} cannot move from {from:?} to {to:?}")]
pub struct TransitionError {
    pub run_id: String,
    pub from: RunStatus,
    pub to: RunStatus,
}

impl RunRecord {
    pub fn new(
        run_id: String,
        scenario: Scenario,
        spec: ObjectiveSpec,
        config: GaConfig,
        screening: ScreeningOptions,
    ) -> Self {
        let created_at = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map_or(0, |d| d.as_secs());
        Self {
            run_id,
            parent_id: None,
            created_at,
            status: RunStatus::Pending,
            reason: None,
            scenario,
            spec,
            config,
            screening,
            warnings: Vec::new(),
            dropped: Vec::new(),
            amendments: Vec::new(),
            incumbent: None,
            incumbent_fitness: None,
            stats: Vec::new(),
            best: None,
            best_fitness: None,
            breakdown: None,
            schedule: None,
            evaluations: 0,
        }
    }

    pub fn advance(&mut self, next: RunStatus) -> Result<(), TransitionError> {
        if !self.status.can_become(next) {
            return Err(TransitionError {
                run_id: self.run_id.clone(),
                from: self.status,
                to: next,
            });
        }
        self.status = next;
        Ok(())
    }

    pub fn fail(&mut self, reason: impl Into<String>) -> Result<(), TransitionError> {
        self.advance(RunStatus::Failed)?;
        self.reason = Some(reason.into());
        Ok(())
    }

    pub fn summary(&self) -> RunSummary {
        RunSummary {
            run_id: self.run_id.clone(),
            parent_id: self.parent_id.clone(),
            created_at: self.created_at,
            status: self.status,
            best_fitness: self.best_fitness,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub run_id: String,
    pub parent_id: Option<String>,
    pub created_at: u64,
    pub status: RunStatus,
    pub best_fitness: Option<f64>,
}
