//! Run lifecycle: create, optimise in the background, amend, evaluate.

use std::collections::BTreeSet;
use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use taskalloc::ga::{GaConfig, GeneticAlgorithm};
use taskalloc::model::{validate_scenario, Allocation, Finding, Scenario, UtilityBreakdown};
use taskalloc::objectives::{global_utility, ObjectiveSpec};
use taskalloc::scenario::{screen_scenario, ScreeningOptions, Warning};
use taskalloc::workflow::{apply_amendments, build_schedule, Amendment, AmendmentAction, Rejection};

use crate::record::{RunRecord, RunStatus};
use crate::store::RunStore;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateRun {
    pub scenario: Scenario,
    #[serde(default)]
    pub spec: ObjectiveSpec,
    #[serde(default)]
    pub config: GaConfig,
    #[serde(default)]
    pub auto_drop: bool,
    /// Lower and upper burden bounds; the defaults when absent.
    #[serde(default)]
    pub burden_bounds: Option<(f64, f64)>,
}

impl CreateRun {
    pub fn new(scenario: Scenario) -> Self {
        Self {
            scenario,
            spec: ObjectiveSpec::default(),
            config: GaConfig::default(),
            auto_drop: false,
            burden_bounds: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunCreated {
    pub run_id: String,
    pub status: RunStatus,
    pub warnings: Vec<Warning>,
    pub dropped: Vec<u64>,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmendRun {
    pub amendments: Vec<Amendment>,
    /// Fields replacing the parent's GA configuration, e.g. `{"seed": 7}`.
    #[serde(default)]
    pub config: Option<serde_json::Map<String, serde_json::Value>>,
    /// Pin every amended task to the analyst it ends up with, except tasks
    /// the amendments explicitly unpin.
    #[serde(default = "default_true")]
    pub auto_pin: bool,
}

impl AmendRun {
    pub fn new(amendments: Vec<Amendment>) -> Self {
        Self {
            amendments,
            config: None,
            auto_pin: true,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluateAmendments {
    pub amendments: Vec<Amendment>,
}

/// Utility of a run's best allocation before and after amendments, without
/// re-optimising.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub run_id: String,
    pub incumbent: UtilityBreakdown,
    pub amended: UtilityBreakdown,
    pub delta: f64,
    pub genes: Vec<usize>,
}

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("run {0} not found")]
    NotFound(String),
    #[error("scenario failed validation with {} finding(s)", .0.len())]
    InvalidScenario(Vec<Finding>),
    #[error("{} amendment(s) rejected", .0.len())]
    Rejected(Vec<Rejection>),
    #[error("run {run_id} is {status:?}; it has no allocation yet")]
    NotReady { run_id: String, status: RunStatus },
    #[error("{0}")]
    BadRequest(String),
    #[error("{0}")]
    Internal(String),
}

impl From<std::io::Error> for ServiceError {
    fn from(e: std::io::Error) -> Self {
        ServiceError::Internal(format!("store: {e}"))
    }
}

struct Job {
    scenario: Scenario,
    spec: ObjectiveSpec,
    config: GaConfig,
    incumbent: Option<Allocation>,
}

#[derive(Debug, Clone)]
pub struct Service {
    store: Arc<RunStore>,
}

impl Service {
    pub fn new(store: RunStore) -> Self {
        Self { store: Arc::new(store) }
    }

    pub fn store(&self) -> &RunStore {
        &self.store
    }

    pub fn get(&self, run_id: &str) -> Result<RunRecord, ServiceError> {
        self.store.get(run_id).ok_or_else(|| ServiceError::NotFound(run_id.into()))
    }

    /// Screens the scenario now and starts the optimiser on the blocking
    /// pool. Needs a Tokio runtime.
    pub fn create_run(&self, req: CreateRun) -> Result<RunCreated, ServiceError> {
        req.spec.validate().map_err(|e| ServiceError::BadRequest(e.to_string()))?;
        req.config.validate().map_err(|e| ServiceError::BadRequest(e.to_string()))?;
        let findings = validate_scenario(&req.scenario);
        if !findings.is_empty() {
            return Err(ServiceError::InvalidScenario(findings));
        }
        let mut screening = ScreeningOptions {
            auto_drop: req.auto_drop,
            ..ScreeningOptions::default()
        };
        if let Some(bounds) = req.burden_bounds {
            if !(bounds.0 > 0.0 && bounds.0 <= bounds.1) {
                return Err(ServiceError::BadRequest(format!("invalid burden bounds {bounds:?}")));
            }
            screening.bounds = bounds;
        }
        let mut record = RunRecord::new(new_run_id(), req.scenario, req.spec, req.config, screening);
        match screen_scenario(&record.scenario, &screening) {
            Ok(s) => {
                record.scenario = s.scenario;
                record.warnings = s.warnings;
                record.dropped = s.dropped;
            }
            Err(e) => {
                record.fail(format!("screening failed: {e}")).expect("pending runs can fail");
            }
        }
        let created = RunCreated {
            run_id: record.run_id.clone(),
            status: record.status,
            warnings: record.warnings.clone(),
            dropped: record.dropped.clone(),
        };
        let job = Job {
            scenario: record.scenario.clone(),
            spec: record.spec,
            config: record.config.clone(),
            incumbent: None,
        };
        let failed = record.status == RunStatus::Failed;
        self.store.insert(record)?;
        if !failed {
            self.spawn(created.run_id.clone(), job);
        }
        Ok(created)
    }

    /// Applies amendments to a finished run's best allocation and
    /// re-optimises from there as a new child run.
    pub fn amend(&self, parent_id: &str, req: AmendRun) -> Result<RunCreated, ServiceError> {
        let parent = self.get(parent_id)?;
        let best = finished_best(&parent)?;
        let config = merge_config(&parent.config, req.config)?;
        let (incumbent, mut scenario) =
            apply_amendments(&best, &parent.scenario, &req.amendments).map_err(ServiceError::Rejected)?;
        let mut amendments = req.amendments.clone();
        if req.auto_pin {
            amendments.extend(auto_pins(&req.amendments, &incumbent, &mut scenario));
        }

        let mut record = RunRecord::new(new_run_id(), scenario, parent.spec, config, parent.screening);
        record.parent_id = Some(parent.run_id.clone());
        record.warnings = parent.warnings.clone();
        record.dropped = parent.dropped.clone();
        record.amendments = parent.amendments.clone();
        record.amendments.extend(amendments);
        record.incumbent_fitness = global_utility(&incumbent, &record.scenario, &record.spec)
            .ok()
            .map(|b| b.global);
        record.incumbent = Some(incumbent.clone());

        let created = RunCreated {
            run_id: record.run_id.clone(),
            status: record.status,
            warnings: record.warnings.clone(),
            dropped: record.dropped.clone(),
        };
        let job = Job {
            scenario: record.scenario.clone(),
            spec: record.spec,
            config: record.config.clone(),
            incumbent: Some(incumbent),
        };
        self.store.insert(record)?;
        self.spawn(created.run_id.clone(), job);
        Ok(created)
    }

    /// What-if scoring of amendments against a finished run.
    pub fn evaluate(&self, run_id: &str, req: EvaluateAmendments) -> Result<Evaluation, ServiceError> {
        let run = self.get(run_id)?;
        let best = finished_best(&run)?;
        let (amended, scenario) =
            apply_amendments(&best, &run.scenario, &req.amendments).map_err(ServiceError::Rejected)?;
        let score = |alloc: &Allocation, scenario: &Scenario| {
            global_utility(alloc, scenario, &run.spec).map_err(|e| ServiceError::Internal(e.to_string()))
        };
        let incumbent = score(&best, &run.scenario)?;
        let amended_breakdown = score(&amended, &scenario)?;
        Ok(Evaluation {
            run_id: run.run_id,
            delta: amended_breakdown.global - incumbent.global,
            incumbent,
            amended: amended_breakdown,
            genes: amended.into_genes(),
        })
    }

    /// Polls until the run reaches a terminal state or `timeout` passes,
    /// returning the last snapshot either way.
    pub async fn wait(&self, run_id: &str, timeout: Duration) -> Result<RunRecord, ServiceError> {
        let deadline = tokio::time::Instant::now() + timeout;
        loop {
            let record = self.get(run_id)?;
            if record.status.is_terminal() || tokio::time::Instant::now() >= deadline {
                return Ok(record);
            }
            tokio::time::sleep(Duration::from_millis(20)).await;
        }
    }

    fn spawn(&self, run_id: String, job: Job) {
        let store = Arc::clone(&self.store);
        tokio::spawn(async move {
            let worker_store = Arc::clone(&store);
            let worker_id = run_id.clone();
            let joined = tokio::task::spawn_blocking(move || execute(&worker_store, &worker_id, job)).await;
            let outcome = match joined {
                Ok(result) => result,
                Err(e) => store
                    .update(&run_id, |r| {
                        let _ = r.fail(format!("optimiser crashed: {e}"));
                    })
                    .map(|_| ()),
            };
            if let Err(e) = outcome {
                tracing::error!(run_id, error = %e, "could not record run state");
            }
        });
    }
}

fn new_run_id() -> String {
    uuid::Uuid::new_v4().to_string()
}

fn finished_best(run: &RunRecord) -> Result<Allocation, ServiceError> {
    match (&run.status, &run.best) {
        (RunStatus::Done, Some(best)) => Ok(best.clone()),
        _ => Err(ServiceError::NotReady {
            run_id: run.run_id.clone(),
            status: run.status,
        }),
    }
}

fn merge_config(
    base: &GaConfig,
    overrides: Option<serde_json::Map<String, serde_json::Value>>,
) -> Result<GaConfig, ServiceError> {
    let Some(overrides) = overrides else {
        return Ok(base.clone());
    };
    let mut value = serde_json::to_value(base).map_err(|e| ServiceError::Internal(e.to_string()))?;
    let fields = value.as_object_mut().expect("config serialises to an object");
    for (k, v) in overrides {
        if !fields.contains_key(&k) {
            return Err(ServiceError::BadRequest(format!("unknown config field '{k}'")));
        }
        fields.insert(k, v);
    }
    let config: GaConfig =
        serde_json::from_value(value).map_err(|e| ServiceError::BadRequest(format!("config: {e}")))?;
    config.validate().map_err(|e| ServiceError::BadRequest(e.to_string()))?;
    Ok(config)
}

/// Pins each amended task to its analyst in `alloc`, unless some amendment
/// in the list unpins it. Returns the pins added, as amendments.
fn auto_pins(amendments: &[Amendment], alloc: &Allocation, scenario: &mut Scenario) -> Vec<Amendment> {
    let unpinned: BTreeSet<u64> = amendments
        .iter()
        .filter(|a| a.action == AmendmentAction::Unpin)
        .map(|a| a.task_id)
        .collect();
    let touched: BTreeSet<u64> = amendments.iter().map(|a| a.task_id).collect();
    let mut added = Vec::new();
    for task_id in touched.difference(&unpinned) {
        let t = scenario.task_index(*task_id).expect("amended tasks exist");
        let analyst_id = scenario.analysts[alloc.analyst_of(t)].analyst_id;
        if scenario.tasks[t].pinned_to != Some(analyst_id) {
            scenario.tasks[t].pinned_to = Some(analyst_id);
            added.push(Amendment::new(*task_id, AmendmentAction::Pin { analyst_id }));
        }
    }
    added
}

fn execute(store: &RunStore, run_id: &str, job: Job) -> std::io::Result<()> {
    let started = store.update(run_id, |r| r.advance(RunStatus::Running))?;
    if !matches!(started, Some(Ok(()))) {
        return Ok(());
    }
    let ga = GeneticAlgorithm::new(&job.scenario, job.spec, job.config).and_then(|ga| match job.incumbent {
        Some(incumbent) => ga.with_incumbent(incumbent),
        None => Ok(ga),
    });
    let ga = match ga {
        Ok(ga) => ga,
        Err(e) => {
            store.update(run_id, |r| r.fail(e.to_string()))?;
            return Ok(());
        }
    };
    let outcome = ga.run_with(|s| {
        store.update_live(run_id, |r| r.stats.push(s.clone()));
    });
    let finished = global_utility(&outcome.best, &job.scenario, &job.spec)
        .and_then(|b| Ok((b, build_schedule(&outcome.best, &job.scenario)?)));
    store.update(run_id, |r| match finished {
        Ok((breakdown, schedule)) => {
            r.stats = outcome.stats;
            r.evaluations = outcome.evaluations;
            r.best_fitness = Some(outcome.best_fitness);
            r.best = Some(outcome.best);
            r.breakdown = Some(breakdown);
            r.schedule = Some(schedule);
            if outcome.converged {
                r.advance(RunStatus::Done)
            } else {
                r.advance(RunStatus::NonConverged)?;
                r.reason = Some("no allocation with nonzero utility was found".into());
                Ok(())
            }
        }
        Err(e) => r.fail(e.to_string()),
    })?;
    Ok(())
}
