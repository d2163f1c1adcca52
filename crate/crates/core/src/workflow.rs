//! The operational loop around the optimiser: screen, optimise, lay out a
//! schedule, take manager amendments, re-optimise.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ga::{EvolveOutcome, GaConfig, GeneticAlgorithm};
use crate::model::{derive_assignment, Allocation, Scenario, UtilityBreakdown};
use crate::objectives::{expected_execution_time, global_utility, ObjectiveSpec, UtilityModel};
use crate::scenario::{screen_scenario, Screening, ScreeningOptions};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleEntry {
    pub analyst_id: u64,
    pub task_id: u64,
    /// Seconds from the start of the shift.
    pub start_offset: f64,
    pub expected_end: f64,
    pub priority: u32,
    /// The task is expected to run past the analyst's availability.
    pub overflow: bool,
}

/// Per-analyst timelines: tasks by priority then id, back to back, each
/// lasting its remaining expected execution time.
pub fn build_schedule(alloc: &Allocation, scenario: &Scenario) -> Result<Vec<ScheduleEntry>> {
    let lists = derive_assignment(alloc, scenario)?;
    let mut entries = Vec::with_capacity(alloc.len());
    for (a, mut tasks) in lists.into_iter().enumerate() {
        let analyst = &scenario.analysts[a];
        tasks.sort_by_key(|&t| (scenario.tasks[t].priority, scenario.tasks[t].task_id));
        let mut clock = 0.0;
        for t in tasks {
            let task = &scenario.tasks[t];
            let duration = expected_execution_time(task, scenario.type_spec(task.type_id)?, analyst)?;
            let end = clock + duration;
            entries.push(ScheduleEntry {
                analyst_id: analyst.analyst_id,
                task_id: task.task_id,
                start_offset: clock,
                expected_end: end,
                priority: task.priority,
                overflow: end > analyst.availability as f64,
            });
            clock = end;
        }
    }
    Ok(entries)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum AmendmentAction {
    MoveTo { analyst_id: u64 },
    Pin { analyst_id: u64 },
    Unpin,
    SetProgress { fraction: f64 },
    Escalate { priority: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Amendment {
    pub task_id: u64,
    #[serde(flatten)]
    pub action: AmendmentAction,
}

impl Amendment {
    pub fn new(task_id: u64, action: AmendmentAction) -> Self {
        Self { task_id, action }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rejection {
    /// Position of the amendment in the submitted list.
    pub index: usize,
    pub task_id: u64,
    pub reason: String,
}

fn apply_one(alloc: &mut Allocation, scenario: &mut Scenario, amendment: &Amendment) -> std::result::Result<(), String> {
    let t = scenario.task_index(amendment.task_id).map_err(|e| e.to_string())?;
    let capable_index = |scenario: &Scenario, analyst_id: u64| -> std::result::Result<usize, String> {
        let a = scenario.analyst_index(analyst_id).map_err(|e| e.to_string())?;
        let type_id = scenario.tasks[t].type_id;
        if scenario.analysts[a].can_execute(type_id) {
            Ok(a)
        } else {
            Err(Error::Infeasible { analyst_id, type_id }.to_string())
        }
    };
    match amendment.action {
        AmendmentAction::MoveTo { analyst_id } => {
            let a = capable_index(scenario, analyst_id)?;
            alloc.assign(t, a);
            if scenario.tasks[t].pinned_to.is_some() {
                scenario.tasks[t].pinned_to = Some(analyst_id);
            }
        }
        AmendmentAction::Pin { analyst_id } => {
            let a = capable_index(scenario, analyst_id)?;
            alloc.assign(t, a);
            scenario.tasks[t].pinned_to = Some(analyst_id);
        }
        AmendmentAction::Unpin => scenario.tasks[t].pinned_to = None,
        AmendmentAction::SetProgress { fraction } => {
            if !(0.0..1.0).contains(&fraction) {
                return Err(format!("progress must be in [0, 1), got {fraction}"));
            }
            scenario.tasks[t].progress = fraction;
        }
        AmendmentAction::Escalate { priority } => {
            if priority == 0 || priority > scenario.max_priority {
                return Err(format!("priority must be in 1..={}, got {priority}", scenario.max_priority));
            }
            scenario.tasks[t].priority = priority;
        }
    }
    Ok(())
}

/// Applies amendments in order. Nothing is applied unless every amendment
/// is valid; otherwise every rejection is reported.
pub fn apply_amendments(
    alloc: &Allocation,
    scenario: &Scenario,
    amendments: &[Amendment],
) -> std::result::Result<(Allocation, Scenario), Vec<Rejection>> {
    if let Err(e) = alloc.check(scenario) {
        return Err(vec![Rejection {
            index: 0,
            task_id: amendments.first().map_or(0, |a| a.task_id),
            reason: format!("incumbent allocation is invalid: {e}"),
        }]);
    }
    let mut alloc = alloc.clone();
    let mut scenario = scenario.clone();
    let mut rejections = Vec::new();
    for (index, amendment) in amendments.iter().enumerate() {
        if let Err(reason) = apply_one(&mut alloc, &mut scenario, amendment) {
            rejections.push(Rejection {
                index,
                task_id: amendment.task_id,
                reason,
            });
        }
    }
    if rejections.is_empty() {
        if let Err(e) = alloc.check_feasible(&scenario) {
            rejections.push(Rejection {
                index: amendments.len().saturating_sub(1),
                task_id: amendments.last().map_or(0, |a| a.task_id),
                reason: format!("amended allocation is infeasible: {e}"),
            });
        }
    }
    if rejections.is_empty() {
        Ok((alloc, scenario))
    } else {
        Err(rejections)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reoptimization {
    pub incumbent_fitness: f64,
    pub outcome: EvolveOutcome,
}

/// Re-runs the optimiser with `incumbent` planted in the initial
/// population, so the returned allocation never scores below it.
pub fn reoptimize(incumbent: &Allocation, scenario: &Scenario, spec: ObjectiveSpec, config: GaConfig) -> Result<Reoptimization> {
    incumbent.check_feasible(scenario)?;
    let incumbent_fitness = UtilityModel::new(scenario, spec)?.fitness(incumbent.genes());
    let outcome = GeneticAlgorithm::new(scenario, spec, config)?
        .with_incumbent(incumbent.clone())?
        .run();
    Ok(Reoptimization {
        incumbent_fitness,
        outcome,
    })
}

/// Everything a manager needs for one allocation period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plan {
    pub screening: Screening,
    pub outcome: EvolveOutcome,
    pub breakdown: UtilityBreakdown,
    pub schedule: Vec<ScheduleEntry>,
}

/// Screen, optimise, score and schedule in one call. The allocation and
/// schedule refer to `plan.screening.scenario`, which may have fewer tasks
/// than the input when auto-drop is on.
pub fn plan(scenario: &Scenario, spec: ObjectiveSpec, config: GaConfig, screening: &ScreeningOptions) -> Result<Plan> {
    let screening = screen_scenario(scenario, screening)?;
    let outcome = GeneticAlgorithm::new(&screening.scenario, spec, config)?.run();
    let breakdown = global_utility(&outcome.best, &screening.scenario, &spec)?;
    let schedule = build_schedule(&outcome.best, &screening.scenario)?;
    Ok(Plan {
        screening,
        outcome,
        breakdown,
        schedule,
    })
}
