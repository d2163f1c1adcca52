//! Simulated scenario generation and workload pre-screening.
//!
//! Generated scenarios are "difficult but achievable": analyst availability
//! is rescaled so that total expected work lands between 1.01 and 1.10 times
//! total availability. Screening checks the same ratio on arbitrary inputs
//! before optimisation and, optionally, drops low-priority work when the
//! workforce is overloaded.

use std::collections::BTreeMap;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Analyst, Scenario, Task, TaskTypeSpec, TypeId, DEFAULT_MAX_PRIORITY};
use crate::objectives::expected_execution_time;

pub const DEFAULT_BURDEN_BOUNDS: (f64, f64) = (1.01, 1.10);
pub const DEFAULT_AVAILABILITY: u64 = 8 * 3600;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorConfig {
    pub n_tasks: usize,
    pub n_analysts: usize,
    pub seed: u64,
    pub type_table: Vec<TaskTypeSpec>,
    pub efficiency_jitter: (f64, f64),
    pub preallocate_fraction: f64,
    /// Pinned tasks get progress drawn from `(0, max_pinned_progress)`.
    pub max_pinned_progress: f64,
    pub target_burden: (f64, f64),
    /// Starting availability per analyst before rescaling, in seconds.
    pub base_availability: u64,
    pub max_priority: u32,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            n_tasks: 65,
            n_analysts: 10,
            seed: 0,
            type_table: TaskTypeSpec::reference_table(),
            efficiency_jitter: (0.9, 1.1),
            preallocate_fraction: 0.05,
            max_pinned_progress: 0.9,
            target_burden: DEFAULT_BURDEN_BOUNDS,
            base_availability: DEFAULT_AVAILABILITY,
            max_priority: DEFAULT_MAX_PRIORITY,
        }
    }
}

impl GeneratorConfig {
    pub fn new(n_tasks: usize, n_analysts: usize, seed: u64) -> Self {
        Self {
            n_tasks,
            n_analysts,
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        let (jlo, jhi) = self.efficiency_jitter;
        let (blo, bhi) = self.target_burden;
        if self.n_analysts == 0 {
            return bad("n_analysts must be positive".into());
        }
        if !(jlo > 0.0 && jlo <= jhi) {
            return bad(format!("efficiency jitter ({jlo}, {jhi}) must be positive and ordered"));
        }
        if !(blo > 0.0 && blo <= bhi) {
            return bad(format!("burden bounds ({blo}, {bhi}) must be positive and ordered"));
        }
        if !(0.0..1.0).contains(&self.preallocate_fraction) {
            return bad(format!("preallocate_fraction {} outside [0, 1)", self.preallocate_fraction));
        }
        if !(self.max_pinned_progress > 0.0 && self.max_pinned_progress < 1.0) {
            return bad(format!("max_pinned_progress {} outside (0, 1)", self.max_pinned_progress));
        }
        if self.max_priority == 0 {
            return bad("max_priority must be positive".into());
        }
        if self.type_table.is_empty() {
            return bad("type table is empty".into());
        }
        Ok(())
    }

    /// Number of tasks that start pinned with prior progress: 5% of 65 is
    /// 3, and any non-zero fraction pins at least one task.
    pub fn preallocated_count(&self) -> usize {
        if self.preallocate_fraction == 0.0 || self.n_tasks == 0 {
            return 0;
        }
        let k = (self.preallocate_fraction * self.n_tasks as f64).round() as usize;
        k.clamp(1, self.n_tasks)
    }
}

/// Probability of drawing each type, proportional to its relative frequency.
pub fn type_probabilities(table: &[TaskTypeSpec]) -> Vec<(TypeId, f64)> {
    let total: f64 = table.iter().map(|t| t.relative_frequency).sum();
    table.iter().map(|t| (t.type_id, t.relative_frequency / total)).collect()
}

pub fn generate_scenario(config: &GeneratorConfig) -> Result<Scenario> {
    config.validate()?;
    if config.n_tasks == 0 {
        return Err(Error::Generation("burden target unreachable with zero tasks".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let table = &config.type_table;
    let type_draw = WeightedIndex::new(table.iter().map(|t| t.relative_frequency))
        .map_err(|e| Error::Generation(format!("type frequencies: {e}")))?;

    let mut tasks: Vec<Task> = (0..config.n_tasks)
        .map(|i| {
            let spec = &table[type_draw.sample(&mut rng)];
            Task {
                task_id: i as u64,
                type_id: spec.type_id,
                complexity: 1.0,
                precision: rng.random::<f64>(),
                priority: rng.random_range(1..=config.max_priority),
                progress: 0.0,
                pinned_to: None,
            }
        })
        .collect();

    let (jlo, jhi) = config.efficiency_jitter;
    let mut analysts: Vec<Analyst> = (0..config.n_analysts)
        .map(|a| {
            let mut efficiency = BTreeMap::new();
            let mut likert = BTreeMap::new();
            for spec in table {
                efficiency.insert(spec.type_id, rng.random_range(jlo..=jhi));
                likert.insert(spec.type_id, rng.random_range(1..=5u8));
            }
            Analyst::new(a as u64, config.base_availability, efficiency, likert)
        })
        .collect();

    let pinned = rand::seq::index::sample(&mut rng, config.n_tasks, config.preallocated_count());
    let mut pinned: Vec<usize> = pinned.into_vec();
    pinned.sort_unstable();
    for t in pinned {
        let analyst = rng.random_range(0..config.n_analysts);
        tasks[t].pinned_to = Some(analysts[analyst].analyst_id);
        // Exclusive of both ends so pinned work is always partly done and
        // always has something left.
        let mut progress = 0.0;
        while progress == 0.0 {
            progress = rng.random::<f64>() * config.max_pinned_progress;
        }
        tasks[t].progress = progress;
    }

    let mut scenario = Scenario {
        tasks,
        analysts: Vec::new(),
        type_specs: table.clone(),
        max_priority: config.max_priority,
        seed: Some(config.seed),
        low_workload: false,
    };
    // Workload is computed against the analysts as generated, then every
    // availability is rescaled by the same factor.
    scenario.analysts = analysts.clone();
    let work = total_expected_work(&scenario)?;
    let (lo, hi) = config.target_burden;
    let target = rng.random_range(lo..=hi);
    let exact = work / (target * config.n_analysts as f64);
    let total = |tau: u64| (tau * config.n_analysts as u64) as f64;
    let tau = [exact.round(), exact.floor(), exact.ceil()]
        .into_iter()
        .map(|t| t as u64)
        .find(|&t| t > 0 && (lo..=hi).contains(&(work / total(t))))
        .ok_or_else(|| Error::Generation(format!("cannot reach burden ratio {target:.3} with integer availability")))?;
    for a in &mut analysts {
        a.availability = tau;
    }
    scenario.analysts = analysts;
    Ok(scenario)
}

/// Remaining expected work of one task for burden purposes: nominal for
/// unpinned tasks, as executed by the pinned analyst otherwise.
fn task_work(scenario: &Scenario, task: &Task) -> Result<f64> {
    let spec = scenario.type_spec(task.type_id)?;
    match task.pinned_to {
        None => Ok(spec.mean_duration as f64 * task.complexity * (1.0 - task.progress)),
        Some(id) => {
            let analyst = &scenario.analysts[scenario.analyst_index(id)?];
            expected_execution_time(task, spec, analyst)
        }
    }
}

fn total_expected_work(scenario: &Scenario) -> Result<f64> {
    scenario.tasks.iter().map(|t| task_work(scenario, t)).sum()
}

/// Total remaining expected work divided by total availability.
pub fn burden_ratio(scenario: &Scenario) -> Result<f64> {
    let availability: u64 = scenario.analysts.iter().map(|a| a.availability).sum();
    if availability == 0 {
        return Err(Error::ZeroAvailability);
    }
    Ok(total_expected_work(scenario)? / availability as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Elevated,
    High,
    Severe,
}

impl Severity {
    pub fn for_ratio(ratio: f64) -> Self {
        if ratio <= 1.25 {
            Severity::Elevated
        } else if ratio <= 1.5 {
            Severity::High
        } else {
            Severity::Severe
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Warning {
    /// Expected work exceeds the upper burden bound.
    Overload { ratio: f64, upper_bound: f64, severity: Severity },
    /// Tasks removed by auto-drop, in removal order.
    TasksDropped { task_ids: Vec<u64>, ratio_after: f64 },
    /// Expected work is below availability; empty allocations get penalised.
    Underload { ratio: f64 },
    /// No analyst can finish this task within anyone's availability.
    TaskTooLong {
        task_id: u64,
        min_expected_time: f64,
        max_availability: u64,
    },
    ZeroAvailability,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScreeningOptions {
    pub bounds: (f64, f64),
    pub auto_drop: bool,
}

impl Default for ScreeningOptions {
    fn default() -> Self {
        Self {
            bounds: DEFAULT_BURDEN_BOUNDS,
            auto_drop: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Screening {
    pub scenario: Scenario,
    pub warnings: Vec<Warning>,
    pub dropped: Vec<u64>,
}

/// Pre-screens a scenario before optimisation. Never drops pinned tasks and
/// never reorders the tasks that remain.
pub fn screen_scenario(scenario: &Scenario, options: &ScreeningOptions) -> Result<Screening> {
    let mut warnings = Vec::new();
    let mut dropped = Vec::new();
    let mut screened = scenario.clone();

    let max_availability = scenario.analysts.iter().map(|a| a.availability).max().unwrap_or(0);
    for task in &scenario.tasks {
        let spec = scenario.type_spec(task.type_id)?;
        let min_time = scenario
            .analysts
            .iter()
            .filter(|a| task.pinned_to.is_none_or(|p| p == a.analyst_id))
            .filter_map(|a| expected_execution_time(task, spec, a).ok())
            .fold(f64::INFINITY, f64::min);
        if min_time.is_finite() && min_time > max_availability as f64 {
            warnings.push(Warning::TaskTooLong {
                task_id: task.task_id,
                min_expected_time: min_time,
                max_availability,
            });
        }
    }

    let ratio = match burden_ratio(scenario) {
        Ok(r) => r,
        Err(Error::ZeroAvailability) => {
            warnings.push(Warning::ZeroAvailability);
            return Ok(Screening {
                scenario: screened,
                warnings,
                dropped,
            });
        }
        Err(e) => return Err(e),
    };

    let (_, upper) = options.bounds;
    let mut ratio_after = ratio;
    if ratio > upper {
        warnings.push(Warning::Overload {
            ratio,
            upper_bound: upper,
            severity: Severity::for_ratio(ratio),
        });
        if options.auto_drop {
            let availability: u64 = scenario.analysts.iter().map(|a| a.availability).sum();
            let mut work = ratio * availability as f64;
            let mut candidates: Vec<(usize, f64)> = scenario
                .tasks
                .iter()
                .enumerate()
                .filter(|(_, t)| t.pinned_to.is_none())
                .map(|(i, t)| Ok((i, task_work(scenario, t)?)))
                .collect::<Result<_>>()?;
            candidates.sort_by(|(i, wi), (j, wj)| {
                let (ti, tj) = (&scenario.tasks[*i], &scenario.tasks[*j]);
                tj.priority.cmp(&ti.priority).then(wj.total_cmp(wi)).then(j.cmp(i))
            });
            let mut remove = vec![false; scenario.n_tasks()];
            for (i, w) in candidates {
                if work / availability as f64 <= upper {
                    break;
                }
                remove[i] = true;
                work -= w;
                dropped.push(scenario.tasks[i].task_id);
            }
            let mut keep = remove.iter().map(|r| !r);
            screened.tasks.retain(|_| keep.next().unwrap_or(true));
            ratio_after = work / availability as f64;
            warnings.push(Warning::TasksDropped {
                task_ids: dropped.clone(),
                ratio_after,
            });
        }
    }
    if ratio_after < 1.0 {
        warnings.push(Warning::Underload { ratio: ratio_after });
    }
    screened.low_workload = ratio_after < 1.0;

    Ok(Screening {
        scenario: screened,
        warnings,
        dropped,
    })
}
