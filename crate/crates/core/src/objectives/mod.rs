//! Utility functions: priority-weighted completion probability, precision,
//! preference, their per-analyst combination and the Nash product across
//! analysts. Also the allocation fairness metric used to compare strategies.
//!
//! Two evaluation routes exist. The free functions take an explicit slice of
//! [`AssignedTask`]s for one analyst and are the reference API.
//! [`UtilityModel`] precomputes every task/analyst pairing once and scores
//! whole chromosomes without allocating per task; it is what the optimisers
//! call in their inner loops. Both share [`completion_from_levels`].

mod normal;

use serde::{Deserialize, Serialize};

pub use normal::{erfc, normal_cdf, standard_normal_cdf};

use crate::error::{Error, Result};
use crate::model::{derive_assignment, Allocation, Analyst, AnalystUtility, Scenario, Task, TaskTypeSpec, UtilityBreakdown};

/// Utility given to an analyst with no tasks when empty allocations are
/// penalised.
pub const DEFAULT_EMPTY_PENALTY: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ObjectiveMode {
    #[serde(rename = "completion", alias = "completion_only")]
    CompletionOnly,
    #[serde(rename = "completion-pref", alias = "completion_preference")]
    CompletionPreference,
    #[serde(rename = "full", alias = "completion_preference_precision")]
    Full,
    #[serde(rename = "completion-prec", alias = "completion_precision")]
    CompletionPrecision,
}

impl ObjectiveMode {
    pub const ALL: [ObjectiveMode; 4] = [
        ObjectiveMode::CompletionOnly,
        ObjectiveMode::CompletionPreference,
        ObjectiveMode::Full,
        ObjectiveMode::CompletionPrecision,
    ];

    pub fn uses_preference(self) -> bool {
        matches!(self, ObjectiveMode::CompletionPreference | ObjectiveMode::Full)
    }

    pub fn uses_precision(self) -> bool {
        matches!(self, ObjectiveMode::CompletionPrecision | ObjectiveMode::Full)
    }

    pub fn label(self) -> &'static str {
        match self {
            ObjectiveMode::CompletionOnly => "completion",
            ObjectiveMode::CompletionPreference => "completion-pref",
            ObjectiveMode::Full => "full",
            ObjectiveMode::CompletionPrecision => "completion-prec",
        }
    }
}

impl std::str::FromStr for ObjectiveMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ObjectiveMode::ALL
            .into_iter()
            .find(|m| m.label() == s)
            .ok_or_else(|| Error::Config(format!("unknown objective '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveSpec {
    pub mode: ObjectiveMode,
    #[serde(default = "default_penalty")]
    pub empty_allocation_penalty: f64,
}

fn default_penalty() -> f64 {
    DEFAULT_EMPTY_PENALTY
}

impl ObjectiveSpec {
    pub fn new(mode: ObjectiveMode) -> Self {
        Self {
            mode,
            empty_allocation_penalty: DEFAULT_EMPTY_PENALTY,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.empty_allocation_penalty > 0.0 && self.empty_allocation_penalty <= 0.01 {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "empty_allocation_penalty {} outside (0, 0.01]",
                self.empty_allocation_penalty
            )))
        }
    }
}

impl Default for ObjectiveSpec {
    fn default() -> Self {
        Self::new(ObjectiveMode::Full)
    }
}

/// Remaining expected seconds for `analyst` to finish `task`.
pub fn expected_execution_time(task: &Task, type_spec: &TaskTypeSpec, analyst: &Analyst) -> Result<f64> {
    let efficiency = analyst.efficiency_for(task.type_id);
    if efficiency <= 0.0 {
        return Err(Error::Infeasible {
            analyst_id: analyst.analyst_id,
            type_id: task.type_id,
        });
    }
    Ok(type_spec.mean_duration as f64 * task.complexity / efficiency * (1.0 - task.progress))
}

/// One task as seen by the analyst it is assigned to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssignedTask {
    pub priority: u32,
    /// Remaining expected execution time in seconds.
    pub expected_time: f64,
    /// Remaining duration variance. Independent of the analyst.
    pub variance: f64,
    pub precision: f64,
    pub preference: f64,
}

impl AssignedTask {
    pub fn new(task: &Task, type_spec: &TaskTypeSpec, analyst: &Analyst) -> Result<Self> {
        Ok(Self {
            priority: task.priority,
            expected_time: expected_execution_time(task, type_spec, analyst)?,
            variance: type_spec.duration_variance as f64 * (1.0 - task.progress),
            precision: task.precision,
            preference: analyst.preference_for(task.type_id),
        })
    }
}

/// Combines per-priority sums of expected time and variance into the
/// priority-weighted completion utility. `means[k]` and `variances[k]` hold
/// the totals of priority `k + 1`.
///
/// `Pr(k)` is the probability of finishing every task of priority `<= k`
/// within `availability`; the utility is `Pr(1) * prod_k (Pr(k)/Pr(k-1))^(1/k)`,
/// and an impossible earlier level zeroes the whole utility.
pub fn completion_from_levels(means: &[f64], variances: &[f64], availability: f64) -> f64 {
    let mut cum_mean = 0.0;
    let mut cum_var = 0.0;
    let mut utility = 1.0;
    let mut prev = 1.0;
    for (k, (&mean, &var)) in means.iter().zip(variances).enumerate() {
        cum_mean += mean;
        cum_var += var;
        let pr = normal::normal_cdf_unchecked(availability, cum_mean, cum_var);
        if k == 0 {
            utility = pr;
        } else {
            if prev == 0.0 {
                return 0.0;
            }
            utility *= (pr / prev).powf(1.0 / (k + 1) as f64);
        }
        prev = pr;
    }
    utility
}

fn levels(tasks: &[AssignedTask]) -> (Vec<f64>, Vec<f64>) {
    let top = tasks.iter().map(|t| t.priority as usize).max().unwrap_or(0);
    let mut means = vec![0.0; top];
    let mut vars = vec![0.0; top];
    for t in tasks {
        means[t.priority as usize - 1] += t.expected_time;
        vars[t.priority as usize - 1] += t.variance;
    }
    (means, vars)
}

/// `Pr(π)` for every priority from 1 up to the highest one present.
pub fn priority_completion_probabilities(tasks: &[AssignedTask], availability: f64) -> Vec<(u32, f64)> {
    let (means, vars) = levels(tasks);
    let mut cum_mean = 0.0;
    let mut cum_var = 0.0;
    means
        .iter()
        .zip(&vars)
        .enumerate()
        .map(|(k, (m, v))| {
            cum_mean += m;
            cum_var += v;
            (k as u32 + 1, normal::normal_cdf_unchecked(availability, cum_mean, cum_var))
        })
        .collect()
}

/// Priority-weighted probability of the analyst completing `tasks`. An empty
/// set has utility 1.
pub fn completion_utility(tasks: &[AssignedTask], availability: f64) -> f64 {
    let (means, vars) = levels(tasks);
    completion_from_levels(&means, &vars, availability)
}

/// Mean precision, `None` for an empty set.
pub fn precision_utility(tasks: &[AssignedTask]) -> Option<f64> {
    mean_of(tasks, |t| t.precision)
}

/// Mean preference, optionally weighted by expected execution time.
pub fn preference_utility(tasks: &[AssignedTask], time_weighted: bool) -> Option<f64> {
    if time_weighted {
        time_weighted_mean(tasks, |t| t.preference)
    } else {
        mean_of(tasks, |t| t.preference)
    }
}

fn mean_of(tasks: &[AssignedTask], f: impl Fn(&AssignedTask) -> f64) -> Option<f64> {
    if tasks.is_empty() {
        None
    } else {
        Some(tasks.iter().map(f).sum::<f64>() / tasks.len() as f64)
    }
}

fn time_weighted_mean(tasks: &[AssignedTask], f: impl Fn(&AssignedTask) -> f64) -> Option<f64> {
    let total: f64 = tasks.iter().map(|t| t.expected_time).sum();
    if tasks.is_empty() {
        None
    } else if total > 0.0 {
        Some(tasks.iter().map(|t| t.expected_time * f(t)).sum::<f64>() / total)
    } else {
        mean_of(tasks, f)
    }
}

fn combine(mode: ObjectiveMode, completion: f64, precision: f64, preference: f64) -> f64 {
    let mut u = completion;
    if mode.uses_precision() {
        u *= precision;
    }
    if mode.uses_preference() {
        u *= preference;
    }
    u
}

/// Per-analyst utility under `spec`. An empty set scores the empty
/// allocation penalty.
pub fn analyst_utility(tasks: &[AssignedTask], availability: f64, spec: &ObjectiveSpec) -> f64 {
    if tasks.is_empty() {
        return spec.empty_allocation_penalty;
    }
    combine(
        spec.mode,
        completion_utility(tasks, availability),
        precision_utility(tasks).unwrap_or(1.0),
        preference_utility(tasks, false).unwrap_or(1.0),
    )
}

fn analyst_breakdown(
    analyst: &Analyst,
    tasks: &[AssignedTask],
    spec: &ObjectiveSpec,
    empty_value: f64,
) -> AnalystUtility {
    if tasks.is_empty() {
        return AnalystUtility {
            analyst_id: analyst.analyst_id,
            task_count: 0,
            completion: 1.0,
            precision: 1.0,
            preference: 1.0,
            worker: 1.0,
            combined: empty_value,
        };
    }
    let availability = analyst.availability as f64;
    let completion = completion_utility(tasks, availability);
    let precision = precision_utility(tasks).unwrap_or(1.0);
    let preference = preference_utility(tasks, false).unwrap_or(1.0);
    AnalystUtility {
        analyst_id: analyst.analyst_id,
        task_count: tasks.len(),
        completion,
        precision,
        preference,
        worker: precision * preference,
        combined: analyst_utility(tasks, availability, spec),
    }
}

/// Scenario-bound evaluator with every task/analyst pairing precomputed.
#[derive(Debug, Clone)]
pub struct UtilityModel {
    spec: ObjectiveSpec,
    n: usize,
    m: usize,
    levels: usize,
    availability: Vec<f64>,
    /// `cells[t * m + a]`, `None` when analyst `a` cannot execute task `t`.
    cells: Vec<Option<AssignedTask>>,
    /// Hot copies for `fitness`: expected time per cell (NaN when forbidden),
    /// preference per cell, and the analyst-independent per-task fields.
    times: Vec<f64>,
    preferences: Vec<f64>,
    task_variance: Vec<f64>,
    task_level: Vec<usize>,
    task_precision: Vec<f64>,
    empty_value: f64,
}

impl UtilityModel {
    pub fn new(scenario: &Scenario, spec: ObjectiveSpec) -> Result<Self> {
        spec.validate()?;
        let n = scenario.n_tasks();
        let m = scenario.n_analysts();
        let mut cells = Vec::with_capacity(n * m);
        let mut levels = scenario.max_priority as usize;
        for task in &scenario.tasks {
            if task.priority == 0 {
                return Err(Error::Config(format!("task {} has priority 0", task.task_id)));
            }
            levels = levels.max(task.priority as usize);
            let type_spec = scenario.type_spec(task.type_id)?;
            for analyst in &scenario.analysts {
                cells.push(AssignedTask::new(task, type_spec, analyst).ok());
            }
        }
        let times = cells.iter().map(|c| c.map_or(f64::NAN, |c| c.expected_time)).collect();
        let preferences = cells.iter().map(|c| c.map_or(0.0, |c| c.preference)).collect();
        let mut task_variance = Vec::with_capacity(n);
        for task in &scenario.tasks {
            let spec = scenario.type_spec(task.type_id)?;
            task_variance.push(spec.duration_variance as f64 * (1.0 - task.progress));
        }
        Ok(Self {
            spec,
            n,
            m,
            levels,
            availability: scenario.analysts.iter().map(|a| a.availability as f64).collect(),
            cells,
            times,
            preferences,
            task_variance,
            task_level: scenario.tasks.iter().map(|t| t.priority as usize - 1).collect(),
            task_precision: scenario.tasks.iter().map(|t| t.precision).collect(),
            empty_value: if scenario.low_workload {
                spec.empty_allocation_penalty
            } else {
                1.0
            },
        })
    }

    pub fn spec(&self) -> &ObjectiveSpec {
        &self.spec
    }

    pub fn n_tasks(&self) -> usize {
        self.n
    }

    pub fn n_analysts(&self) -> usize {
        self.m
    }

    /// The task as executed by `analyst`, `None` for a forbidden pairing.
    pub fn assigned(&self, task: usize, analyst: usize) -> Option<&AssignedTask> {
        self.cells[task * self.m + analyst].as_ref()
    }

    pub fn is_executable(&self, task: usize, analyst: usize) -> bool {
        self.cells[task * self.m + analyst].is_some()
    }

    /// Utility credited to an analyst with no tasks: the empty-allocation
    /// penalty under low workload, otherwise neutral.
    pub fn empty_value(&self) -> f64 {
        self.empty_value
    }

    /// Utility of analyst `a` holding exactly `tasks` (task indices).
    pub fn analyst_value(&self, analyst: usize, tasks: &[usize]) -> f64 {
        if tasks.is_empty() {
            return self.empty_value;
        }
        let mut means = vec![0.0; self.levels];
        let mut vars = vec![0.0; self.levels];
        let mut precision = 0.0;
        let mut preference = 0.0;
        for &t in tasks {
            let Some(c) = self.assigned(t, analyst) else {
                return 0.0;
            };
            let k = c.priority as usize - 1;
            means[k] += c.expected_time;
            vars[k] += c.variance;
            precision += c.precision;
            preference += c.preference;
        }
        let count = tasks.len() as f64;
        combine(
            self.spec.mode,
            completion_from_levels(&means, &vars, self.availability[analyst]),
            precision / count,
            preference / count,
        )
    }

    /// Global utility of a chromosome: the product of analyst utilities. Any
    /// forbidden pairing scores 0. Genes must be in range.
    pub fn fitness(&self, genes: &[usize]) -> f64 {
        match (self.spec.mode.uses_precision(), self.spec.mode.uses_preference()) {
            (false, false) => self.fitness_with::<false, false>(genes),
            (true, false) => self.fitness_with::<true, false>(genes),
            (false, true) => self.fitness_with::<false, true>(genes),
            (true, true) => self.fitness_with::<true, true>(genes),
        }
    }

    fn fitness_with<const PREC: bool, const PREF: bool>(&self, genes: &[usize]) -> f64 {
        debug_assert_eq!(genes.len(), self.n);
        let (m, lv) = (self.m, self.levels);
        let mut means = vec![0.0; m * lv];
        let mut vars = vec![0.0; m * lv];
        let mut count = vec![0u32; m];
        let mut precision = vec![0.0; if PREC { m } else { 0 }];
        let mut preference = vec![0.0; if PREF { m } else { 0 }];
        for (t, &a) in genes.iter().enumerate() {
            let time = self.times[t * m + a];
            if time.is_nan() {
                return 0.0;
            }
            let k = a * lv + self.task_level[t];
            means[k] += time;
            vars[k] += self.task_variance[t];
            count[a] += 1;
            if PREC {
                precision[a] += self.task_precision[t];
            }
            if PREF {
                preference[a] += self.preferences[t * m + a];
            }
        }
        let mut global = 1.0;
        for a in 0..m {
            let u = if count[a] == 0 {
                self.empty_value
            } else {
                let mut u = completion_from_levels(
                    &means[a * lv..(a + 1) * lv],
                    &vars[a * lv..(a + 1) * lv],
                    self.availability[a],
                );
                let n_a = count[a] as f64;
                if PREC {
                    u *= precision[a] / n_a;
                }
                if PREF {
                    u *= preference[a] / n_a;
                }
                u
            };
            global *= u;
            if global == 0.0 {
                break;
            }
        }
        global
    }
}

/// Full per-analyst breakdown and Nash product for an allocation. A
/// forbidden pairing zeroes that analyst and therefore the product.
pub fn global_utility(alloc: &Allocation, scenario: &Scenario, spec: &ObjectiveSpec) -> Result<UtilityBreakdown> {
    spec.validate()?;
    let sets = derive_assignment(alloc, scenario)?;
    let empty_value = if scenario.low_workload {
        spec.empty_allocation_penalty
    } else {
        1.0
    };
    let mut per_analyst = Vec::with_capacity(sets.len());
    for (analyst, set) in scenario.analysts.iter().zip(&sets) {
        let assigned: Result<Vec<AssignedTask>> = set
            .iter()
            .map(|&t| {
                let task = &scenario.tasks[t];
                AssignedTask::new(task, scenario.type_spec(task.type_id)?, analyst)
            })
            .collect();
        per_analyst.push(match assigned {
            Ok(tasks) => analyst_breakdown(analyst, &tasks, spec, empty_value),
            Err(Error::Infeasible { .. }) => AnalystUtility {
                analyst_id: analyst.analyst_id,
                task_count: set.len(),
                completion: 0.0,
                precision: 0.0,
                preference: 0.0,
                worker: 0.0,
                combined: 0.0,
            },
            Err(e) => return Err(e),
        });
    }
    let global = per_analyst.iter().map(|u| u.combined).product();
    Ok(UtilityBreakdown { per_analyst, global })
}

/// Per-analyst allocation quality: completion utility times the
/// time-weighted preference and time-weighted precision of the set.
pub fn fairness_scores(alloc: &Allocation, scenario: &Scenario) -> Result<Vec<f64>> {
    let sets = derive_assignment(alloc, scenario)?;
    scenario
        .analysts
        .iter()
        .zip(&sets)
        .map(|(analyst, set)| {
            if set.is_empty() {
                return Ok(DEFAULT_EMPTY_PENALTY);
            }
            let mut tasks = Vec::with_capacity(set.len());
            for &t in set {
                let task = &scenario.tasks[t];
                match AssignedTask::new(task, scenario.type_spec(task.type_id)?, analyst) {
                    Ok(a) => tasks.push(a),
                    Err(Error::Infeasible { .. }) => return Ok(0.0),
                    Err(e) => return Err(e),
                }
            }
            let completion = completion_utility(&tasks, analyst.availability as f64);
            let preference = preference_utility(&tasks, true).unwrap_or(1.0);
            let precision = time_weighted_mean(&tasks, |t| t.precision).unwrap_or(1.0);
            Ok(completion * preference * precision)
        })
        .collect()
}

/// Spread between the best and worst per-analyst score.
pub fn score_gap(scores: &[f64]) -> f64 {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = scores.iter().copied().fold(f64::INFINITY, f64::min);
    if scores.is_empty() {
        0.0
    } else {
        max - min
    }
}

/// Difference between the best and worst analyst allocation quality.
pub fn fairness_gap(alloc: &Allocation, scenario: &Scenario) -> Result<f64> {
    Ok(score_gap(&fairness_scores(alloc, scenario)?))
}

#[cfg(test)]
mod tests;
