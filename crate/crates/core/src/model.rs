//! Domain types shared by every other module: task types, tasks, analysts,
//! scenarios and allocations.
//!
//! Tasks and analysts carry external ids, but everything downstream of
//! loading works with dense 0-based positions in `Scenario::tasks` and
//! `Scenario::analysts`. A chromosome gene is such a position.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type TypeId = u32;

/// Number of priority levels used when a scenario does not say otherwise
/// (high / medium / low).
pub const DEFAULT_MAX_PRIORITY: u32 = 3;

/// Normalised preference range. The floor keeps every preference strictly
/// positive so preference products never annihilate the Nash product.
pub const PREFERENCE_FLOOR: f64 = 0.1;
pub const PREFERENCE_CEIL: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskTypeSpec {
    pub type_id: TypeId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// Mean duration in seconds for an analyst of efficiency 1.
    pub mean_duration: u64,
    /// Duration variance in seconds squared.
    pub duration_variance: u64,
    pub relative_frequency: f64,
}

impl TaskTypeSpec {
    pub fn new(type_id: TypeId, mean_duration: u64, duration_variance: u64, relative_frequency: f64) -> Self {
        Self {
            type_id,
            name: None,
            mean_duration,
            duration_variance,
            relative_frequency,
        }
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    /// The five reference task types A..E with their mean durations,
    /// variances and relative frequencies.
    pub fn reference_table() -> Vec<TaskTypeSpec> {
        vec![
            TaskTypeSpec::new(1, 1_800, 90_000, 1.0).named("A"),
            TaskTypeSpec::new(2, 3_600, 810_000, 0.75).named("B"),
            TaskTypeSpec::new(3, 7_200, 1_440_000, 0.5).named("C"),
            TaskTypeSpec::new(4, 14_400, 7_290_000, 0.25).named("D"),
            TaskTypeSpec::new(5, 21_600, 12_960_000, 0.05).named("E"),
        ]
    }

    pub fn label(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.type_id.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Task {
    pub task_id: u64,
    pub type_id: TypeId,
    pub complexity: f64,
    /// Probability the flagged error is a true positive.
    pub precision: f64,
    /// 1 is the highest priority.
    pub priority: u32,
    /// Fraction of the work already done, in `[0, 1)`.
    #[serde(default)]
    pub progress: f64,
    /// External id of the analyst this task is fixed to.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pinned_to: Option<u64>,
}

impl Task {
    pub fn new(task_id: u64, type_id: TypeId, priority: u32) -> Self {
        Self {
            task_id,
            type_id,
            complexity: 1.0,
            precision: 1.0,
            priority,
            progress: 0.0,
            pinned_to: None,
        }
    }

    pub fn with_complexity(mut self, complexity: f64) -> Self {
        self.complexity = complexity;
        self
    }

    pub fn with_precision(mut self, precision: f64) -> Self {
        self.precision = precision;
        self
    }

    pub fn with_progress(mut self, progress: f64) -> Self {
        self.progress = progress;
        self
    }

    pub fn pinned(mut self, analyst_id: u64) -> Self {
        self.pinned_to = Some(analyst_id);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Analyst {
    pub analyst_id: u64,
    /// Per-type efficiency. Zero means the analyst cannot do that type.
    pub efficiency: BTreeMap<TypeId, f64>,
    /// Seconds available in the allocation period.
    pub availability: u64,
    /// Likert answers in `1..=5`.
    pub preference_raw: BTreeMap<TypeId, u8>,
    /// Filled from `preference_raw` on load when absent.
    #[serde(default)]
    pub preference_norm: BTreeMap<TypeId, f64>,
}

impl Analyst {
    pub fn new(
        analyst_id: u64,
        availability: u64,
        efficiency: BTreeMap<TypeId, f64>,
        preference_raw: BTreeMap<TypeId, u8>,
    ) -> Self {
        let preference_norm = normalize_likert(&preference_raw);
        Self {
            analyst_id,
            efficiency,
            availability,
            preference_raw,
            preference_norm,
        }
    }

    /// An analyst with the same efficiency and neutral preference for every
    /// listed type.
    pub fn uniform(analyst_id: u64, availability: u64, types: &[TypeId], efficiency: f64) -> Self {
        Self::new(
            analyst_id,
            availability,
            types.iter().map(|&t| (t, efficiency)).collect(),
            types.iter().map(|&t| (t, 3)).collect(),
        )
    }

    pub fn efficiency_for(&self, type_id: TypeId) -> f64 {
        self.efficiency.get(&type_id).copied().unwrap_or(0.0)
    }

    pub fn preference_for(&self, type_id: TypeId) -> f64 {
        self.preference_norm.get(&type_id).copied().unwrap_or(PREFERENCE_FLOOR)
    }

    pub fn can_execute(&self, type_id: TypeId) -> bool {
        self.efficiency_for(type_id) > 0.0
    }
}

/// Per-analyst min-max normalisation of Likert answers onto
/// `[PREFERENCE_FLOOR, PREFERENCE_CEIL]`. A constant answer sheet maps to 1.
pub fn normalize_likert(raw: &BTreeMap<TypeId, u8>) -> BTreeMap<TypeId, f64> {
    let (Some(lo), Some(hi)) = (raw.values().min().copied(), raw.values().max().copied()) else {
        return BTreeMap::new();
    };
    raw.iter()
        .map(|(&t, &v)| {
            let norm = if hi == lo {
                PREFERENCE_CEIL
            } else {
                PREFERENCE_FLOOR
                    + (PREFERENCE_CEIL - PREFERENCE_FLOOR) * f64::from(v - lo) / f64::from(hi - lo)
            };
            (t, norm)
        })
        .collect()
}

fn default_max_priority() -> u32 {
    DEFAULT_MAX_PRIORITY
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub tasks: Vec<Task>,
    pub analysts: Vec<Analyst>,
    pub type_specs: Vec<TaskTypeSpec>,
    #[serde(default = "default_max_priority")]
    pub max_priority: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Set by screening when total workload is below total availability;
    /// empty allocations are then penalised.
    #[serde(default)]
    pub low_workload: bool,
}

impl Scenario {
    pub fn new(tasks: Vec<Task>, analysts: Vec<Analyst>, type_specs: Vec<TaskTypeSpec>) -> Self {
        Self {
            tasks,
            analysts,
            type_specs,
            max_priority: DEFAULT_MAX_PRIORITY,
            seed: None,
            low_workload: false,
        }
    }

    pub fn with_max_priority(mut self, p: u32) -> Self {
        self.max_priority = p;
        self
    }

    pub fn n_tasks(&self) -> usize {
        self.tasks.len()
    }

    pub fn n_analysts(&self) -> usize {
        self.analysts.len()
    }

    pub fn type_spec(&self, type_id: TypeId) -> Result<&TaskTypeSpec> {
        self.type_specs
            .iter()
            .find(|s| s.type_id == type_id)
            .ok_or(Error::UnknownTaskType(type_id))
    }

    pub fn task_index(&self, task_id: u64) -> Result<usize> {
        self.tasks
            .iter()
            .position(|t| t.task_id == task_id)
            .ok_or(Error::UnknownTask(task_id))
    }

    pub fn analyst_index(&self, analyst_id: u64) -> Result<usize> {
        self.analysts
            .iter()
            .position(|a| a.analyst_id == analyst_id)
            .ok_or(Error::UnknownAnalyst(analyst_id))
    }

    /// Pin of every task as an analyst index.
    pub fn pins(&self) -> Result<Vec<Option<usize>>> {
        let index: HashMap<u64, usize> = self
            .analysts
            .iter()
            .enumerate()
            .map(|(i, a)| (a.analyst_id, i))
            .collect();
        self.tasks
            .iter()
            .map(|t| match t.pinned_to {
                None => Ok(None),
                Some(id) => index.get(&id).copied().map(Some).ok_or(Error::UnknownAnalyst(id)),
            })
            .collect()
    }

    /// Analyst indices able to execute each task. Pinned tasks list only
    /// their pin.
    pub fn candidate_analysts(&self) -> Result<Vec<Vec<usize>>> {
        let pins = self.pins()?;
        self.tasks
            .iter()
            .zip(pins)
            .map(|(task, pin)| {
                let options: Vec<usize> = match pin {
                    Some(a) => vec![a],
                    None => self
                        .analysts
                        .iter()
                        .enumerate()
                        .filter(|(_, a)| a.can_execute(task.type_id))
                        .map(|(i, _)| i)
                        .collect(),
                };
                if options.is_empty() {
                    Err(Error::NoCapableAnalyst { task_id: task.task_id })
                } else {
                    Ok(options)
                }
            })
            .collect()
    }

    /// Fills `preference_norm` for analysts that only carry raw answers.
    pub fn normalize_preferences(&mut self) {
        for analyst in &mut self.analysts {
            if analyst.preference_norm.is_empty() {
                analyst.preference_norm = normalize_likert(&analyst.preference_raw);
            }
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let mut scenario: Scenario = serde_json::from_str(s)?;
        scenario.normalize_preferences();
        Ok(scenario)
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json_string()?)?;
        Ok(())
    }
}

/// A chromosome: `genes[t]` is the analyst index task `t` is assigned to.
/// Totality of the assignment holds by construction.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Allocation {
    genes: Vec<usize>,
}

impl Allocation {
    pub fn new(genes: Vec<usize>) -> Self {
        Self { genes }
    }

    pub fn genes(&self) -> &[usize] {
        &self.genes
    }

    pub fn genes_mut(&mut self) -> &mut [usize] {
        &mut self.genes
    }

    pub fn into_genes(self) -> Vec<usize> {
        self.genes
    }

    pub fn len(&self) -> usize {
        self.genes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.genes.is_empty()
    }

    pub fn analyst_of(&self, task: usize) -> usize {
        self.genes[task]
    }

    pub fn assign(&mut self, task: usize, analyst: usize) {
        self.genes[task] = analyst;
    }

    /// Checks gene count and range against a scenario.
    pub fn check(&self, scenario: &Scenario) -> Result<()> {
        if self.genes.len() != scenario.n_tasks() {
            return Err(Error::LengthMismatch {
                expected: scenario.n_tasks(),
                actual: self.genes.len(),
            });
        }
        let m = scenario.n_analysts();
        for (t, &gene) in self.genes.iter().enumerate() {
            if gene >= m {
                return Err(Error::GeneOutOfRange {
                    task_id: scenario.tasks[t].task_id,
                    gene,
                    analysts: m,
                });
            }
        }
        Ok(())
    }

    /// Like [`check`](Self::check), and additionally rejects pin violations and
    /// pairings with zero efficiency.
    pub fn check_feasible(&self, scenario: &Scenario) -> Result<()> {
        self.check(scenario)?;
        let pins = scenario.pins()?;
        for (t, (&gene, pin)) in self.genes.iter().zip(pins).enumerate() {
            let task = &scenario.tasks[t];
            let analyst = &scenario.analysts[gene];
            if let Some(p) = pin {
                if p != gene {
                    return Err(Error::Config(format!(
                        "task {} is pinned to analyst {} but allocated to {}",
                        task.task_id, scenario.analysts[p].analyst_id, analyst.analyst_id
                    )));
                }
            }
            if !analyst.can_execute(task.type_id) {
                return Err(Error::Infeasible {
                    analyst_id: analyst.analyst_id,
                    type_id: task.type_id,
                });
            }
        }
        Ok(())
    }
}

impl From<Vec<usize>> for Allocation {
    fn from(genes: Vec<usize>) -> Self {
        Self::new(genes)
    }
}

/// Splits an allocation into per-analyst task index sets, `result[a]` holding
/// the tasks assigned to analyst `a` in ascending order.
pub fn derive_assignment(alloc: &Allocation, scenario: &Scenario) -> Result<Vec<Vec<usize>>> {
    alloc.check(scenario)?;
    let mut sets = vec![Vec::new(); scenario.n_analysts()];
    for (t, &a) in alloc.genes().iter().enumerate() {
        sets[a].push(t);
    }
    Ok(sets)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalystUtility {
    pub analyst_id: u64,
    pub task_count: usize,
    pub completion: f64,
    pub precision: f64,
    pub preference: f64,
    pub worker: f64,
    pub combined: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtilityBreakdown {
    pub per_analyst: Vec<AnalystUtility>,
    pub global: f64,
}

impl UtilityBreakdown {
    /// Product of per-analyst completion utilities: the likelihood of the
    /// whole workforce completing its allocation.
    pub fn completion_likelihood(&self) -> f64 {
        self.per_analyst.iter().map(|u| u.completion).product()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Subject {
    Scenario,
    TaskType { type_id: TypeId },
    Task { task_id: u64 },
    Analyst { analyst_id: u64 },
}

impl fmt::Display for Subject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Subject::Scenario => write!(f, "scenario"),
            Subject::TaskType { type_id } => write!(f, "task type {type_id}"),
            Subject::Task { task_id } => write!(f, "task {task_id}"),
            Subject::Analyst { analyst_id } => write!(f, "analyst {analyst_id}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Finding {
    pub subject: Subject,
    pub message: String,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.subject, self.message)
    }
}

/// Checks every structural invariant of a scenario. An empty result means
/// the scenario is well formed.
pub fn validate_scenario(scenario: &Scenario) -> Vec<Finding> {
    let mut findings = Vec::new();
    let mut push = |subject: Subject, message: String| findings.push(Finding { subject, message });

    if scenario.tasks.is_empty() {
        push(Subject::Scenario, "scenario has no tasks".into());
    }
    if scenario.analysts.is_empty() {
        push(Subject::Scenario, "scenario has no analysts".into());
    }
    if scenario.max_priority == 0 {
        push(Subject::Scenario, "max_priority must be at least 1".into());
    }

    let mut type_ids = HashSet::new();
    for spec in &scenario.type_specs {
        let subject = Subject::TaskType { type_id: spec.type_id };
        if !type_ids.insert(spec.type_id) {
            push(subject.clone(), "duplicate type id".into());
        }
        if spec.mean_duration == 0 {
            push(subject.clone(), "mean_duration must be positive".into());
        }
        if !(spec.relative_frequency >= 0.0 && spec.relative_frequency.is_finite()) {
            push(subject, format!("relative_frequency {} must be non-negative", spec.relative_frequency));
        }
    }

    let analyst_ids: HashSet<u64> = scenario.analysts.iter().map(|a| a.analyst_id).collect();
    if analyst_ids.len() != scenario.analysts.len() {
        push(Subject::Scenario, "duplicate analyst ids".into());
    }

    let mut task_ids = HashSet::new();
    for task in &scenario.tasks {
        let subject = Subject::Task { task_id: task.task_id };
        if !task_ids.insert(task.task_id) {
            push(subject.clone(), "duplicate task id".into());
        }
        if !type_ids.contains(&task.type_id) {
            push(subject.clone(), format!("unknown task type {}", task.type_id));
        }
        if !(task.complexity > 0.0 && task.complexity.is_finite()) {
            push(subject.clone(), format!("complexity {} must be positive", task.complexity));
        }
        if !(0.0..=1.0).contains(&task.precision) {
            push(subject.clone(), format!("precision {} outside [0, 1]", task.precision));
        }
        if task.priority < 1 || task.priority > scenario.max_priority {
            push(
                subject.clone(),
                format!("priority {} outside 1..={}", task.priority, scenario.max_priority),
            );
        }
        if !(0.0..1.0).contains(&task.progress) {
            push(subject.clone(), format!("progress {} outside [0, 1)", task.progress));
        }
        if let Some(pin) = task.pinned_to {
            if !analyst_ids.contains(&pin) {
                push(subject, format!("pinned to unknown analyst {pin}"));
            }
        }
    }

    for analyst in &scenario.analysts {
        let subject = Subject::Analyst { analyst_id: analyst.analyst_id };
        for spec in &scenario.type_specs {
            match analyst.efficiency.get(&spec.type_id) {
                None => push(subject.clone(), format!("missing efficiency for type {}", spec.label())),
                Some(e) if !(*e >= 0.0 && e.is_finite()) => push(
                    subject.clone(),
                    format!("efficiency {e} for type {} must be non-negative", spec.label()),
                ),
                _ => {}
            }
            match analyst.preference_raw.get(&spec.type_id) {
                None => push(subject.clone(), format!("missing preference for type {}", spec.label())),
                Some(v) if !(1..=5).contains(v) => push(
                    subject.clone(),
                    format!("preference {v} for type {} outside 1..=5", spec.label()),
                ),
                _ => {}
            }
        }
        for (t, v) in &analyst.preference_norm {
            if !(PREFERENCE_FLOOR..=PREFERENCE_CEIL).contains(v) {
                push(
                    subject.clone(),
                    format!("normalised preference {v} for type {t} outside [0.1, 1]"),
                );
            }
        }
    }

    findings
}
