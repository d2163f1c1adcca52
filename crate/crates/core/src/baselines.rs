//! Reference allocators: greedy, greedy followed by hill climbing, and two
//! simulated manager strategies.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Allocation, Scenario};
use crate::objectives::{ObjectiveSpec, UtilityModel};

/// Consecutive degenerate swap proposals (same analyst, or a forbidden
/// pairing) after which hill climbing gives up.
const MAX_IDLE_PROPOSALS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaselineBudget {
    pub max_utility_evaluations: usize,
}

impl BaselineBudget {
    pub fn new(max_utility_evaluations: usize) -> Result<Self> {
        if max_utility_evaluations == 0 {
            return Err(Error::Config("baseline budget must be positive".into()));
        }
        Ok(Self { max_utility_evaluations })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineRun {
    pub allocation: Allocation,
    pub fitness: f64,
    pub evaluations: usize,
}

/// Per-analyst task lists with cached utilities, for cheap local edits.
struct Partial<'a> {
    model: &'a UtilityModel,
    lists: Vec<Vec<usize>>,
    values: Vec<f64>,
}

impl<'a> Partial<'a> {
    fn empty(model: &'a UtilityModel) -> Self {
        let m = model.n_analysts();
        Self {
            model,
            lists: vec![Vec::new(); m],
            values: vec![model.empty_value(); m],
        }
    }

    fn from_genes(model: &'a UtilityModel, genes: &[usize]) -> Self {
        let mut p = Self::empty(model);
        for (t, &a) in genes.iter().enumerate() {
            p.lists[a].push(t);
        }
        for a in 0..p.lists.len() {
            p.values[a] = model.analyst_value(a, &p.lists[a]);
        }
        p
    }

    fn product_with(&self, replaced: &[(usize, f64)]) -> f64 {
        self.values
            .iter()
            .enumerate()
            .map(|(a, &v)| replaced.iter().find(|(b, _)| *b == a).map_or(v, |&(_, r)| r))
            .product()
    }

    fn push(&mut self, task: usize, analyst: usize) {
        self.lists[analyst].push(task);
        self.values[analyst] = self.model.analyst_value(analyst, &self.lists[analyst]);
    }
}

fn greedy_order(scenario: &Scenario) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scenario.n_tasks()).collect();
    order.sort_by_key(|&t| scenario.tasks[t].priority);
    order
}

/// Greedy allocation with its evaluation count.
///
/// Pinned tasks are placed first. Remaining tasks, by priority then input
/// order, each go to the analyst maximising the utility of the partial
/// allocation; analysts without tasks contribute the empty-allocation value.
/// Every candidate analyst considered costs one evaluation.
pub fn greedy_run(scenario: &Scenario, spec: ObjectiveSpec) -> Result<BaselineRun> {
    let model = UtilityModel::new(scenario, spec)?;
    let candidates = scenario.candidate_analysts()?;
    let pins = scenario.pins()?;
    let mut genes = vec![usize::MAX; scenario.n_tasks()];
    let mut partial = Partial::empty(&model);
    for (t, pin) in pins.iter().enumerate() {
        if let Some(a) = *pin {
            genes[t] = a;
            partial.push(t, a);
        }
    }
    let mut evaluations = 0;
    let mut scratch = Vec::new();
    for t in greedy_order(scenario) {
        if pins[t].is_some() {
            continue;
        }
        let mut best: Option<(usize, f64)> = None;
        for &a in &candidates[t] {
            scratch.clear();
            scratch.extend_from_slice(&partial.lists[a]);
            scratch.push(t);
            let value = partial.product_with(&[(a, model.analyst_value(a, &scratch))]);
            evaluations += 1;
            if best.is_none_or(|(_, b)| value > b) {
                best = Some((a, value));
            }
        }
        let (a, _) = best.ok_or(Error::NoCapableAnalyst {
            task_id: scenario.tasks[t].task_id,
        })?;
        genes[t] = a;
        partial.push(t, a);
    }
    let fitness = model.fitness(&genes);
    Ok(BaselineRun {
        allocation: Allocation::new(genes),
        fitness,
        evaluations,
    })
}

pub fn greedy_allocate(scenario: &Scenario, spec: ObjectiveSpec) -> Result<Allocation> {
    Ok(greedy_run(scenario, spec)?.allocation)
}

/// Random-swap hill climbing from `start`.
///
/// Each proposal swaps the analysts of two uniformly chosen unpinned tasks
/// held by different analysts, costs one evaluation, and is kept only if
/// the global utility strictly increases.
pub fn hill_climb_run(
    start: &Allocation,
    scenario: &Scenario,
    spec: ObjectiveSpec,
    budget: usize,
    seed: u64,
) -> Result<BaselineRun> {
    start.check(scenario)?;
    let model = UtilityModel::new(scenario, spec)?;
    let pins = scenario.pins()?;
    let free: Vec<usize> = (0..scenario.n_tasks()).filter(|&t| pins[t].is_none()).collect();
    let mut genes = start.genes().to_vec();
    let mut partial = Partial::from_genes(&model, &genes);
    let mut current = partial.product_with(&[]);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut evaluations = 0;
    let mut idle = 0;
    let mut list_a = Vec::new();
    let mut list_b = Vec::new();

    while evaluations < budget && free.len() >= 2 && idle < MAX_IDLE_PROPOSALS {
        let t1 = free[rng.random_range(0..free.len())];
        let t2 = free[rng.random_range(0..free.len())];
        let (a1, a2) = (genes[t1], genes[t2]);
        if a1 == a2 || !model.is_executable(t1, a2) || !model.is_executable(t2, a1) {
            idle += 1;
            continue;
        }
        idle = 0;
        list_a.clear();
        list_a.extend(partial.lists[a1].iter().map(|&t| if t == t1 { t2 } else { t }));
        list_b.clear();
        list_b.extend(partial.lists[a2].iter().map(|&t| if t == t2 { t1 } else { t }));
        let v1 = model.analyst_value(a1, &list_a);
        let v2 = model.analyst_value(a2, &list_b);
        let candidate = partial.product_with(&[(a1, v1), (a2, v2)]);
        evaluations += 1;
        if candidate > current {
            current = candidate;
            genes[t1] = a2;
            genes[t2] = a1;
            std::mem::swap(&mut partial.lists[a1], &mut list_a);
            std::mem::swap(&mut partial.lists[a2], &mut list_b);
            partial.values[a1] = v1;
            partial.values[a2] = v2;
        }
    }
    Ok(BaselineRun {
        fitness: model.fitness(&genes),
        allocation: Allocation::new(genes),
        evaluations,
    })
}

pub fn hill_climb(
    start: &Allocation,
    scenario: &Scenario,
    spec: ObjectiveSpec,
    budget: BaselineBudget,
    seed: u64,
) -> Result<Allocation> {
    Ok(hill_climb_run(start, scenario, spec, budget.max_utility_evaluations, seed)?.allocation)
}

/// Greedy followed by hill climbing, sharing one evaluation budget.
pub fn greedy_hill_climb(scenario: &Scenario, spec: ObjectiveSpec, budget: BaselineBudget, seed: u64) -> Result<BaselineRun> {
    let greedy = greedy_run(scenario, spec)?;
    let remaining = budget.max_utility_evaluations.saturating_sub(greedy.evaluations);
    let mut climbed = hill_climb_run(&greedy.allocation, scenario, spec, remaining, seed)?;
    climbed.evaluations += greedy.evaluations;
    Ok(climbed)
}

/// Manager strategy 1: tasks in priority order go to the most efficient
/// analyst for their type who is not yet over-burdened (`load < availability`),
/// falling back to less efficient analysts and finally to the least loaded.
/// The task that tips an analyst over still goes to them.
pub fn manager_efficiency(scenario: &Scenario) -> Result<Allocation> {
    let model = UtilityModel::new(scenario, ObjectiveSpec::default())?;
    let candidates = scenario.candidate_analysts()?;
    let pins = scenario.pins()?;
    let m = scenario.n_analysts();
    let mut load = vec![0.0; m];
    let mut genes = vec![usize::MAX; scenario.n_tasks()];
    let expected = |t: usize, a: usize| model.assigned(t, a).map_or(f64::INFINITY, |c| c.expected_time);

    for (t, pin) in pins.iter().enumerate() {
        if let Some(a) = *pin {
            genes[t] = a;
            load[a] += expected(t, a);
        }
    }
    for t in greedy_order(scenario) {
        if pins[t].is_some() {
            continue;
        }
        let type_id = scenario.tasks[t].type_id;
        let mut ranked = candidates[t].clone();
        ranked.sort_by(|&a, &b| {
            let (ea, eb) = (
                scenario.analysts[a].efficiency_for(type_id),
                scenario.analysts[b].efficiency_for(type_id),
            );
            eb.total_cmp(&ea).then(a.cmp(&b))
        });
        let with_room = ranked
            .iter()
            .copied()
            .find(|&a| load[a] < scenario.analysts[a].availability as f64);
        let a = with_room.unwrap_or_else(|| {
            *ranked
                .iter()
                .min_by(|&&a, &&b| load[a].total_cmp(&load[b]).then(a.cmp(&b)))
                .expect("candidate lists are non-empty")
        });
        genes[t] = a;
        load[a] += expected(t, a);
    }
    Ok(Allocation::new(genes))
}

/// Manager strategy 2: tasks in a seeded random order, each dealt to the
/// capable analyst currently holding the fewest tasks.
pub fn manager_balanced(scenario: &Scenario, seed: u64) -> Result<Allocation> {
    let candidates = scenario.candidate_analysts()?;
    let pins = scenario.pins()?;
    let mut count = vec![0usize; scenario.n_analysts()];
    let mut genes = vec![usize::MAX; scenario.n_tasks()];
    for (t, pin) in pins.iter().enumerate() {
        if let Some(a) = *pin {
            genes[t] = a;
            count[a] += 1;
        }
    }
    let mut order: Vec<usize> = (0..scenario.n_tasks()).filter(|&t| pins[t].is_none()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    for t in order {
        let a = *candidates[t]
            .iter()
            .min_by_key(|&&a| (count[a], a))
            .expect("candidate lists are non-empty");
        genes[t] = a;
        count[a] += 1;
    }
    Ok(Allocation::new(genes))
}
