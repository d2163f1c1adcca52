//! An independent, deliberately naive evaluator of the allocation utility,
//! written straight from the model definitions and using musl's `erfc`
//! (via `libm`) for the normal CDF. Integration tests compare the library against it.

#![allow(dead_code)]

use taskalloc::model::Scenario;
use taskalloc::objectives::ObjectiveMode;

pub const EPSILON: f64 = 1e-6;

fn phi(x: f64, mean: f64, var: f64) -> f64 {
    if var == 0.0 {
        return if x >= mean { 1.0 } else { 0.0 };
    }
    0.5 * libm::erfc((mean - x) / (var.sqrt() * std::f64::consts::SQRT_2))
}

/// Utility of one analyst holding `tasks` (indices into the scenario).
pub fn analyst_value(s: &Scenario, analyst: usize, tasks: &[usize], mode: ObjectiveMode) -> f64 {
    if tasks.is_empty() {
        return if s.low_workload { EPSILON } else { 1.0 };
    }
    let a = &s.analysts[analyst];
    let top = tasks.iter().map(|&t| s.tasks[t].priority).max().unwrap();
    let mut pr = Vec::new();
    for level in 1..=top {
        let (mut mean, mut var) = (0.0, 0.0);
        for &t in tasks {
            let task = &s.tasks[t];
            if task.priority > level {
                continue;
            }
            let eta = a.efficiency.get(&task.type_id).copied().unwrap_or(0.0);
            if eta <= 0.0 {
                return 0.0;
            }
            let spec = s.type_specs.iter().find(|x| x.type_id == task.type_id).unwrap();
            mean += spec.mean_duration as f64 * task.complexity / eta * (1.0 - task.progress);
            var += spec.duration_variance as f64 * (1.0 - task.progress);
        }
        pr.push(phi(a.availability as f64, mean, var));
    }
    let mut completion = pr[0];
    for k in 1..pr.len() {
        if pr[k - 1] == 0.0 {
            completion = 0.0;
            break;
        }
        completion *= (pr[k] / pr[k - 1]).powf(1.0 / (k + 1) as f64);
    }
    let n = tasks.len() as f64;
    let precision: f64 = tasks.iter().map(|&t| s.tasks[t].precision).sum::<f64>() / n;
    let preference: f64 = tasks
        .iter()
        .map(|&t| a.preference_norm.get(&s.tasks[t].type_id).copied().unwrap_or(0.0))
        .sum::<f64>()
        / n;
    match mode {
        ObjectiveMode::CompletionOnly => completion,
        ObjectiveMode::CompletionPreference => completion * preference,
        ObjectiveMode::CompletionPrecision => completion * precision,
        ObjectiveMode::Full => completion * precision * preference,
    }
}

/// Nash product over analysts.
pub fn global_value(s: &Scenario, genes: &[usize], mode: ObjectiveMode) -> f64 {
    (0..s.analysts.len())
        .map(|a| {
            let tasks: Vec<usize> = (0..genes.len()).filter(|&t| genes[t] == a).collect();
            analyst_value(s, a, &tasks, mode)
        })
        .product()
}

/// A small random scenario for exhaustive checks: generated data, some
/// efficiencies zeroed (every task keeps at least one capable analyst),
/// optionally screened so low-workload scoring kicks in.
pub fn small_scenario(seed: u64, n: usize, m: usize) -> Scenario {
    use rand::{Rng, SeedableRng};
    use taskalloc::scenario::{generate_scenario, screen_scenario, GeneratorConfig, ScreeningOptions};

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut cfg = GeneratorConfig::new(n, m, seed);
    cfg.preallocate_fraction = if rng.random_bool(0.3) { 0.2 } else { 0.0 };
    if rng.random_bool(0.3) {
        cfg.target_burden = (0.5, 0.9);
    }
    let mut s = generate_scenario(&cfg).unwrap();
    if m > 1 {
        for a in 0..m {
            for type_id in s.type_specs.iter().map(|t| t.type_id).collect::<Vec<_>>() {
                let others_capable = (0..m).filter(|&b| b != a).any(|b| s.analysts[b].can_execute(type_id));
                let pinned_here = s
                    .tasks
                    .iter()
                    .any(|t| t.type_id == type_id && t.pinned_to == Some(s.analysts[a].analyst_id));
                if others_capable && !pinned_here && rng.random_bool(0.15) {
                    s.analysts[a].efficiency.insert(type_id, 0.0);
                }
            }
        }
    }
    screen_scenario(&s, &ScreeningOptions::default()).unwrap().scenario
}

/// Every allocation of `n` tasks to `m` analysts, in lexicographic order.
pub fn all_allocations(n: usize, m: usize) -> impl Iterator<Item = Vec<usize>> {
    (0..m.pow(n as u32)).map(move |mut code| {
        let mut genes = vec![0; n];
        for g in genes.iter_mut().rev() {
            *g = code % m;
            code /= m;
        }
        genes
    })
}

/// Allocations that keep every pinned task on its analyst.
pub fn respects_pins(s: &Scenario, genes: &[usize]) -> bool {
    s.tasks.iter().zip(genes).all(|(task, &g)| match task.pinned_to {
        Some(id) => s.analysts[g].analyst_id == id,
        None => true,
    })
}

/// Best pin-respecting allocation by the oracle; ties keep the first in
/// enumeration order.
pub fn brute_force(s: &Scenario, mode: ObjectiveMode) -> (Vec<usize>, f64) {
    let mut best = (Vec::new(), f64::NEG_INFINITY);
    for genes in all_allocations(s.tasks.len(), s.analysts.len()).filter(|g| respects_pins(s, g)) {
        let v = global_value(s, &genes, mode);
        if v > best.1 {
            best = (genes, v);
        }
    }
    best
}
