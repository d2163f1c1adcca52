//! Greedy, greedy plus hill climbing, and both simulated manager strategies
//! against one GA run at the same evaluation budget.
//!
//! `cargo run --release --example baselines -- [scenario_seed]`

use taskalloc::baselines::{greedy_hill_climb, greedy_run, manager_balanced, manager_efficiency, BaselineBudget};
use taskalloc::bench::reference_scenario;
use taskalloc::ga::{evolve, GaConfig};
use taskalloc::objectives::{ObjectiveMode, ObjectiveSpec, UtilityModel};

fn main() -> taskalloc::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(42);
    let scenario = reference_scenario(seed)?;
    let spec = ObjectiveSpec::new(ObjectiveMode::CompletionOnly);
    let model = UtilityModel::new(&scenario, spec)?;
    let config = GaConfig::default();
    let budget = config.evaluation_budget();

    let greedy = greedy_run(&scenario, spec)?;
    println!("{:<20} {:.6}  ({} evaluations)", "greedy", greedy.fitness, greedy.evaluations);
    let climbed = greedy_hill_climb(&scenario, spec, BaselineBudget::new(budget)?, 0)?;
    println!("{:<20} {:.6}  ({} evaluations)", "greedy+hill-climb", climbed.fitness, climbed.evaluations);
    let ga = evolve(&scenario, spec, config)?;
    println!("{:<20} {:.6}  ({} evaluations)", "genetic algorithm", ga.best_fitness, ga.evaluations);

    let efficiency = manager_efficiency(&scenario)?;
    println!("{:<20} {:.6}", "manager-efficiency", model.fitness(efficiency.genes()));
    let balanced = manager_balanced(&scenario, 0)?;
    println!("{:<20} {:.6}", "manager-balanced", model.fitness(balanced.genes()));
    Ok(())
}
