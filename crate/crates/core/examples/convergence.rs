//! The hyperparameter ablation and baseline comparison on the reference
//! problem: mean final fitness with 95% intervals, the early-improvement
//! share, and the tasks-switched decay. Optionally writes the curves.
//!
//! `cargo run --release --example convergence -- [seeds] [curves.csv]`

use taskalloc::bench::{ablation_variants, reference_scenario, run_convergence, GREEDY, GREEDY_HC};
use taskalloc::objectives::{ObjectiveMode, ObjectiveSpec};

fn main() -> taskalloc::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n_seeds: u64 = args.first().and_then(|s| s.parse().ok()).unwrap_or(20);
    let scenario = reference_scenario(42)?;
    let variants = ablation_variants();
    let seeds: Vec<u64> = (0..n_seeds).collect();
    let report = run_convergence(
        &scenario,
        ObjectiveSpec::new(ObjectiveMode::CompletionOnly),
        &variants,
        &seeds,
    )?;

    println!("{} seeds, {} evaluations per run", n_seeds, report.budget);
    let mut names: Vec<String> = variants.iter().map(|v| v.name.clone()).collect();
    names.extend([GREEDY_HC.to_string(), GREEDY.to_string()]);
    for name in &names {
        let ci = report.report.final_fitness(name);
        println!("  {name:<22} {:.5}  [{:.5}, {:.5}]", ci.mean, ci.low(), ci.high());
    }
    let best = &variants[0].name;
    println!(
        "{best}: {:.1}% of the improvement by generation 20; switched {:.2}/gen early vs {:.2}/gen late",
        100.0 * report.improvement_share(best, 20),
        report.switched_mean(best, 1, 10),
        report.switched_mean(best, 40, 50)
    );
    if let Some(path) = args.get(1) {
        report.write_csv(std::fs::File::create(path)?)?;
        println!("curves written to {path}");
    }
    Ok(())
}
