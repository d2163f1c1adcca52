//! GA allocations under three objectives against the two simulated
//! manager strategies: workforce completion likelihood and fairness gap.
//!
//! `cargo run --release --example manager_comparison -- [seeds] [out.csv]`

use taskalloc::bench::{ga_strategy_name, reference_scenario, run_comparison, ComparisonReport, MANAGER_BALANCED, MANAGER_EFFICIENCY};
use taskalloc::ga::GaConfig;
use taskalloc::objectives::ObjectiveMode;

fn main() -> taskalloc::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n_seeds: u64 = args.first().and_then(|s| s.parse().ok()).unwrap_or(5);
    let modes = [ObjectiveMode::CompletionOnly, ObjectiveMode::CompletionPreference, ObjectiveMode::Full];
    let mut rows = Vec::new();
    for seed in 1..=n_seeds {
        let scenario = reference_scenario(seed)?;
        rows.extend(run_comparison(&scenario, &modes, &[seed], &GaConfig::default())?.rows);
    }
    let report = ComparisonReport { rows };

    let mut strategies = vec![MANAGER_EFFICIENCY.to_string(), MANAGER_BALANCED.to_string()];
    strategies.extend(modes.iter().map(|&m| ga_strategy_name(m)));
    println!("{:<22} {:>12} {:>10}", "strategy", "likelihood", "gap");
    for s in &strategies {
        println!("{s:<22} {:>12.3e} {:>10.4}", report.mean_likelihood(s), report.mean_gap(s));
    }
    if let Some(path) = args.get(1) {
        report.write_csv(std::fs::File::create(path)?)?;
        println!("rows written to {path}");
    }
    Ok(())
}
