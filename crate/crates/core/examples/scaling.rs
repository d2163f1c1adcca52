//! Runtime against problem size with the population scaled linearly in the
//! task count, for single- and multi-objective fitness.
//!
//! `cargo run --release --example scaling -- [ga_seeds] [rounds] [out.csv]`

use taskalloc::bench::{run_scaling, SCALING_SIZES};
use taskalloc::ga::GaConfig;
use taskalloc::objectives::ObjectiveMode;

fn main() -> taskalloc::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n_seeds: u64 = args.first().and_then(|s| s.parse().ok()).unwrap_or(2);
    let rounds: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let modes = [ObjectiveMode::CompletionOnly, ObjectiveMode::CompletionPrecision];
    let seeds: Vec<u64> = (0..n_seeds).collect();
    let report = run_scaling(&SCALING_SIZES, &modes, &GaConfig::default(), 7, &seeds, rounds)?;

    for mode in modes {
        println!("{} (log-log slope {:.2})", mode.label(), report.slope(mode));
        for p in report.points_of(mode) {
            println!("  {:>3} tasks {:>2} analysts  pop {:>4}  {:.3}s", p.n_tasks, p.n_analysts, p.population, p.seconds);
        }
    }
    if let Some(path) = args.get(2) {
        report.write_csv(std::fs::File::create(path)?)?;
        println!("points written to {path}");
    }
    Ok(())
}
