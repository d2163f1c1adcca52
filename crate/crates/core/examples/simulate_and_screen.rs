//! Generates a scenario, screens it, and shows what auto-drop does to an
//! overloaded copy.
//!
//! `cargo run --example simulate_and_screen -- [n_tasks] [n_analysts] [seed] [out.json]`

use taskalloc::model::validate_scenario;
use taskalloc::scenario::{burden_ratio, generate_scenario, screen_scenario, GeneratorConfig, ScreeningOptions};

fn main() -> taskalloc::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let arg = |i: usize, default: u64| args.get(i).and_then(|s| s.parse().ok()).unwrap_or(default);
    let config = GeneratorConfig::new(arg(0, 65) as usize, arg(1, 10) as usize, arg(2, 42));

    let scenario = generate_scenario(&config)?;
    let pinned = scenario.tasks.iter().filter(|t| t.pinned_to.is_some()).count();
    println!(
        "{} tasks ({} pinned), {} analysts, burden ratio {:.3}, validation findings {}",
        scenario.n_tasks(),
        pinned,
        scenario.n_analysts(),
        burden_ratio(&scenario)?,
        validate_scenario(&scenario).len()
    );
    let screened = screen_scenario(&scenario, &ScreeningOptions::default())?;
    println!("screening warnings: {:?}", screened.warnings);

    let mut heavy = scenario.clone();
    for a in &mut heavy.analysts {
        a.availability = a.availability * 3 / 4;
    }
    println!("\nwith 25% less availability: ratio {:.3}", burden_ratio(&heavy)?);
    let options = ScreeningOptions {
        auto_drop: true,
        ..Default::default()
    };
    let dropped = screen_scenario(&heavy, &options)?;
    for w in &dropped.warnings {
        println!("  {w:?}");
    }
    println!("  {} tasks remain, ratio {:.3}", dropped.scenario.n_tasks(), burden_ratio(&dropped.scenario)?);

    if let Some(path) = args.get(3) {
        screened.scenario.save(path)?;
        println!("\nscreened scenario written to {path}");
    }
    Ok(())
}
