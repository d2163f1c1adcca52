//! One allocation period end to end: screen and optimise, print a lane of
//! the schedule, apply manager amendments, then re-optimise around them.
//!
//! `cargo run --release --example schedule_and_amend`

use taskalloc::bench::reference_scenario;
use taskalloc::ga::GaConfig;
use taskalloc::objectives::{ObjectiveMode, ObjectiveSpec};
use taskalloc::scenario::ScreeningOptions;
use taskalloc::workflow::{apply_amendments, build_schedule, plan, reoptimize, Amendment, AmendmentAction};

fn main() -> taskalloc::Result<()> {
    let scenario = reference_scenario(7)?;
    let spec = ObjectiveSpec::new(ObjectiveMode::Full);
    let config = GaConfig::default().with_seed(1);
    let p = plan(&scenario, spec, config.clone(), &ScreeningOptions::default())?;
    let scenario = p.screening.scenario;
    println!("planned utility {:.4e}", p.outcome.best_fitness);

    let first = scenario.analysts[0].analyst_id;
    println!("schedule for analyst {first}:");
    for e in p.schedule.iter().filter(|e| e.analyst_id == first) {
        println!(
            "  task {:>3} (p{})  {:>6.0}s -> {:>6.0}s{}",
            e.task_id,
            e.priority,
            e.start_offset,
            e.expected_end,
            if e.overflow { "  overflow" } else { "" }
        );
    }

    // Move this analyst's last task to the second analyst and mark another
    // task as half done.
    let last = p.schedule.iter().filter(|e| e.analyst_id == first).last().expect("analyst has work");
    let other = scenario.analysts[1].analyst_id;
    let amendments = vec![
        Amendment::new(last.task_id, AmendmentAction::MoveTo { analyst_id: other }),
        Amendment::new(last.task_id, AmendmentAction::Pin { analyst_id: other }),
        Amendment::new(scenario.tasks[0].task_id, AmendmentAction::SetProgress { fraction: 0.5 }),
    ];
    let (amended, amended_scenario) = match apply_amendments(&p.outcome.best, &scenario, &amendments) {
        Ok(ok) => ok,
        Err(rejections) => {
            for r in rejections {
                println!("rejected #{} (task {}): {}", r.index, r.task_id, r.reason);
            }
            return Ok(());
        }
    };

    let bad = [Amendment::new(999_999, AmendmentAction::Unpin)];
    if let Err(rejections) = apply_amendments(&amended, &amended_scenario, &bad) {
        println!("unknown task rejected: {}", rejections[0].reason);
    }

    let r = reoptimize(&amended, &amended_scenario, spec, config.with_seed(2))?;
    println!(
        "amended incumbent {:.4e} -> re-optimised {:.4e}",
        r.incumbent_fitness, r.outcome.best_fitness
    );
    let moved = build_schedule(&r.outcome.best, &amended_scenario)?
        .into_iter()
        .find(|e| e.task_id == last.task_id)
        .expect("task is scheduled");
    println!("task {} now with analyst {}", moved.task_id, moved.analyst_id);
    Ok(())
}
