//! One pass of the manager loop without HTTP: create a run, wait for it,
//! preview a move, then commit it as a re-optimised child run.
//!
//!     cargo run -p taskalloc-service --example manager_loop -- [data_dir]

use std::time::Duration;

use taskalloc::ga::GaConfig;
use taskalloc::scenario::{generate_scenario, GeneratorConfig};
use taskalloc::workflow::{Amendment, AmendmentAction};
use taskalloc_service::{AmendRun, CreateRun, EvaluateAmendments, RunStore, Service};

#[tokio::main]
async fn main() -> anyhow::Result<()> {
    let store = match std::env::args().nth(1) {
        Some(dir) => RunStore::open(dir)?,
        None => RunStore::in_memory(),
    };
    let service = Service::new(store);

    let mut req = CreateRun::new(generate_scenario(&GeneratorConfig::new(65, 10, 1))?);
    req.config = GaConfig::default().with_seed(3);
    let created = service.create_run(req)?;
    println!("run {} ({} warnings)", created.run_id, created.warnings.len());

    let parent = service.wait(&created.run_id, Duration::from_secs(300)).await?;
    let breakdown = parent.breakdown.as_ref().expect("finished run");
    println!("{:?}: global utility {:.4e}", parent.status, breakdown.global);

    let best = parent.best.as_ref().expect("finished run");
    let s = &parent.scenario;
    let (t, task) = s.tasks.iter().enumerate().find(|(_, t)| t.pinned_to.is_none()).expect("a free task");
    let target = s
        .analysts
        .iter()
        .enumerate()
        .find(|(a, an)| *a != best.analyst_of(t) && an.can_execute(task.type_id))
        .map(|(_, an)| an.analyst_id)
        .expect("another capable analyst");
    let amendments = vec![Amendment::new(task.task_id, AmendmentAction::MoveTo { analyst_id: target })];

    let preview = service.evaluate(&parent.run_id, EvaluateAmendments { amendments: amendments.clone() })?;
    println!("moving task {} to analyst {target}: delta {:+.4e}", task.task_id, preview.delta);

    let child = service.amend(&parent.run_id, AmendRun::new(amendments))?;
    let child = service.wait(&child.run_id, Duration::from_secs(300)).await?;
    println!(
        "child {}: incumbent {:.4e} -> {:.4e}, history {:?}",
        child.run_id,
        child.incumbent_fitness.unwrap_or(0.0),
        child.best_fitness.unwrap_or(0.0),
        child.amendments
    );
    Ok(())
}
