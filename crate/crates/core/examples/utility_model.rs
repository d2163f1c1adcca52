//! Scores hand-built allocations of a tiny team under every objective mode.
//!
//! `cargo run --example utility_model`

use std::collections::BTreeMap;

use taskalloc::model::{Allocation, Analyst, Scenario, Task, TaskTypeSpec};
use taskalloc::objectives::{fairness_gap, global_utility, ObjectiveMode, ObjectiveSpec};

fn main() -> taskalloc::Result<()> {
    let types = TaskTypeSpec::reference_table();
    let tasks = vec![
        Task::new(1, 1, 1).with_precision(0.9),
        Task::new(2, 2, 1).with_precision(0.2),
        Task::new(3, 3, 2).with_precision(0.6),
        Task::new(4, 1, 3).with_precision(0.4),
        Task::new(5, 4, 3).with_precision(0.7).with_progress(0.5),
    ];
    let likert = |xs: [u8; 5]| (1..=5).zip(xs).collect::<BTreeMap<_, _>>();
    let analysts = vec![
        Analyst::new(10, 4 * 3600, (1..=5).map(|t| (t, 1.1)).collect(), likert([5, 3, 1, 2, 4])),
        Analyst::new(11, 4 * 3600, (1..=5).map(|t| (t, 0.9)).collect(), likert([1, 2, 5, 4, 3])),
    ];
    let scenario = Scenario::new(tasks, analysts, types);

    for genes in [vec![0, 0, 0, 1, 1], vec![0, 1, 0, 1, 0], vec![1, 0, 1, 0, 1]] {
        let alloc = Allocation::new(genes.clone());
        println!("allocation {genes:?}  fairness gap {:.4}", fairness_gap(&alloc, &scenario)?);
        for mode in ObjectiveMode::ALL {
            let b = global_utility(&alloc, &scenario, &ObjectiveSpec::new(mode))?;
            let per: Vec<String> = b.per_analyst.iter().map(|u| format!("{:.4}", u.combined)).collect();
            println!("  {:<16} global {:.6}  per analyst [{}]", mode.label(), b.global, per.join(", "));
        }
    }
    Ok(())
}
