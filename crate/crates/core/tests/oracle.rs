mod common;

use taskalloc::ga::{evolve, GaConfig};
use taskalloc::model::Allocation;
use taskalloc::objectives::{global_utility, ObjectiveMode, ObjectiveSpec, UtilityModel};

#[test]
fn library_matches_oracle_on_every_allocation() {
    for seed in 0..40u64 {
        let n = 1 + (seed as usize % 5);
        let m = 1 + (seed as usize / 5) % 3;
        let s = common::small_scenario(seed, n, m);
        let mode = ObjectiveMode::ALL[seed as usize % 4];
        let spec = ObjectiveSpec::new(mode);
        let model = UtilityModel::new(&s, spec).unwrap();
        for genes in common::all_allocations(n, m) {
            let expected = common::global_value(&s, &genes, mode);
            let slow = global_utility(&Allocation::new(genes.clone()), &s, &spec).unwrap().global;
            let fast = model.fitness(&genes);
            assert!((slow - expected).abs() <= 1e-12, "seed {seed} {genes:?}: {slow} vs {expected}");
            assert!((fast - expected).abs() <= 1e-12, "seed {seed} {genes:?}: {fast} vs {expected}");
        }
    }
}

#[test]
fn two_task_ga_finds_the_brute_force_optimum() {
    for seed in 0..10u64 {
        let s = common::small_scenario(100 + seed, 2, 2);
        let spec = ObjectiveSpec::default();
        let (_, best) = common::brute_force(&s, spec.mode);
        let cfg = GaConfig {
            population_size: 8,
            generations: 10,
            parents_mating: 4,
            elitism: 2,
            seed,
            ..GaConfig::default()
        };
        let out = evolve(&s, spec, cfg).unwrap();
        assert!((out.best_fitness - best).abs() <= 1e-12, "seed {seed}");
    }
}
