use std::collections::BTreeMap;

use proptest::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

use super::*;
use crate::model::{Analyst, Scenario, Task, TaskTypeSpec, TypeId};

fn at(priority: u32, expected_time: f64, variance: f64) -> AssignedTask {
    AssignedTask {
        priority,
        expected_time,
        variance,
        precision: 1.0,
        preference: 1.0,
    }
}

fn analyst(id: u64, availability: u64, eff: &[(TypeId, f64)], likert: &[(TypeId, u8)]) -> Analyst {
    Analyst::new(
        id,
        availability,
        eff.iter().copied().collect(),
        likert.iter().copied().collect::<BTreeMap<_, _>>(),
    )
}

#[test]
fn expected_time_identity_case() {
    let spec = TaskTypeSpec::new(1, 1800, 90_000, 1.0);
    let a = analyst(0, 0, &[(1, 1.0)], &[(1, 3)]);
    let t = Task::new(0, 1, 1);
    assert_eq!(expected_execution_time(&t, &spec, &a).unwrap(), 1800.0);
}

#[test]
fn expected_time_scales_with_complexity_and_efficiency() {
    let spec = TaskTypeSpec::new(2, 3600, 810_000, 1.0);
    let a = analyst(0, 0, &[(2, 0.9)], &[(2, 3)]);
    let t = Task::new(0, 2, 1).with_complexity(2.0);
    let e = expected_execution_time(&t, &spec, &a).unwrap();
    assert!((e - 8000.0).abs() < 1e-9, "{e}");
}

#[test]
fn expected_time_is_discounted_by_progress() {
    let spec = TaskTypeSpec::new(1, 1800, 90_000, 1.0);
    let a = analyst(0, 0, &[(1, 1.0)], &[(1, 3)]);
    let t = Task::new(0, 1, 1).with_progress(0.5);
    assert_eq!(expected_execution_time(&t, &spec, &a).unwrap(), 900.0);
    let assigned = AssignedTask::new(&t, &spec, &a).unwrap();
    assert_eq!(assigned.variance, 45_000.0);
}

#[test]
fn zero_efficiency_cannot_execute() {
    let spec = TaskTypeSpec::new(1, 1800, 90_000, 1.0);
    let a = analyst(7, 0, &[(1, 0.0)], &[(1, 3)]);
    let err = expected_execution_time(&Task::new(0, 1, 1), &spec, &a).unwrap_err();
    assert!(matches!(err, Error::Infeasible { analyst_id: 7, type_id: 1 }));
}

#[test]
fn single_task_at_its_mean_is_a_coin_flip() {
    let probs = priority_completion_probabilities(&[at(1, 1800.0, 90_000.0)], 1800.0);
    assert_eq!(probs, vec![(1, 0.5)]);
}

#[test]
fn single_task_two_sigma_headroom() {
    let probs = priority_completion_probabilities(&[at(1, 1800.0, 90_000.0)], 2400.0);
    assert!((probs[0].1 - 0.97725).abs() < 1e-4);
}

#[test]
fn probabilities_accumulate_across_priorities() {
    let tasks = [at(1, 1800.0, 90_000.0), at(2, 1800.0, 90_000.0)];
    let probs = priority_completion_probabilities(&tasks, 3600.0);
    // Pr(1) = Φ(6)
    assert!((probs[0].1 - 0.999_999_999_013_412_4).abs() < 1e-12);
    assert!((probs[1].1 - 0.5).abs() < 1e-9);
}

#[test]
fn completion_utility_weights_lower_priorities_by_root() {
    // Place the cumulative z-scores at Φ⁻¹(0.8) and Φ⁻¹(0.4).
    let z1 = 0.841_621_233_572_914_4;
    let z2 = -0.253_347_103_135_799_74;
    let tau = 10.0;
    let tasks = [at(1, tau - z1, 1.0), at(2, z1 - z2 * 2f64.sqrt(), 1.0)];
    let probs = priority_completion_probabilities(&tasks, tau);
    assert!((probs[0].1 - 0.8).abs() < 1e-12);
    assert!((probs[1].1 - 0.4).abs() < 1e-12);
    let u = completion_utility(&tasks, tau);
    assert!((u - 0.56569).abs() < 1e-5, "{u}");
}

#[test]
fn completion_utility_single_priority_collapses() {
    let tasks = [at(1, 1000.0, 90_000.0), at(1, 900.0, 10_000.0)];
    let q = priority_completion_probabilities(&tasks, 2000.0)[0].1;
    assert_eq!(completion_utility(&tasks, 2000.0), q);
}

#[test]
fn completion_utility_of_nothing_is_one() {
    assert_eq!(completion_utility(&[], 0.0), 1.0);
}

#[test]
fn impossible_earlier_level_zeroes_the_utility() {
    // Zero variance makes priority 1 a certain miss.
    let tasks = [at(1, 2000.0, 0.0), at(2, 10.0, 1.0e6)];
    assert_eq!(completion_utility(&tasks, 1000.0), 0.0);
}

#[test]
fn missing_intermediate_priority_contributes_unit_factor() {
    let only_p1 = [at(1, 1800.0, 90_000.0)];
    let with_gap = [at(1, 1800.0, 90_000.0), at(3, 0.0, 0.0)];
    let a = completion_utility(&only_p1, 2000.0);
    let b = completion_utility(&with_gap, 2000.0);
    assert!((a - b).abs() < 1e-15);
}

#[test]
fn precision_means() {
    let with = |g: &[f64]| -> Vec<AssignedTask> {
        g.iter().map(|&p| AssignedTask { precision: p, ..at(1, 1.0, 1.0) }).collect()
    };
    assert!((precision_utility(&with(&[0.2, 0.4])).unwrap() - 0.3).abs() < 1e-15);
    assert_eq!(precision_utility(&with(&[1.0, 1.0, 1.0])).unwrap(), 1.0);
    assert!((precision_utility(&with(&[0.9, 0.5, 0.1])).unwrap() - 0.5).abs() < 1e-15);
    assert_eq!(precision_utility(&[]), None);
}

#[test]
fn preference_means() {
    let mk = |e: f64, z: f64| AssignedTask { preference: z, ..at(1, e, 1.0) };
    let tasks = [mk(1000.0, 1.0), mk(3000.0, 0.5)];
    assert_eq!(preference_utility(&tasks, false).unwrap(), 0.75);
    assert_eq!(preference_utility(&tasks, true).unwrap(), 0.625);
    let constant = [mk(10.0, 0.4), mk(90.0, 0.4)];
    assert!((preference_utility(&constant, false).unwrap() - 0.4).abs() < 1e-15);
    assert!((preference_utility(&constant, true).unwrap() - 0.4).abs() < 1e-15);
    assert_eq!(preference_utility(&[], true), None);
}

#[test]
fn analyst_utility_multiplies_selected_components() {
    let task = AssignedTask {
        precision: 0.5,
        preference: 0.8,
        ..at(1, 1800.0, 90_000.0)
    };
    let full = analyst_utility(&[task], 1800.0, &ObjectiveSpec::new(ObjectiveMode::Full));
    assert!((full - 0.2).abs() < 1e-15);
    let pref = analyst_utility(&[task], 1800.0, &ObjectiveSpec::new(ObjectiveMode::CompletionPreference));
    assert!((pref - 0.4).abs() < 1e-15);
    let prec = analyst_utility(&[task], 1800.0, &ObjectiveSpec::new(ObjectiveMode::CompletionPrecision));
    assert!((prec - 0.25).abs() < 1e-15);
}

#[test]
fn analyst_utility_completion_only_ignores_worker_terms() {
    let tasks = [AssignedTask { precision: 0.1, preference: 0.1, ..at(1, 1800.0, 90_000.0) }];
    let spec = ObjectiveSpec::new(ObjectiveMode::CompletionOnly);
    assert_eq!(analyst_utility(&tasks, 2400.0, &spec), completion_utility(&tasks, 2400.0));
}

#[test]
fn empty_analyst_scores_penalty() {
    assert_eq!(analyst_utility(&[], 1000.0, &ObjectiveSpec::default()), 1e-6);
}

#[test]
fn spec_rejects_out_of_range_penalty() {
    let mut spec = ObjectiveSpec::default();
    spec.empty_allocation_penalty = 0.5;
    assert!(spec.validate().is_err());
    spec.empty_allocation_penalty = 0.0;
    assert!(spec.validate().is_err());
}

fn two_by_two() -> Scenario {
    let types = vec![TaskTypeSpec::new(1, 1800, 90_000, 1.0), TaskTypeSpec::new(2, 3600, 810_000, 1.0)];
    let tasks = vec![
        Task::new(0, 1, 1).with_precision(0.8),
        Task::new(1, 2, 2).with_precision(0.2),
        Task::new(2, 1, 1).with_precision(0.5),
    ];
    let analysts = vec![
        analyst(0, 6000, &[(1, 1.0), (2, 1.2)], &[(1, 5), (2, 1)]),
        analyst(1, 1800, &[(1, 0.9), (2, 1.0)], &[(1, 3), (2, 3)]),
    ];
    Scenario::new(tasks, analysts, types)
}

#[test]
fn global_utility_is_product_of_analysts() {
    let s = two_by_two();
    let alloc = Allocation::new(vec![0, 0, 1]);
    let b = global_utility(&alloc, &s, &ObjectiveSpec::default()).unwrap();
    let product: f64 = b.per_analyst.iter().map(|u| u.combined).product();
    assert_eq!(b.global, product);
    for u in &b.per_analyst {
        assert!((u.worker - u.precision * u.preference).abs() < 1e-15);
        assert!((u.combined - u.completion * u.worker).abs() < 1e-15);
    }
}

#[test]
fn forbidden_pairing_zeroes_global_utility() {
    let mut s = two_by_two();
    s.analysts[1].efficiency.insert(1, 0.0);
    let b = global_utility(&Allocation::new(vec![0, 0, 1]), &s, &ObjectiveSpec::default()).unwrap();
    assert_eq!(b.per_analyst[1].combined, 0.0);
    assert_eq!(b.global, 0.0);
    let model = UtilityModel::new(&s, ObjectiveSpec::default()).unwrap();
    assert_eq!(model.fitness(&[0, 0, 1]), 0.0);
}

#[test]
fn relabeling_analysts_keeps_global_utility() {
    let s = two_by_two();
    let mut swapped = s.clone();
    swapped.analysts.swap(0, 1);
    let spec = ObjectiveSpec::default();
    let a = global_utility(&Allocation::new(vec![0, 0, 1]), &s, &spec).unwrap();
    let b = global_utility(&Allocation::new(vec![1, 1, 0]), &swapped, &spec).unwrap();
    assert_eq!(a.global, b.global);
    assert_eq!(a.per_analyst[0], b.per_analyst[1]);
}

#[test]
fn empty_analyst_penalised_only_under_low_workload() {
    let mut s = two_by_two();
    let spec = ObjectiveSpec::default();
    let alloc = Allocation::new(vec![0, 0, 0]);
    let normal = global_utility(&alloc, &s, &spec).unwrap();
    assert_eq!(normal.per_analyst[1].combined, 1.0);
    s.low_workload = true;
    let low = global_utility(&alloc, &s, &spec).unwrap();
    assert_eq!(low.per_analyst[1].combined, 1e-6);
    assert!((low.global - normal.global * 1e-6).abs() < 1e-20);
    assert_eq!(UtilityModel::new(&s, spec).unwrap().fitness(alloc.genes()), low.global);
}

#[test]
fn fairness_gap_max_minus_min() {
    assert!((score_gap(&[0.9, 0.3, 0.6]) - 0.6).abs() < 1e-15);
}

#[test]
fn identical_analysts_are_perfectly_fair() {
    let types = TaskTypeSpec::reference_table();
    let ids: Vec<TypeId> = types.iter().map(|t| t.type_id).collect();
    let tasks = vec![Task::new(0, 1, 1), Task::new(1, 2, 2), Task::new(2, 1, 1), Task::new(3, 2, 2)];
    let analysts = vec![Analyst::uniform(0, 6000, &ids, 1.0), Analyst::uniform(1, 6000, &ids, 1.0)];
    let s = Scenario::new(tasks, analysts, types);
    assert_eq!(fairness_gap(&Allocation::new(vec![0, 0, 1, 1]), &s).unwrap(), 0.0);
}

#[test]
fn fairness_gap_two_analyst_hand_computation() {
    // Scores evaluated independently at 30 digits:
    // analyst 0: Φ(14)·(Φ(1200/√900000)/Φ(14))^½ · (2100/4800) · (2040/4800)
    // analyst 1: Φ(-2/3) · 1.0 · 0.5
    let s = two_by_two();
    let scores = fairness_scores(&Allocation::new(vec![0, 0, 1]), &s).unwrap();
    assert!((scores[0] - 0.176_106_312_747_944_2).abs() < 1e-12, "{}", scores[0]);
    assert!((scores[1] - 0.126_246_268_773_461_46).abs() < 1e-12, "{}", scores[1]);
    let gap = fairness_gap(&Allocation::new(vec![0, 0, 1]), &s).unwrap();
    assert!((gap - 0.049_860_043_974_482_74).abs() < 1e-12);
}

#[test]
fn objective_mode_names_round_trip() {
    for mode in ObjectiveMode::ALL {
        assert_eq!(mode.label().parse::<ObjectiveMode>().unwrap(), mode);
        let json = serde_json::to_string(&mode).unwrap();
        assert_eq!(serde_json::from_str::<ObjectiveMode>(&json).unwrap(), mode);
    }
    assert_eq!(
        serde_json::from_str::<ObjectiveMode>("\"completion_only\"").unwrap(),
        ObjectiveMode::CompletionOnly
    );
}

fn arb_task(max_priority: u32) -> impl Strategy<Value = AssignedTask> {
    (1..=max_priority, 0.0f64..20_000.0, 0.0f64..1.5e7, 0.0f64..=1.0, 0.1f64..=1.0).prop_map(
        |(priority, expected_time, variance, precision, preference)| AssignedTask {
            priority,
            expected_time,
            variance,
            precision,
            preference,
        },
    )
}

fn arb_mode() -> impl Strategy<Value = ObjectiveMode> {
    prop::sample::select(ObjectiveMode::ALL.to_vec())
}

fn total_time(tasks: &[AssignedTask]) -> f64 {
    tasks.iter().map(|t| t.expected_time).sum()
}

proptest! {
    #[test]
    fn utilities_stay_in_unit_interval(
        tasks in prop::collection::vec(arb_task(4), 0..12),
        availability in 0.0f64..80_000.0,
        mode in arb_mode(),
    ) {
        let spec = ObjectiveSpec::new(mode);
        let c = completion_utility(&tasks, availability);
        prop_assert!((0.0..=1.0).contains(&c), "completion {}", c);
        let u = analyst_utility(&tasks, availability, &spec);
        prop_assert!((0.0..=1.0).contains(&u), "analyst {}", u);
        if let Some(p) = precision_utility(&tasks) { prop_assert!((0.0..=1.0).contains(&p)); }
        for tw in [false, true] {
            if let Some(p) = preference_utility(&tasks, tw) { prop_assert!((0.0..=1.0).contains(&p)); }
        }
    }

    // Adding work can only lower each cumulative completion probability while
    // the analyst's expected load fits the availability.
    #[test]
    fn completion_utility_monotone_under_added_tasks(
        tasks in prop::collection::vec(arb_task(3), 0..8),
        extra in arb_task(3),
        headroom in 0.0f64..30_000.0,
    ) {
        let availability = total_time(&tasks) + headroom;
        let before = completion_utility(&tasks, availability);
        let mut more = tasks.clone();
        more.push(extra);
        let after = completion_utility(&more, availability);
        prop_assert!(after <= before + 1e-12, "{} -> {}", before, after);
    }

    #[test]
    fn higher_priority_label_carries_larger_penalty(
        tasks in prop::collection::vec(arb_task(3), 0..8),
        risky in arb_task(3),
        headroom in 0.0f64..30_000.0,
        p in 2u32..=4,
    ) {
        let availability = total_time(&tasks) + headroom;
        let mut urgent = tasks.clone();
        urgent.push(AssignedTask { priority: 1, ..risky });
        let mut relaxed = tasks.clone();
        relaxed.push(AssignedTask { priority: p, ..risky });
        let base = completion_utility(&tasks, availability);
        let penalty_urgent = base - completion_utility(&urgent, availability);
        let penalty_relaxed = base - completion_utility(&relaxed, availability);
        prop_assert!(penalty_urgent >= penalty_relaxed - 1e-12);
    }

    #[test]
    fn conditional_probabilities_telescope(
        tasks in prop::collection::vec(arb_task(5), 1..12),
        availability in 1_000.0f64..60_000.0,
    ) {
        let probs = priority_completion_probabilities(&tasks, availability);
        if probs.iter().all(|&(_, p)| p > 0.0) {
            let mut chained = probs[0].1;
            for w in probs.windows(2) {
                chained *= w[1].1 / w[0].1;
            }
            let last = probs.last().unwrap().1;
            prop_assert!((chained - last).abs() <= 1e-12, "{} vs {}", chained, last);
        }
    }

    #[test]
    fn normal_cdf_matches_reference(z in -8.0f64..8.0, mean in -1e4f64..1e4, sd in 1e-3f64..1e4) {
        let reference = Normal::new(0.0, 1.0).unwrap().cdf(z);
        prop_assert!((standard_normal_cdf(z) - reference).abs() <= 1e-9);
        let x = mean + z * sd;
        let got = normal_cdf(x, mean, sd * sd).unwrap();
        let reference = Normal::new(mean, sd).unwrap().cdf(x);
        prop_assert!((got - reference).abs() <= 1e-9);
    }

    #[test]
    fn fast_and_reference_routes_agree(
        genes in prop::collection::vec(0usize..3, 1..10),
        seedish in prop::collection::vec((1u32..=5, 1u32..=3, 0.0f64..=1.0, 0.0f64..0.9), 10),
        low_workload in any::<bool>(),
        mode in arb_mode(),
    ) {
        let types = TaskTypeSpec::reference_table();
        let tasks: Vec<Task> = genes.iter().enumerate().map(|(i, _)| {
            let (ty, pr, prec, prog) = seedish[i];
            Task::new(i as u64, ty, pr).with_precision(prec).with_progress(prog)
        }).collect();
        let analysts = (0..3u64).map(|a| analyst(
            a,
            8_000 + 4_000 * a,
            &[(1, 1.0), (2, 0.9 + 0.1 * a as f64), (3, 1.1), (4, 0.95), (5, 1.05)],
            &[(1, 1), (2, 2), (3, (a % 5) as u8 + 1), (4, 4), (5, 5)],
        )).collect();
        let mut s = Scenario::new(tasks, analysts, types);
        s.low_workload = low_workload;
        let spec = ObjectiveSpec::new(mode);
        let model = UtilityModel::new(&s, spec).unwrap();
        let alloc = Allocation::new(genes.clone());
        let reference = global_utility(&alloc, &s, &spec).unwrap().global;
        let fast = model.fitness(&genes);
        prop_assert!((fast - reference).abs() <= 1e-14 * reference.max(1e-300), "{} vs {}", fast, reference);
        let sets = derive_assignment(&alloc, &s).unwrap();
        let by_parts: f64 = sets.iter().enumerate().map(|(a, set)| model.analyst_value(a, set)).product();
        prop_assert!((by_parts - reference).abs() <= 1e-14 * reference.max(1e-300));
    }
}
