//! Genetic operators over allocation chromosomes.
//!
//! Every operator that draws randomness takes the run's generator explicitly
//! so a whole run consumes one stream in a fixed order.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{CrossoverKind, GaConfig, MutationKind, SelectionKind};
use crate::error::{Error, Result};
use crate::model::{Allocation, Scenario};

/// `j` chromosomes with every gene drawn uniformly from the analysts able to
/// execute that task. Pinned tasks only have their pin to choose from.
pub fn random_population<R: Rng>(candidates: &[Vec<usize>], size: usize, rng: &mut R) -> Vec<Allocation> {
    (0..size)
        .map(|_| {
            Allocation::new(
                candidates
                    .iter()
                    .map(|options| options[rng.random_range(0..options.len() as u32) as usize])
                    .collect(),
            )
        })
        .collect()
}

/// Initial population for a scenario, seeded from `config.seed`.
pub fn init_population(scenario: &Scenario, config: &GaConfig) -> Result<Vec<Allocation>> {
    let candidates = scenario.candidate_analysts()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    Ok(random_population(&candidates, config.population_size, &mut rng))
}

/// Population indices ordered by descending fitness, ties by lower index.
pub fn rank_order(fitnesses: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..fitnesses.len()).collect();
    order.sort_by(|&a, &b| fitnesses[b].total_cmp(&fitnesses[a]).then(a.cmp(&b)));
    order
}

/// Picks `config.parents_mating` parents.
///
/// Steady-state selection truncates the rank order; tournament selection
/// runs one tournament per parent slot.
pub fn select_parents<R: Rng>(fitnesses: &[f64], config: &GaConfig, rng: &mut R) -> Vec<usize> {
    let count = config.parents_mating.min(fitnesses.len());
    match config.selection {
        SelectionKind::SteadyState => {
            let mut order = rank_order(fitnesses);
            order.truncate(count);
            order
        }
        SelectionKind::Tournament { size } => (0..count)
            .map(|_| {
                let mut winner = rng.random_range(0..fitnesses.len());
                for _ in 1..size.max(1) {
                    let challenger = rng.random_range(0..fitnesses.len());
                    if fitnesses[challenger] > fitnesses[winner]
                        || (fitnesses[challenger] == fitnesses[winner] && challenger < winner)
                    {
                        winner = challenger;
                    }
                }
                winner
            })
            .collect(),
    }
}

fn check_lengths(a: &Allocation, b: &Allocation) -> Result<()> {
    if a.len() == b.len() {
        Ok(())
    } else {
        Err(Error::LengthMismatch {
            expected: a.len(),
            actual: b.len(),
        })
    }
}

/// `parent_a[..cut] ++ parent_b[cut..]`. When `cut` is `None` it is drawn
/// uniformly from `1..n`; chromosomes shorter than two genes copy `parent_a`.
pub fn crossover_single_point<R: Rng>(
    parent_a: &Allocation,
    parent_b: &Allocation,
    cut: Option<usize>,
    rng: &mut R,
) -> Result<Allocation> {
    check_lengths(parent_a, parent_b)?;
    let n = parent_a.len();
    if n < 2 {
        return Ok(parent_a.clone());
    }
    let cut = match cut {
        Some(c) if (1..n).contains(&c) => c,
        Some(c) => return Err(Error::Config(format!("crossover cut {c} outside 1..{n}"))),
        None => rng.random_range(1..n),
    };
    let mut genes = Vec::with_capacity(n);
    genes.extend_from_slice(&parent_a.genes()[..cut]);
    genes.extend_from_slice(&parent_b.genes()[cut..]);
    Ok(Allocation::new(genes))
}

/// Crossover of `a` and `b` written into `out`, consuming the generator
/// exactly as the allocating operators do.
pub(crate) fn crossover_into<R: Rng>(kind: CrossoverKind, a: &[usize], b: &[usize], out: &mut [usize], rng: &mut R) {
    let n = a.len();
    match kind {
        CrossoverKind::SinglePoint => {
            if n < 2 {
                out.copy_from_slice(a);
                return;
            }
            let cut = rng.random_range(1..n);
            out[..cut].copy_from_slice(&a[..cut]);
            out[cut..].copy_from_slice(&b[cut..]);
        }
        CrossoverKind::TwoPoint => {
            out.copy_from_slice(a);
            if n < 3 {
                return;
            }
            let mut cuts = [rng.random_range(1..n), rng.random_range(1..n)];
            cuts.sort_unstable();
            out[cuts[0]..cuts[1]].copy_from_slice(&b[cuts[0]..cuts[1]]);
        }
        CrossoverKind::Uniform => {
            for ((o, &x), &y) in out.iter_mut().zip(a).zip(b) {
                *o = if rng.random::<bool>() { x } else { y };
            }
        }
    }
}

/// Overwrites pinned genes with their pins.
pub fn enforce_pins(chromosome: &mut Allocation, pins: &[Option<usize>]) {
    for (gene, pin) in chromosome.genes_mut().iter_mut().zip(pins) {
        if let Some(p) = pin {
            *gene = *p;
        }
    }
}

/// Per-gene random resetting at `rate`. Returns the number of genes that
/// were resampled (a resample may land on the same analyst).
pub fn mutate_random<R: Rng>(chromosome: &mut Allocation, candidates: &[Vec<usize>], rate: f64, rng: &mut R) -> usize {
    if rate <= 0.0 {
        return 0;
    }
    let genes = chromosome.genes_mut();
    let n = genes.len();
    let mut resampled = 0;
    let mut resample = |i: usize, rng: &mut R| {
        let options = &candidates[i];
        if options.len() > 1 {
            genes[i] = options[rng.random_range(0..options.len() as u32) as usize];
            resampled += 1;
        }
    };
    if rate >= 1.0 {
        (0..n).for_each(|i| resample(i, rng));
    } else if rate >= GEOMETRIC_BELOW {
        let threshold = (rate * 4_294_967_296.0) as u32;
        for i in 0..n {
            if rng.next_u32() < threshold {
                resample(i, rng);
            }
        }
    } else {
        // Gaps between selected genes are geometric, so only selected genes
        // cost a draw.
        let ln_keep = (1.0 - rate).ln();
        let mut i = 0;
        loop {
            let gap = (1.0 - rng.random::<f64>()).ln() / ln_keep;
            if gap >= (n - i) as f64 {
                break;
            }
            i += gap as usize;
            resample(i, rng);
            i += 1;
        }
    }
    resampled
}

const GEOMETRIC_BELOW: f64 = 0.2;

/// Adaptive mutation: the high rate when `fitness` is below the population
/// mean, the low rate otherwise. Returns the number of resampled genes.
pub fn mutate_adaptive<R: Rng>(
    chromosome: &mut Allocation,
    fitness: f64,
    population_mean: f64,
    config: &GaConfig,
    candidates: &[Vec<usize>],
    rng: &mut R,
) -> usize {
    mutate_random(chromosome, candidates, adaptive_rate(fitness, population_mean, config), rng)
}

pub(crate) fn adaptive_rate(fitness: f64, population_mean: f64, config: &GaConfig) -> f64 {
    if fitness < population_mean {
        config.mutation_rates.high
    } else {
        config.mutation_rates.low
    }
}

/// Permutation-style mutations over the unpinned genes. Scramble and
/// inversion act on a random window of `segment` consecutive free genes;
/// swap exchanges two free genes. None of them change how many tasks each
/// analyst holds.
pub(crate) fn mutate_permutation<R: Rng>(
    kind: MutationKind,
    chromosome: &mut Allocation,
    free: &[usize],
    segment: usize,
    rng: &mut R,
) {
    if free.len() < 2 {
        return;
    }
    let genes = chromosome.genes_mut();
    match kind {
        MutationKind::Swap => {
            let i = free[rng.random_range(0..free.len())];
            let j = free[rng.random_range(0..free.len())];
            genes.swap(i, j);
        }
        MutationKind::Scramble | MutationKind::Inversion => {
            let len = segment.clamp(2, free.len());
            let start = rng.random_range(0..=free.len() - len);
            let positions = &free[start..start + len];
            let mut values: Vec<usize> = positions.iter().map(|&p| genes[p]).collect();
            if kind == MutationKind::Scramble {
                values.shuffle(rng);
            } else {
                values.reverse();
            }
            for (&p, v) in positions.iter().zip(values) {
                genes[p] = v;
            }
        }
        MutationKind::Adaptive | MutationKind::Random => unreachable!("not a permutation mutation"),
    }
}

/// Number of tasks assigned differently by `a` and `b`.
pub fn allocation_diff(a: &Allocation, b: &Allocation) -> Result<usize> {
    check_lengths(a, b)?;
    Ok(a.genes().iter().zip(b.genes()).filter(|(x, y)| x != y).count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Analyst, Task, TaskTypeSpec};

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(7)
    }

    fn tiny(n: usize, m: usize) -> Scenario {
        let tasks = (0..n).map(|i| Task::new(i as u64, 1, 1)).collect();
        let analysts = (0..m).map(|a| Analyst::uniform(a as u64, 3600, &[1], 1.0)).collect();
        Scenario::new(tasks, analysts, vec![TaskTypeSpec::new(1, 1800, 90_000, 1.0)])
    }

    #[test]
    fn population_shape() {
        let cfg = GaConfig {
            population_size: 4,
            ..GaConfig::default()
        };
        let pop = init_population(&tiny(3, 2), &cfg).unwrap();
        assert_eq!(pop.len(), 4);
        assert!(pop.iter().all(|c| c.len() == 3 && c.genes().iter().all(|&g| g < 2)));
    }

    #[test]
    fn population_respects_pins() {
        let mut s = tiny(3, 2);
        s.tasks[1].pinned_to = Some(1);
        let pop = init_population(&s, &GaConfig::default()).unwrap();
        assert!(pop.iter().all(|c| c.analyst_of(1) == 1));
    }

    #[test]
    fn population_is_seeded() {
        let s = tiny(10, 4);
        let cfg = GaConfig::default();
        assert_eq!(init_population(&s, &cfg).unwrap(), init_population(&s, &cfg).unwrap());
    }

    #[test]
    fn uncapable_task_is_a_setup_error() {
        let mut s = tiny(2, 2);
        for a in &mut s.analysts {
            a.efficiency.insert(1, 0.0);
        }
        assert!(matches!(
            init_population(&s, &GaConfig::default()),
            Err(Error::NoCapableAnalyst { task_id: 0 })
        ));
    }

    #[test]
    fn steady_state_takes_the_top_ranks() {
        let cfg = GaConfig {
            parents_mating: 2,
            ..GaConfig::default()
        };
        assert_eq!(select_parents(&[0.1, 0.9, 0.5], &cfg, &mut rng()), vec![1, 2]);
        assert_eq!(select_parents(&[0.3; 5], &cfg, &mut rng()), vec![0, 1]);
        let all = GaConfig {
            parents_mating: 3,
            ..GaConfig::default()
        };
        assert_eq!(select_parents(&[0.1, 0.9, 0.5], &all, &mut rng()), vec![1, 2, 0]);
    }

    #[test]
    fn tournament_prefers_fitter_members() {
        let cfg = GaConfig {
            parents_mating: 10,
            selection: SelectionKind::Tournament { size: 3 },
            ..GaConfig::default()
        };
        let fit: Vec<f64> = (0..10).map(f64::from).collect();
        let mut r = rng();
        let parents: Vec<usize> = (0..300).flat_map(|_| select_parents(&fit, &cfg, &mut r)).collect();
        let mean = parents.iter().sum::<usize>() as f64 / parents.len() as f64;
        // E[max of 3 uniform draws on 0..10] = 9 - sum(k^3)/1000 = 6.975
        assert!((mean - 6.975).abs() < 0.1, "{mean}");
    }

    #[test]
    fn single_point_crossover_examples() {
        let a = Allocation::new(vec![1, 2, 3, 4]);
        let b = Allocation::new(vec![4, 3, 2, 1]);
        let child = crossover_single_point(&a, &b, Some(2), &mut rng()).unwrap();
        assert_eq!(child.genes(), &[1, 2, 2, 1]);
        for cut in 1..4 {
            assert_eq!(crossover_single_point(&a, &a, Some(cut), &mut rng()).unwrap(), a);
        }
        let child = crossover_single_point(
            &Allocation::new(vec![0, 0]),
            &Allocation::new(vec![1, 1]),
            Some(1),
            &mut rng(),
        )
        .unwrap();
        assert_eq!(child.genes(), &[0, 1]);
    }

    #[test]
    fn crossover_rejects_length_mismatch() {
        let err = crossover_single_point(
            &Allocation::new(vec![0, 1]),
            &Allocation::new(vec![0]),
            None,
            &mut rng(),
        );
        assert!(matches!(err, Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn zero_rate_mutation_is_identity() {
        let cfg = GaConfig {
            mutation_rates: super::super::MutationRates { high: 0.0, low: 0.0 },
            ..GaConfig::default()
        };
        let candidates = vec![vec![0, 1, 2]; 5];
        let mut c = Allocation::new(vec![0, 1, 2, 0, 1]);
        let before = c.clone();
        assert_eq!(mutate_adaptive(&mut c, 0.0, 1.0, &cfg, &candidates, &mut rng()), 0);
        assert_eq!(c, before);
    }

    #[test]
    fn single_analyst_mutation_is_identity() {
        let cfg = GaConfig {
            mutation_rates: super::super::MutationRates { high: 1.0, low: 1.0 },
            ..GaConfig::default()
        };
        let candidates = vec![vec![0]; 5];
        let mut c = Allocation::new(vec![0; 5]);
        mutate_adaptive(&mut c, 0.0, 1.0, &cfg, &candidates, &mut rng());
        assert_eq!(c.genes(), &[0; 5]);
    }

    #[test]
    fn pinned_genes_never_mutate() {
        let candidates = vec![vec![0, 1, 2], vec![2], vec![0, 1, 2]];
        let mut r = rng();
        for _ in 0..200 {
            let mut c = Allocation::new(vec![0, 2, 0]);
            mutate_random(&mut c, &candidates, 1.0, &mut r);
            assert_eq!(c.analyst_of(1), 2);
        }
    }

    #[test]
    fn low_rate_mutates_about_five_percent_of_genes() {
        let cfg = GaConfig::default();
        let candidates = vec![vec![0, 1, 2, 3]; 10];
        let mut r = rng();
        let mut resampled = 0;
        let trials = 10_000;
        for _ in 0..trials {
            let mut c = Allocation::new(vec![0; 10]);
            resampled += mutate_adaptive(&mut c, 1.0, 0.5, &cfg, &candidates, &mut r);
        }
        let fraction = resampled as f64 / (trials * 10) as f64;
        assert!((fraction - 0.05).abs() <= 0.01, "{fraction}");
    }

    #[test]
    fn below_mean_uses_the_high_rate() {
        let cfg = GaConfig::default();
        assert_eq!(adaptive_rate(0.1, 0.5, &cfg), 0.9);
        assert_eq!(adaptive_rate(0.5, 0.5, &cfg), 0.05);
    }

    #[test]
    fn permutation_mutations_keep_gene_counts() {
        let mut r = rng();
        let free: Vec<usize> = (0..20).filter(|i| i % 5 != 0).collect();
        for kind in [MutationKind::Scramble, MutationKind::Swap, MutationKind::Inversion] {
            for _ in 0..50 {
                let original = Allocation::new((0..20).map(|i| i % 4).collect());
                let mut c = original.clone();
                mutate_permutation(kind, &mut c, &free, 4, &mut r);
                let mut a = original.genes().to_vec();
                let mut b = c.genes().to_vec();
                a.sort_unstable();
                b.sort_unstable();
                assert_eq!(a, b);
                for i in (0..20).step_by(5) {
                    assert_eq!(c.analyst_of(i), original.analyst_of(i));
                }
            }
        }
    }

    #[test]
    fn diff_counts_differing_genes() {
        let d = |a: Vec<usize>, b: Vec<usize>| allocation_diff(&Allocation::new(a), &Allocation::new(b));
        assert_eq!(d(vec![0, 1, 2], vec![0, 1, 2]).unwrap(), 0);
        assert_eq!(d(vec![0, 0], vec![1, 1]).unwrap(), 2);
        assert_eq!(d(vec![0, 1, 0, 1], vec![0, 1, 1, 1]).unwrap(), 1);
        assert!(d(vec![0], vec![0, 1]).is_err());
    }
}
