//! Genetic optimiser over allocation chromosomes.
//!
//! A generation is: keep the `elitism` best chromosomes unchanged, pick
//! parents, cross them pairwise into `population_size - elitism` offspring,
//! mutate the offspring, evaluate. Elites carry their fitness over, so a
//! run costs `j + generations * (j - elitism)` fitness evaluations.

mod operators;

pub use operators::{
    allocation_diff, crossover_single_point, enforce_pins, init_population, mutate_adaptive, mutate_random,
    random_population, rank_order, select_parents,
};

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Allocation, Scenario};
use crate::objectives::{ObjectiveSpec, UtilityModel};

/// Task count of the reference scenario the default hyperparameters target.
pub const REFERENCE_TASKS: usize = 65;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SelectionKind {
    SteadyState,
    Tournament { size: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CrossoverKind {
    SinglePoint,
    TwoPoint,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MutationKind {
    /// Random resetting at the high or low rate depending on fitness.
    Adaptive,
    /// Random resetting at the low rate for every offspring.
    Random,
    /// Shuffles a window covering half of the free genes.
    Scramble,
    Swap,
    /// Reverses a window covering half of the free genes.
    Inversion,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MutationRates {
    pub high: f64,
    pub low: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaConfig {
    pub population_size: usize,
    pub generations: usize,
    pub crossover: CrossoverKind,
    pub parents_mating: usize,
    pub elitism: usize,
    pub selection: SelectionKind,
    pub mutation: MutationKind,
    pub mutation_rates: MutationRates,
    pub seed: u64,
    /// Evaluate each generation on the rayon pool. Results are identical
    /// either way.
    pub parallel: bool,
    /// Stop after this generation instead of running all `generations`.
    pub stop_at: Option<usize>,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population_size: 500,
            generations: 50,
            crossover: CrossoverKind::SinglePoint,
            parents_mating: 50,
            elitism: 10,
            selection: SelectionKind::SteadyState,
            mutation: MutationKind::Adaptive,
            mutation_rates: MutationRates { high: 0.9, low: 0.05 },
            seed: 0,
            parallel: false,
            stop_at: None,
        }
    }
}

impl GaConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Scales population, parents and elites linearly with the task count
    /// relative to the 65-task reference problem.
    pub fn scaled_for(mut self, n_tasks: usize) -> Self {
        let f = n_tasks as f64 / REFERENCE_TASKS as f64;
        let scale = |x: usize| ((x as f64 * f).ceil() as usize).max(1);
        self.population_size = ((self.population_size as f64 * f).round() as usize).max(2);
        self.parents_mating = scale(self.parents_mating).min(self.population_size);
        self.elitism = scale(self.elitism).min(self.population_size - 1);
        self
    }

    /// Fraction of each generation produced by crossover.
    pub fn crossover_fraction(&self) -> f64 {
        self.offspring_count() as f64 / self.population_size as f64
    }

    pub fn offspring_count(&self) -> usize {
        self.population_size.saturating_sub(self.elitism)
    }

    pub fn last_generation(&self) -> usize {
        self.stop_at.map_or(self.generations, |g| g.min(self.generations))
    }

    /// Fitness evaluations a full run performs.
    pub fn evaluation_budget(&self) -> usize {
        self.population_size + self.last_generation() * self.offspring_count()
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.population_size == 0 {
            return fail("population_size must be positive".into());
        }
        if self.parents_mating == 0 || self.parents_mating > self.population_size {
            return fail(format!(
                "parents_mating must be in 1..={}, got {}",
                self.population_size, self.parents_mating
            ));
        }
        if self.elitism > self.population_size {
            return fail(format!("elitism {} exceeds population {}", self.elitism, self.population_size));
        }
        let MutationRates { high, low } = self.mutation_rates;
        if !(0.0..=1.0).contains(&high) || !(0.0..=1.0).contains(&low) || high < low {
            return fail(format!("mutation rates need 0 <= low <= high <= 1, got high={high} low={low}"));
        }
        if let SelectionKind::Tournament { size: 0 } = self.selection {
            return fail("tournament size must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: usize,
    pub best: f64,
    pub mean: f64,
    /// Genes that differ between this generation's best and the previous
    /// one's. Zero for the initial population.
    pub tasks_switched: usize,
    /// Share of offspring mutated at the high rate.
    pub adaptive_fraction: f64,
}

pub fn write_stats_csv<W: Write>(stats: &[GenerationStats], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["generation", "best", "mean", "tasks_switched", "adaptive_fraction"])?;
    for s in stats {
        w.write_record([
            s.generation.to_string(),
            s.best.to_string(),
            s.mean.to_string(),
            s.tasks_switched.to_string(),
            s.adaptive_fraction.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolveOutcome {
    pub best: Allocation,
    pub best_fitness: f64,
    pub stats: Vec<GenerationStats>,
    pub evaluations: usize,
    /// False when no allocation with nonzero fitness was found.
    pub converged: bool,
}

/// A configured single run. Build with [`GeneticAlgorithm::new`], optionally
/// seed an incumbent, then [`run`](GeneticAlgorithm::run).
pub struct GeneticAlgorithm {
    model: UtilityModel,
    candidates: Vec<Vec<usize>>,
    pins: Vec<Option<usize>>,
    free: Vec<usize>,
    config: GaConfig,
    incumbent: Option<Allocation>,
}

impl GeneticAlgorithm {
    pub fn new(scenario: &Scenario, spec: ObjectiveSpec, config: GaConfig) -> Result<Self> {
        config.validate()?;
        let candidates = scenario.candidate_analysts()?;
        let pins = scenario.pins()?;
        let free = pins.iter().enumerate().filter(|(_, p)| p.is_none()).map(|(i, _)| i).collect();
        Ok(Self {
            model: UtilityModel::new(scenario, spec)?,
            candidates,
            pins,
            free,
            config,
            incumbent: None,
        })
    }

    /// Places `incumbent` in the initial population so the result is never
    /// worse than it.
    pub fn with_incumbent(mut self, incumbent: Allocation) -> Result<Self> {
        if incumbent.len() != self.candidates.len() {
            return Err(Error::LengthMismatch {
                expected: self.candidates.len(),
                actual: incumbent.len(),
            });
        }
        self.incumbent = Some(incumbent);
        Ok(self)
    }

    pub fn model(&self) -> &UtilityModel {
        &self.model
    }

    pub fn config(&self) -> &GaConfig {
        &self.config
    }

    fn evaluate(&self, population: &[Allocation]) -> Vec<f64> {
        if self.config.parallel {
            population.par_iter().map(|c| self.model.fitness(c.genes())).collect()
        } else {
            population.iter().map(|c| self.model.fitness(c.genes())).collect()
        }
    }

    fn mutate(&self, child: &mut Allocation, proxy: f64, mean: f64, rng: &mut ChaCha8Rng) -> bool {
        let cfg = &self.config;
        match cfg.mutation {
            MutationKind::Adaptive => {
                let high = proxy < mean;
                let rate = if high { cfg.mutation_rates.high } else { cfg.mutation_rates.low };
                mutate_random(child, &self.candidates, rate, rng);
                high
            }
            MutationKind::Random => {
                mutate_random(child, &self.candidates, cfg.mutation_rates.low, rng);
                false
            }
            kind => {
                operators::mutate_permutation(kind, child, &self.free, self.free.len() / 2, rng);
                false
            }
        }
    }

    pub fn run(&self) -> EvolveOutcome {
        self.run_with(|_| {})
    }

    /// Runs the optimiser, calling `observer` after each generation
    /// (including the initial population as generation 0).
    pub fn run_with(&self, mut observer: impl FnMut(&GenerationStats)) -> EvolveOutcome {
        let cfg = &self.config;
        let j = cfg.population_size;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

        let mut population = random_population(&self.candidates, j, &mut rng);
        if let Some(inc) = &self.incumbent {
            let slot = rand::Rng::random_range(&mut rng, 0..j);
            let mut seeded = inc.clone();
            enforce_pins(&mut seeded, &self.pins);
            population[slot] = seeded;
        }
        let mut fitness = self.evaluate(&population);
        let mut evaluations = j;

        let mut best_idx = rank_order(&fitness)[0];
        let mut best = population[best_idx].clone();
        let mut best_fitness = fitness[best_idx];
        let mut prev_gen_best = best.clone();
        let mut stats = Vec::with_capacity(cfg.last_generation() + 1);
        let first = GenerationStats {
            generation: 0,
            best: best_fitness,
            mean: mean(&fitness),
            tasks_switched: 0,
            adaptive_fraction: 0.0,
        };
        observer(&first);
        stats.push(first);

        // Chromosomes of the previous generation, reused as offspring storage.
        let mut spare: Vec<Allocation> = Vec::with_capacity(j);
        let n = self.candidates.len();
        for generation in 1..=cfg.last_generation() {
            let order = rank_order(&fitness);
            let parents = select_parents(&fitness, cfg, &mut rng);
            let pop_mean = mean(&fitness);

            let offspring_n = cfg.offspring_count();
            let mut next = Vec::with_capacity(j);
            let mut next_fitness = Vec::with_capacity(j);
            for &e in &order[..cfg.elitism] {
                let mut elite = spare.pop().unwrap_or_else(|| Allocation::new(vec![0; n]));
                elite.genes_mut().copy_from_slice(population[e].genes());
                next.push(elite);
                next_fitness.push(fitness[e]);
            }
            let mut high = 0usize;
            let mut offspring = Vec::with_capacity(offspring_n);
            for i in 0..offspring_n {
                let a = parents[(2 * i) % parents.len()];
                let b = parents[(2 * i + 1) % parents.len()];
                let mut child = spare.pop().unwrap_or_else(|| Allocation::new(vec![0; n]));
                operators::crossover_into(
                    cfg.crossover,
                    population[a].genes(),
                    population[b].genes(),
                    child.genes_mut(),
                    &mut rng,
                );
                let proxy = 0.5 * (fitness[a] + fitness[b]);
                if self.mutate(&mut child, proxy, pop_mean, &mut rng) {
                    high += 1;
                }
                enforce_pins(&mut child, &self.pins);
                offspring.push(child);
            }
            next_fitness.extend(self.evaluate(&offspring));
            evaluations += offspring_n;
            next.extend(offspring);
            spare.append(&mut population);
            population = next;
            fitness = next_fitness;

            best_idx = rank_order(&fitness)[0];
            let gen_best = &population[best_idx];
            if fitness[best_idx] > best_fitness {
                best_fitness = fitness[best_idx];
                best = gen_best.clone();
            }
            let s = GenerationStats {
                generation,
                best: fitness[best_idx],
                mean: mean(&fitness),
                tasks_switched: allocation_diff(&prev_gen_best, gen_best).expect("equal lengths"),
                adaptive_fraction: if offspring_n == 0 {
                    0.0
                } else {
                    high as f64 / offspring_n as f64
                },
            };
            prev_gen_best = gen_best.clone();
            observer(&s);
            stats.push(s);
        }

        EvolveOutcome {
            converged: best_fitness > 0.0,
            best,
            best_fitness,
            stats,
            evaluations,
        }
    }
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        0.0
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

/// One-shot convenience wrapper around [`GeneticAlgorithm`].
pub fn evolve(scenario: &Scenario, spec: ObjectiveSpec, config: GaConfig) -> Result<EvolveOutcome> {
    Ok(GeneticAlgorithm::new(scenario, spec, config)?.run())
}
