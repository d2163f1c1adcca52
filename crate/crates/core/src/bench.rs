//! Experiment harness: convergence of GA variants against baselines,
//! GA against simulated managers, and runtime scaling. Each experiment
//! returns a report with per-run records and can write its CSV table.

use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::baselines::{greedy_hill_climb, greedy_run, manager_balanced, manager_efficiency, BaselineBudget};
use crate::error::{Error, Result};
use crate::ga::{GaConfig, GenerationStats, GeneticAlgorithm, MutationKind, SelectionKind};
use crate::model::{Allocation, Scenario};
use crate::objectives::{fairness_gap, global_utility, ObjectiveMode, ObjectiveSpec};
use crate::scenario::{generate_scenario, screen_scenario, GeneratorConfig, ScreeningOptions};

/// Problem sizes of the scaling study, as (tasks, analysts).
pub const SCALING_SIZES: [(usize, usize); 5] = [(65, 10), (130, 20), (195, 30), (260, 40), (325, 50)];

pub const GREEDY: &str = "greedy";
pub const GREEDY_HC: &str = "greedy+hill-climb";
pub const MANAGER_EFFICIENCY: &str = "manager-efficiency";
pub const MANAGER_BALANCED: &str = "manager-balanced";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanCi {
    pub n: usize,
    pub mean: f64,
    /// Half-width of the 95% Student-t interval; `None` below two samples.
    pub half_width: Option<f64>,
}

impl MeanCi {
    pub fn of(xs: &[f64]) -> Self {
        let n = xs.len();
        let mean = if n == 0 { f64::NAN } else { xs.iter().sum::<f64>() / n as f64 };
        let half_width = (n >= 2).then(|| {
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            let t = StudentsT::new(0.0, 1.0, (n - 1) as f64)
                .expect("degrees of freedom are positive")
                .inverse_cdf(0.975);
            t * (var / n as f64).sqrt()
        });
        Self { n, mean, half_width }
    }

    pub fn low(&self) -> f64 {
        self.mean - self.half_width.unwrap_or(0.0)
    }

    pub fn high(&self) -> f64 {
        self.mean + self.half_width.unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub strategy: String,
    pub seed: u64,
    pub final_fitness: f64,
    pub evaluations: usize,
    pub seconds: f64,
    /// Per-generation stats; empty for baselines.
    pub stats: Vec<GenerationStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub name: String,
    pub runs: Vec<RunRecord>,
}

impl ExperimentReport {
    pub fn strategies(&self) -> Vec<String> {
        let mut names: Vec<String> = Vec::new();
        for r in &self.runs {
            if !names.contains(&r.strategy) {
                names.push(r.strategy.clone());
            }
        }
        names
    }

    pub fn runs_of<'a>(&'a self, strategy: &'a str) -> impl Iterator<Item = &'a RunRecord> + 'a {
        self.runs.iter().filter(move |r| r.strategy == strategy)
    }

    pub fn final_fitness(&self, strategy: &str) -> MeanCi {
        MeanCi::of(&self.runs_of(strategy).map(|r| r.final_fitness).collect::<Vec<_>>())
    }

    pub fn write_summary_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["strategy", "seed", "final_fitness", "evaluations", "seconds"])?;
        for r in &self.runs {
            w.write_record([
                r.strategy.clone(),
                r.seed.to_string(),
                r.final_fitness.to_string(),
                r.evaluations.to_string(),
                r.seconds.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// The 65-task, 10-analyst reference problem, screened.
pub fn reference_scenario(seed: u64) -> Result<Scenario> {
    let raw = generate_scenario(&GeneratorConfig::new(65, 10, seed))?;
    Ok(screen_scenario(&raw, &ScreeningOptions::default())?.scenario)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaVariant {
    pub name: String,
    pub config: GaConfig,
}

/// The three hyperparameter set-ups of the ablation; the first is the
/// default configuration.
pub fn ablation_variants() -> Vec<GaVariant> {
    let base = GaConfig::default();
    vec![
        GaVariant {
            name: "steady-state+adaptive".into(),
            config: base.clone(),
        },
        GaVariant {
            name: "tournament+adaptive".into(),
            config: GaConfig {
                selection: SelectionKind::Tournament { size: 3 },
                ..base.clone()
            },
        },
        GaVariant {
            name: "steady-state+scramble".into(),
            config: GaConfig {
                mutation: MutationKind::Scramble,
                ..base
            },
        },
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub generation: usize,
    pub best: MeanCi,
    pub tasks_switched: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub report: ExperimentReport,
    pub budget: usize,
}

impl ConvergenceReport {
    /// Per-generation mean best fitness and mean tasks switched for one GA
    /// variant.
    pub fn curve(&self, variant: &str) -> Vec<CurvePoint> {
        let runs: Vec<&RunRecord> = self.report.runs_of(variant).collect();
        let generations = runs.iter().map(|r| r.stats.len()).min().unwrap_or(0);
        (0..generations)
            .map(|g| {
                let best: Vec<f64> = runs.iter().map(|r| r.stats[g].best).collect();
                let switched = runs.iter().map(|r| r.stats[g].tasks_switched as f64).sum::<f64>() / runs.len() as f64;
                CurvePoint {
                    generation: g,
                    best: MeanCi::of(&best),
                    tasks_switched: switched,
                }
            })
            .collect()
    }

    /// Share of the mean curve's total improvement reached by `generation`.
    pub fn improvement_share(&self, variant: &str, generation: usize) -> f64 {
        let curve = self.curve(variant);
        let (first, last) = (curve[0].best.mean, curve[curve.len() - 1].best.mean);
        if last == first {
            return 1.0;
        }
        (curve[generation].best.mean - first) / (last - first)
    }

    /// Mean tasks switched per generation over an inclusive range.
    pub fn switched_mean(&self, variant: &str, from: usize, to: usize) -> f64 {
        let curve = self.curve(variant);
        let window = &curve[from..=to.min(curve.len() - 1)];
        window.iter().map(|p| p.tasks_switched).sum::<f64>() / window.len() as f64
    }

    /// convergence.csv: one row per GA run and generation.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["config", "seed", "generation", "best", "mean", "switched"])?;
        for r in self.report.runs.iter().filter(|r| !r.stats.is_empty()) {
            for s in &r.stats {
                w.write_record([
                    r.strategy.clone(),
                    r.seed.to_string(),
                    s.generation.to_string(),
                    s.best.to_string(),
                    s.mean.to_string(),
                    s.tasks_switched.to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Runs every GA variant and both greedy baselines once per seed. The
/// greedy+hill-climb budget matches the first variant's evaluation count.
pub fn run_convergence(
    scenario: &Scenario,
    spec: ObjectiveSpec,
    variants: &[GaVariant],
    seeds: &[u64],
) -> Result<ConvergenceReport> {
    let budget = variants
        .first()
        .ok_or_else(|| Error::Config("at least one GA variant is required".into()))?
        .config
        .evaluation_budget();
    let mut runs = Vec::new();
    for &seed in seeds {
        for v in variants {
            let ga = GeneticAlgorithm::new(scenario, spec, v.config.clone().with_seed(seed))?;
            let start = Instant::now();
            let out = ga.run();
            runs.push(RunRecord {
                strategy: v.name.clone(),
                seed,
                final_fitness: out.best_fitness,
                evaluations: out.evaluations,
                seconds: start.elapsed().as_secs_f64(),
                stats: out.stats,
            });
        }
        let start = Instant::now();
        let g = greedy_run(scenario, spec)?;
        runs.push(RunRecord {
            strategy: GREEDY.into(),
            seed,
            final_fitness: g.fitness,
            evaluations: g.evaluations,
            seconds: start.elapsed().as_secs_f64(),
            stats: Vec::new(),
        });
        let start = Instant::now();
        let hc = greedy_hill_climb(scenario, spec, BaselineBudget::new(budget)?, seed)?;
        runs.push(RunRecord {
            strategy: GREEDY_HC.into(),
            seed,
            final_fitness: hc.fitness,
            evaluations: hc.evaluations,
            seconds: start.elapsed().as_secs_f64(),
            stats: Vec::new(),
        });
    }
    Ok(ConvergenceReport {
        report: ExperimentReport {
            name: "convergence".into(),
            runs,
        },
        budget,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub strategy: String,
    pub seed: u64,
    /// Product over analysts of the completion utility.
    pub completion_likelihood: f64,
    pub fairness_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonReport {
    pub fn rows_of<'a>(&'a self, strategy: &'a str) -> impl Iterator<Item = &'a ComparisonRow> + 'a {
        self.rows.iter().filter(move |r| r.strategy == strategy)
    }

    pub fn mean_likelihood(&self, strategy: &str) -> f64 {
        let xs: Vec<f64> = self.rows_of(strategy).map(|r| r.completion_likelihood).collect();
        xs.iter().sum::<f64>() / xs.len() as f64
    }

    pub fn mean_gap(&self, strategy: &str) -> f64 {
        let xs: Vec<f64> = self.rows_of(strategy).map(|r| r.fairness_gap).collect();
        xs.iter().sum::<f64>() / xs.len() as f64
    }

    pub fn row(&self, strategy: &str, seed: u64) -> Option<&ComparisonRow> {
        self.rows.iter().find(|r| r.strategy == strategy && r.seed == seed)
    }

    /// comparison.csv
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["strategy", "seed", "completion_likelihood", "fairness_gap"])?;
        for r in &self.rows {
            w.write_record([
                r.strategy.clone(),
                r.seed.to_string(),
                r.completion_likelihood.to_string(),
                r.fairness_gap.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn ga_strategy_name(mode: ObjectiveMode) -> String {
    format!("ga-{}", mode.label())
}

fn comparison_row(strategy: String, seed: u64, alloc: &Allocation, scenario: &Scenario) -> Result<ComparisonRow> {
    let breakdown = global_utility(alloc, scenario, &ObjectiveSpec::default())?;
    Ok(ComparisonRow {
        strategy,
        seed,
        completion_likelihood: breakdown.completion_likelihood(),
        fairness_gap: fairness_gap(alloc, scenario)?,
    })
}

/// Both manager strategies and the GA under each objective mode, once per
/// seed, scored on completion likelihood and fairness gap.
pub fn run_comparison(scenario: &Scenario, modes: &[ObjectiveMode], seeds: &[u64], config: &GaConfig) -> Result<ComparisonReport> {
    let mut rows = Vec::new();
    let efficiency = manager_efficiency(scenario)?;
    for &seed in seeds {
        rows.push(comparison_row(MANAGER_EFFICIENCY.into(), seed, &efficiency, scenario)?);
        let balanced = manager_balanced(scenario, seed)?;
        rows.push(comparison_row(MANAGER_BALANCED.into(), seed, &balanced, scenario)?);
        for &mode in modes {
            let out = GeneticAlgorithm::new(scenario, ObjectiveSpec::new(mode), config.clone().with_seed(seed))?.run();
            rows.push(comparison_row(ga_strategy_name(mode), seed, &out.best, scenario)?);
        }
    }
    Ok(ComparisonReport { rows })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub n_tasks: usize,
    pub n_analysts: usize,
    pub population: usize,
    pub mode: ObjectiveMode,
    /// Mean over GA seeds of each seed's fastest timing.
    pub seconds: f64,
    /// Fastest timing per GA seed.
    pub samples: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub points: Vec<ScalingPoint>,
}

impl ScalingReport {
    pub fn points_of(&self, mode: ObjectiveMode) -> Vec<&ScalingPoint> {
        self.points.iter().filter(|p| p.mode == mode).collect()
    }

    /// Least-squares slope of log(seconds) against log(population).
    pub fn slope(&self, mode: ObjectiveMode) -> f64 {
        let pts = self.points_of(mode);
        let xs: Vec<f64> = pts.iter().map(|p| p.population as f64).collect();
        let ys: Vec<f64> = pts.iter().map(|p| p.seconds).collect();
        loglog_slope(&xs, &ys)
    }

    /// scaling.csv
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["n_tasks", "n_analysts", "population", "mode", "seconds"])?;
        for p in &self.points {
            w.write_record([
                p.n_tasks.to_string(),
                p.n_analysts.to_string(),
                p.population.to_string(),
                p.mode.label().to_string(),
                p.seconds.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Fastest of `repeats` timings of the optimiser loop alone.
pub fn time_run(scenario: &Scenario, spec: ObjectiveSpec, config: &GaConfig, repeats: usize) -> Result<Vec<f64>> {
    let ga = GeneticAlgorithm::new(scenario, spec, config.clone())?;
    (0..repeats.max(1))
        .map(|_| {
            let start = Instant::now();
            let out = ga.run();
            std::hint::black_box(out.best_fitness);
            Ok(start.elapsed().as_secs_f64())
        })
        .collect()
}

/// Runtime of each size under each mode, with the population scaled
/// linearly in the task count. Timing runs in `repeats` rounds, each round
/// covering every size, GA seed and mode once, so drift in machine speed
/// hits all sizes alike. Each (size, mode, seed) keeps its fastest round; a
/// point averages those over the seeds, since mutation work depends on the
/// run's trajectory. Evaluation is sequential so timings reflect total work.
pub fn run_scaling(
    sizes: &[(usize, usize)],
    modes: &[ObjectiveMode],
    base: &GaConfig,
    scenario_seed: u64,
    ga_seeds: &[u64],
    repeats: usize,
) -> Result<ScalingReport> {
    if ga_seeds.is_empty() {
        return Err(Error::Config("at least one GA seed is required".into()));
    }
    let mut setups = Vec::with_capacity(sizes.len());
    for &(n, m) in sizes {
        let raw = generate_scenario(&GeneratorConfig::new(n, m, scenario_seed))?;
        let scenario = screen_scenario(&raw, &ScreeningOptions::default())?.scenario;
        let config = GaConfig {
            parallel: false,
            ..base.clone().scaled_for(n)
        };
        setups.push((n, m, scenario, config));
    }
    // fastest[size][mode][seed]
    let mut fastest = vec![vec![vec![f64::INFINITY; ga_seeds.len()]; modes.len()]; sizes.len()];
    for _ in 0..repeats.max(1) {
        for (setup, per_mode) in setups.iter().zip(fastest.iter_mut()) {
            let (_, _, scenario, config) = setup;
            for (k, &seed) in ga_seeds.iter().enumerate() {
                let config = config.clone().with_seed(seed);
                for (&mode, per_seed) in modes.iter().zip(per_mode.iter_mut()) {
                    let t = time_run(scenario, ObjectiveSpec::new(mode), &config, 1)?[0];
                    per_seed[k] = per_seed[k].min(t);
                }
            }
        }
    }
    let mut points = Vec::new();
    for ((n, m, _, config), per_mode) in setups.iter().zip(fastest) {
        for (&mode, samples) in modes.iter().zip(per_mode) {
            points.push(ScalingPoint {
                n_tasks: *n,
                n_analysts: *m,
                population: config.population_size,
                mode,
                seconds: samples.iter().sum::<f64>() / samples.len() as f64,
                samples,
            });
        }
    }
    Ok(ScalingReport { points })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_config() -> GaConfig {
        GaConfig {
            population_size: 30,
            generations: 6,
            parents_mating: 6,
            elitism: 2,
            ..GaConfig::default()
        }
    }

    #[test]
    fn t_interval_matches_table_value() {
        // t(0.975, 4) = 2.776445; sd of 1..=5 is sqrt(2.5).
        let ci = MeanCi::of(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!(ci.mean, 3.0);
        let expected = 2.776_445_105_197_799 * (2.5f64 / 5.0).sqrt();
        assert!((ci.half_width.unwrap() - expected).abs() < 1e-9);
        assert_eq!(MeanCi::of(&[1.0]).half_width, None);
    }

    #[test]
    fn slope_of_power_laws() {
        let xs = [500.0, 1000.0, 1500.0, 2000.0, 2500.0];
        let quad: Vec<f64> = xs.iter().map(|x| 3e-7 * x * x).collect();
        assert!((loglog_slope(&xs, &quad) - 2.0).abs() < 1e-12);
        let lin: Vec<f64> = xs.iter().map(|x| 0.01 * x).collect();
        assert!((loglog_slope(&xs, &lin) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ablation_variants_share_a_budget() {
        let v = ablation_variants();
        assert_eq!(v.len(), 3);
        assert!(v.iter().all(|x| x.config.evaluation_budget() == 25_000));
        assert_eq!(v[0].config, GaConfig::default());
    }

    #[test]
    fn convergence_runs_are_reproducible() {
        let s = generate_scenario(&GeneratorConfig::new(15, 3, 2)).unwrap();
        let variants = vec![GaVariant {
            name: "tiny".into(),
            config: tiny_config(),
        }];
        let spec = ObjectiveSpec::new(ObjectiveMode::CompletionOnly);
        let a = run_convergence(&s, spec, &variants, &[0, 1]).unwrap();
        let b = run_convergence(&s, spec, &variants, &[0, 1]).unwrap();
        assert_eq!(a.report.strategies(), vec!["tiny", GREEDY, GREEDY_HC]);
        let fitness = |r: &ConvergenceReport| r.report.runs.iter().map(|x| x.final_fitness).collect::<Vec<_>>();
        assert_eq!(fitness(&a), fitness(&b));
        assert!(a.report.runs_of(GREEDY_HC).all(|r| r.evaluations == a.budget));
        assert_eq!(a.curve("tiny").len(), 7);

        let mut first = Vec::new();
        a.write_csv(&mut first).unwrap();
        let mut second = Vec::new();
        b.write_csv(&mut second).unwrap();
        assert_eq!(first, second);
        let text = String::from_utf8(first).unwrap();
        assert!(text.starts_with("config,seed,generation,best,mean,switched\n"));
        assert_eq!(text.lines().count(), 1 + 2 * 7);
    }

    #[test]
    fn comparison_covers_every_strategy_and_seed() {
        let s = generate_scenario(&GeneratorConfig::new(15, 3, 5)).unwrap();
        let modes = [ObjectiveMode::CompletionOnly, ObjectiveMode::Full];
        let r = run_comparison(&s, &modes, &[3, 4], &tiny_config()).unwrap();
        assert_eq!(r.rows.len(), 2 * 4);
        assert!(r.row(MANAGER_BALANCED, 4).is_some());
        assert!(r.row(&ga_strategy_name(ObjectiveMode::Full), 3).is_some());
        assert!(r.rows.iter().all(|x| (0.0..=1.0).contains(&x.completion_likelihood)));
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("strategy,seed,completion_likelihood,fairness_gap\n"));
    }

    #[test]
    fn scaling_report_shape() {
        let r = run_scaling(&[(13, 2), (26, 4)], &[ObjectiveMode::CompletionOnly], &tiny_config(), 1, &[0, 1], 2).unwrap();
        assert_eq!(r.points.len(), 2);
        assert_eq!(r.points[1].population, 2 * r.points[0].population);
        assert!(r.points.iter().all(|p| p.seconds > 0.0 && p.samples.len() == 2));
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 3);
    }
}
