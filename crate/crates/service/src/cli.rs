use std::fs;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use taskalloc::baselines::{greedy_allocate, greedy_hill_climb, manager_balanced, manager_efficiency, BaselineBudget};
use taskalloc::bench::{
    ablation_variants, reference_scenario, run_comparison, run_convergence, run_scaling, SCALING_SIZES,
};
use taskalloc::ga::{GaConfig, GeneticAlgorithm};
use taskalloc::model::{validate_scenario, Allocation, Scenario, UtilityBreakdown};
use taskalloc::objectives::{global_utility, ObjectiveMode, ObjectiveSpec};
use taskalloc::scenario::{generate_scenario, screen_scenario, GeneratorConfig, ScreeningOptions, Warning};
use taskalloc::workflow::{build_schedule, ScheduleEntry};

use crate::{api, RunStore, Service};

#[derive(Debug, Parser)]
#[command(name = "taskalloc", version, about = "Allocate analyst tasks with a genetic algorithm")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic scenario.
    Simulate(SimulateArgs),
    /// Allocate a scenario's tasks with one strategy.
    Allocate(AllocateArgs),
    /// Manager heuristics against the GA under three objectives.
    Compare(CompareArgs),
    /// Convergence or runtime-scaling experiment.
    Bench(BenchArgs),
    /// Run the HTTP service.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Strategy {
    Ga,
    Greedy,
    GreedyHc,
    ManagerEff,
    ManagerBal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Experiment {
    Convergence,
    Scaling,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = 65)]
    pub tasks: usize,
    #[arg(long, default_value_t = 10)]
    pub analysts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Drop unpinned tasks until the burden ratio is back within bounds.
    #[arg(long)]
    pub auto_drop: bool,
    /// Scenario JSON path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GaArgs {
    #[arg(long, default_value = "full")]
    pub objective: ObjectiveMode,
    #[arg(long)]
    pub pop: Option<usize>,
    #[arg(long)]
    pub gens: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl GaArgs {
    pub fn config(&self) -> GaConfig {
        let mut c = GaConfig::default().with_seed(self.seed);
        if let Some(pop) = self.pop {
            c.population_size = pop;
            c.parents_mating = c.parents_mating.min(pop);
            c.elitism = c.elitism.min(pop.saturating_sub(1));
        }
        if let Some(gens) = self.gens {
            c.generations = gens;
        }
        c
    }
}

#[derive(Debug, Args)]
pub struct AllocateArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long, value_enum, default_value_t = Strategy::Ga)]
    pub strategy: Strategy,
    #[command(flatten)]
    pub ga: GaArgs,
    #[arg(long)]
    pub auto_drop: bool,
    /// Allocation JSON path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Scenario JSON; the seeded 65-task reference scenario when absent.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    #[arg(long, default_value_t = 5)]
    pub runs: u64,
    #[command(flatten)]
    pub ga: GaArgs,
    /// CSV path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(value_enum)]
    pub experiment: Experiment,
    /// GA seeds per configuration.
    #[arg(long, default_value_t = 20)]
    pub runs: u64,
    /// Timing rounds for the scaling experiment.
    #[arg(long, default_value_t = 3)]
    pub rounds: usize,
    #[arg(long, default_value = "completion")]
    pub objective: ObjectiveMode,
    /// Scenario seed.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub addr: SocketAddr,
    #[arg(long, default_value = "runs")]
    pub data_dir: PathBuf,
}

/// The allocation file written by `allocate`.
#[derive(Debug, Clone, Serialize)]
pub struct AllocationFile {
    pub run_id: String,
    pub strategy: String,
    pub objective: ObjectiveMode,
    pub genes: Vec<usize>,
    pub utility: UtilityBreakdown,
    pub schedule: Vec<ScheduleEntry>,
    pub warnings: Vec<Warning>,
    pub dropped: Vec<u64>,
    pub evaluations: usize,
}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Simulate(a) => simulate(&a),
        Command::Allocate(a) => {
            let file = allocate(&a)?;
            eprintln!(
                "{} ({}): global utility {:.4e}, completion likelihood {:.4e}",
                file.strategy,
                file.objective.label(),
                file.utility.global,
                file.utility.completion_likelihood()
            );
            emit(a.out.as_deref(), &serde_json::to_vec_pretty(&file)?)
        }
        Command::Compare(a) => compare(&a),
        Command::Bench(a) => bench(&a),
        Command::Serve(a) => serve(&a),
    }
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> anyhow::Result<()> {
    match out {
        Some(path) => fs::write(path, bytes).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(bytes)?;
            if !bytes.ends_with(b"\n") {
                stdout.write_all(b"\n")?;
            }
            Ok(())
        }
    }
}

fn report_warnings(warnings: &[Warning]) {
    for w in warnings {
        eprintln!("warning: {}", serde_json::to_string(w).unwrap_or_default());
    }
}

fn simulate(a: &SimulateArgs) -> anyhow::Result<()> {
    let raw = generate_scenario(&GeneratorConfig::new(a.tasks, a.analysts, a.seed))?;
    let screened = screen_scenario(
        &raw,
        &ScreeningOptions {
            auto_drop: a.auto_drop,
            ..ScreeningOptions::default()
        },
    )?;
    report_warnings(&screened.warnings);
    emit(a.out.as_deref(), screened.scenario.to_json_string()?.as_bytes())
}

fn load_scenario(path: &Path) -> anyhow::Result<Scenario> {
    let scenario = Scenario::load(path).with_context(|| format!("reading {}", path.display()))?;
    let findings = validate_scenario(&scenario);
    if !findings.is_empty() {
        let list: Vec<String> = findings.iter().map(|f| f.to_string()).collect();
        bail!("{} is invalid:\n  {}", path.display(), list.join("\n  "));
    }
    Ok(scenario)
}

pub fn allocate(a: &AllocateArgs) -> anyhow::Result<AllocationFile> {
    let scenario = load_scenario(&a.scenario)?;
    let screening = screen_scenario(
        &scenario,
        &ScreeningOptions {
            auto_drop: a.auto_drop,
            ..ScreeningOptions::default()
        },
    )?;
    report_warnings(&screening.warnings);
    let s = &screening.scenario;
    let spec = ObjectiveSpec::new(a.ga.objective);
    let config = a.ga.config();
    config.validate()?;
    let (alloc, evaluations): (Allocation, usize) = match a.strategy {
        Strategy::Ga => {
            let out = GeneticAlgorithm::new(s, spec, config)?.run();
            (out.best, out.evaluations)
        }
        Strategy::Greedy => (greedy_allocate(s, spec)?, 0),
        Strategy::GreedyHc => {
            let run = greedy_hill_climb(s, spec, BaselineBudget::new(config.evaluation_budget())?, a.ga.seed)?;
            (run.allocation, run.evaluations)
        }
        Strategy::ManagerEff => (manager_efficiency(s)?, 0),
        Strategy::ManagerBal => (manager_balanced(s, a.ga.seed)?, 0),
    };
    let strategy = Strategy::value_variants()
        .iter()
        .find(|v| **v == a.strategy)
        .and_then(|v| v.to_possible_value())
        .map(|p| p.get_name().to_string())
        .unwrap_or_default();
    Ok(AllocationFile {
        run_id: uuid::Uuid::new_v4().to_string(),
        strategy,
        objective: a.ga.objective,
        utility: global_utility(&alloc, s, &spec)?,
        schedule: build_schedule(&alloc, s)?,
        genes: alloc.into_genes(),
        warnings: screening.warnings,
        dropped: screening.dropped,
        evaluations,
    })
}

fn compare(a: &CompareArgs) -> anyhow::Result<()> {
    let scenario = match &a.scenario {
        Some(path) => screen_scenario(&load_scenario(path)?, &ScreeningOptions::default())?.scenario,
        None => reference_scenario(a.ga.seed)?,
    };
    let seeds: Vec<u64> = (a.ga.seed..a.ga.seed + a.runs).collect();
    let modes = [
        ObjectiveMode::CompletionOnly,
        ObjectiveMode::CompletionPreference,
        ObjectiveMode::Full,
    ];
    let report = run_comparison(&scenario, &modes, &seeds, &a.ga.config())?;
    let mut strategies: Vec<&str> = Vec::new();
    for r in &report.rows {
        if !strategies.contains(&r.strategy.as_str()) {
            strategies.push(&r.strategy);
        }
    }
    for s in strategies {
        eprintln!(
            "{s:<24} likelihood {:.4e}  fairness gap {:.4}",
            report.mean_likelihood(s),
            report.mean_gap(s)
        );
    }
    let mut buf = Vec::new();
    report.write_csv(&mut buf)?;
    emit(a.out.as_deref(), &buf)
}

fn bench(a: &BenchArgs) -> anyhow::Result<()> {
    let seeds: Vec<u64> = (0..a.runs).collect();
    let mut buf = Vec::new();
    match a.experiment {
        Experiment::Convergence => {
            let scenario = reference_scenario(a.seed)?;
            let conv = run_convergence(&scenario, ObjectiveSpec::new(a.objective), &ablation_variants(), &seeds)?;
            for s in conv.report.strategies() {
                let f = conv.report.final_fitness(&s);
                eprintln!("{s:<24} {:.4e} [{:.4e}, {:.4e}]", f.mean, f.low(), f.high());
            }
            conv.write_csv(&mut buf)?;
        }
        Experiment::Scaling => {
            let modes = [ObjectiveMode::CompletionOnly, ObjectiveMode::CompletionPrecision];
            let report = run_scaling(&SCALING_SIZES, &modes, &GaConfig::default(), a.seed, &seeds, a.rounds)?;
            for m in modes {
                eprintln!("{:<16} log-log slope {:.3}", m.label(), report.slope(m));
            }
            report.write_csv(&mut buf)?;
        }
    }
    emit(a.out.as_deref(), &buf)
}

fn serve(a: &ServeArgs) -> anyhow::Result<()> {
    let _ = tracing_subscriber::fmt().with_writer(std::io::stderr).try_init();
    let store = RunStore::open(&a.data_dir).with_context(|| format!("opening {}", a.data_dir.display()))?;
    tracing::info!(runs = store.len(), dir = %a.data_dir.display(), "store loaded");
    let app = api::router(Service::new(store));
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(a.addr).await?;
        tracing::info!(addr = %listener.local_addr()?, "listening");
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await?;
        Ok(())
    })
}
