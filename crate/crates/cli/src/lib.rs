//! Experiment harness for the `sopcc` planner: configuration files, batch runs
//! with parameter sweeps, oracle comparisons and bound validation, all
//! emitting CSV.

pub mod bounds;
pub mod compare;
pub mod config;
mod csv_out;
pub mod error;
pub mod experiment;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use sopcc_core::instance::{generate_random_instance, parse_tsplib, DEFAULT_KAPPA};
use sopcc_core::ProblemInstance;

pub use compare::{compare_with_oracle, ComparisonOutput};
pub use config::{ExperimentConfig, InstanceSource, Sweep, SweepAxis};
pub use error::{CliError, CliResult};
pub use experiment::{run_experiment, ExperimentOutput};

#[derive(Debug, Parser)]
#[command(name = "sopcc", version, about = "Stochastic orienteering with chance constraints: planner experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a seeded random instance as JSON.
    Generate(GenerateArgs),
    /// Run planner batches described by a configuration file.
    Run(RunArgs),
    /// Compare the planner with the exhaustive fixed-path oracle.
    Compare(CompareArgs),
    /// Check an instance file or a configuration and its instance.
    Validate(ValidateArgs),
    /// Monte Carlo checks of the failure-estimate and action-ranking bounds.
    Bounds(BoundsArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Number of vertices; vertex 0 is the start and n - 1 the goal.
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1.0)]
    pub reward_low: f64,
    #[arg(long, default_value_t = 4.0)]
    pub reward_high: f64,
    #[arg(long, default_value_t = DEFAULT_KAPPA)]
    pub kappa: f64,
    /// Destination file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BatchArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// CSV destination; overrides the configuration's `output`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides the configuration's `base_seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the configuration's `trials`.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub batch: BatchArgs,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub batch: BatchArgs,
    /// Overrides the configuration's enumeration cap.
    #[arg(long)]
    pub cap: Option<usize>,
    /// Overrides the configuration's samples per oracle path.
    #[arg(long)]
    pub n_eval: Option<usize>,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct ValidateArgs {
    /// Experiment configuration whose instance source is checked.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Instance JSON, or a TSPLIB file when the extension is `.tsp`.
    #[arg(long)]
    pub instance: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[arg(long, default_value_t = 100_000)]
    pub replications: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
}

fn base_dir(config: &Path) -> &Path {
    config.parent().unwrap_or(Path::new(""))
}

fn write_output(bytes: &[u8], out: Option<&Path>) -> CliResult<()> {
    match out {
        Some(path) => std::fs::write(path, bytes).map_err(|e| CliError::io(path, e)),
        None => std::io::stdout().lock().write_all(bytes).map_err(|e| CliError::io("<stdout>", e)),
    }
}

fn with_threads<T: Send>(threads: usize, work: impl FnOnce() -> T + Send) -> CliResult<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {threads} worker threads: {e}")))?;
    Ok(pool.install(work))
}

/// Loads the configuration and instance for `run`/`compare`, applying
/// command-line overrides. Returns the resolved CSV destination as well.
fn prepare(args: &BatchArgs) -> CliResult<(ExperimentConfig, ProblemInstance, Option<PathBuf>)> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.base_seed = seed;
    }
    if let Some(trials) = args.trials {
        cfg.trials = trials;
    }
    cfg.validate()?;
    let dir = base_dir(&args.config);
    let inst = cfg.instance.load(dir)?;
    let out = args.out.clone().or_else(|| cfg.output.as_ref().map(|p| dir.join(p)));
    Ok((cfg, inst, out))
}

fn load_instance_file(path: &Path) -> CliResult<ProblemInstance> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("tsp")) {
        Ok(parse_tsplib(&text, 0, 1.0, 4.0, DEFAULT_KAPPA)?)
    } else {
        Ok(ProblemInstance::from_json(&text)?)
    }
}

fn summarize_run(out: &ExperimentOutput) {
    let normalized = out.normalized_rewards();
    eprintln!("{:>10} {:>12} {:>10} {:>10} {:>14}", "value", "mean_reward", "norm", "fail_rate", "s_per_call");
    for (p, norm) in out.points.iter().zip(normalized) {
        let value = p.value.map(|v| v.to_string()).unwrap_or_else(|| "-".into());
        eprintln!(
            "{:>10} {:>12.4} {:>10.4} {:>10.4} {:>14.6}",
            value,
            p.stats.mean_reward,
            norm,
            p.stats.failure_rate,
            p.mean_time_per_call()
        );
    }
}

/// Executes one parsed command line.
pub fn execute(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Generate(a) => {
            let inst = generate_random_instance(a.n, a.seed, a.reward_low, a.reward_high, a.kappa)?;
            let mut json = inst.to_json()?;
            json.push('\n');
            write_output(json.as_bytes(), a.out.as_deref())
        }
        Command::Run(a) => {
            let (cfg, inst, out) = prepare(&a.batch)?;
            let result = with_threads(a.batch.threads, || run_experiment(&cfg, &inst))??;
            write_output(&result.to_csv()?, out.as_deref())?;
            summarize_run(&result);
            Ok(())
        }
        Command::Compare(a) => {
            let (mut cfg, inst, out) = prepare(&a.batch)?;
            if let Some(cap) = a.cap {
                cfg.cap = cap;
            }
            if let Some(n_eval) = a.n_eval {
                cfg.n_eval = n_eval;
            }
            let result = with_threads(a.batch.threads, || compare_with_oracle(&cfg, &inst))??;
            write_output(&result.to_csv()?, out.as_deref())
        }
        Command::Validate(a) => {
            let inst = match (&a.config, &a.instance) {
                (Some(config), _) => {
                    let cfg = ExperimentConfig::load(config)?;
                    cfg.instance.load(base_dir(config))?
                }
                (None, Some(path)) => load_instance_file(path)?,
                (None, None) => unreachable!("clap requires one of --config and --instance"),
            };
            let report = inst.validate();
            if !report.is_empty() {
                return Err(CliError::Invariant(report.to_string()));
            }
            println!("{}: {} vertices, start {}, goal {}: ok", inst.name(), inst.n(), inst.start(), inst.goal());
            Ok(())
        }
        Command::Bounds(a) => {
            let rows = with_threads(a.threads, || bounds::run_bounds(a.replications, a.seed))??;
            write_output(&bounds::to_csv(&rows)?, a.out.as_deref())
        }
    }
}
