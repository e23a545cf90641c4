use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use geql_harness::config::{parse_agents, ExperimentSpec, Task};
use geql_harness::{output, run_experiment, summarize};

#[derive(Parser)]
#[command(name = "geql", version, about = "Boosted-tree Q-learning experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write results into the output directory.
    Run(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Flat `key = value` file read before the flags below.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    task: Option<Task>,
    /// Comma-separated, e.g. `booster-iauu,linear-uniform,rmax`.
    #[arg(long)]
    agents: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    episodes: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    rho: Option<String>,
    #[arg(long)]
    clusters: Option<String>,
    #[arg(long)]
    epsilon0: Option<String>,
    #[arg(long)]
    alpha0: Option<String>,
    #[arg(long)]
    gamma: Option<String>,
    #[arg(long)]
    decay: Option<String>,
    #[arg(long)]
    tree_depth: Option<String>,
    #[arg(long)]
    max_steps: Option<String>,
    #[arg(long)]
    batch_period: Option<String>,
    #[arg(long)]
    batch_window: Option<String>,
    #[arg(long)]
    batch_trees: Option<String>,
    /// plain, mix or explore-counts
    #[arg(long)]
    iauu_variant: Option<String>,
    /// persist or reset
    #[arg(long)]
    count_persistence: Option<String>,
}

impl RunArgs {
    fn spec(&self) -> Result<ExperimentSpec> {
        let mut spec = ExperimentSpec::new(Task::NChain, Vec::new(), 1, 100, 0);
        if let Some(path) = &self.config {
            let text =
                fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            spec.apply_config(&text)?;
        }
        if let Some(t) = self.task {
            spec.task = t;
        }
        if let Some(a) = &self.agents {
            spec.agents = parse_agents(a)?;
        }
        spec.trials = self.trials.unwrap_or(spec.trials);
        spec.episodes = self.episodes.unwrap_or(spec.episodes);
        spec.seed = self.seed.unwrap_or(spec.seed);
        let overrides = [
            ("rho", &self.rho),
            ("clusters", &self.clusters),
            ("epsilon0", &self.epsilon0),
            ("alpha0", &self.alpha0),
            ("gamma", &self.gamma),
            ("decay", &self.decay),
            ("tree-depth", &self.tree_depth),
            ("max-steps", &self.max_steps),
            ("batch-period", &self.batch_period),
            ("batch-window", &self.batch_window),
            ("batch-trees", &self.batch_trees),
            ("iauu-variant", &self.iauu_variant),
            ("count-persistence", &self.count_persistence),
        ];
        for (key, v) in overrides {
            if let Some(v) = v {
                spec.params.set(key, v)?;
            }
        }
        spec.validate()?;
        Ok(spec)
    }
}

fn main() -> ExitCode {
    let Command::Run(args) = Cli::parse().command;
    match execute(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn execute(args: &RunArgs) -> Result<()> {
    let spec = args.spec()?;
    let (setup, table) = run_experiment(&spec)?;
    output::write_all(&args.out, &setup, &table)?;
    print!("{}", summarize(&table));
    Ok(())
}
