use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use flipforge_core::frst::Clock;
use flipforge_core::{ActionMode, Objective};
use flipforge_learn::ActorKind;

/// Triangulation search over bistellar flip graphs.
///
/// Every command accepts `--config <file.toml>`; flags override keys of the
/// file, and runs with an output directory record the merged configuration
/// in `resolved_config.toml`.
#[derive(Debug, Parser)]
#[command(name = "flipforge", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a dataset of random polytopes with seed triangulations.
    Gen(GenArgs),
    /// Traverse the flip-graph component of a polytope's pulling triangulation.
    Enumerate(EnumerateArgs),
    /// Run classical search strategies and report gaps to exhaustive optima.
    Search(SearchArgs),
    /// Train a policy network with PPO.
    Train(TrainArgs),
    /// Evaluate a trained checkpoint as a search strategy.
    Eval(EvalArgs),
    /// Sample fine regular star triangulations of a lattice polytope.
    SampleFrst(SampleFrstArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub dim: Option<usize>,
    /// Points drawn per sample.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub snap_bits: Option<u32>,
    /// Maximum seed triangulations kept per polytope.
    #[arg(long)]
    pub seed_cap: Option<usize>,
    /// Keep only polytopes with exactly this many vertices.
    #[arg(long)]
    pub require_vertices: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EnumerateArgs {
    /// Polytope file.
    pub polytope: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Maximum number of states to discover.
    #[arg(long)]
    pub limit: Option<usize>,
    /// Write every discovered triangulation to this file.
    #[arg(long)]
    pub dump: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Dataset directory or a single polytope file.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// greedy, dfs, befs, sa or random_walk; repeatable or comma-separated.
    #[arg(long = "strategy", value_delimiter = ',')]
    pub strategies: Vec<String>,
    #[arg(long)]
    pub objective: Option<Objective>,
    #[arg(long)]
    pub budget: Option<usize>,
    #[arg(long)]
    pub seeds_per_config: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub reference_limit: Option<usize>,
    #[arg(long)]
    pub sa_t0: Option<f64>,
    #[arg(long)]
    pub sa_final_ratio: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub objective: Option<Objective>,
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long)]
    pub envs: Option<usize>,
    #[arg(long)]
    pub horizon: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub actor: Option<ActorKind>,
    #[arg(long)]
    pub hidden: Option<usize>,
    #[arg(long)]
    pub init_seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub objective: Option<Objective>,
    #[arg(long)]
    pub budget: Option<usize>,
    #[arg(long, value_parser = parse_mode)]
    pub mode: Option<ActionMode>,
    /// Classical strategies evaluated on the same slots.
    #[arg(long = "baseline", value_delimiter = ',')]
    pub baselines: Vec<String>,
    #[arg(long)]
    pub seeds_per_config: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub reference_limit: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SampleFrstArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Lattice polytope file: its vertices, or all of its lattice points.
    #[arg(long)]
    pub polytope: Option<PathBuf>,
    /// random_walk, policy or plain_lifting.
    #[arg(long)]
    pub locator: Option<String>,
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    #[arg(long, value_parser = parse_mode)]
    pub mode: Option<ActionMode>,
    #[arg(long)]
    pub label: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub max_iterations: Option<usize>,
    #[arg(long)]
    pub max_seconds: Option<f64>,
    #[arg(long)]
    pub retry_limit: Option<usize>,
    #[arg(long)]
    pub flip_budget: Option<usize>,
    #[arg(long)]
    pub height_std: Option<f64>,
    #[arg(long, value_parser = parse_clock)]
    pub clock: Option<Clock>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_mode(s: &str) -> Result<ActionMode, String> {
    match s {
        "argmax" => Ok(ActionMode::Argmax),
        "sample" => Ok(ActionMode::Sample),
        _ => Err(format!("unknown mode `{s}` (expected argmax or sample)")),
    }
}

fn parse_clock(s: &str) -> Result<Clock, String> {
    match s {
        "logical" => Ok(Clock::Logical),
        "wall" => Ok(Clock::Wall),
        _ => Err(format!("unknown clock `{s}` (expected logical or wall)")),
    }
}
