use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Schedule precedence-constrained tasks on a battery-limited UAV fleet.
///
/// Exit codes: 0 success, 1 usage error, 2 validation failure, 3 runtime failure.
#[derive(Parser, Debug)]
#[command(name = "uavsched", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build the schedule for one task sequence.
    Schedule(ScheduleArgs),
    /// Search for a short-makespan sequence with the particle swarm.
    Search(SearchArgs),
    /// Run a parameter grid and summarize makespans per cell.
    Experiment(ExperimentArgs),
    /// Write a random instance file.
    Generate(GenerateArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
pub struct InstanceSource {
    /// Instance JSON file.
    #[arg(long)]
    pub instance: Option<PathBuf>,
    /// Task table CSV (TaskID,Start,End,ProcTime,Precedence) on the lab map
    /// with the default fleet.
    #[arg(long)]
    pub tasks: Option<PathBuf>,
    /// Built-in 12-task lab example.
    #[arg(long)]
    pub sample: bool,
}

#[derive(Args, Debug)]
pub struct Output {
    /// Directory for output files (created if missing).
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// Output formats, comma separated.
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [Format::Csv, Format::Json, Format::Svg])]
    pub format: Vec<Format>,
    /// Include wall-clock timings in written files (they are always printed).
    #[arg(long)]
    pub timings: bool,
}

impl Output {
    pub fn wants(&self, f: Format) -> bool {
        self.format.contains(&f)
    }
}

#[derive(Args, Debug)]
pub struct ScheduleArgs {
    #[command(flatten)]
    pub source: InstanceSource,
    /// Priority rule producing the sequence, e.g. `max-time` (default `max-rpw`).
    #[arg(long, conflicts_with_all = ["sequence", "sequence_file"])]
    pub rule: Option<String>,
    /// Comma-separated task ids; a feasible prefix is completed automatically.
    #[arg(long, value_delimiter = ',', conflicts_with = "sequence_file")]
    pub sequence: Option<Vec<u32>>,
    /// File with task ids separated by commas or whitespace.
    #[arg(long)]
    pub sequence_file: Option<PathBuf>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Debug)]
pub struct SearchArgs {
    #[command(flatten)]
    pub source: InstanceSource,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1.0)]
    pub c1: f64,
    #[arg(long, default_value_t = 2.0)]
    pub c2: f64,
    /// Swarm size (at least 8).
    #[arg(long, default_value_t = 40)]
    pub particles: usize,
    #[arg(long, default_value_t = 40)]
    pub max_iter: usize,
    /// Stop after this many iterations without improvement.
    #[arg(long, default_value_t = 10)]
    pub window: usize,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub jobs: Option<usize>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Debug)]
pub struct ExperimentArgs {
    /// Instance JSON files; may be repeated.
    #[arg(long)]
    pub instance: Vec<PathBuf>,
    /// Generate lab-map instances with these task counts instead.
    #[arg(long, value_delimiter = ',', conflicts_with = "instance")]
    pub sizes: Option<Vec<usize>>,
    /// Seed for generated instances.
    #[arg(long, default_value_t = 0)]
    pub gen_seed: u64,
    /// Base seed; run k uses seed + k.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_delimiter = ',', default_values_t = [1.0, 2.0])]
    pub c1: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = [1.0, 2.0])]
    pub c2: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = [8, 20, 40])]
    pub particles: Vec<usize>,
    #[arg(long, default_value_t = 20)]
    pub reps: usize,
    #[arg(long, default_value_t = 40)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 10)]
    pub window: usize,
    #[arg(long)]
    pub jobs: Option<usize>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    #[arg(long)]
    pub n_tasks: usize,
    #[arg(long, default_value_t = 2)]
    pub max_preds: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Map JSON ({"positions": [...], "flight_time": [[...]]}); default is the lab map.
    #[arg(long)]
    pub map: Option<PathBuf>,
    /// Relative weights of single inspection, compound inspection, material handling.
    #[arg(long, value_delimiter = ',', default_values_t = [1, 1, 1])]
    pub weights: Vec<u32>,
    /// Output file (default: <out-dir>/instance-n<N>-s<SEED>.json).
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}
