mod commands;
mod settings;
mod store;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use databudget::budgeter::Method;

use settings::{set, Settings};

#[derive(Parser)]
#[command(
    name = "databudget",
    version,
    about = "Estimate data budgets from pilot datasets"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Base seed for every random draw.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// TOML file with default settings; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory holding the dataset store and all results.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a difficulty-graded synthetic corpus into the store.
    Synth(SynthArgs),
    /// Load CSV files, validate them and add them to the store.
    Ingest(IngestArgs),
    /// Learning curve of one pilot drawn from a stored dataset.
    Curve(CurveArgs),
    /// Compute and cache final performance and needed amount per dataset.
    Groundtruth(TruthArgs),
    /// Train a budget model or predict a budget for a pilot.
    #[command(subcommand)]
    Budget(BudgetCommand),
    /// Cluster-split evaluation of the budgeting methods.
    Benchmark(BenchArgs),
}

#[derive(Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 40)]
    pub count: usize,
    #[arg(long, default_value_t = 3000)]
    pub rows: usize,
}

#[derive(Args)]
pub struct IngestArgs {
    #[arg(required = true)]
    pub paths: Vec<PathBuf>,
    /// Label column name.
    #[arg(long)]
    pub label: String,
    /// Treat the label as continuous and split it at the median.
    #[arg(long)]
    pub binarize: bool,
}

#[derive(Args)]
pub struct CurveOpts {
    /// Repetitions per curve point.
    #[arg(long)]
    pub reps: Option<usize>,
    /// Spacing of the curve grid.
    #[arg(long)]
    pub step: Option<usize>,
    /// Trees per forest.
    #[arg(long)]
    pub trees: Option<usize>,
}

#[derive(Args)]
pub struct CurveArgs {
    pub dataset: String,
    /// Pilot size.
    #[arg(long)]
    pub m: Option<usize>,
    #[command(flatten)]
    pub curve: CurveOpts,
    /// Overlay curves for several repetition counts, e.g. 20,100,500.
    #[arg(long, value_delimiter = ',')]
    pub compare_reps: Vec<usize>,
}

#[derive(Args)]
pub struct TruthArgs {
    /// Datasets to process (default: every stored dataset).
    pub datasets: Vec<String>,
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub trees: Option<usize>,
    /// Recompute records that are already cached.
    #[arg(long)]
    pub force: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Fixed,
    Percent,
}

#[derive(Subcommand)]
enum BudgetCommand {
    /// Train a meta-model on every dataset with cached ground truth.
    Train(TrainArgs),
    /// Predict final performance and needed amount for a pilot CSV.
    Predict(PredictArgs),
}

#[derive(Args)]
pub struct TrainArgs {
    /// learning-lr or learning-rf.
    #[arg(long)]
    pub method: Method,
    #[arg(long, value_enum, default_value_t = ModeArg::Fixed)]
    pub mode: ModeArg,
    /// Pilot size in fixed mode.
    #[arg(long)]
    pub m: Option<usize>,
    /// Pilot size range in percent mode.
    #[arg(long)]
    pub min_m: Option<usize>,
    #[arg(long)]
    pub max_m: Option<usize>,
    #[command(flatten)]
    pub curve: CurveOpts,
    /// Model file (default: models/<method>-<mode>.json under --out).
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args)]
pub struct PredictArgs {
    /// Pilot CSV; every row is part of the pilot.
    #[arg(long)]
    pub pilot: PathBuf,
    #[arg(long)]
    pub label: String,
    #[arg(long, value_delimiter = ',', default_value = "powerlaw")]
    pub method: Vec<Method>,
    /// Trained model files; each learning method uses the one trained for it.
    #[arg(long)]
    pub model: Vec<PathBuf>,
    #[command(flatten)]
    pub curve: CurveOpts,
}

#[derive(Args)]
pub struct BenchArgs {
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "powerlaw,learning-lr,learning-rf"
    )]
    pub methods: Vec<Method>,
    /// Fixed pilot size.
    #[arg(long, conflicts_with = "varying")]
    pub m: Option<usize>,
    /// Random pilot sizes per dataset with percent features and ratio bins.
    #[arg(long)]
    pub varying: bool,
    #[arg(long)]
    pub min_m: Option<usize>,
    #[arg(long)]
    pub max_m: Option<usize>,
    /// Cluster-split repetitions.
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub curve_reps: Option<usize>,
    #[arg(long)]
    pub curve_step: Option<usize>,
    #[arg(long)]
    pub curve_trees: Option<usize>,
    #[arg(long)]
    pub model_trees: Option<usize>,
    /// Number of name clusters.
    #[arg(long)]
    pub clusters: Option<usize>,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Synth(_) => "synth",
            Command::Ingest(_) => "ingest",
            Command::Curve(_) => "curve",
            Command::Groundtruth(_) => "groundtruth",
            Command::Budget(BudgetCommand::Train(_)) => "budget train",
            Command::Budget(BudgetCommand::Predict(_)) => "budget predict",
            Command::Benchmark(_) => "benchmark",
        }
    }
}

fn apply_curve_opts(s: &mut Settings, o: &CurveOpts) {
    set(&mut s.curve_repetitions, o.reps);
    set(&mut s.curve_step, o.step);
    set(&mut s.curve_trees, o.trees);
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let mut s = Settings::load(cli.global.config.as_deref())?;
    set(&mut s.seed, cli.global.seed);
    set(&mut s.out, cli.global.out);
    if cli.global.jobs.is_some() {
        s.jobs = cli.global.jobs;
    }
    if let Some(n) = s.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()?;
    }
    match cli.command {
        Command::Synth(a) => commands::synth(&s, &a),
        Command::Ingest(a) => commands::ingest(&s, &a),
        Command::Curve(a) => {
            set(&mut s.pilot_size, a.m);
            apply_curve_opts(&mut s, &a.curve);
            commands::curve(&s, &a)
        }
        Command::Groundtruth(a) => {
            set(&mut s.truth_repetitions, a.reps);
            set(&mut s.truth_trees, a.trees);
            commands::groundtruth(&s, &a)
        }
        Command::Budget(BudgetCommand::Train(a)) => {
            set(&mut s.pilot_size, a.m);
            set(&mut s.varying_min, a.min_m);
            set(&mut s.varying_max, a.max_m);
            apply_curve_opts(&mut s, &a.curve);
            commands::budget_train(&s, &a)
        }
        Command::Budget(BudgetCommand::Predict(a)) => {
            apply_curve_opts(&mut s, &a.curve);
            commands::budget_predict(&s, &a)
        }
        Command::Benchmark(a) => {
            set(&mut s.pilot_size, a.m);
            set(&mut s.varying_min, a.min_m);
            set(&mut s.varying_max, a.max_m);
            set(&mut s.benchmark_repetitions, a.reps);
            set(&mut s.curve_repetitions, a.curve_reps);
            set(&mut s.curve_step, a.curve_step);
            set(&mut s.curve_trees, a.curve_trees);
            set(&mut s.model_trees, a.model_trees);
            if a.clusters.is_some() {
                s.clusters = a.clusters;
            }
            commands::benchmark(&s, &a)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let command = cli.command.name();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let record = serde_json::json!({
                "error": {
                    "command": command,
                    "message": e.to_string(),
                    "causes": e.chain().skip(1).map(|c| c.to_string()).collect::<Vec<_>>(),
                }
            });
            eprintln!("{record}");
            ExitCode::FAILURE
        }
    }
}
