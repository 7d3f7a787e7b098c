use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "clairvoyant", version, about = "Learn search and sensing heuristics from clairvoyant oracles")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a dataset of worlds and problem instances.
    Gen(GenArgs),
    /// Train a policy on a dataset.
    Train(TrainArgs),
    /// Evaluate methods on a dataset and write a summary table.
    Eval(EvalArgs),
    /// Per-instance complexity ledger of a learned policy against uniform-cost search.
    Ledger(LedgerArgs),
    /// Write search wavefront frames as PPM images.
    Render(RenderArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub family: String,
    #[arg(long)]
    pub count: usize,
    /// Square map side; overrides the size in `--params`.
    #[arg(long)]
    pub size: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// JSON file of family parameters.
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// Emit sensing-graph instances with this many nodes instead of search instances.
    #[arg(long)]
    pub nodes: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TrainMethod {
    Sail,
    Ipp,
    Sl,
    Ql,
    Cem,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(value_enum)]
    pub method: TrainMethod,
    /// JSON training config; defaults apply when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Training log CSV; defaults to `<out>.log.csv`.
    #[arg(long)]
    pub log: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Comma-separated methods. Learned names resolve to `<model-dir>/<name>.bin`.
    #[arg(long, value_delimiter = ',', required = true)]
    pub methods: Vec<String>,
    #[arg(long, default_value = "models")]
    pub model_dir: PathBuf,
    /// Expansion budget for search datasets.
    #[arg(long, default_value_t = 20000)]
    pub budget: usize,
    /// Node selections per roll-out for sensing datasets.
    #[arg(long, default_value_t = 15)]
    pub horizon: usize,
    /// Travel budget for sensing datasets.
    #[arg(long)]
    pub travel_budget: Option<f64>,
    /// Distance penalty for the fixed sensing heuristics.
    #[arg(long, default_value_t = 0.0)]
    pub lambda: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Optional per-run CSV including wall time.
    #[arg(long)]
    pub runs: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LedgerArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, default_value_t = 20000)]
    pub budget: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Instance index within the dataset.
    #[arg(long, default_value_t = 0)]
    pub index: usize,
    /// A classical method name or a model file.
    #[arg(long, default_value = "astar")]
    pub method: String,
    #[arg(long, default_value_t = 20000)]
    pub budget: usize,
    /// Pixels per cell.
    #[arg(long, default_value_t = 4)]
    pub scale: usize,
    #[arg(long)]
    pub out: PathBuf,
}
