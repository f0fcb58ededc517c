mod commands;
mod config;
mod failure;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "smnas",
    version,
    about = "Two-stage detector architecture search"
)]
struct Cli {
    /// More log output on stderr (repeatable).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check an encoding, a detector config or a space definition.
    Validate(ValidateArgs),
    /// Print the analytical cost of a backbone or detector.
    Cost(CostArgs),
    /// Run a search stage.
    Search(SearchArgs),
    /// Print seed structures chosen from a journal's front.
    Select(SelectArgs),
    /// Write the factor correlation matrix of a stage-two journal.
    Analyze(AnalyzeArgs),
    /// Write a journal's archive as CSV or JSON.
    Export(ExportArgs),
    /// Answer evaluation requests on stdin with the surrogate.
    #[command(hide = true)]
    ServeSurrogate(ServeArgs),
}

#[derive(Args)]
#[group(required = true, multiple = false, id = "subject")]
pub struct Subject {
    /// Named backbone, e.g. resnet50.
    #[arg(long)]
    pub backbone: Option<String>,
    /// Backbone encoding, e.g. basicblock_64_1-21-21-12.
    #[arg(long)]
    pub encoding: Option<String>,
    /// Detector config file (JSON or TOML).
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Args)]
pub struct ValidateArgs {
    /// Backbone encoding string.
    #[arg(long, conflicts_with = "config")]
    pub encoding: Option<String>,
    /// Detector config file (JSON or TOML).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Space definition to check against, or to check on its own.
    #[arg(long)]
    pub space: Option<PathBuf>,
}

#[derive(Args)]
pub struct CostArgs {
    #[command(flatten)]
    pub subject: Subject,
    /// Input size as WIDTHxHEIGHT.
    #[arg(long, default_value = "224x224")]
    pub resolution: String,
    /// Add the 1000-way classifier (global pool + fc).
    #[arg(long)]
    pub classifier: bool,
    /// Latency model file for detector configs.
    #[arg(long)]
    pub latency_model: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum StageArg {
    One,
    Two,
}

#[derive(Args)]
pub struct SearchArgs {
    pub stage: StageArg,
    /// Run configuration file.
    #[arg(long)]
    pub config: PathBuf,
    /// Continue the existing journal.
    #[arg(long)]
    pub resume: bool,
    /// Sequential evaluation and logical timestamps.
    #[arg(long)]
    pub deterministic: bool,
    /// Overrides SMNAS_JOURNAL_DIR and the config's journal_dir.
    #[arg(long)]
    pub journal_dir: Option<PathBuf>,
    /// Overrides budget.rng_seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides budget.max_evaluations.
    #[arg(long)]
    pub max_evaluations: Option<usize>,
    /// Stage-two seed structure file (JSON or TOML).
    #[arg(long)]
    pub seed_config: Option<PathBuf>,
}

#[derive(Args)]
pub struct SelectArgs {
    #[arg(long)]
    pub journal: PathBuf,
    #[arg(long, default_value_t = 6)]
    pub k: usize,
}

#[derive(Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub journal: PathBuf,
    /// Correlation CSV to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Only records generated up to this round.
    #[arg(long)]
    pub round: Option<u32>,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

#[derive(Args)]
pub struct ExportArgs {
    #[arg(long)]
    pub journal: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: FormatArg,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct ServeArgs {
    /// Surrogate profile file.
    #[arg(long)]
    pub profile: Option<PathBuf>,
    /// Exit without answering once this many requests were answered.
    #[arg(long, hide = true)]
    pub crash_after: Option<usize>,
    /// Never answer the request with this id.
    #[arg(long, hide = true)]
    pub hang_on: Option<String>,
    /// Answer the request with this id with a malformed line.
    #[arg(long, hide = true)]
    pub garbage_on: Option<String>,
    /// Answer the request with this id under a different id.
    #[arg(long, hide = true)]
    pub wrong_id_on: Option<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .target(env_logger::Target::Stderr)
        .init();
    let result = match cli.command {
        Command::Validate(a) => commands::validate(&a),
        Command::Cost(a) => commands::cost(&a),
        Command::Search(a) => commands::search(&a),
        Command::Select(a) => commands::select(&a),
        Command::Analyze(a) => commands::analyze(&a),
        Command::Export(a) => commands::export(&a),
        Command::ServeSurrogate(a) => commands::serve(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code() as u8)
        }
    }
}
