mod commands;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::CliError;

#[derive(Parser, Debug)]
#[command(
    name = "uspm",
    version,
    about = "Weighted sequential pattern mining over uncertain databases"
)]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "USPM_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Mine frequent and semi-frequent patterns of one database.
    Mine(MineArgs),
    /// Mine an initial database, then replay increments.
    Incmine(IncmineArgs),
    /// Generate an uncertain database and weight table.
    Gen(GenArgs),
    /// Compare candidate counts of the two pruning bounds.
    CompareBounds(CompareArgs),
    /// Exhaustive reference mining.
    Oracle(OracleArgs),
}

#[derive(Args, Debug)]
pub struct OutputArgs {
    #[arg(long, default_value = "tsv", value_parser = ["tsv", "jsonl"])]
    pub format: String,
    /// Write the listing here instead of standard output.
    #[arg(long)]
    pub out: Option<std::path::PathBuf>,
}

#[derive(Args, Debug)]
pub struct MineArgs {
    #[arg(long)]
    pub db: std::path::PathBuf,
    #[arg(long)]
    pub weights: std::path::PathBuf,
    #[arg(long)]
    pub min_sup: f64,
    #[arg(long, default_value_t = 1.0)]
    pub mu: f64,
    #[arg(long, default_value_t = 1.0)]
    pub wgt_fct: f64,
    #[arg(long, default_value = "cap", value_parser = ["cap", "top"])]
    pub bound: String,
    /// Use this frequent threshold instead of deriving it from the data.
    #[arg(long)]
    pub override_minwes: Option<f64>,
    /// Semi-frequent threshold; defaults to the frequent threshold times mu.
    #[arg(long)]
    pub override_minwes_semi: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct IncmineArgs {
    #[arg(long)]
    pub initial: std::path::PathBuf,
    /// Increment files, applied in order.
    #[arg(long = "delta", num_args = 1..)]
    pub deltas: Vec<std::path::PathBuf>,
    #[arg(long)]
    pub weights: std::path::PathBuf,
    #[arg(long, default_value = "uwsinc+", value_parser = ["uwsinc", "uwsinc+"])]
    pub algo: String,
    #[arg(long)]
    pub min_sup: f64,
    #[arg(long)]
    pub mu: f64,
    #[arg(long, default_value_t = 1.0)]
    pub wgt_fct: f64,
    #[arg(long, default_value_t = 2.0)]
    pub gamma: f64,
    /// WAM used for the local threshold: delta, cumulative, or a fixed value.
    #[arg(long, default_value = "delta")]
    pub lwes_wam: String,
    /// Print a report after every increment, not only the last.
    #[arg(long)]
    pub report_each: bool,
    /// Print completeness against exhaustive mining to standard error.
    #[arg(long)]
    pub audit: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
#[command(group(clap::ArgGroup::new("source").required(true).args(["spmf", "synthetic"])))]
pub struct GenArgs {
    #[arg(long)]
    pub spmf: Option<std::path::PathBuf>,
    /// COUNT,MAX_EVENTS,ALPHABET
    #[arg(long, value_parser = parse_shape)]
    pub synthetic: Option<[usize; 3]>,
    #[arg(long, default_value_t = 0.5)]
    pub prob_mean: f64,
    #[arg(long, default_value_t = 0.25)]
    pub prob_sd: f64,
    #[arg(long, default_value_t = 0.5)]
    pub wgt_mean: f64,
    #[arg(long, default_value_t = 0.125)]
    pub wgt_sd: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out_db: std::path::PathBuf,
    #[arg(long)]
    pub out_weights: std::path::PathBuf,
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    #[arg(long)]
    pub db: std::path::PathBuf,
    #[arg(long)]
    pub weights: std::path::PathBuf,
    #[arg(long, num_args = 1.., required = true)]
    pub min_sup: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub mu: f64,
    #[arg(long, default_value_t = 1.0)]
    pub wgt_fct: f64,
    /// Print NA in the time columns so output is reproducible.
    #[arg(long)]
    pub no_timing: bool,
}

#[derive(Args, Debug)]
pub struct OracleArgs {
    #[arg(long)]
    pub db: std::path::PathBuf,
    #[arg(long)]
    pub weights: std::path::PathBuf,
    #[arg(long)]
    pub threshold: f64,
    #[arg(long, default_value_t = 6)]
    pub max_len: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

fn parse_shape(text: &str) -> Result<[usize; 3], String> {
    let fields: Vec<usize> = text
        .split(',')
        .map(|f| f.trim().parse::<usize>().map_err(|e| format!("{f:?}: {e}")))
        .collect::<Result<_, _>>()?;
    fields
        .try_into()
        .map_err(|_| "expected COUNT,MAX_EVENTS,ALPHABET".to_string())
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Params("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Params(e.to_string()))?;
    }
    match cli.command {
        Command::Mine(args) => commands::mine(&args),
        Command::Incmine(args) => commands::incmine(&args),
        Command::Gen(args) => commands::gen(&args),
        Command::CompareBounds(args) => commands::compare_bounds(&args),
        Command::Oracle(args) => commands::oracle(&args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
