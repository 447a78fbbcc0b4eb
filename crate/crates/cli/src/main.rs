use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};

mod commands;

/// Uncertainty-aware candidate screening.
///
/// Exit status: 0 on success, 1 on a domain error (invalid data, unknown job
/// or run), 2 on a usage error.
#[derive(Debug, Parser)]
#[command(name = "humble", version)]
pub struct Cli {
    /// Store directory, created if missing.
    #[arg(long, global = true, env = "HUMBLE_STORE", default_value = ".humble-store")]
    pub store: PathBuf,

    /// Master seed. Every command is deterministic given its flags and seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Directory for files written by `experiment` and `generate-fixtures`.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    pub format: Format,

    /// Log verbosity; repeat for more.
    #[arg(short, long, global = true, action = ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    /// Aligned, human-readable tables.
    Table,
    /// Comma-separated values with a header row.
    Delimited,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate candidate-pool and job files and import them into the store.
    Ingest {
        /// JSONL files; the kind (pool or jobs) is detected per file.
        #[arg(required = true)]
        paths: Vec<PathBuf>,
    },
    /// Screen the stored pool against a job and print the shortlist.
    Screen(ScreenArgs),
    /// Run the synthetic noise sweep.
    Experiment(ExperimentArgs),
    /// Write a run's rank set as candidate_id,rank,probability rows.
    ExportRankset {
        run_id: String,
        /// Drop entries below this probability; defaults to the run's threshold.
        #[arg(long)]
        threshold: Option<f64>,
        /// Output file; stdout if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the comparison table for runs (default: latest complete run per job).
    Report { run_ids: Vec<String> },
    /// Serve the HTTP API.
    Serve(ServeArgs),
    /// Write a synthetic pool and sample jobs as JSONL.
    GenerateFixtures {
        #[arg(long, default_value_t = 1000)]
        candidates: usize,
    },
}

#[derive(Debug, Args)]
pub struct ScreenArgs {
    pub job_id: String,
    /// Shortlist size.
    #[arg(long, default_value_t = 50)]
    pub k: usize,
    /// Order by expected rank and add an explore section; `--humble=false` gives the plain top-k.
    #[arg(long, action = ArgAction::Set, default_value_t = true)]
    pub humble: bool,
    /// Share of the shortlist given to high-entropy candidates.
    #[arg(long, default_value_t = 0.2)]
    pub rho: f64,
    /// Monte Carlo draws.
    #[arg(long, default_value_t = 10_000)]
    pub draws: u32,
    /// Perturbed scores per candidate.
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    /// Probability of masking each feature.
    #[arg(long, default_value_t = 0.5)]
    pub mask_prob: f64,
    /// Rank-support threshold for stored statistics.
    #[arg(long, default_value_t = 0.01)]
    pub threshold: f64,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// JSON config; flags below override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub candidates: Option<usize>,
    /// Comma-separated, strictly ascending.
    #[arg(long, value_delimiter = ',')]
    pub sigma_grid: Option<Vec<f64>>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub draws: Option<u32>,
    /// RBO depth; the whole pool if omitted.
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long)]
    pub persistence: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, env = "HUMBLE_HOST", default_value = "127.0.0.1")]
    pub host: String,
    #[arg(long, env = "HUMBLE_PORT", default_value_t = 8080)]
    pub port: u16,
    /// Static UI assets, served under /ui.
    #[arg(long, env = "HUMBLE_STATIC_DIR")]
    pub static_dir: Option<PathBuf>,
    /// Default Monte Carlo draws for screen requests.
    #[arg(long, env = "HUMBLE_DRAWS", default_value_t = 10_000)]
    pub draws: u32,
    /// Default perturbed scores per candidate.
    #[arg(long, env = "HUMBLE_SAMPLES", default_value_t = 100)]
    pub samples: usize,
    /// Default masking probability.
    #[arg(long, env = "HUMBLE_MASK_PROB", default_value_t = 0.5)]
    pub mask_prob: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        2 => "debug",
        _ => "trace",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match commands::run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
