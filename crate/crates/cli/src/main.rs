mod commands;
mod output;

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use output::Format;

/// Character networks and genre classification for TEI drama corpora.
#[derive(Debug, Parser)]
#[command(name = "dramanet", version)]
struct Cli {
    #[command(flatten)]
    config: RunConfig,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct RunConfig {
    /// Directory of TEI files (ingest only)
    #[arg(long, global = true)]
    pub corpus_dir: Option<PathBuf>,
    /// CSV with `play_id,genre` rows overriding genre metadata
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,
    /// Keep plays with strictly more on-stage characters than this
    #[arg(long, global = true, default_value_t = dramanet::corpus::DEFAULT_MIN_CHARACTERS)]
    pub min_characters: usize,
    /// Keep plays with strictly more scenes than this
    #[arg(long, global = true, default_value_t = dramanet::corpus::DEFAULT_MIN_SCENES)]
    pub min_scenes: usize,
    /// Count history plays as tragedies
    #[arg(long, global = true)]
    pub history_as_tragedy: bool,
    /// Absolute Pearson correlation above which a measure is screened out
    #[arg(long, global = true, default_value_t = dramanet::stats::DEFAULT_CORRELATION_THRESHOLD)]
    pub correlation_threshold: f64,
    /// SVM box constraint
    #[arg(short = 'C', long = "c", global = true, default_value_t = dramanet::learn::DEFAULT_C)]
    pub c: f64,
    /// Directory for all artifacts
    #[arg(long, global = true, env = "DRAMANET_OUTPUT_DIR", default_value = "dramanet-out")]
    pub output_dir: PathBuf,
    /// Format of tabular artifacts
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Worker threads; 0 uses every core
    #[arg(long, global = true, default_value_t = 0)]
    pub parallelism: usize,
    /// Increase log verbosity (-v info, -vv debug)
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse and filter a directory of TEI plays into corpus.json
    Ingest,
    /// Compute structural measures and the z-scored feature table
    Features,
    /// Pairwise correlations of all measures and redundancy screening
    Correlate,
    /// Comedy-vs-tragedy rank-sum test for every feature
    Test,
    /// Principal components of the feature table
    Pca,
    /// Leave-one-out linear SVM classification
    Classify {
        /// Add the z-scored cast size as an extra feature
        #[arg(long)]
        with_size: bool,
    },
    /// Recursive feature elimination
    Rfe {
        /// Add the z-scored cast size as an extra feature
        #[arg(long)]
        with_size: bool,
    },
    /// Density change when acts are removed
    Ablate {
        /// Also remove each act in turn from plays with exactly this many acts
        #[arg(long)]
        acts: Option<usize>,
    },
    /// Write one play's network as GEXF and as an edge list
    ExportGraph {
        #[arg(long)]
        play_id: String,
    },
}

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub const UNREADABLE_INPUT: u8 = 2;
    pub const EMPTY_CORPUS: u8 = 3;
    pub const MISSING_PREREQUISITE: u8 = 4;
    pub const UNKNOWN_PLAY: u8 = 5;

    pub fn new(code: u8, message: impl Into<String>) -> Self {
        Failure { code, message: message.into() }
    }

    pub fn other(message: impl Into<String>) -> Self {
        Self::new(1, message)
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        Self::other(format!("{}: {e}", path.display()))
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<dramanet::Error> for Failure {
    fn from(e: dramanet::Error) -> Self {
        Failure::other(e.to_string())
    }
}

impl RunConfig {
    /// Rejects bad settings before any work starts.
    fn validate(&self, command: &Command) -> Result<(), Failure> {
        if !(self.correlation_threshold > 0.0 && self.correlation_threshold <= 1.0) {
            return Err(Failure::other(format!(
                "--correlation-threshold must lie in (0, 1], got {}",
                self.correlation_threshold
            )));
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Failure::other(format!("-C must be positive, got {}", self.c)));
        }
        if let Some(dir) = &self.corpus_dir {
            if !dir.is_dir() {
                return Err(Failure::new(Failure::UNREADABLE_INPUT, format!("{} is not a readable directory", dir.display())));
            }
        } else if matches!(command, Command::Ingest) {
            return Err(Failure::new(Failure::UNREADABLE_INPUT, "ingest needs --corpus-dir"));
        }
        if let Some(m) = &self.manifest {
            if !m.is_file() {
                return Err(Failure::new(Failure::UNREADABLE_INPUT, format!("manifest {} not found", m.display())));
            }
        }
        if self.output_dir.exists() && !self.output_dir.is_dir() {
            return Err(Failure::other(format!("{} exists and is not a directory", self.output_dir.display())));
        }
        Ok(())
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let cfg = &cli.config;
    cfg.validate(&cli.command)?;
    if cfg.parallelism > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.parallelism)
            .build_global()
            .map_err(|e| Failure::other(e.to_string()))?;
    }
    match cli.command {
        Command::Ingest => commands::ingest(cfg),
        Command::Features => commands::features(cfg),
        Command::Correlate => commands::correlate(cfg),
        Command::Test => commands::test(cfg),
        Command::Pca => commands::pca(cfg),
        Command::Classify { with_size } => commands::classify(cfg, with_size),
        Command::Rfe { with_size } => commands::rfe(cfg, with_size),
        Command::Ablate { acts } => commands::ablate(cfg, acts),
        Command::ExportGraph { play_id } => commands::export_graph(cfg, &play_id),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.config.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code)
        }
    }
}
