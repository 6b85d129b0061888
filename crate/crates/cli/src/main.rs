//! `vw`: trace variants of partially ordered event logs from the command line.

mod commands;
mod input;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "vw", version, about = "Interval-ordered trace variants of event logs")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalArgs {
    /// Event log to read (.xes, .xes.gz or .csv).
    #[arg(long, short, global = true)]
    pub input: Option<PathBuf>,
    /// Input format; `auto` infers it from the file extension.
    #[arg(long, value_enum, default_value_t = InputFormat::Auto, global = true)]
    pub format: InputFormat,
    /// CSV columns as `case,label,start,complete[,resource]`.
    #[arg(long, global = true)]
    pub columns: Option<String>,
    /// Write data here instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    /// Output format; defaults depend on the command and the output extension.
    #[arg(long, value_enum, global = true)]
    pub output_format: Option<OutputFormat>,
    /// Worker threads for the per-trace pipeline.
    #[arg(long, env = "VW_THREADS", global = true, value_parser = clap::value_parser!(u16).range(1..))]
    pub threads: Option<u16>,
    /// Seed for synthetic logs and the label color palette.
    #[arg(long, default_value_t = 0, global = true)]
    pub seed: u64,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum InputFormat {
    Auto,
    Xes,
    Csv,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Svg,
    Text,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List interval-ordered variants by descending frequency.
    Variants {
        /// List at most this many case ids per variant.
        #[arg(long)]
        max_cases: Option<usize>,
    },
    /// Draw one variant, selected by key or by one of its cases.
    Render {
        /// Canonical variant key as listed by `variants`.
        #[arg(long, conflicts_with = "case", required_unless_present = "case")]
        key: Option<String>,
        /// Case id; the case's own layout is drawn.
        #[arg(long)]
        case: Option<String>,
    },
    /// Log and variant statistics with a per-phase timing breakdown.
    Stats,
    /// Audit every trace's interval order against the order axioms.
    Check,
    /// Time the pipeline over repeated runs.
    Bench {
        #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u32).range(1..))]
        runs: u32,
        #[command(flatten)]
        synthetic: SyntheticArgs,
    },
    /// Write a seeded synthetic log (CSV, or XES for .xes/.xes.gz outputs).
    Generate {
        #[command(flatten)]
        synthetic: SyntheticArgs,
    },
}

/// Shape of a synthetic log; used when no input is given.
#[derive(Args, Debug, Clone)]
pub struct SyntheticArgs {
    #[arg(long, default_value_t = 50)]
    pub templates: usize,
    /// Total number of traces, spread evenly over the templates.
    #[arg(long, default_value_t = 10_000)]
    pub traces: usize,
    #[arg(long, default_value_t = 20)]
    pub instances: usize,
    #[arg(long, default_value_t = 0.5)]
    pub density: f64,
}

/// Failure classes and their exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Unreadable or invalid input, bad arguments: exit 2.
    Input(String),
    /// Unknown variant key or case id: exit 3.
    Reference(String),
    /// Anything else: exit 1.
    Internal(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            Self::Internal(_) => 1,
            Self::Input(_) => 2,
            Self::Reference(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Self::Input(m) | Self::Reference(m) | Self::Internal(m) => m,
        }
    }
}

impl From<vw_core::Error> for CliError {
    fn from(e: vw_core::Error) -> Self {
        use vw_core::Error as E;
        match e {
            E::Io(_)
            | E::Xml { .. }
            | E::Csv(_)
            | E::MissingColumn(_)
            | E::DuplicateId(_)
            | E::InvertedInterval { .. }
            | E::InvalidSpec(_)
            | E::InvalidConfig(_) => Self::Input(e.to_string()),
            _ => Self::Internal(e.to_string()),
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.global.threads {
        pool = pool.num_threads(n.into());
    }
    let pool = pool.build().map_err(|e| CliError::Internal(e.to_string()))?;
    let g = &cli.global;
    pool.install(|| match &cli.command {
        Command::Variants { max_cases } => commands::variants(g, *max_cases),
        Command::Render { key, case } => commands::render(g, key.as_deref(), case.as_deref()),
        Command::Stats => commands::stats(g),
        Command::Check => commands::check(g),
        Command::Bench { runs, synthetic } => commands::bench(g, *runs, synthetic),
        Command::Generate { synthetic } => commands::generate(g, synthetic),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("vw: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
