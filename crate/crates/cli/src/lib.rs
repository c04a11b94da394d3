//! Command-line front end: config parsing, the four subcommands and CSV
//! output.

pub mod checks;
pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("acceptance failure: {0}")]
    Acceptance(String),
    #[error("{code}: {message}")]
    Run { code: &'static str, message: String },
    #[error("io error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Acceptance(_) => 3,
            CliError::Run { code: "STEP_BUDGET_EXCEEDED", .. } => 4,
            CliError::Run { .. } | CliError::Io(_) => 1,
        }
    }
}

impl From<perfsim::Error> for CliError {
    fn from(e: perfsim::Error) -> Self {
        CliError::Run {
            code: e.code(),
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Threshold, weight and modulus tables.
    Decompose,
    /// Perfect samples of the configured window.
    Sample,
    /// Regeneration tails against the dominating-chain bound.
    Diagnose,
    /// Oracle and statistical checks; exits 3 on failure.
    Validate,
}

#[derive(Debug, Clone, Parser)]
#[command(name = "perfsim", version, about = "Perfect simulation of chains of infinite order")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub replicas: Option<usize>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for replicas (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

pub fn run(cli: &Cli) -> Result<Vec<String>, CliError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("--config is required".into()))?;
    let mut config = config::load(path)?;
    if let Some(s) = cli.seed {
        config.run.seed = s;
    }
    if let Some(r) = cli.replicas {
        config.run.replicas = r;
    }
    let out = cli
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(&config.run.out));
    let resolved = config::resolve(config)?;
    let work = || match cli.command {
        Command::Decompose => commands::decompose(&resolved, &out),
        Command::Sample => commands::sample(&resolved, &out),
        Command::Diagnose => commands::diagnose(&resolved, &out),
        Command::Validate => commands::validate(&resolved, &out),
    };
    match cli.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| CliError::Config(format!("--threads: {e}")))?
            .install(work),
        None => work(),
    }
}
