//! The `exposure` command line: annotate tasks, aggregate them into
//! occupation indices, and validate, summarize and compare the results.

pub mod commands;
pub mod config;
mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use thiserror::Error;

use crate::config::{FileConfig, PathConfig, Settings};

pub use commands::{AggregateArgs, AnnotateArgs, BinscatterArgs, DisagreeArgs, ReportArgs, ValidateArgs};

#[derive(Debug, Parser)]
#[command(name = "exposure", version, about = "Build and validate a task-based AI exposure index")]
pub struct Cli {
    /// TOML run configuration; command-line flags take precedence over it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for stub models and for providers that accept one.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for the async runtime.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Score every task with every model.
    Annotate(AnnotateArgs),
    /// Combine task scores into occupation and SOC-6 indices.
    Aggregate(AggregateArgs),
    /// Regress the indices on prior exposure measures and correlate them.
    Validate(ValidateArgs),
    /// Binned means of the index against wages or employment.
    Binscatter(BinscatterArgs),
    /// Rank occupations by how much the models disagree.
    Disagree(DisagreeArgs),
    /// Extreme occupations, category means and the joined analysis table.
    Report(ReportArgs),
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("configuration: {0}")]
    Config(String),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Runtime(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 2 for problems with how the tool was invoked, 1 for failures while
    /// running it.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => 2,
            CliError::Input(_) | CliError::Runtime(_) | CliError::Io(_) => 1,
        }
    }
}

/// Everything a subcommand needs besides its own flags.
#[derive(Debug, Clone)]
pub struct Context {
    pub settings: Settings,
    pub paths: PathConfig,
    pub threads: Option<usize>,
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    if cli.threads == Some(0) {
        return Err(CliError::Config("threads must be at least 1".into()));
    }
    let ctx = Context {
        settings: Settings::from_file(&file, cli.seed),
        paths: file.paths,
        threads: cli.threads,
    };
    match cli.command {
        Command::Annotate(a) => commands::annotate::run(ctx, a),
        Command::Aggregate(a) => commands::aggregate::run(ctx, a),
        Command::Validate(a) => commands::validate::run(ctx, a),
        Command::Binscatter(a) => commands::binscatter::run(ctx, a),
        Command::Disagree(a) => commands::disagree::run(ctx, a),
        Command::Report(a) => commands::report::run(ctx, a),
    }
}
