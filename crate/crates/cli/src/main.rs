//! `sensorscene` command-line driver.

mod commands;
mod manifest;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "sensorscene", version, about = "Simulate sensor campaigns and evaluate scenario classifiers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the 150-experiment campaign and write it as CSV.
    Simulate {
        #[arg(long)]
        seed: u64,
        /// Simulator configuration (`key = value` lines); defaults apply to
        /// keys left out.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Cross-validate one classifier and write the metric report.
    Crossval {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        classifier: String,
        #[arg(long, default_value = "3class")]
        mode: String,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        hyper: Hyper,
    },
    /// Cross-validate a hyperparameter grid; writes a CSV table and an SVG plot.
    Sweep {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        classifier: String,
        /// `key=v1,v2;key=...`; forest keys n_trees, m_try; samme keys depth,
        /// rounds; logreg keys penalty, lambda. Omitted: the default grid.
        #[arg(long)]
        grid: Option<String>,
        #[arg(long, default_value = "3class")]
        mode: String,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        hyper: Hyper,
    },
    /// Fold-averaged variable importances; writes a CSV table and an SVG chart.
    Importance {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        classifier: String,
        #[arg(long, default_value = "3class")]
        mode: String,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        hyper: Hyper,
    },
}

/// Hyperparameter overrides; each applies only to its classifier.
#[derive(Args, Clone, Default)]
pub struct Hyper {
    #[arg(long, default_value_t = 10)]
    pub folds: usize,
    #[arg(long)]
    pub n_trees: Option<usize>,
    #[arg(long)]
    pub m_try: Option<usize>,
    #[arg(long)]
    pub rounds: Option<usize>,
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long)]
    pub penalty: Option<String>,
    #[arg(long)]
    pub lambda: Option<f64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate { seed, config, out } => commands::simulate(seed, config.as_deref(), &out),
        Command::Crossval { data, classifier, mode, seed, out, hyper } => {
            commands::crossval(&data, &classifier, &mode, seed, &out, &hyper)
        }
        Command::Sweep { data, classifier, grid, mode, seed, out, hyper } => {
            commands::sweep(&data, &classifier, grid.as_deref(), &mode, seed, &out, &hyper)
        }
        Command::Importance { data, classifier, mode, seed, out, hyper } => {
            commands::importance(&data, &classifier, &mode, seed, &out, &hyper)
        }
    };
    match result {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
