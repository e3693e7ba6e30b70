use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use netbell::ExpressionTable;
use netbell_cli::commands::{self, Render};
use netbell_cli::{simulate, CliError, ExperimentConfig};
use serde::Serialize;

/// Bell-nonlocality witnesses on networks of bipartite sources.
#[derive(Debug, Parser)]
#[command(name = "netbell", version)]
struct Cli {
    /// Emit JSON instead of a table.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Local, communication, quantum and noise scores of the chained game.
    Bounds {
        #[arg(long)]
        k: usize,
    },
    /// Per-edge visibility needed to beat the foil bound on a graph.
    Visibility {
        #[arg(long)]
        graph: String,
        #[arg(long)]
        k: usize,
    },
    /// Number of settings minimizing the critical visibility.
    OptimizeK {
        #[arg(long)]
        graph: String,
        #[arg(long, default_value_t = 10)]
        kmax: usize,
    },
    /// Simulate an experiment from a JSON configuration.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Override the trials per input pair (0 = exact).
        #[arg(long)]
        events: Option<u64>,
        /// Override the master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads for sampled mode.
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
    /// Fit white-noise visibilities to triangle CHSH scores.
    Fit {
        /// Comma-separated scores for edges 0-1, 1-2, 0-2; defaults to the
        /// transcribed measurements.
        #[arg(long, value_delimiter = ',')]
        scores: Option<Vec<f64>>,
        #[arg(long, default_value_t = 5)]
        kmax: usize,
    },
    /// Exhaustive foil and local maxima on a three-party graph.
    Oracle {
        #[arg(long)]
        graph: String,
        #[arg(long)]
        k: usize,
        /// JSON expression table replacing the chained game.
        #[arg(long)]
        expr: Option<PathBuf>,
    },
    /// Check the foil decomposition of parallel Tsirelson boxes.
    DecomposeCheck {
        /// Branch weight to try instead of the exact one.
        #[arg(long)]
        w: Option<f64>,
    },
    /// Recompute the triangle table, thresholds and certificates.
    Reproduce,
}

fn emit<T: Serialize + Render>(value: &T, json: bool) -> Result<(), CliError> {
    let text = if json {
        serde_json::to_string_pretty(value)? + "\n"
    } else {
        value.render()
    };
    // A closed pipe (e.g. `| head`) is not an error worth reporting.
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    let json = cli.json;
    match cli.command {
        Command::Bounds { k } => emit(&commands::bounds(k)?, json),
        Command::Visibility { graph, k } => emit(&commands::visibility(&graph, k)?, json),
        Command::OptimizeK { graph, kmax } => emit(&commands::optimize(&graph, kmax)?, json),
        Command::Simulate {
            config,
            events,
            seed,
            workers,
        } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(n) = events {
                cfg.monte_carlo.events_per_input = n;
            }
            if let Some(s) = seed {
                cfg.monte_carlo.seed = s;
            }
            emit(&simulate(&cfg.validate()?, workers)?, json)
        }
        Command::Fit { scores, kmax } => {
            let scores = scores.unwrap_or_else(commands::transcribed_chsh);
            emit(&commands::fit(&scores, kmax)?, json)
        }
        Command::Oracle { graph, k, expr } => {
            let table = match expr {
                Some(path) => {
                    let text =
                        std::fs::read_to_string(&path).map_err(|e| CliError::Io(path.display().to_string(), e))?;
                    Some(serde_json::from_str::<ExpressionTable>(&text)?)
                }
                None => None,
            };
            emit(&commands::oracle(&graph, k, table)?, json)
        }
        Command::DecomposeCheck { w } => emit(&commands::decompose_check(w)?, json),
        Command::Reproduce => emit(&commands::reproduce()?, json),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
