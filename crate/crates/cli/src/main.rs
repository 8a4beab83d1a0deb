//! `dcliques`: build topologies and run decentralized SGD experiments from a
//! flat configuration file.

mod config;
mod experiment;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::ExperimentConfig;
use experiment::RunOptions;

/// Output directory override, takes precedence over the `output` key.
const OUT_ENV: &str = "DCLIQUES_OUT";

#[derive(Parser)]
#[command(name = "dcliques", version, about = "D-Cliques topologies and decentralized SGD simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the topology and mixing matrix, train, and write traces.
    Run {
        config: PathBuf,
        /// Build and validate without training.
        #[arg(long)]
        dry_run: bool,
        /// Omit the timestamp so repeated runs are byte-identical.
        #[arg(long)]
        deterministic: bool,
        /// Worker threads (0 lets rayon decide).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Build topologies for every sweep combination and report their statistics.
    Topo { config: PathBuf },
}

enum Failure {
    Config(String),
    Run(experiment::RunError),
}

fn load(path: &PathBuf) -> Result<ExperimentConfig, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    ExperimentConfig::parse(&text).map_err(|e| Failure::Config(e.to_string()))
}

fn out_override() -> Option<PathBuf> {
    std::env::var_os(OUT_ENV).filter(|v| !v.is_empty()).map(PathBuf::from)
}

fn execute(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run { config, dry_run, deterministic, threads } => {
            let cfg = load(&config)?;
            let opts = RunOptions { dry_run, deterministic, threads, output: out_override() };
            let dir = experiment::run(&cfg, &opts).map_err(Failure::Run)?;
            println!("wrote {}", dir.display());
        }
        Command::Topo { config } => {
            let cfg = load(&config)?;
            let (dir, rows) = experiment::topo(&cfg, out_override()).map_err(Failure::Run)?;
            for r in &rows {
                println!(
                    "n={:<6} {:<56} edges={:<7} avg_degree={:.2}",
                    r.nodes, r.topology, r.stats.edge_count, r.stats.average_degree
                );
            }
            println!("wrote {}", dir.join("topo_sweep.csv").display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            let (code, message) = match failure {
                Failure::Config(m) => (2, format!("config: {m}")),
                Failure::Run(e) => (1, e.to_string()),
            };
            eprintln!("error: {}", message.replace('\n', " "));
            ExitCode::from(code)
        }
    }
}
