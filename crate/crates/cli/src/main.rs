use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use vsamem::config::{ConfigError, ExperimentConfig, ExperimentKind};
use vsamem::runner;

#[derive(Parser)]
#[command(name = "vsamem", version, about = "Working-memory engine and theory calculator for vector-symbolic sequence indexing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct CommonArgs {
    /// Experiment config file (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Master seed; overrides the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for CSV files (default: print to stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo simulation: accuracy or SNR per lookback.
    Simulate(CommonArgs),
    /// Evaluate the theory for the configured network and task.
    Theory(CommonArgs),
    /// Sweep a parameter and tabulate theory values.
    Sweep(CommonArgs),
    /// Maximize an objective over one parameter.
    Optimize(CommonArgs),
    /// Fit a Wiener-filter readout and score it against the naive one.
    Mmse(CommonArgs),
    /// Accumulate text n-gram statistics in superposition and read back.
    Ngram(CommonArgs),
    /// Paired simulation-vs-theory table with z-scores.
    Compare(CommonArgs),
}

impl Command {
    fn args(&self) -> &CommonArgs {
        match self {
            Command::Simulate(a)
            | Command::Theory(a)
            | Command::Sweep(a)
            | Command::Optimize(a)
            | Command::Mmse(a)
            | Command::Ngram(a)
            | Command::Compare(a) => a,
        }
    }

    fn kind(&self) -> ExperimentKind {
        match self {
            Command::Simulate(_) => ExperimentKind::Simulate,
            Command::Theory(_) => ExperimentKind::Theory,
            Command::Sweep(_) => ExperimentKind::Sweep,
            Command::Optimize(_) => ExperimentKind::Optimize,
            Command::Mmse(_) => ExperimentKind::Mmse,
            Command::Ngram(_) => ExperimentKind::Ngram,
            Command::Compare(_) => ExperimentKind::Compare,
        }
    }
}

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let args = cli.command.args();

    if let Some(threads) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("vsamem: could not set thread count: {e}");
        }
    }

    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("vsamem: cannot read {}: {e}", args.config.display());
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let cfg = match ExperimentConfig::parse(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("vsamem: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    if cfg.kind != cli.command.kind() {
        eprintln!(
            "vsamem: config kind {:?} does not match the subcommand",
            cfg.kind
        );
        return ExitCode::from(EXIT_CONFIG);
    }

    match runner::run(&cfg, args.seed) {
        Ok(output) => {
            for (stem, table) in &output.tables {
                match &args.out {
                    Some(dir) => {
                        let path = dir.join(format!("{stem}.csv"));
                        if let Err(e) = table.write_to(&path) {
                            eprintln!("vsamem: writing {}: {e}", path.display());
                            return ExitCode::from(EXIT_NUMERICAL);
                        }
                        eprintln!("wrote {}", path.display());
                    }
                    None => print!("{}", table.render()),
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            if e.downcast_ref::<ConfigError>().is_some() {
                eprintln!("vsamem: {e}");
                ExitCode::from(EXIT_CONFIG)
            } else {
                eprintln!("vsamem: {e:#}");
                ExitCode::from(EXIT_NUMERICAL)
            }
        }
    }
}
