use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hybridsim::config::ExperimentConfig;
use hybridsim::experiment::{self, CsvAppender};
use hybridsim::{trace, Error, Result};

/// Hybrid DRAM-PCM main memory simulator.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML file overriding the shipped defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file; defaults depend on the command.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides experiment.seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and append its row to the result CSV.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Also write the migration log (output.migration_log).
        #[arg(long)]
        migration_log: bool,
    },
    /// Run one experiment per value of a parameter.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        axis: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        values: Vec<String>,
    },
    /// Write the configured workload as a text trace.
    GenTrace {
        #[command(flatten)]
        common: Common,
    },
    /// Per-row access and row buffer miss counts of the configured workload.
    ProfileTrace {
        #[command(flatten)]
        common: Common,
    },
}

fn load(common: &Common) -> Result<ExperimentConfig> {
    let cfg = match &common.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::defaults(),
    };
    Ok(match common.seed {
        Some(seed) => cfg.with_seed(seed),
        None => cfg,
    })
}

fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::io(p, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Simulate {
            common,
            migration_log,
        } => {
            let mut cfg = load(&common)?;
            cfg.output.log_migrations |= migration_log;
            let csv_path = common.out.clone().unwrap_or_else(|| cfg.output.csv.clone());
            let outcome = experiment::run_experiment(&cfg)?;
            CsvAppender::open(&csv_path)?.append(&outcome.row)?;
            if cfg.output.log_migrations {
                experiment::write_migration_log(&cfg.output.migration_log, outcome.migration_log())?;
            }
            let json = serde_json::to_string_pretty(&outcome.row.report).expect("report serializes");
            println!("{json}");
        }
        Command::Sweep {
            common,
            axis,
            values,
        } => {
            let cfg = load(&common)?;
            let csv_path = common.out.clone().unwrap_or_else(|| cfg.output.csv.clone());
            let outcomes = experiment::run_sweep(&cfg, &axis, &values)?;
            let appender = CsvAppender::open(&csv_path)?;
            for o in &outcomes {
                appender.append(&o.row)?;
                println!("{}", o.row.fields().join(","));
            }
        }
        Command::GenTrace { common } => {
            let cfg = load(&common)?;
            let traces = experiment::load_traces(&cfg)?;
            write_out(common.out.as_deref(), &trace::write_trace(traces.iter().flatten()))?;
        }
        Command::ProfileTrace { common } => {
            let cfg = load(&common)?;
            let traces = experiment::load_traces(&cfg)?;
            let mut w = csv::Writer::from_writer(Vec::new());
            let csv_err = |e: csv::Error| Error::io("<profile>", e.into());
            w.write_record(["core", "row", "accesses", "row_misses"])
                .map_err(csv_err)?;
            for (core, t) in traces.iter().enumerate() {
                for (row, p) in trace::trace_rbl_profile(t, &cfg.topology) {
                    w.write_record([
                        core.to_string(),
                        row.to_string(),
                        p.accesses.to_string(),
                        p.row_misses.to_string(),
                    ])
                    .map_err(csv_err)?;
                }
            }
            let bytes = w.into_inner().map_err(|e| csv_err(e.into_error().into()))?;
            write_out(common.out.as_deref(), &String::from_utf8_lossy(&bytes))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    // usage errors are validation failures; status 2 is reserved for I/O
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
