use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use harq_sim::scenario_file::MAX_SEED;
use harq_sim::sweep::{run_sweep, write_sweep, SweepField};
use harq_sim::{explain, load_scenario, lower, run_file, split_values, trace_file, CliError, ScenarioFile};

/// Tick-exact HARQ round-trip simulator.
#[derive(Parser)]
#[command(name = "harq-sim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Source {
    /// Scenario TOML file.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Built-in scenario (`lab-trial`).
    #[arg(long)]
    preset: Option<String>,
    /// Overrides `run.seed`.
    #[arg(long)]
    seed: Option<u64>,
}

impl Source {
    fn load(&self) -> Result<ScenarioFile, CliError> {
        let mut f = load_scenario(self.scenario.as_deref(), self.preset.as_deref())?;
        if let Some(seed) = self.seed {
            if seed > MAX_SEED {
                return Err(CliError::BadValue {
                    what: "--seed".into(),
                    message: format!("must be at most {MAX_SEED}"),
                });
            }
            f.run.seed = seed;
        }
        Ok(f)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a scenario and write a TOML report.
    Run {
        #[command(flatten)]
        source: Source,
        /// Report path; stdout if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the CSV event trace here.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Omit the timestamp so reports are reproducible byte for byte.
        #[arg(long)]
        deterministic: bool,
    },
    /// Run one row per value of a scenario field and write a CSV table.
    Sweep {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        field: String,
        /// Comma-separated values.
        #[arg(long, allow_hyphen_values = true)]
        values: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the analytic timeline of one NACKed packet.
    Explain {
        #[command(flatten)]
        source: Source,
    },
    /// Check a scenario without running it.
    Validate {
        #[command(flatten)]
        source: Source,
    },
    /// Print the lab-trial scenario as TOML.
    PrintDefaults,
}

fn write_out(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::io(p, e)),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::io("<stdout>", e)),
    }
}

fn execute(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Run {
            source,
            out,
            trace,
            deterministic,
        } => {
            let file = source.load()?;
            let result = run_file(&file, deterministic)?;
            if let Some(p) = &trace {
                let f = File::create(p).map_err(|e| CliError::io(p, e))?;
                trace_file::write_trace(BufWriter::new(f), &result.trace)
                    .map_err(|e| CliError::io(p, io::Error::other(e)))?;
            }
            write_out(out.as_deref(), &result.report)
        }
        Command::Sweep {
            source,
            field,
            values,
            out,
        } => {
            let field = SweepField::parse(&field)?;
            let file = source.load()?;
            let rows = run_sweep(&file, field, &split_values(&values))?;
            let mut buf = Vec::new();
            write_sweep(&mut buf, field, &rows).expect("in-memory write");
            write_out(out.as_deref(), std::str::from_utf8(&buf).expect("utf-8 csv"))
        }
        Command::Explain { source } => {
            let (_, resolved) = lower(&source.load()?)?;
            write_out(None, &explain::explain(&resolved)?)
        }
        Command::Validate { source } => {
            lower(&source.load()?)?;
            write_out(None, "ok\n")
        }
        Command::PrintDefaults => write_out(None, &ScenarioFile::default().to_toml()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
