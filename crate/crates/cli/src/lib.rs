//! Library side of the `agler-lab` command-line tool: config parsing, command
//! dispatch and report writing.
//!
//! Exit codes: 0 success / feasible / verdict true, 1 infeasible / verdict
//! false, 2 input error, 3 indeterminate.

pub mod config;
pub mod report;

use std::ffi::OsString;
use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;

use clap::Parser;

pub use config::{AnalysisConfig, Command, ConfigError, Overrides, Prepared};
pub use report::{run, Outcome, RunError, EXIT_INDETERMINATE, EXIT_INPUT, EXIT_NEGATIVE, EXIT_OK};

#[derive(Debug, Parser)]
#[command(
    name = "agler-lab",
    version,
    about = "Interpolation diagnostics for algebras generated by test functions"
)]
pub struct Cli {
    /// analyze | pick | grammian | carleson | realize | verify-theorem
    pub command: Command,
    /// Path to the JSON config, or `-` for stdin.
    #[arg(long)]
    pub config: String,
    /// Directory for `<command>.json` and `<command>.csv` (default: JSON to stdout).
    #[arg(long)]
    pub out: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of sampled admissible kernels.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Grid size of the G2 test-function family.
    #[arg(long)]
    pub grid: Option<usize>,
}

impl Cli {
    fn overrides(&self) -> Overrides {
        Overrides {
            command: Some(self.command),
            out: self.out.clone(),
            seed: self.seed,
            samples: self.samples,
            grid: self.grid,
        }
    }
}

fn read_config(path: &str) -> Result<String, ConfigError> {
    if path == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s)?;
        Ok(s)
    } else {
        Ok(fs::read_to_string(path)?)
    }
}

/// Parses, runs and writes the reports; returns the process exit code.
pub fn execute(cli: &Cli) -> i32 {
    match try_execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("agler-lab: {e}");
            e.exit_code()
        }
    }
}

fn try_execute(cli: &Cli) -> Result<i32, RunError> {
    let text = read_config(&cli.config)?;
    let prepared = AnalysisConfig::from_json(&text)?
        .apply(&cli.overrides())?
        .prepare()?;
    let outcome = run(&prepared)?;
    write_outcome(&outcome, prepared.config.output.dir.as_deref()).map_err(ConfigError::Io)?;
    Ok(outcome.exit_code)
}

/// Writes `<dir>/<command>.json` (and `.csv`), or the JSON to stdout.
pub fn write_outcome(outcome: &Outcome, dir: Option<&str>) -> io::Result<()> {
    match dir {
        Some(d) => {
            let d = Path::new(d);
            fs::create_dir_all(d)?;
            let stem = outcome.command.name();
            fs::write(d.join(format!("{stem}.json")), &outcome.json)?;
            if let Some(csv) = &outcome.csv {
                fs::write(d.join(format!("{stem}.csv")), csv)?;
            }
            Ok(())
        }
        None => io::stdout().write_all(outcome.json.as_bytes()),
    }
}

/// Entry point shared by the binary and tests.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(&cli),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                EXIT_INPUT
            } else {
                EXIT_OK
            }
        }
    }
}
