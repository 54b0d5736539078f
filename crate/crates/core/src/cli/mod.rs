//! Command-line front end.
//!
//! ```text
//! exec-kernel <solve|verify|simulate|sweep> --config <path> [--out <dir>]
//!             [--format csv|json] [--seed N] [--cells N] [--paths N]
//!             [--trajectory <csv>] [--summary <json>] [--error-json]
//! ```
//!
//! Exit codes: 0 success or PASS, 1 invalid input, 2 numerical FAIL,
//! 3 internal error. `EXEC_KERNEL_LOG` sets the log level.

mod commands;
mod config;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::Parser;

pub use commands::{
    read_trajectory_csv, run, solve_problem, trajectory_csv, CliError, Command, Format, Options,
    Outcome, Solved, Status, CSV_HEADER,
};
pub use config::{
    parse_config, RunConfig, Schedule, Sweep, SweepParam, DEFAULT_CELLS, DEFAULT_PATHS,
    DEFAULT_SEED,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_FAIL: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "exec-kernel",
    version,
    about = "Optimal execution trajectories with transient impact"
)]
pub struct Args {
    #[arg(value_enum)]
    pub command: Command,
    /// Flat `key: value` configuration file.
    #[arg(long)]
    pub config: PathBuf,
    /// Directory for output artifacts.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub cells: Option<usize>,
    #[arg(long)]
    pub paths: Option<usize>,
    /// Trajectory CSV to verify or simulate.
    #[arg(long)]
    pub trajectory: Option<PathBuf>,
    /// Summary JSON holding the block trades of `--trajectory`.
    #[arg(long, requires = "trajectory")]
    pub summary: Option<PathBuf>,
    /// Print errors as JSON on standard output.
    #[arg(long)]
    pub error_json: bool,
}

fn load_config(args: &Args) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(&args.config).map_err(|source| CliError::Read {
        path: args.config.clone(),
        source,
    })?;
    let mut config = parse_config(&text)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(n) = args.cells {
        config.set_cells(n)?;
    }
    if let Some(n) = args.paths {
        config.set_paths(n)?;
    }
    Ok(config)
}

fn report_error(err: &CliError, as_json: bool) -> i32 {
    let code = err.exit_code();
    if as_json {
        let value = serde_json::json!({
            "status": "ERROR",
            "exit_code": code,
            "kind": err.kind(),
            "field": err.field(),
            "message": err.to_string(),
        });
        println!("{value}");
    } else {
        eprintln!("error: {err}");
    }
    code
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                EXIT_INVALID
            } else {
                EXIT_OK
            };
        }
    };
    let _ =
        env_logger::Builder::from_env(env_logger::Env::new().filter_or("EXEC_KERNEL_LOG", "warn"))
            .format_timestamp(None)
            .try_init();

    let outcome = load_config(&args).and_then(|config| {
        let options = Options {
            out: args.out.clone(),
            format: args.format,
            trajectory: args.trajectory.clone(),
            summary: args.summary.clone(),
        };
        run(args.command, &config, &options)
    });
    match outcome {
        Ok(o) => {
            print!("{}", o.stdout);
            match o.status {
                Status::Fail => EXIT_FAIL,
                Status::Pass | Status::Done => EXIT_OK,
            }
        }
        Err(e) => report_error(&e, args.error_json),
    }
}
