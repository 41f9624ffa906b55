use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use lrcap::distance::{VerifyOptions, DEFAULT_RESTARTS};
use lrcap_cli::commands::{self, Format, SweepParam, EXIT_USAGE};
use lrcap_cli::load_config;

#[derive(Parser)]
#[command(name = "lrcap", version, about = "Capacity bounds for spin-network channels and their exact verification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Network configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct Checks {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Random starts for the induced-distance ascent.
    #[arg(long, default_value_t = DEFAULT_RESTARTS)]
    restarts: usize,
    #[arg(long, default_value_t = 1)]
    parallelism: usize,
    /// Multiplies the envelope before checking; for testing that violations are caught.
    #[arg(long, default_value_t = 1.0, hide = true)]
    epsilon_scale: f64,
}

impl Checks {
    fn options(&self) -> VerifyOptions {
        VerifyOptions { restarts: self.restarts, seed: self.seed, epsilon_scale: self.epsilon_scale }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Capacity bounds over the time grid.
    Bound {
        #[command(flatten)]
        common: Common,
    },
    /// Measured channel distances against their analytic bounds over the time grid.
    Verify {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        checks: Checks,
    },
    /// Verification over times or over chain lengths.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        checks: Checks,
        #[arg(long, value_enum, default_value = "time")]
        param: SweepParam,
    },
}

fn run(cli: Cli) -> Result<i32, lrcap_cli::CliError> {
    match cli.command {
        Command::Bound { common } => {
            let cfg = load_config(&common.config)?;
            commands::cmd_bound(&cfg, common.out.as_deref(), common.format)
        }
        Command::Verify { common, checks } => {
            let cfg = load_config(&common.config)?;
            commands::cmd_verify(&cfg, common.out.as_deref(), &checks.options(), checks.parallelism, common.format)
        }
        Command::Sweep { common, checks, param } => {
            let cfg = load_config(&common.config)?;
            commands::cmd_sweep(&cfg, param, common.out.as_deref(), &checks.options(), checks.parallelism, common.format)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE as u8)
        }
    }
}
