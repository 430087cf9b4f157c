use std::path::PathBuf;
use std::process::ExitCode;

use asympt_cli::{run_batch, run_config, run_verify, Command, Overrides};
use clap::{Parser, Subcommand};

/// Certified asymptotic integration of x'' + f(t, x) = 0.
#[derive(Parser)]
#[command(name = "asympt", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// JSON run configuration
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// file listing configs, one per line
    #[arg(long, global = true, conflicts_with = "config")]
    batch: Option<PathBuf>,
    /// output directory; JSON goes to stdout without one
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// run a scheme whose criteria fail, marking the result uncertified
    #[arg(long, global = true)]
    force: bool,
    #[arg(long, global = true)]
    grid_n: Option<usize>,
    #[arg(long, global = true)]
    tmax: Option<f64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// evaluate every applicable criterion
    Check,
    /// solve by certified Picard iteration and verify the result
    Solve,
    /// integrate from initial data and count zero crossings
    Oscillate,
    /// build the radial sub/supersolution pair
    Pde,
    /// re-run verification on a saved solve.json
    Verify {
        report: PathBuf,
        /// RK cross-check tolerance
        #[arg(long, default_value_t = 1e-10)]
        rk_rtol: f64,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("ASYMPT_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let overrides = Overrides {
        out: cli.out.clone(),
        tol: cli.tol,
        force: cli.force,
        grid_n: cli.grid_n,
        tmax: cli.tmax,
    };
    let cmd = match cli.command {
        Cmd::Check => Command::Check,
        Cmd::Solve => Command::Solve,
        Cmd::Oscillate => Command::Oscillate,
        Cmd::Pde => Command::Pde,
        Cmd::Verify { report, rk_rtol } => {
            let status = run_verify(&report, Some(rk_rtol), cli.out.as_deref());
            return ExitCode::from(status.code() as u8);
        }
    };
    let status = match (&cli.config, &cli.batch) {
        (Some(path), _) => run_config(cmd, path, &overrides),
        (None, Some(batch)) => run_batch(cmd, batch, &overrides),
        (None, None) => {
            eprintln!("error: one of --config or --batch is required");
            asympt_cli::commands::Status::Error
        }
    };
    ExitCode::from(status.code() as u8)
}
