pub mod commands;
pub mod config;

use std::path::{Path, PathBuf};

use commands::{Emitted, Failure, Status};
use config::RunConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Check,
    Solve,
    Oscillate,
    Pde,
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub tol: Option<f64>,
    pub force: bool,
    pub grid_n: Option<usize>,
    pub tmax: Option<f64>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut RunConfig) {
        if let Some(out) = &self.out {
            cfg.output.dir = Some(out.clone());
        }
        if let Some(tol) = self.tol {
            cfg.tolerances.tol = tol;
        }
        if let Some(n) = self.grid_n {
            cfg.grid.n = Some(n);
        }
        if let Some(t) = self.tmax {
            cfg.grid.t_max = Some(t);
        }
    }
}

pub fn execute(cmd: Command, cfg: &RunConfig, force: bool) -> Result<Emitted, Failure> {
    match cmd {
        Command::Check => commands::cmd_check(cfg),
        Command::Solve => commands::cmd_solve(cfg, force),
        Command::Oscillate => commands::cmd_oscillate(cfg),
        Command::Pde => commands::cmd_pde(cfg),
    }
}

/// Writes `<name>.json` and the CSV files into `dir`, or the JSON to stdout
/// when there is no directory.
pub fn emit(out: &Emitted, dir: Option<&Path>) -> std::io::Result<()> {
    match dir {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            let path = dir.join(format!("{}.json", out.name));
            std::fs::write(&path, &out.json)?;
            log::info!("wrote {}", path.display());
            for (name, body) in &out.files {
                let path = dir.join(name);
                std::fs::write(&path, body)?;
                log::info!("wrote {}", path.display());
            }
        }
        None => {
            print!("{}", out.json);
            if !out.files.is_empty() {
                log::warn!("no output directory; CSV files not written");
            }
        }
    }
    Ok(())
}

fn report(result: Result<Emitted, Failure>, dir: Option<&Path>) -> Status {
    match result {
        Ok(out) => match emit(&out, dir) {
            Ok(()) => out.status,
            Err(e) => {
                eprintln!("error: writing output: {e}");
                Status::Error
            }
        },
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.status
        }
    }
}

/// Runs one config file.
pub fn run_config(cmd: Command, path: &Path, o: &Overrides) -> Status {
    let mut cfg = match RunConfig::load(path) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return Status::Error;
        }
    };
    o.apply(&mut cfg);
    let dir = cfg.output.dir.clone();
    report(execute(cmd, &cfg, o.force), dir.as_deref())
}

/// Runs every config listed in `batch`, one path per line, blank lines and
/// `#` comments skipped, relative paths resolved against the batch file.
/// With an output directory each run writes to `<out>/<config stem>/`.
/// The returned status is the worst one.
pub fn run_batch(cmd: Command, batch: &Path, o: &Overrides) -> Status {
    let text = match std::fs::read_to_string(batch) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {}: {e}", batch.display());
            return Status::Error;
        }
    };
    let base = batch.parent().unwrap_or(Path::new("."));
    let mut worst = Status::Ok;
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
        let path = base.join(line);
        let mut each = o.clone();
        if let Some(out) = &o.out {
            let stem = path.file_stem().map(|s| s.to_os_string()).unwrap_or_default();
            each.out = Some(out.join(stem));
        }
        let status = run_config(cmd, &path, &each);
        log::info!("{}: exit {}", path.display(), status.code());
        worst = worst.max(status);
    }
    worst
}

/// Re-verifies a saved solve report.
pub fn run_verify(saved: &Path, rk_rtol: Option<f64>, out: Option<&Path>) -> Status {
    let text = match std::fs::read_to_string(saved) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {}: {e}", saved.display());
            return Status::Error;
        }
    };
    report(commands::cmd_verify(&text, rk_rtol), out)
}
