mod commands;
mod config;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::LawChoice;
use config::{load_config, sha256_hex};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Validation(Vec<String>),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] accelspread::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use accelspread::Error as E;
        match self {
            CliError::Core(E::SolverAbort { .. } | E::NonConvergence { .. } | E::NoSignChange { .. } | E::Stability(_)) => 2,
            _ => 1,
        }
    }
}

#[derive(Parser)]
#[command(name = "accelspread", version, about = "Nonlocal epidemic free-boundary laboratory")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one simulation and classify it.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `output.dir`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// One simulation and rate fit per kernel exponent.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        alphas: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit growth laws to a trajectory CSV.
    Rates {
        #[arg(long)]
        trajectory: PathBuf,
        #[arg(long, value_enum, default_value = "auto")]
        law: LawChoice,
        #[arg(long)]
        alpha: Option<f64>,
        /// `lo,hi`; defaults to the last half of the horizon.
        #[arg(long, value_delimiter = ',', num_args = 2)]
        window: Option<Vec<f64>>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Semi-wave speed and profiles.
    Semiwave {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sub-eigenfunction inequality check.
    VerifySubeig {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Residual checks (and optional search) for explicit envelopes.
    VerifyEnvelope {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// SVG of the fronts with a fitted law.
    Plot {
        #[arg(long)]
        trajectory: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "power")]
        law: LawChoice,
        #[arg(long)]
        alpha: Option<f64>,
    },
}

fn run(cli: Cli) -> Result<String, CliError> {
    let with_config = |path: &PathBuf, out: &Option<PathBuf>| -> Result<(config::RunConfig, PathBuf), CliError> {
        let cfg = load_config(path)?;
        let dir = out.clone().unwrap_or_else(|| cfg.output.dir.clone());
        Ok((cfg, dir))
    };
    let (name, dir, hash, result) = match &cli.cmd {
        Cmd::Simulate { config, out } => {
            let (cfg, dir) = with_config(config, out)?;
            let r = commands::simulate(&cfg, &dir)?;
            ("simulate", dir, cfg.hash, r)
        }
        Cmd::Sweep { config, alphas, out } => {
            let (cfg, dir) = with_config(config, out)?;
            let r = commands::sweep(&cfg, alphas, &dir)?;
            ("sweep", dir, cfg.hash, r)
        }
        Cmd::Rates { trajectory, law, alpha, window, out } => {
            let bytes = std::fs::read(trajectory).map_err(|e| CliError::Io(format!("{}: {e}", trajectory.display())))?;
            let w = window.as_ref().map(|w| (w[0], w[1]));
            let r = commands::rates(trajectory, *law, *alpha, w)?;
            ("rates", out.clone(), sha256_hex(&bytes), r)
        }
        Cmd::Semiwave { config, out } => {
            let (cfg, dir) = with_config(config, out)?;
            let r = commands::semiwave(&cfg, &dir)?;
            ("semiwave", dir, cfg.hash, r)
        }
        Cmd::VerifySubeig { config, out } => {
            let (cfg, dir) = with_config(config, out)?;
            let r = commands::verify_subeig(&cfg)?;
            ("verify-subeig", dir, cfg.hash, r)
        }
        Cmd::VerifyEnvelope { config, out } => {
            let (cfg, dir) = with_config(config, out)?;
            let r = commands::verify_envelope(&cfg, &dir)?;
            ("verify-envelope", dir, cfg.hash, r)
        }
        Cmd::Plot { trajectory, out, law, alpha } => {
            let traj = accelspread::simulator::Trajectory::read_csv_file(trajectory)?;
            let svg = commands::plot_svg(&traj, *law, *alpha, &trajectory.display().to_string())?;
            if let Some(p) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(p).map_err(|e| CliError::Io(e.to_string()))?;
            }
            std::fs::write(out, svg).map_err(|e| CliError::Io(format!("{}: {e}", out.display())))?;
            return Ok(out.display().to_string());
        }
    };
    let path = commands::write_report(&dir, name, &hash, &result)?;
    Ok(path.display().to_string())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(path) => {
            println!("{path}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            if let CliError::Core(accelspread::Error::NoSignChange { .. }) = e {
                eprintln!("hint: widen semiwave.c_bracket");
            }
            ExitCode::from(e.exit_code())
        }
    }
}
