//! Config-driven front end for the `summax` engines.
//!
//! A run reads one TOML file (see [`config::RunConfig`]), optionally
//! overridden by command-line flags, and writes a CSV or JSON artifact.

pub mod config;
pub mod run;

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::Parser;

pub use config::{parse_config, ConfigError, Format, RunConfig, Task, VariableSpec};
pub use run::{run, Check, Output};

#[derive(Debug, Clone, Parser)]
#[command(name = "summax", version, about = "Joint law of the sum and maximum of independent variables")]
pub struct Args {
    /// TOML run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Sets both grid sizes.
    #[arg(long)]
    pub grid_points: Option<usize>,
    /// Tail mass ignored when sizing grids.
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub quiet: bool,
}

/// How a completed run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    ValidationFailed,
}

impl Status {
    pub fn exit_code(self) -> u8 {
        match self {
            Status::Ok => 0,
            Status::ValidationFailed => 1,
        }
    }
}

/// Exit code for an error: 2 for configuration problems, 3 otherwise.
pub fn error_exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<ConfigError>().is_some() {
        2
    } else {
        3
    }
}

/// Reads the config and applies the flag overrides.
pub fn load(args: &Args) -> Result<RunConfig> {
    let text = std::fs::read_to_string(&args.config).map_err(|source| ConfigError::Read {
        path: args.config.display().to_string(),
        source,
    })?;
    let mut cfg = parse_config(&text)?;
    if let Some(p) = &args.output {
        cfg.output.path = Some(p.display().to_string());
    }
    if let Some(f) = args.format {
        cfg.output.format = Some(f);
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(g) = args.grid_points {
        cfg.grid.n_y = g;
        cfg.grid.n_z = g;
    }
    if let Some(e) = args.epsilon {
        cfg.epsilon = e;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Output format: explicit setting, then the file extension, then JSON.
pub fn resolve_format(cfg: &RunConfig) -> Format {
    if let Some(f) = cfg.output.format {
        return f;
    }
    match cfg.output.path.as_deref().map(Path::new).and_then(|p| p.extension()) {
        Some(ext) if ext.eq_ignore_ascii_case("csv") => Format::Csv,
        _ => Format::Json,
    }
}

/// Loads, runs and writes the artifact.
pub fn execute(args: &Args) -> Result<Status> {
    let cfg = load(args)?;
    let output = run(&cfg)?;
    let text = output.render(resolve_format(&cfg))?;
    match &cfg.output.path {
        Some(path) => {
            std::fs::write(path, &text).with_context(|| format!("writing {path}"))?;
            if !args.quiet {
                if let Some(s) = output.summary() {
                    print!("{s}");
                }
            }
        }
        None => {
            print!("{text}");
            if !args.quiet {
                if let Some(s) = output.summary() {
                    eprint!("{s}");
                }
            }
        }
    }
    Ok(if output.passed() {
        Status::Ok
    } else {
        Status::ValidationFailed
    })
}
