//! Command-line harness for the `charpoly-core` estimators and checks.

pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use commands::{CommandError, Context};
use config::{parse_count, parse_list, Overrides, RunConfig};
use output::Table;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "charpoly", version, about = "Characteristic-polynomial correlators of Wigner matrices")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Monte Carlo estimate of F_2m for each n.
    Estimate,
    /// Normalized F_2m against the sine-kernel limit, per n.
    Converge {
        /// contour, mc, exact or config-sum.
        #[arg(long)]
        backend: Option<String>,
    },
    /// Run a verification suite.
    Check {
        #[arg(value_parser = commands::SUITES)]
        suite: String,
    },
    /// Closed-form quantities at the configured points.
    Theory,
    /// HCIZ ratio table for each n.
    HcizCheck,
}

#[derive(Clone, Copy, Debug, Default, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Args, Debug, Default)]
pub struct Common {
    /// TOML config, or a previous JSON/CSV output to replay.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Comma-separated matrix sizes.
    #[arg(long, global = true)]
    pub n: Option<String>,
    #[arg(long, global = true)]
    pub m: Option<usize>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub lambda0: Option<f64>,
    /// Comma-separated local offsets, 2m of them.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub xi: Option<String>,
    /// gaussian, rademacher, uniform or mixture.
    #[arg(long, global = true)]
    pub law: Option<String>,
    #[arg(long, global = true)]
    pub mu4: Option<f64>,
    /// Mixture weight on the outer atoms.
    #[arg(long = "mixture-p", global = true)]
    pub p: Option<f64>,
    /// Sample count; float notation such as 1e6 is accepted.
    #[arg(long, global = true, value_parser = parse_count)]
    pub samples: Option<u64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub streams: Option<usize>,
    /// Threads; results do not depend on it.
    #[arg(long, global = true, default_value_t = 1)]
    pub workers: usize,
    #[arg(long, global = true)]
    pub allow_large_n: bool,
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Command(#[from] CommandError),
    #[error("config error: {0}")]
    Flag(String),
    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Command(e) => e.exit_code(),
            RunError::Flag(_) => EXIT_CONFIG,
            RunError::Write { .. } => EXIT_CONFIG,
        }
    }
}

impl Common {
    fn overrides(&self) -> Result<Overrides, RunError> {
        let n = self
            .n
            .as_deref()
            .map(parse_list::<usize>)
            .transpose()
            .map_err(|e| RunError::Flag(format!("--n: {e}")))?;
        let xi = self
            .xi
            .as_deref()
            .map(parse_list::<f64>)
            .transpose()
            .map_err(|e| RunError::Flag(format!("--xi: {e}")))?;
        Ok(Overrides {
            n,
            m: self.m,
            lambda0: self.lambda0,
            xi,
            law: self.law.clone(),
            mu4: self.mu4,
            p: self.p,
            samples: self.samples,
            seed: self.seed,
            streams: self.streams,
            allow_large_n: self.allow_large_n,
            tol: self.tol,
            backend: None,
            trials: self.trials,
        })
    }
}

/// Resolves the config (file, then flags) and runs the command.
pub fn execute(cli: &Cli) -> Result<Table, RunError> {
    let mut config = match &cli.common.config {
        Some(path) => config::load(path).map_err(CommandError::from)?,
        None => RunConfig::default(),
    };
    let mut overrides = cli.common.overrides()?;
    if let Command::Converge { backend } = &cli.command {
        overrides.backend = backend.clone();
    }
    config.apply(&overrides);
    let config = config.resolve().map_err(CommandError::from)?;
    if cli.common.workers == 0 {
        return Err(RunError::Flag("--workers must be positive".into()));
    }
    let ctx = Context {
        config,
        workers: cli.common.workers,
    };
    let table = match &cli.command {
        Command::Estimate => commands::estimate(&ctx),
        Command::Converge { .. } => commands::converge(&ctx),
        Command::Check { suite } => commands::check(&ctx, suite),
        Command::Theory => commands::theory(&ctx),
        Command::HcizCheck => commands::hciz_check(&ctx),
    }?;
    Ok(table)
}

/// Runs the CLI and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let table = match execute(&cli) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("charpoly: {e}");
            return e.exit_code();
        }
    };
    let text = match cli.common.format {
        Format::Csv => table.to_csv(),
        Format::Json => table.to_json(),
    };
    match &cli.common.out {
        Some(path) => {
            if let Err(source) = std::fs::write(path, &text) {
                let e = RunError::Write {
                    path: path.display().to_string(),
                    source,
                };
                eprintln!("charpoly: {e}");
                return e.exit_code();
            }
        }
        None => print!("{text}"),
    }
    if let Some(passed) = table.passed {
        for row in &table.rows {
            if let (output::Cell::Str(item), Some(output::Cell::Bool(ok))) = (&row[0], row.get(3)) {
                eprintln!("{} {item}", if *ok { "PASS" } else { "FAIL" });
            }
        }
        if !passed {
            return EXIT_CHECK_FAILED;
        }
    }
    EXIT_OK
}
