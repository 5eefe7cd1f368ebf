use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qudit_qkd::config::{execute, Command, GRange, RunConfig, DEFAULT_POINTS, DEFAULT_SEED};
use qudit_qkd::output::Format;
use qudit_qkd::verify::Suite;
use qudit_qkd::{AttackKind, Dimension, Error};

#[derive(Parser)]
#[command(
    name = "qudit-qkd",
    version,
    about = "Optimal cloning attacks on (g+1)-basis qudit QKD"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// Output format.
    #[arg(long, value_enum, default_value = "csv", global = true)]
    format: Format,

    /// Output file (default: stdout).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Seed for randomized checks.
    #[arg(long, default_value_t = DEFAULT_SEED, global = true)]
    seed: u64,
}

#[derive(Subcommand)]
enum Cmd {
    /// Optimal F_E and v as functions of F_B.
    Curve {
        #[arg(long)]
        d: usize,
        /// Single value or inclusive range, e.g. 1..5.
        #[arg(long)]
        g: GRange,
        #[arg(long, default_value_t = DEFAULT_POINTS)]
        points: usize,
    },
    /// Critical disturbances for d in {2, 3, 5, 7}, g = 1..d.
    Table {
        #[arg(long, value_enum)]
        kind: AttackKind,
    },
    /// Symmetric-cloner fidelities.
    Symmetric {
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        g: Option<GRange>,
    },
    /// Run the property suites.
    Verify {
        #[arg(long, value_enum, value_delimiter = ',')]
        only: Vec<Suite>,
        #[arg(long)]
        d: Option<usize>,
    },
}

fn build(cli: Cli) -> Result<RunConfig, Error> {
    let command = match cli.command {
        Cmd::Curve { d, g, points } => Command::Curve {
            d: Dimension::new(d)?,
            g,
            points,
        },
        Cmd::Table { kind } => Command::Table { kind },
        Cmd::Symmetric { d, g } => Command::Symmetric {
            d: d.map(Dimension::new).transpose()?,
            g,
        },
        Cmd::Verify { only, d } => Command::Verify {
            only,
            d: d.map(Dimension::new).transpose()?,
        },
    };
    let cfg = RunConfig {
        command,
        format: cli.format,
        output: cli.out,
        seed: cli.seed,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cfg = match build(Cli::parse()) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let out = match execute(&cfg) {
        Ok(out) => out,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let written = match &cfg.output {
        Some(path) => std::fs::write(path, &out.text).map_err(|e| format!("{}: {e}", path.display())),
        None => {
            print!("{}", out.text);
            Ok(())
        }
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    if out.success {
        ExitCode::SUCCESS
    } else {
        eprintln!("error: verification failed");
        ExitCode::from(1)
    }
}
