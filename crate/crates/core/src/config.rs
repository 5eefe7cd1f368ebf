//! Run configuration and command execution for the CLI.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rayon::prelude::*;

use crate::cloner::{fidelity_curve, symmetric_solution, uniform_grid};
use crate::error::{Error, Result};
use crate::info::{table_sweep, AttackKind, TABLE_DIMENSIONS};
use crate::output::{render, CurveRow, Format, SymmetricRow};
use crate::qudit::Dimension;
use crate::verify::{self, Suite, VerifyOptions};

pub const DEFAULT_POINTS: usize = 101;
pub const DEFAULT_SEED: u64 = 42;

/// Inclusive range of `g`, written `N` or `A..B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GRange {
    pub lo: usize,
    pub hi: usize,
}

impl GRange {
    pub fn single(g: usize) -> Self {
        GRange { lo: g, hi: g }
    }

    pub fn iter(self) -> std::ops::RangeInclusive<usize> {
        self.lo..=self.hi
    }

    fn check(self, dim: Dimension) -> Result<()> {
        if self.lo < 1 || self.lo > self.hi || self.hi > dim.get() {
            return Err(Error::out_of_range("g", self, format!("1 <= g <= {}", dim.get())));
        }
        Ok(())
    }
}

impl FromStr for GRange {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::out_of_range("g", s, "N or A..B");
        let num = |t: &str| t.trim().parse::<usize>().map_err(|_| bad());
        match s.split_once("..") {
            Some((a, b)) => Ok(GRange {
                lo: num(a)?,
                hi: num(b.strip_prefix('=').unwrap_or(b))?,
            }),
            None => num(s).map(GRange::single),
        }
    }
}

impl fmt::Display for GRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.lo == self.hi {
            write!(f, "{}", self.lo)
        } else {
            write!(f, "{}..{}", self.lo, self.hi)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Curve { d: Dimension, g: GRange, points: usize },
    Table { kind: AttackKind },
    Symmetric { d: Option<Dimension>, g: Option<GRange> },
    Verify { only: Vec<Suite>, d: Option<Dimension> },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Curve { .. } => "curve",
            Command::Table { .. } => "table",
            Command::Symmetric { .. } => "symmetric",
            Command::Verify { .. } => "verify",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub format: Format,
    /// `None` writes to stdout.
    pub output: Option<PathBuf>,
    pub seed: u64,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        RunConfig {
            command,
            format: Format::Csv,
            output: None,
            seed: DEFAULT_SEED,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match &self.command {
            Command::Curve { d, g, points } => {
                g.check(*d)?;
                if *points < 2 {
                    return Err(Error::out_of_range("points", points, ">= 2"));
                }
            }
            Command::Symmetric { d, g } => match (d, g) {
                (Some(d), Some(g)) => g.check(*d)?,
                (None, Some(_)) => return Err(Error::out_of_range("g", "given", "requires --d")),
                _ => {}
            },
            Command::Table { .. } | Command::Verify { .. } => {}
        }
        Ok(())
    }
}

/// Rendered output and whether the command succeeded.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub text: String,
    pub success: bool,
}

pub fn execute(cfg: &RunConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let name = cfg.command.name();
    let ok = |text| Ok(RunOutput { text, success: true });
    match &cfg.command {
        Command::Curve { d, g, points } => {
            let grid = uniform_grid(*d, *points);
            let per_g = g
                .iter()
                .collect::<Vec<_>>()
                .par_iter()
                .map(|&g| {
                    fidelity_curve(*d, g, &grid)
                        .map(|pts| pts.iter().map(|p| CurveRow::new(d.get(), g, p)).collect::<Vec<_>>())
                })
                .collect::<Result<Vec<_>>>()?;
            let rows: Vec<CurveRow> = per_g.into_iter().flatten().collect();
            ok(render(cfg.format, name, cfg.seed, &rows)?)
        }
        Command::Table { kind } => ok(render(cfg.format, name, cfg.seed, &table_sweep(*kind)?)?),
        Command::Symmetric { d, g } => {
            let dims: Vec<Dimension> = match d {
                Some(d) => vec![*d],
                None => TABLE_DIMENSIONS
                    .iter()
                    .map(|&d| Dimension::new(d).expect("prime"))
                    .collect(),
            };
            let rows = dims
                .iter()
                .flat_map(|&dim| {
                    let range = g.unwrap_or(GRange { lo: 1, hi: dim.get() });
                    range
                        .iter()
                        .map(move |g| symmetric_solution(dim, g).map(|s| SymmetricRow::from(&s)))
                })
                .collect::<Result<Vec<_>>>()?;
            ok(render(cfg.format, name, cfg.seed, &rows)?)
        }
        Command::Verify { only, d } => {
            let report = verify::run(&VerifyOptions {
                only: only.clone(),
                d: *d,
                seed: cfg.seed,
            });
            Ok(RunOutput {
                text: render(cfg.format, name, cfg.seed, &report.suites)?,
                success: report.passed(),
            })
        }
    }
}
