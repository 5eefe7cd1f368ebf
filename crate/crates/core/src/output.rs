//! Plot-ready CSV and JSON renderers. Output is a pure function of the
//! records, so reruns are byte-identical.

use serde::Serialize;

use crate::cloner::{CurvePoint, SymmetricSolution};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurveRow {
    pub d: usize,
    pub g: usize,
    pub f_bob: f64,
    pub f_eve: f64,
    pub v: f64,
    pub mirrored: bool,
}

impl CurveRow {
    pub fn new(d: usize, g: usize, p: &CurvePoint) -> Self {
        CurveRow {
            d,
            g,
            f_bob: p.f_bob,
            f_eve: p.f_eve,
            v: p.v,
            mirrored: p.mirrored,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SymmetricRow {
    pub d: usize,
    pub g: usize,
    pub fidelity: f64,
    pub v: f64,
    /// Empty for `g = d`, where the larger eigenvalue is unbounded.
    pub lambda_plus: Option<f64>,
    pub lambda_minus: f64,
    pub p_dg: f64,
    pub residual: f64,
}

impl From<&SymmetricSolution> for SymmetricRow {
    fn from(s: &SymmetricSolution) -> Self {
        SymmetricRow {
            d: s.d,
            g: s.g,
            fidelity: s.fidelity,
            v: s.v,
            lambda_plus: s.lambda_plus.is_finite().then_some(s.lambda_plus),
            lambda_minus: s.lambda_minus,
            p_dg: s.p_dg,
            residual: s.residual,
        }
    }
}

#[derive(Serialize)]
struct Document<'a, T> {
    command: &'a str,
    seed: u64,
    records: &'a [T],
}

/// CSV with a header row and LF line endings.
pub fn to_csv<T: Serialize>(records: &[T]) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    for r in records {
        w.serialize(r).map_err(|e| Error::Numerical(format!("csv: {e}")))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Numerical(format!("csv: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::Numerical(format!("csv: {e}")))
}

/// `{"command", "seed", "records"}` as pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(command: &str, seed: u64, records: &[T]) -> Result<String> {
    let doc = Document { command, seed, records };
    let mut s = serde_json::to_string_pretty(&doc).map_err(|e| Error::Numerical(format!("json: {e}")))?;
    s.push('\n');
    Ok(s)
}

pub fn render<T: Serialize>(format: Format, command: &str, seed: u64, records: &[T]) -> Result<String> {
    match format {
        Format::Csv => to_csv(records),
        Format::Json => to_json(command, seed, records),
    }
}
