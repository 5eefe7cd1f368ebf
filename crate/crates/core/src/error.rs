use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension {0} is not supported: d must be a prime >= 2")]
    InvalidDimension(usize),

    #[error("{what} = {value} is out of range ({expected})")]
    OutOfRange {
        what: &'static str,
        value: String,
        expected: String,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("{what} is not normalized: squared norm {norm_sq}")]
    NotNormalized { what: &'static str, norm_sq: f64 },

    #[error("infeasible cloner: radicand of {radicand} is {value:e}")]
    Infeasible { radicand: &'static str, value: f64 },

    #[error("no sign change of the key rate for d={d}, g={g} on the scanned bracket")]
    NoSignChange { d: usize, g: usize },

    #[error("solver failed for cells {0:?}")]
    CellFailures(Vec<(usize, usize)>),

    #[error("numerical check failed: {0}")]
    Numerical(String),
}

impl Error {
    pub(crate) fn out_of_range(what: &'static str, value: impl ToString, expected: impl ToString) -> Self {
        Error::OutOfRange {
            what,
            value: value.to_string(),
            expected: expected.to_string(),
        }
    }
}
