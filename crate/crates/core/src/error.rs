use thiserror::Error;

use crate::metrics::MetricError;
use crate::netlist::{FlattenError, ParseError};
use crate::senseamps::DesignError;
use crate::solver::SolverError;
use crate::variation::VariationError;

pub type Result<T> = std::result::Result<T, Error>;

/// Top-level error for operations that chain several stages.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Flatten(#[from] FlattenError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Design(#[from] DesignError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Variation(#[from] VariationError),
    #[error("{0}")]
    Invalid(String),
}
