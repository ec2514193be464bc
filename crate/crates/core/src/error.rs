use std::path::PathBuf;

use thiserror::Error;

/// Problems with scenario, radio, trajectory or contention configuration.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("cannot read {path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid obstacle: {0}")]
    InvalidObstacle(String),
    #[error("obstacle #{index}: {reason}")]
    Obstacle { index: usize, reason: String },
    #[error("node {id}: {reason}")]
    Node { id: u32, reason: String },
    #[error("invalid field: {0}")]
    Field(String),
    #[error("invalid radio config: {0}")]
    Radio(String),
    #[error("invalid trajectory: {0}")]
    Trajectory(String),
    #[error("invalid contention config: {0}")]
    Contention(String),
    #[error("invalid experiment: {0}")]
    Experiment(String),
}

/// A malformed annulus constraint.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConstraintError {
    #[error("lower bound {0} must be finite and non-negative")]
    NegativeLower(f64),
    #[error("empty annulus: lower {lower} >= upper {upper}")]
    EmptyAnnulus { lower: f64, upper: f64 },
    #[error("constraint without upper bound needs a positive lower bound")]
    Vacuous,
    #[error("non-finite center")]
    NonFiniteCenter,
    #[error("relay range must be positive, got {0}")]
    RelayRange(f64),
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("not localizable: no constraints")]
    NotLocalizable,
}

/// Crate-level error for the end-to-end pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Constraint(#[from] ConstraintError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
