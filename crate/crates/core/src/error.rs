use std::io;
use std::path::PathBuf;

use thiserror::Error;

use crate::analysis::AnalysisError;
use crate::dynamics::DynamicsError;
use crate::game::GameError;
use crate::market::MarketError;
use crate::matching::MatchingError;
use crate::payoffs::PayoffError;
use crate::voting::VotingError;

/// Top-level error for scenario runs; module failures keep their module name.
#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot access {}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("parse error in {}: {message}", path.display())]
    Parse { path: PathBuf, message: String },
    #[error("scenario: {0}")]
    Scenario(String),
    #[error("market: {0}")]
    Market(#[from] MarketError),
    #[error("payoffs: {0}")]
    Payoffs(#[from] PayoffError),
    #[error("matching: {0}")]
    Matching(#[from] MatchingError),
    #[error("game: {0}")]
    Game(#[from] GameError),
    #[error("voting: {0}")]
    Voting(#[from] VotingError),
    #[error("dynamics: {0}")]
    Dynamics(#[from] DynamicsError),
    #[error("analysis: {0}")]
    Analysis(#[from] AnalysisError),
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
