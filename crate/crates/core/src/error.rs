use thiserror::Error;

use crate::attribution::CallStats;
use crate::feature::FeatureId;

#[derive(Debug, Error)]
pub enum GameError {
    #[error("feature set must contain at least one feature")]
    EmptyFeatureSet,
    #[error("duplicate feature id {0}")]
    DuplicateId(FeatureId),
    #[error("duplicate feature label {0:?}")]
    DuplicateLabel(String),
    #[error("feature {0} has an empty label")]
    EmptyLabel(FeatureId),
    #[error("coalition references unknown feature {0}")]
    UnknownFeature(FeatureId),
    #[error("malformed coalition key {0:?}")]
    BadKey(String),
    #[error("invalid game fixture: {0}")]
    Fixture(String),
    #[error("noise standard deviation must be finite and non-negative, got {0}")]
    BadNoise(f64),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Failure of a single payoff evaluation.
#[derive(Debug, Error)]
pub enum PayoffError {
    #[error("payoff for coalition {key} is not finite ({value})")]
    NonFinite { key: String, value: f64 },
    #[error("sample count must be at least 1")]
    NoSamples,
    #[error("inference failed: {0}")]
    Inference(#[source] Box<dyn std::error::Error + Send + Sync>),
}

impl PayoffError {
    pub fn inference<E>(err: E) -> Self
    where
        E: std::error::Error + Send + Sync + 'static,
    {
        PayoffError::Inference(Box::new(err))
    }
}

#[derive(Debug, Error)]
pub enum AttributionError {
    #[error("{n} features exceeds the exhaustive limit of {limit}")]
    FeatureLimitExceeded { n: usize, limit: usize },
    #[error("invalid window size {w} for {n} features (need 1 <= w <= n)")]
    InvalidWindow { w: usize, n: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("the permutation oracle requires a deterministic payoff source")]
    NonDeterministicSource,
    #[error("payoff evaluation failed after {} inference calls: {source}", .stats.inference_calls)]
    Payoff {
        #[source]
        source: PayoffError,
        stats: CallStats,
    },
}

#[derive(Debug, Error)]
pub enum AuditError {
    #[error("efficiency is undefined against a non-deterministic payoff source")]
    StochasticSource,
    #[error("{n} features exceeds the audit limit of {limit}")]
    FeatureLimitExceeded { n: usize, limit: usize },
    #[error("no games supplied to the compliance matrix")]
    NoGames,
    #[error("attribution result does not match the feature set")]
    ResultMismatch,
    #[error(transparent)]
    Attribution(#[from] AttributionError),
    #[error(transparent)]
    Payoff(#[from] PayoffError),
    #[error(transparent)]
    Game(#[from] GameError),
}
