use thiserror::Error;

use crate::embedding::SimilarityError;

#[derive(Debug, Error)]
pub enum LlmError {
    #[error("request to {url} failed after {attempts} attempt(s): {message}")]
    Transport {
        url: String,
        attempts: u32,
        message: String,
    },
    #[error("{url} returned HTTP {status}: {body}")]
    Http { url: String, status: u16, body: String },
    #[error("missing API credential: set {0}")]
    MissingCredential(&'static str),
    #[error("malformed response from {url}: {message}")]
    BadResponse { url: String, message: String },
    #[error("transcript has no {kind} for {key}")]
    ReplayMiss { kind: &'static str, key: String },
    #[error("transcript store in {0} mode has no backend")]
    NoBackend(&'static str),
    #[error("transcript {path}:{line}: {message}")]
    Transcript {
        path: String,
        line: usize,
        message: String,
    },
    #[error("coalition references a feature outside the feature set")]
    ForeignCoalition,
    #[error(transparent)]
    Similarity(#[from] SimilarityError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("dataset {path} has no usable rows ({skipped} skipped)")]
    NoRows { path: String, skipped: usize },
    #[error("dataset {path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error)]
pub enum CompareError {
    #[error("attribution results cover different features")]
    FeatureMismatch,
    #[error(transparent)]
    Similarity(#[from] SimilarityError),
}
