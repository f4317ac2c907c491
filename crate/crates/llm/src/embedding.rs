use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_EMBEDDING_MODEL: &str = "all-MiniLM-L6-v2";

#[derive(Debug, Error, PartialEq)]
pub enum SimilarityError {
    #[error("vectors have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("cosine similarity is undefined for a zero vector")]
    ZeroVector,
    #[error("vector contains a non-finite value")]
    NonFinite,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingVector {
    pub values: Vec<f64>,
    pub model_name: String,
}

impl EmbeddingVector {
    pub fn new(values: Vec<f64>, model_name: impl Into<String>) -> Result<Self, SimilarityError> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(SimilarityError::NonFinite);
        }
        Ok(Self {
            values,
            model_name: model_name.into(),
        })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }
}

/// Cosine similarity `u·v / (‖u‖‖v‖)`, clamped to `[−1, 1]`.
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64, SimilarityError> {
    if u.len() != v.len() {
        return Err(SimilarityError::LengthMismatch(u.len(), v.len()));
    }
    if u.iter().chain(v).any(|x| !x.is_finite()) {
        return Err(SimilarityError::NonFinite);
    }
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    let uu: f64 = u.iter().map(|a| a * a).sum();
    let vv: f64 = v.iter().map(|a| a * a).sum();
    if uu == 0.0 || vv == 0.0 {
        return Err(SimilarityError::ZeroVector);
    }
    // sqrt(uu·vv) keeps κ(u, u) exactly 1; fall back when the product leaves
    // the normal range
    let prod = uu * vv;
    let denom = if prod.is_normal() { prod.sqrt() } else { uu.sqrt() * vv.sqrt() };
    Ok((dot / denom).clamp(-1.0, 1.0))
}

pub fn cosine_similarity(u: &EmbeddingVector, v: &EmbeddingVector) -> Result<f64, SimilarityError> {
    cosine(&u.values, &v.values)
}
