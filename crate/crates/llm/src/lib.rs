//! LLM-backed payoff pipeline.
//!
//! Coalitions of features are rendered into prompts, answered by a chat
//! model, embedded, and scored by cosine similarity against the answer to
//! the full prompt. Every model interaction can be recorded to and replayed
//! from a JSON-lines transcript.

pub mod client;
pub mod compare;
pub mod config;
pub mod dataset;
pub mod embedding;
pub mod error;
pub mod offline;
pub mod payoff;
pub mod prompt;
pub mod transcript;

pub use client::{Backend, HttpBackend};
pub use compare::compare_attributions;
pub use config::InferenceConfig;
pub use dataset::{ingest_dataset, ingest_reader, Dataset, Instance, SkippedRow};
pub use embedding::{cosine, cosine_similarity, EmbeddingVector, SimilarityError, DEFAULT_EMBEDDING_MODEL};
pub use error::{CompareError, DatasetError, LlmError};
pub use offline::{KeywordBackend, OFFLINE_EMBEDDING_DIM};
pub use payoff::{llm_payoff_source, GrandPayoff, LlmPayoff};
pub use prompt::{render_prompt, PromptTemplate};
pub use transcript::{complete, embed, text_hash, Mode, Record, TranscriptStore};
