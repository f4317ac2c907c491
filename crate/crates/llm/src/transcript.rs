//! Durable record/replay of completions and embeddings.
//!
//! The store is a JSON-lines file with one record per completion draw or
//! embedding:
//!
//! ```text
//! {"kind":"completion","prompt_hash":"…","config":"gpt-4.1-mini|t=0|seed=42","draw":0,"prompt":"…","text":"…"}
//! {"kind":"embedding","text_hash":"…","model":"all-MiniLM-L6-v2","text":"…","values":[…]}
//! ```
//!
//! Completions are keyed by (prompt hash, config fingerprint, draw index):
//! the k-th request for a prompt under a config is draw k, so stochastic
//! sequences replay draw for draw. Embeddings are keyed by text hash and
//! model only.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::{Arc, Mutex, PoisonError};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::client::Backend;
use crate::config::InferenceConfig;
use crate::embedding::EmbeddingVector;
use crate::error::LlmError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Call the backend and persist every answer.
    Record,
    /// Answer only from the transcript; never touches the network.
    Replay,
    /// Call the backend without persisting.
    Live,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Record => "record",
            Mode::Replay => "replay",
            Mode::Live => "live",
        }
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "record" => Ok(Mode::Record),
            "replay" => Ok(Mode::Replay),
            "live" => Ok(Mode::Live),
            other => Err(format!("unknown transcript mode {other:?}")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Record {
    Completion {
        prompt_hash: String,
        config: String,
        draw: u32,
        prompt: String,
        text: String,
    },
    Embedding {
        text_hash: String,
        model: String,
        text: String,
        values: Vec<f64>,
    },
}

pub fn text_hash(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

type CompletionKey = (String, String, u32);
type EmbeddingKey = (String, String);

#[derive(Default)]
struct Tables {
    completions: HashMap<CompletionKey, String>,
    embeddings: HashMap<EmbeddingKey, EmbeddingVector>,
    next_draw: HashMap<(String, String), u32>,
}

pub struct TranscriptStore {
    mode: Mode,
    backend: Option<Arc<dyn Backend>>,
    tables: Mutex<Tables>,
    writer: Option<Mutex<BufWriter<File>>>,
    path: Option<PathBuf>,
}

impl TranscriptStore {
    /// Loads `path` for offline replay.
    pub fn replay(path: impl AsRef<Path>) -> Result<Self, LlmError> {
        let path = path.as_ref();
        let file = File::open(path)?;
        let mut records = Vec::new();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: Record = serde_json::from_str(&line).map_err(|e| LlmError::Transcript {
                path: path.display().to_string(),
                line: i + 1,
                message: e.to_string(),
            })?;
            records.push(rec);
        }
        let mut store = Self::from_records(records);
        store.path = Some(path.to_path_buf());
        Ok(store)
    }

    /// In-memory replay store.
    pub fn from_records<I: IntoIterator<Item = Record>>(records: I) -> Self {
        let mut tables = Tables::default();
        for rec in records {
            insert(&mut tables, rec);
        }
        Self {
            mode: Mode::Replay,
            backend: None,
            tables: Mutex::new(tables),
            writer: None,
            path: None,
        }
    }

    /// Records every answer from `backend` into a fresh file at `path`.
    pub fn record(path: impl AsRef<Path>, backend: Arc<dyn Backend>) -> Result<Self, LlmError> {
        let path = path.as_ref();
        let file = File::create(path)?;
        Ok(Self {
            mode: Mode::Record,
            backend: Some(backend),
            tables: Mutex::new(Tables::default()),
            writer: Some(Mutex::new(BufWriter::new(file))),
            path: Some(path.to_path_buf()),
        })
    }

    pub fn live(backend: Arc<dyn Backend>) -> Self {
        Self {
            mode: Mode::Live,
            backend: Some(backend),
            tables: Mutex::new(Tables::default()),
            writer: None,
            path: None,
        }
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    fn tables(&self) -> std::sync::MutexGuard<'_, Tables> {
        self.tables.lock().unwrap_or_else(PoisonError::into_inner)
    }

    fn backend(&self) -> Result<&dyn Backend, LlmError> {
        self.backend
            .as_deref()
            .ok_or(LlmError::NoBackend(self.mode.as_str()))
    }

    fn persist(&self, rec: &Record) -> Result<(), LlmError> {
        if let Some(w) = &self.writer {
            let mut w = w.lock().unwrap_or_else(PoisonError::into_inner);
            serde_json::to_writer(&mut *w, rec)?;
            w.write_all(b"\n")?;
            w.flush()?;
        }
        Ok(())
    }

    /// Returns the next draw of `prompt` under `config`.
    pub fn complete(&self, prompt: &str, config: &InferenceConfig) -> Result<String, LlmError> {
        let prompt_hash = text_hash(prompt);
        let fingerprint = config.fingerprint();
        let draw = {
            let mut t = self.tables();
            let next = t
                .next_draw
                .entry((prompt_hash.clone(), fingerprint.clone()))
                .or_insert(0);
            let d = *next;
            *next += 1;
            d
        };
        match self.mode {
            Mode::Replay => self
                .tables()
                .completions
                .get(&(prompt_hash.clone(), fingerprint.clone(), draw))
                .cloned()
                .ok_or_else(|| LlmError::ReplayMiss {
                    kind: "completion",
                    key: format!("{prompt_hash} [{fingerprint}] draw {draw}"),
                }),
            Mode::Live => self.backend()?.chat(prompt, config),
            Mode::Record => {
                let text = self.backend()?.chat(prompt, config)?;
                let rec = Record::Completion {
                    prompt_hash,
                    config: fingerprint,
                    draw,
                    prompt: prompt.to_string(),
                    text: text.clone(),
                };
                self.persist(&rec)?;
                insert(&mut self.tables(), rec);
                Ok(text)
            }
        }
    }

    /// Embeds `text`. Embeddings are deterministic, so a stored vector is
    /// reused in every mode.
    pub fn embed(&self, text: &str, model: &str) -> Result<EmbeddingVector, LlmError> {
        let key = (text_hash(text), model.to_string());
        if let Some(v) = self.tables().embeddings.get(&key) {
            return Ok(v.clone());
        }
        if self.mode == Mode::Replay {
            return Err(LlmError::ReplayMiss {
                kind: "embedding",
                key: format!("{} [{}]", key.0, key.1),
            });
        }
        let values = self.backend()?.embed(text, model)?;
        let vector = EmbeddingVector::new(values, model)?;
        let rec = Record::Embedding {
            text_hash: key.0.clone(),
            model: key.1.clone(),
            text: text.to_string(),
            values: vector.values.clone(),
        };
        let mut tables = self.tables();
        if let Some(existing) = tables.embeddings.get(&key) {
            // lost a race with a concurrent embed of the same text
            return Ok(existing.clone());
        }
        tables.embeddings.insert(key, vector.clone());
        drop(tables);
        if self.mode == Mode::Record {
            self.persist(&rec)?;
        }
        Ok(vector)
    }

    pub fn completion_count(&self) -> usize {
        self.tables().completions.len()
    }

    pub fn embedding_count(&self) -> usize {
        self.tables().embeddings.len()
    }
}

fn insert(tables: &mut Tables, rec: Record) {
    match rec {
        Record::Completion {
            prompt_hash,
            config,
            draw,
            text,
            ..
        } => {
            tables.completions.insert((prompt_hash, config, draw), text);
        }
        Record::Embedding {
            text_hash,
            model,
            values,
            ..
        } => {
            tables.embeddings.insert(
                (text_hash, model.clone()),
                EmbeddingVector {
                    values,
                    model_name: model,
                },
            );
        }
    }
}

/// Convenience wrappers matching the free-function style of the rest of
/// the pipeline.
pub fn complete(prompt: &str, config: &InferenceConfig, store: &TranscriptStore) -> Result<String, LlmError> {
    store.complete(prompt, config)
}

pub fn embed(text: &str, model: &str, store: &TranscriptStore) -> Result<EmbeddingVector, LlmError> {
    store.embed(text, model)
}
