//! A network-free [`Backend`] for demos, fixtures and tests.
//!
//! Chat answers come from a small keyword table of conditions and their
//! typical symptoms. Embeddings are hashed bag-of-words vectors with a
//! constant bias component, so no text ever embeds to the zero vector.
//! With `temperature > 0` the answer is sampled among the best-scoring
//! conditions, seeded from the prompt, the config seed and a call counter.

use std::sync::atomic::{AtomicU64, Ordering};

use sha2::{Digest, Sha256};

use crate::client::Backend;
use crate::config::InferenceConfig;
use crate::error::LlmError;

/// Dimension of [`KeywordBackend`] embeddings, bias component included.
pub const OFFLINE_EMBEDDING_DIM: usize = 64;

const CONDITIONS: &[(&str, &[&str])] = &[
    (
        "Hypertension",
        &["headache", "chest_pain", "dizziness", "loss_of_balance", "lack_of_concentration"],
    ),
    (
        "Migraine",
        &["headache", "blurred_and_distorted_vision", "acidity", "indigestion", "stiff_neck", "depression"],
    ),
    (
        "Heart attack",
        &["chest_pain", "vomiting", "breathlessness", "sweating"],
    ),
    (
        "Paroxysmal Positional Vertigo",
        &["dizziness", "loss_of_balance", "spinning_movements", "nausea", "vomiting", "unsteadiness"],
    ),
    (
        "Fungal infection",
        &["itching", "skin_rash", "nodal_skin_eruptions", "dischromic_patches"],
    ),
    (
        "Common Cold",
        &["continuous_sneezing", "chills", "fatigue", "cough", "high_fever", "headache", "runny_nose"],
    ),
    (
        "Allergy",
        &["continuous_sneezing", "shivering", "chills", "watering_from_eyes"],
    ),
    (
        "Diabetes",
        &["fatigue", "weight_loss", "restlessness", "lethargy", "irregular_sugar_level", "blurred_and_distorted_vision", "obesity", "excessive_hunger", "increased_appetite", "polyuria"],
    ),
];

#[derive(Debug, Default)]
pub struct KeywordBackend {
    calls: AtomicU64,
}

impl KeywordBackend {
    pub fn new() -> Self {
        Self::default()
    }

    /// Chat requests served so far.
    pub fn chat_calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }

    /// Conditions ranked by matched symptoms (ties broken by match ratio,
    /// then by table order), each with the symptoms it matched. Conditions
    /// with no match are dropped.
    fn ranked(prompt: &str) -> Vec<(&'static str, Vec<&'static str>)> {
        let tokens = tokens(prompt);
        let mut scored: Vec<(f64, usize, &str, Vec<&str>)> = CONDITIONS
            .iter()
            .enumerate()
            .filter_map(|(i, (name, symptoms))| {
                let hits: Vec<&str> = symptoms
                    .iter()
                    .copied()
                    .filter(|s| tokens.iter().any(|t| t == s))
                    .collect();
                (!hits.is_empty()).then(|| (hits.len() as f64 / symptoms.len() as f64, i, *name, hits))
            })
            .collect();
        scored.sort_by(|a, b| {
            b.3.len()
                .cmp(&a.3.len())
                .then(b.0.total_cmp(&a.0))
                .then(a.1.cmp(&b.1))
        });
        scored.into_iter().map(|s| (s.2, s.3)).collect()
    }
}

fn tokens(text: &str) -> Vec<String> {
    text.split(|c: char| !(c.is_alphanumeric() || c == '_'))
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

fn hash64(parts: &[&[u8]]) -> u64 {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p);
    }
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest is 32 bytes"))
}

impl Backend for KeywordBackend {
    fn chat(&self, prompt: &str, config: &InferenceConfig) -> Result<String, LlmError> {
        let call = self.calls.fetch_add(1, Ordering::Relaxed);
        let ranked = Self::ranked(prompt);
        if ranked.is_empty() {
            return Ok("There is not enough information to suggest a specific condition.".into());
        }
        let mut pick = 0;
        if config.temperature > 0.0 && ranked.len() > 1 {
            let seed = config.seed.unwrap_or(0).to_le_bytes();
            let r = hash64(&[prompt.as_bytes(), &seed, &call.to_le_bytes()]);
            let u = (r >> 11) as f64 / (1u64 << 53) as f64;
            // probability of leaving the top answer grows with temperature
            if u < (config.temperature / 2.0).min(0.5) {
                pick = 1 + (r as usize % (ranked.len() - 1));
            }
        }
        let (name, hits) = &ranked[pick];
        let mut answer = format!("The most likely condition is {name}, given {}.", hits.join(", "));
        let runner_up = if pick == 0 { ranked.get(1) } else { ranked.first() };
        if let Some((other, _)) = runner_up {
            answer.push_str(&format!(" {other} is also possible."));
        }
        Ok(answer)
    }

    fn embed(&self, text: &str, _model: &str) -> Result<Vec<f64>, LlmError> {
        let mut v = vec![0.0; OFFLINE_EMBEDDING_DIM];
        v[0] = 1.0;
        for t in tokens(text) {
            let h = hash64(&[t.as_bytes()]);
            let idx = 1 + (h as usize % (OFFLINE_EMBEDDING_DIM - 1));
            v[idx] += if h >> 63 == 0 { 1.0 } else { -1.0 };
        }
        Ok(v)
    }
}
