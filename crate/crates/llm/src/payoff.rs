use std::sync::Arc;

use llmshap_core::{Coalition, FeatureSet, PayoffError, PayoffSource};
use serde::{Deserialize, Serialize};

use crate::config::InferenceConfig;
use crate::embedding::{cosine_similarity, EmbeddingVector};
use crate::error::LlmError;
use crate::prompt::PromptTemplate;
use crate::transcript::TranscriptStore;

/// How the grand coalition's payoff is obtained.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GrandPayoff {
    /// Query the model again and compare the new answer with the base.
    #[default]
    FreshDraw,
    /// Reuse the base answer, so `h(X)` is exactly the base self-similarity.
    PinnedBase,
}

/// Payoff `κ(E(R_X), E(R_S))`: cosine similarity between the embedding of
/// the base answer to the full prompt and the answer to the coalition's
/// prompt.
///
/// The base answer is drawn once, when the source is built, and reused for
/// every coalition.
pub struct LlmPayoff {
    features: FeatureSet,
    template: PromptTemplate,
    config: InferenceConfig,
    store: Arc<TranscriptStore>,
    grand: GrandPayoff,
    base_answer: String,
    base_embedding: EmbeddingVector,
}

impl LlmPayoff {
    pub fn new(
        features: FeatureSet,
        template: PromptTemplate,
        config: InferenceConfig,
        store: Arc<TranscriptStore>,
        grand: GrandPayoff,
    ) -> Result<Self, LlmError> {
        let prompt = template.render(&features, &features.grand());
        let base_answer = store.complete(&prompt, &config)?;
        let base_embedding = store.embed(&base_answer, &config.embedding_model)?;
        Ok(Self {
            features,
            template,
            config,
            store,
            grand,
            base_answer,
            base_embedding,
        })
    }

    pub fn base_answer(&self) -> &str {
        &self.base_answer
    }

    pub fn features(&self) -> &FeatureSet {
        &self.features
    }

    pub fn grand_payoff(&self) -> GrandPayoff {
        self.grand
    }

    /// Answer text for `coalition`, drawn through the transcript store.
    pub fn answer(&self, coalition: &Coalition) -> Result<String, LlmError> {
        self.features
            .mask_of(coalition)
            .map_err(|_| LlmError::ForeignCoalition)?;
        if self.grand == GrandPayoff::PinnedBase && coalition.len() == self.features.len() {
            return Ok(self.base_answer.clone());
        }
        let prompt = self.template.render(&self.features, coalition);
        self.store.complete(&prompt, &self.config)
    }

    pub fn payoff(&self, coalition: &Coalition) -> Result<f64, LlmError> {
        let answer = self.answer(coalition)?;
        let embedding = self.store.embed(&answer, &self.config.embedding_model)?;
        Ok(cosine_similarity(&self.base_embedding, &embedding)?)
    }
}

impl PayoffSource for LlmPayoff {
    fn evaluate(&self, coalition: &Coalition) -> Result<f64, PayoffError> {
        self.payoff(coalition).map_err(PayoffError::inference)
    }

    fn is_deterministic(&self) -> bool {
        false
    }

    fn description(&self) -> String {
        format!(
            "cosine similarity to base answer ({}, {} mode)",
            self.config.fingerprint(),
            self.store.mode().as_str()
        )
    }
}

/// Builds the similarity payoff for one feature set; the base answer is
/// drawn immediately.
pub fn llm_payoff_source(
    features: FeatureSet,
    template: PromptTemplate,
    config: InferenceConfig,
    store: Arc<TranscriptStore>,
) -> Result<LlmPayoff, LlmError> {
    LlmPayoff::new(features, template, config, store, GrandPayoff::default())
}
