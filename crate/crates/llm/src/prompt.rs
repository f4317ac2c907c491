use llmshap_core::{Coalition, FeatureSet};
use serde::{Deserialize, Serialize};

/// `prefix + join(contents of features in S) + suffix`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptTemplate {
    pub prefix: String,
    pub joiner: String,
    pub suffix: String,
}

impl PromptTemplate {
    pub fn new(prefix: impl Into<String>, joiner: impl Into<String>, suffix: impl Into<String>) -> Self {
        Self {
            prefix: prefix.into(),
            joiner: joiner.into(),
            suffix: suffix.into(),
        }
    }

    /// The symptom-to-diagnosis question used by the dataset experiments.
    pub fn symptoms() -> Self {
        Self::new(
            "A patient is showing the following symptom(s): ",
            ", ",
            ". Based on these symptom(s), what disease or condition do you think they most likely have?",
        )
    }

    /// Renders the prompt for coalition `S`. Members appear in feature-set
    /// order; features outside `S` (and ids not in `features`) are left out
    /// entirely. The empty coalition keeps the surrounding text with an
    /// empty list.
    pub fn render(&self, features: &FeatureSet, coalition: &Coalition) -> String {
        let parts: Vec<&str> = features
            .iter()
            .filter(|f| coalition.contains(f.id))
            .map(|f| f.content.as_str())
            .collect();
        let mut out = String::with_capacity(self.prefix.len() + self.suffix.len() + 16 * parts.len());
        out.push_str(&self.prefix);
        out.push_str(&parts.join(&self.joiner));
        out.push_str(&self.suffix);
        out
    }
}

impl Default for PromptTemplate {
    fn default() -> Self {
        Self::symptoms()
    }
}

pub fn render_prompt(template: &PromptTemplate, features: &FeatureSet, coalition: &Coalition) -> String {
    template.render(features, coalition)
}
