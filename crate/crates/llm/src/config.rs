use serde::{Deserialize, Serialize};

use crate::embedding::DEFAULT_EMBEDDING_MODEL;

pub const DEFAULT_MODEL: &str = "gpt-4.1-mini";
pub const DEFAULT_TEMPERATURE: f64 = 0.2;
pub const DEFAULT_ENDPOINT: &str = "https://api.openai.com/v1";
/// Seed used by [`InferenceConfig::deterministic`].
pub const DETERMINISTIC_SEED: u64 = 42;
/// Environment variable holding the bearer token for live and record runs.
pub const API_KEY_ENV: &str = "LLMSHAP_API_KEY";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InferenceConfig {
    pub model_name: String,
    pub temperature: f64,
    pub seed: Option<u64>,
    pub endpoint_url: String,
    pub embedding_model: String,
    pub max_retries: u32,
    pub timeout_seconds: f64,
}

impl Default for InferenceConfig {
    fn default() -> Self {
        Self {
            model_name: DEFAULT_MODEL.into(),
            temperature: DEFAULT_TEMPERATURE,
            seed: None,
            endpoint_url: DEFAULT_ENDPOINT.into(),
            embedding_model: DEFAULT_EMBEDDING_MODEL.into(),
            max_retries: 3,
            timeout_seconds: 60.0,
        }
    }
}

impl InferenceConfig {
    /// Temperature 0 with a fixed seed.
    pub fn deterministic() -> Self {
        Self {
            temperature: 0.0,
            seed: Some(DETERMINISTIC_SEED),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !self.temperature.is_finite() || self.temperature < 0.0 {
            return Err(format!("temperature must be >= 0, got {}", self.temperature));
        }
        if !self.timeout_seconds.is_finite() || self.timeout_seconds <= 0.0 {
            return Err(format!("timeout must be positive, got {}", self.timeout_seconds));
        }
        Ok(())
    }

    /// Identifies the sampling distribution a completion was drawn from.
    /// Endpoint and retry settings are deliberately excluded.
    pub fn fingerprint(&self) -> String {
        let seed = self.seed.map_or_else(|| "none".to_string(), |s| s.to_string());
        format!("{}|t={}|seed={}", self.model_name, self.temperature, seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = InferenceConfig::default();
        assert_eq!(c.model_name, "gpt-4.1-mini");
        assert_eq!(c.temperature, 0.2);
        assert_eq!(c.embedding_model, "all-MiniLM-L6-v2");
        assert!(c.validate().is_ok());
        let d = InferenceConfig::deterministic();
        assert_eq!((d.temperature, d.seed), (0.0, Some(42)));
    }

    #[test]
    fn fingerprint_ignores_transport_settings() {
        let a = InferenceConfig::default();
        let mut b = a.clone();
        b.endpoint_url = "http://localhost:8080/v1".into();
        b.max_retries = 9;
        assert_eq!(a.fingerprint(), b.fingerprint());
        b.temperature = 0.0;
        assert_ne!(a.fingerprint(), b.fingerprint());
    }

    #[test]
    fn negative_temperature_rejected() {
        let c = InferenceConfig {
            temperature: -0.1,
            ..Default::default()
        };
        assert!(c.validate().is_err());
    }
}
