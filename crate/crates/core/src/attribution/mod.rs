//! Shapley-style attribution methods over a [`PayoffSource`].
//!
//! | method            | coalitions evaluated                          | calls (deterministic, uncached) |
//! |-------------------|-----------------------------------------------|---------------------------------|
//! | `exact`           | every `S ⊆ X\{x}` twice per feature           | `n·2^n`                         |
//! | `cached`          | same terms through a fresh memo cache         | `2^n`                           |
//! | `sliding_window`  | local Shapley values inside stride-1 windows  | `(n−w+1)·w·2^w`                 |
//! | `counterfactual`  | `X` and every leave-one-out coalition         | `n+1`                           |
//! | `oracle`          | all `n!` orderings of a deterministic game    | `2^n`                           |

mod counterfactual;
mod engine;
mod exact;
mod oracle;
mod sampling;
mod window;

use std::fmt;
use std::str::FromStr;

use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize, Serializer};

pub use counterfactual::attribute_counterfactual;
pub use exact::{attribute_cached, attribute_exact, attribute_through_cache};
pub use oracle::{attribute_oracle, ORACLE_LIMIT};
pub use sampling::{sample_mean_payoff, SampleMean};
pub use window::{attribute_sliding_window, OutsideFeatures, WindowSpec};

use crate::error::AttributionError;
use crate::feature::{FeatureId, FeatureSet};
use crate::game::PayoffSource;

/// Default upper bound on `n` (or `w`) for methods that enumerate `2^n`
/// coalitions.
pub const DEFAULT_EXHAUSTIVE_LIMIT: usize = 20;

/// Masks are `u64`, so no method can address more features than this.
pub const MAX_FEATURES: usize = 63;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    Cached,
    SlidingWindow,
    Counterfactual,
    Oracle,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Exact,
        Method::Cached,
        Method::SlidingWindow,
        Method::Counterfactual,
        Method::Oracle,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::Cached => "cached",
            Method::SlidingWindow => "sliding_window",
            Method::Counterfactual => "counterfactual",
            Method::Oracle => "oracle",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "exact" | "shapley" => Ok(Method::Exact),
            "cached" | "cached_shapley" => Ok(Method::Cached),
            "sliding_window" | "window" => Ok(Method::SlidingWindow),
            "counterfactual" | "leave_one_out" => Ok(Method::Counterfactual),
            "oracle" | "permutation" => Ok(Method::Oracle),
            other => Err(format!("unknown attribution method {other:?}")),
        }
    }
}

/// Inference accounting for one attribution run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CallStats {
    /// Evaluations that reached the underlying payoff source.
    pub inference_calls: u64,
    /// Evaluations answered by the memo cache.
    pub cache_hits: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureScore {
    pub id: FeatureId,
    pub label: String,
    pub score: f64,
}

/// Outcome of one attribution run.
///
/// `baseline` and `grand` hold the payoffs of `∅` and `X` as observed
/// during the run (the last draw, in enumeration order). They are `None`
/// when the method never evaluates that coalition, e.g. the counterfactual
/// method never looks at `∅` for `n > 1`.
#[derive(Clone, Debug, Serialize)]
pub struct AttributionResult {
    pub method: Method,
    #[serde(serialize_with = "scores_by_label")]
    pub scores: Vec<FeatureScore>,
    pub baseline: Option<f64>,
    pub grand: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outside_features: Option<OutsideFeatures>,
    /// Draws averaged per coalition evaluation (`h_n`). Inference calls
    /// count coalition evaluations, so raw model draws are
    /// `inference_calls · sample_count`.
    pub sample_count: usize,
    pub call_stats: CallStats,
    pub wall_time_seconds: f64,
}

fn scores_by_label<S: Serializer>(scores: &[FeatureScore], ser: S) -> Result<S::Ok, S::Error> {
    let mut map = ser.serialize_map(Some(scores.len()))?;
    for s in scores {
        map.serialize_entry(&s.label, &s.score)?;
    }
    map.end()
}

impl AttributionResult {
    pub fn score(&self, id: FeatureId) -> Option<f64> {
        self.scores.iter().find(|s| s.id == id).map(|s| s.score)
    }

    pub fn score_by_label(&self, label: &str) -> Option<f64> {
        self.scores.iter().find(|s| s.label == label).map(|s| s.score)
    }

    /// Scores in feature-set order.
    pub fn values(&self) -> Vec<f64> {
        self.scores.iter().map(|s| s.score).collect()
    }

    pub fn total(&self) -> f64 {
        self.scores
            .iter()
            .map(|s| s.score)
            .collect::<crate::weight::CompensatedSum>()
            .value()
    }

    /// Features sorted by descending score; ties keep feature-set order.
    pub fn ranked(&self) -> Vec<&FeatureScore> {
        let mut v: Vec<&FeatureScore> = self.scores.iter().collect();
        v.sort_by(|a, b| b.score.total_cmp(&a.score));
        v
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("attribution results always serialize")
    }

    pub(crate) fn build(
        method: Method,
        features: &FeatureSet,
        scores: Vec<f64>,
        observed: engine::Observed,
        call_stats: CallStats,
        sample_count: usize,
        started: std::time::Instant,
    ) -> Self {
        let scores = features
            .iter()
            .zip(scores)
            .map(|(f, score)| FeatureScore {
                id: f.id,
                label: f.label.clone(),
                score,
            })
            .collect();
        Self {
            method,
            scores,
            baseline: observed.empty,
            grand: observed.grand,
            window_size: None,
            outside_features: None,
            sample_count,
            call_stats,
            wall_time_seconds: started.elapsed().as_secs_f64(),
        }
    }
}

/// Execution knobs shared by all methods.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AttributionOptions {
    /// Maximum coalition evaluations in flight. With stochastic sources,
    /// results replay exactly only when this is 1.
    pub workers: usize,
    /// Maximum `n` (or `w` for the sliding window) for exhaustive methods.
    pub exhaustive_limit: usize,
    /// Draws averaged per coalition evaluation.
    pub samples: usize,
}

impl Default for AttributionOptions {
    fn default() -> Self {
        Self {
            workers: 1,
            exhaustive_limit: DEFAULT_EXHAUSTIVE_LIMIT,
            samples: 1,
        }
    }
}

impl AttributionOptions {
    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn with_samples(mut self, samples: usize) -> Self {
        self.samples = samples;
        self
    }

    pub fn with_exhaustive_limit(mut self, limit: usize) -> Self {
        self.exhaustive_limit = limit;
        self
    }

    fn validate(&self) -> Result<(), AttributionError> {
        if self.workers == 0 {
            return Err(AttributionError::InvalidArgument("workers must be at least 1".into()));
        }
        if self.samples == 0 {
            return Err(AttributionError::InvalidArgument("samples must be at least 1".into()));
        }
        Ok(())
    }
}

/// Runs `method` with the default window settings. `window` is required
/// for [`Method::SlidingWindow`] and ignored otherwise.
pub fn attribute<S: PayoffSource>(
    method: Method,
    source: &S,
    features: &FeatureSet,
    window: Option<WindowSpec>,
    options: &AttributionOptions,
) -> Result<AttributionResult, AttributionError> {
    match method {
        Method::Exact => attribute_exact(source, features, options),
        Method::Cached => attribute_cached(source, features, options),
        Method::Counterfactual => attribute_counterfactual(source, features, options),
        Method::Oracle => attribute_oracle(source, features),
        Method::SlidingWindow => {
            let spec = window.ok_or_else(|| {
                AttributionError::InvalidArgument("sliding window requires a window size".into())
            })?;
            attribute_sliding_window(source, features, spec, options)
        }
    }
}

/// Closed-form inference-call count of a deterministic run, when one exists.
///
/// Cached sliding-window runs have no closed form and return `None`.
pub fn expected_calls(method: Method, n: usize, window: Option<WindowSpec>) -> Option<u64> {
    let n64 = n as u64;
    match method {
        Method::Exact => Some(n64 << n),
        Method::Cached | Method::Oracle => Some(1u64 << n),
        Method::Counterfactual => Some(n64 + 1),
        Method::SlidingWindow => {
            let spec = window?;
            if spec.use_cache || spec.size == 0 || spec.size > n {
                return None;
            }
            let w = spec.size as u64;
            Some((n64 - w + 1) * w * (1u64 << w))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.as_str().parse::<Method>().unwrap(), m);
            assert_eq!(serde_json::to_value(m).unwrap(), m.as_str());
        }
        assert!("bogus".parse::<Method>().is_err());
    }

    #[test]
    fn closed_forms() {
        assert_eq!(expected_calls(Method::Exact, 6, None), Some(384));
        assert_eq!(expected_calls(Method::Cached, 6, None), Some(64));
        assert_eq!(expected_calls(Method::Counterfactual, 6, None), Some(7));
        let sw = WindowSpec::new(3).uncached();
        assert_eq!(expected_calls(Method::SlidingWindow, 6, Some(sw)), Some(96));
        assert_eq!(expected_calls(Method::SlidingWindow, 6, Some(WindowSpec::new(3))), None);
    }
}
