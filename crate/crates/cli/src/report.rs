use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::Context;
use llmshap_core::{AttributionResult, Method, OutsideFeatures};
use llmshap_llm::InferenceConfig;
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::{BackendArg, GrandArg, ModeArg};

/// Fully resolved settings of a run, embedded in every JSON report.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub command: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<Method>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outside_features: Option<OutsideFeatures>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window_cache: Option<bool>,
    pub samples: usize,
    pub workers: usize,
    pub seed: Option<u64>,
    pub tolerance: f64,
    pub source: SourceSpec,
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SourceSpec {
    Table {
        game: String,
    },
    Noisy {
        game: String,
        noise_std: f64,
        seed: u64,
    },
    Llm {
        dataset: PathBuf,
        instance: usize,
        label: String,
        transcript: Option<PathBuf>,
        mode: ModeArg,
        backend: BackendArg,
        inference: InferenceConfig,
        grand_payoff: GrandArg,
    },
}

/// Run metadata that legitimately differs between otherwise identical
/// runs. Kept apart so the rest of a report can be compared byte for byte.
pub fn header(started: Instant) -> Value {
    let timestamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0);
    json!({
        "tool": "llmshap",
        "version": env!("CARGO_PKG_VERSION"),
        "timestamp_unix": timestamp,
        "wall_time_seconds": started.elapsed().as_secs_f64(),
    })
}

/// Result JSON without its timing field.
pub fn result_json(result: &AttributionResult) -> Value {
    let mut v = result.to_json();
    if let Value::Object(map) = &mut v {
        map.remove("wall_time_seconds");
    }
    v
}

pub fn write_json(path: &Path, value: &Value) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn ranked_table(result: &AttributionResult) -> String {
    let ranked = result.ranked();
    let width = ranked
        .iter()
        .map(|s| s.label.chars().count())
        .chain(["feature".len()])
        .max()
        .unwrap_or(7);
    let mut s = String::new();
    let _ = writeln!(s, "{:>4}  {:<width$}  {:>12}", "rank", "feature", "score");
    for (i, f) in ranked.iter().enumerate() {
        let _ = writeln!(s, "{:>4}  {:<width$}  {:>12.6}", i + 1, f.label, f.score);
    }
    s
}

/// `Σ φ` against `h(X) − h(∅)` when both ends were observed.
pub fn efficiency_line(result: &AttributionResult, tolerance: f64) -> String {
    let total = result.total();
    match (result.baseline, result.grand) {
        (Some(b), Some(g)) => {
            let gain = g - b;
            let residual = (total - gain).abs();
            let verdict = if residual <= tolerance { "efficient" } else { "not efficient" };
            format!("sum {total:.6}  h(X) - h(empty) {gain:.6}  residual {residual:.3e}  ({verdict} at {tolerance:e})")
        }
        _ => format!("sum {total:.6}  (h(X) or h(empty) not evaluated by this method)"),
    }
}
