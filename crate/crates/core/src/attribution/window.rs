use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::engine::{check_size, Evaluator, Observed};
use super::sampling::SampleMean;
use super::{AttributionOptions, AttributionResult, CallStats, Method};
use crate::cache::CachingWrapper;
use crate::error::{AttributionError, PayoffError};
use crate::feature::{Coalition, FeatureSet};
use crate::game::PayoffSource;
use crate::weight::{weight_table, CompensatedSum};

/// What happens to features outside the current window while its local
/// Shapley values are computed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutsideFeatures {
    /// Every coalition is `S ∪ (X \ W)`. With `w = 1` this is the
    /// leave-one-out attribution, with `w = n` the plain Shapley value.
    #[default]
    Present,
    /// The window is played as an isolated sub-game over subsets of `W`
    /// only. With `w = n` this is still the plain Shapley value.
    Absent,
}

impl std::str::FromStr for OutsideFeatures {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "present" | "in-context" | "in_context" => Ok(Self::Present),
            "absent" | "isolated" => Ok(Self::Absent),
            other => Err(format!("unknown outside-feature mode {other:?}")),
        }
    }
}

/// Sliding-window parameters. The stride is always 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WindowSpec {
    pub size: usize,
    pub use_cache: bool,
    pub outside: OutsideFeatures,
}

impl WindowSpec {
    /// Window of `size` features, cached, outside features present.
    pub fn new(size: usize) -> Self {
        Self {
            size,
            use_cache: true,
            outside: OutsideFeatures::Present,
        }
    }

    pub fn uncached(mut self) -> Self {
        self.use_cache = false;
        self
    }

    pub fn with_cache(mut self, use_cache: bool) -> Self {
        self.use_cache = use_cache;
        self
    }

    pub fn isolated(mut self) -> Self {
        self.outside = OutsideFeatures::Absent;
        self
    }

    pub fn with_outside(mut self, outside: OutsideFeatures) -> Self {
        self.outside = outside;
        self
    }
}

/// Local Shapley values inside each stride-1 window of `spec.size`
/// consecutive features (in feature-set order), averaged over the windows
/// that contain each feature.
pub fn attribute_sliding_window<S: PayoffSource>(
    source: &S,
    features: &FeatureSet,
    spec: WindowSpec,
    options: &AttributionOptions,
) -> Result<AttributionResult, AttributionError> {
    let n = features.len();
    if spec.size == 0 || spec.size > n {
        return Err(AttributionError::InvalidWindow { w: spec.size, n });
    }
    check_size(spec.size, options.exhaustive_limit)?;
    let sampled;
    let source: &dyn PayoffSource = if options.samples > 1 {
        sampled = SampleMean::new(source, options.samples);
        &sampled
    } else {
        source
    };
    let mut result = if spec.use_cache {
        let cache = CachingWrapper::new(source);
        let started = Instant::now();
        let mut eval = Evaluator::new(&cache, features, options)?;
        let stats = |c: &CachingWrapper<&dyn PayoffSource>| CallStats {
            inference_calls: c.calls_to_inner(),
            cache_hits: c.cache_hits(),
        };
        let scores = window_sums(&mut eval, n, spec)
            .map_err(|source| AttributionError::Payoff { source, stats: stats(&cache) })?;
        let observed = Observed {
            empty: cache.cached(&Coalition::empty()),
            grand: cache.cached(&features.grand()),
        };
        AttributionResult::build(
            Method::SlidingWindow,
            features,
            scores,
            observed,
            stats(&cache),
            options.samples,
            started,
        )
    } else {
        let started = Instant::now();
        let mut eval = Evaluator::new(source, features, options)?;
        let scores = window_sums(&mut eval, n, spec).map_err(|source| AttributionError::Payoff {
            source,
            stats: eval.stats(),
        })?;
        AttributionResult::build(
            Method::SlidingWindow,
            features,
            scores,
            eval.observed,
            eval.stats(),
            options.samples,
            started,
        )
    };
    result.window_size = Some(spec.size);
    result.outside_features = Some(spec.outside);
    Ok(result)
}

fn window_sums<S: PayoffSource + ?Sized>(
    eval: &mut Evaluator<'_, S>,
    n: usize,
    spec: WindowSpec,
) -> Result<Vec<f64>, PayoffError> {
    let w = spec.size;
    let weights = weight_table(w).expect("w >= 1");
    let window_bits = (1u64 << w) - 1;
    let mut totals = vec![0.0f64; n];
    let mut counts = vec![0u32; n];
    let mut masks = Vec::with_capacity(1 << w);
    for start in 0..=(n - w) {
        let window = window_bits << start;
        let outside = match spec.outside {
            OutsideFeatures::Present => eval.full_mask() & !window,
            OutsideFeatures::Absent => 0,
        };
        for x in start..start + w {
            let bit = 1u64 << x;
            masks.clear();
            for local in (0..1u64 << w).map(|l| l << start).filter(|s| s & bit == 0) {
                let s_prime = local | outside;
                masks.push(s_prime | bit);
                masks.push(s_prime);
            }
            let values = eval.eval(&masks)?;
            let mut local = CompensatedSum::new();
            for (pair, terms) in masks.chunks_exact(2).zip(values.chunks_exact(2)) {
                let size = (pair[1] & window).count_ones() as usize;
                local.add(weights[size] * (terms[0] - terms[1]));
            }
            totals[x] += local.value();
            counts[x] += 1;
        }
    }
    Ok(totals
        .into_iter()
        .zip(counts)
        .map(|(t, c)| t / c as f64)
        .collect())
}
