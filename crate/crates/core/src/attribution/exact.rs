use std::time::Instant;

use super::engine::{check_size, Evaluator};
use super::sampling::SampleMean;
use super::{AttributionOptions, AttributionResult, CallStats, Method};
use crate::cache::CachingWrapper;
use crate::error::AttributionError;
use crate::feature::FeatureSet;
use crate::game::PayoffSource;
use crate::weight::{weight_table, CompensatedSum};

/// Shapley sum over every `S ⊆ X\{x}`, every term drawn afresh from
/// `source`. Nothing is reused across terms or features, so a stochastic
/// source is sampled `n·2^n` times and efficiency is not guaranteed.
pub fn attribute_exact<S: PayoffSource>(
    source: &S,
    features: &FeatureSet,
    options: &AttributionOptions,
) -> Result<AttributionResult, AttributionError> {
    let started = Instant::now();
    check_size(features.len(), options.exhaustive_limit)?;
    let sampled;
    let source: &dyn PayoffSource = if options.samples > 1 {
        sampled = SampleMean::new(source, options.samples);
        &sampled
    } else {
        source
    };
    let mut eval = Evaluator::new(source, features, options)?;
    let scores = match shapley_sums(&mut eval, features.len()) {
        Ok(s) => s,
        Err(source) => {
            return Err(AttributionError::Payoff {
                source,
                stats: eval.stats(),
            })
        }
    };
    Ok(AttributionResult::build(
        Method::Exact,
        features,
        scores,
        eval.observed,
        eval.stats(),
        options.samples,
        started,
    ))
}

/// The same sum as [`attribute_exact`], evaluated through a fresh
/// [`CachingWrapper`] so that each coalition is drawn once and frozen.
pub fn attribute_cached<S: PayoffSource>(
    source: &S,
    features: &FeatureSet,
    options: &AttributionOptions,
) -> Result<AttributionResult, AttributionError> {
    check_size(features.len(), options.exhaustive_limit)?;
    if options.samples > 1 {
        let sampled = SampleMean::new(source, options.samples);
        let cache = CachingWrapper::new(&sampled);
        attribute_through_cache(&cache, features, options)
    } else {
        let cache = CachingWrapper::new(source);
        attribute_through_cache(&cache, features, options)
    }
}

/// Cached Shapley attribution against a caller-owned cache, which then
/// holds the frozen value function the scores were computed from.
///
/// `options.samples` is ignored here: wrap the inner source in
/// [`SampleMean`] before caching if averaging is wanted.
pub fn attribute_through_cache<S: PayoffSource>(
    cache: &CachingWrapper<S>,
    features: &FeatureSet,
    options: &AttributionOptions,
) -> Result<AttributionResult, AttributionError> {
    let started = Instant::now();
    check_size(features.len(), options.exhaustive_limit)?;
    let calls_before = cache.calls_to_inner();
    let hits_before = cache.cache_hits();
    let stats = || CallStats {
        inference_calls: cache.calls_to_inner() - calls_before,
        cache_hits: cache.cache_hits() - hits_before,
    };
    let mut eval = Evaluator::new(cache, features, options)?;
    let scores = shapley_sums(&mut eval, features.len())
        .map_err(|source| AttributionError::Payoff { source, stats: stats() })?;
    let mut observed = eval.observed;
    observed.empty = cache.cached(&crate::feature::Coalition::empty()).or(observed.empty);
    observed.grand = cache.cached(&features.grand()).or(observed.grand);
    Ok(AttributionResult::build(
        Method::Cached,
        features,
        scores,
        observed,
        stats(),
        options.samples,
        started,
    ))
}

/// Per-feature Shapley sums. Coalitions are enumerated in ascending mask
/// order, `S ∪ {x}` before `S` for each term.
pub(crate) fn shapley_sums<S: PayoffSource + ?Sized>(
    eval: &mut Evaluator<'_, S>,
    n: usize,
) -> Result<Vec<f64>, crate::error::PayoffError> {
    let weights = weight_table(n).expect("n >= 1");
    let mut scores = Vec::with_capacity(n);
    let mut masks = Vec::with_capacity(1 << n);
    for x in 0..n {
        let bit = 1u64 << x;
        masks.clear();
        for s in (0..1u64 << n).filter(|s| s & bit == 0) {
            masks.push(s | bit);
            masks.push(s);
        }
        let values = eval.eval(&masks)?;
        let mut acc = CompensatedSum::new();
        for (pair, terms) in masks.chunks_exact(2).zip(values.chunks_exact(2)) {
            let size = pair[1].count_ones() as usize;
            acc.add(weights[size] * (terms[0] - terms[1]));
        }
        scores.push(acc.value());
    }
    Ok(scores)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feature::Coalition;
    use crate::game::{ClosureGame, NoisyGame, TableGame};

    /// h(S) = 1 iff a ∈ S and |S| ≥ 2.
    fn partner_game() -> (FeatureSet, impl PayoffSource) {
        let set = FeatureSet::from_labels(["a", "b", "c"]).unwrap();
        let g = ClosureGame::new("partner", |c: &Coalition| {
            (c.contains(0) && c.len() >= 2) as u8 as f64
        });
        (set, g)
    }

    #[test]
    fn partner_game_values() {
        // Permutation enumeration by hand: a is pivotal in the 4 orderings
        // where it is not first; b/c are pivotal only right after a leads.
        let (set, g) = partner_game();
        let r = attribute_exact(&g, &set, &AttributionOptions::default()).unwrap();
        let expected = [2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0];
        for (got, want) in r.values().iter().zip(expected) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_game_scores_zero() {
        let set = FeatureSet::from_labels(["a", "b", "c", "d"]).unwrap();
        let g = TableGame::new(3.5);
        let r = attribute_exact(&g, &set, &AttributionOptions::default()).unwrap();
        assert!(r.values().iter().all(|&v| v == 0.0));
        assert_eq!(r.baseline, Some(3.5));
        assert_eq!(r.grand, Some(3.5));
    }

    #[test]
    fn exact_call_count_is_n_two_to_n() {
        let set = FeatureSet::from_labels(["a", "b", "c", "d"]).unwrap();
        let r = attribute_exact(&TableGame::new(0.0), &set, &AttributionOptions::default()).unwrap();
        assert_eq!(r.call_stats.inference_calls, 64);
        assert_eq!(r.call_stats.cache_hits, 0);
    }

    #[test]
    fn cached_call_count_is_two_to_n() {
        let set = FeatureSet::from_labels(["a", "b", "c", "d"]).unwrap();
        let g = NoisyGame::new(TableGame::new(0.0), 1.0, 9).unwrap();
        let r = attribute_cached(&g, &set, &AttributionOptions::default()).unwrap();
        assert_eq!(r.call_stats.inference_calls, 16);
        assert_eq!(r.call_stats.cache_hits, 64 - 16);
        assert_eq!(g.draws(), 16);
    }

    #[test]
    fn cached_matches_exact_bitwise_on_deterministic_source() {
        let (set, g) = partner_game();
        let opts = AttributionOptions::default();
        let a = attribute_exact(&g, &set, &opts).unwrap();
        let b = attribute_cached(&g, &set, &opts).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn cached_noisy_is_efficient_against_frozen_values() {
        let set = FeatureSet::from_labels(["a", "b", "c", "d", "e"]).unwrap();
        let base = ClosureGame::new("size", |c: &Coalition| c.len() as f64 * 0.3);
        let g = NoisyGame::new(base, 0.5, 21).unwrap();
        let cache = CachingWrapper::new(&g);
        let r = attribute_through_cache(&cache, &set, &AttributionOptions::default()).unwrap();
        let gain = cache.cached(&set.grand()).unwrap() - cache.cached(&Coalition::empty()).unwrap();
        assert!((r.total() - gain).abs() <= 1e-9);
        assert_eq!(r.grand.unwrap() - r.baseline.unwrap(), gain);
    }

    #[test]
    fn parallel_workers_give_identical_scores() {
        let set = FeatureSet::from_labels(["a", "b", "c", "d", "e", "f"]).unwrap();
        let g = ClosureGame::new("quad", |c: &Coalition| {
            let s: f64 = c.members().iter().map(|&m| m as f64).sum();
            s * s - c.len() as f64
        });
        let one = attribute_exact(&g, &set, &AttributionOptions::default()).unwrap();
        let many = attribute_exact(&g, &set, &AttributionOptions::default().with_workers(4)).unwrap();
        assert_eq!(one.values(), many.values());
        let cached = attribute_cached(&g, &set, &AttributionOptions::default().with_workers(4)).unwrap();
        assert_eq!(cached.call_stats.inference_calls, 64);
    }

    #[test]
    fn feature_limit_is_enforced() {
        let set = FeatureSet::from_labels((0..5).map(|i| i.to_string())).unwrap();
        let opts = AttributionOptions::default().with_exhaustive_limit(4);
        assert!(matches!(
            attribute_exact(&TableGame::new(0.0), &set, &opts),
            Err(AttributionError::FeatureLimitExceeded { n: 5, limit: 4 })
        ));
        assert!(attribute_cached(&TableGame::new(0.0), &set, &opts).is_err());
    }

    #[derive(Debug, thiserror::Error)]
    #[error("boom")]
    struct Boom;

    struct FailsAfter(std::sync::atomic::AtomicU64, u64);

    impl PayoffSource for FailsAfter {
        fn evaluate(&self, _: &Coalition) -> Result<f64, crate::error::PayoffError> {
            let k = self.0.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
            if k >= self.1 {
                Err(crate::error::PayoffError::inference(Boom))
            } else {
                Ok(0.0)
            }
        }
        fn is_deterministic(&self) -> bool {
            true
        }
        fn description(&self) -> String {
            "fails".into()
        }
    }

    #[test]
    fn failure_carries_partial_stats() {
        let set = FeatureSet::from_labels(["a", "b", "c"]).unwrap();
        let src = FailsAfter(Default::default(), 5);
        match attribute_exact(&src, &set, &AttributionOptions::default()) {
            Err(AttributionError::Payoff { stats, .. }) => assert_eq!(stats.inference_calls, 6),
            other => panic!("unexpected {other:?}"),
        }
    }
}
