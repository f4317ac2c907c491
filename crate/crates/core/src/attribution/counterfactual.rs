use std::time::Instant;

use super::engine::Evaluator;
use super::sampling::SampleMean;
use super::{AttributionOptions, AttributionResult, Method};
use crate::error::AttributionError;
use crate::feature::FeatureSet;
use crate::game::PayoffSource;

/// Leave-one-out attribution `h(X) − h(X\{x})`: `n+1` evaluations.
pub fn attribute_counterfactual<S: PayoffSource>(
    source: &S,
    features: &FeatureSet,
    options: &AttributionOptions,
) -> Result<AttributionResult, AttributionError> {
    let started = Instant::now();
    let sampled;
    let source: &dyn PayoffSource = if options.samples > 1 {
        sampled = SampleMean::new(source, options.samples);
        &sampled
    } else {
        source
    };
    let mut eval = Evaluator::new(source, features, options)?;
    let full = eval.full_mask();
    let masks: Vec<u64> = std::iter::once(full)
        .chain((0..features.len()).map(|x| full & !(1u64 << x)))
        .collect();
    let values = eval.eval(&masks).map_err(|source| AttributionError::Payoff {
        source,
        stats: eval.stats(),
    })?;
    let grand = values[0];
    let scores = values[1..].iter().map(|v| grand - v).collect();
    Ok(AttributionResult::build(
        Method::Counterfactual,
        features,
        scores,
        eval.observed,
        eval.stats(),
        options.samples,
        started,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feature::Coalition;
    use crate::game::{fixtures, ClosureGame, TableGame};

    #[test]
    fn both_players_get_full_credit() {
        let fx = fixtures::counterfactual_counterexample();
        let r = attribute_counterfactual(&fx.game, &fx.features, &AttributionOptions::default()).unwrap();
        assert_eq!(r.values(), vec![1.0, 1.0]);
        assert_eq!(r.total(), 2.0);
        assert_eq!(r.call_stats.inference_calls, 3);
        // n = 2: ∅ is never evaluated
        assert_eq!(r.baseline, None);
        assert_eq!(r.grand, Some(1.0));
    }

    #[test]
    fn additive_game_recovers_coefficients() {
        let coef = [0.5, -2.0, 3.25, 0.0];
        let set = FeatureSet::from_labels(["a", "b", "c", "d"]).unwrap();
        let g = ClosureGame::new("additive", move |c: &Coalition| {
            c.members().iter().map(|&m| coef[m as usize]).sum()
        });
        let r = attribute_counterfactual(&g, &set, &AttributionOptions::default()).unwrap();
        for (got, want) in r.values().iter().zip(coef) {
            assert!((got - want).abs() < 1e-12);
        }
        assert_eq!(r.call_stats.inference_calls, 5);
    }

    #[test]
    fn null_feature_scores_zero() {
        let fx = fixtures::dummy_extension();
        let r = attribute_counterfactual(&fx.game, &fx.features, &AttributionOptions::default()).unwrap();
        assert_eq!(r.score_by_label("c"), Some(0.0));
    }

    #[test]
    fn single_feature_sees_baseline() {
        let set = FeatureSet::from_labels(["only"]).unwrap();
        let g = TableGame::new(0.25).with_entry([0], 1.0);
        let r = attribute_counterfactual(&g, &set, &AttributionOptions::default()).unwrap();
        assert_eq!(r.values(), vec![0.75]);
        assert_eq!(r.baseline, Some(0.25));
    }
}
