use llmshap_core::AttributionResult;

use crate::embedding::cosine;
use crate::error::CompareError;

/// Cosine similarity between two attribution vectors, aligned by feature
/// id. `gold` is the reference ordering.
pub fn compare_attributions(a: &AttributionResult, gold: &AttributionResult) -> Result<f64, CompareError> {
    if a.scores.len() != gold.scores.len() {
        return Err(CompareError::FeatureMismatch);
    }
    let mut lhs = Vec::with_capacity(gold.scores.len());
    let rhs: Vec<f64> = gold.scores.iter().map(|s| s.score).collect();
    for g in &gold.scores {
        lhs.push(a.score(g.id).ok_or(CompareError::FeatureMismatch)?);
    }
    Ok(cosine(&lhs, &rhs)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use llmshap_core::{
        attribute_cached, attribute_exact, AttributionOptions, ClosureGame, Coalition, FeatureSet,
    };
    use proptest::prelude::*;

    fn game() -> (FeatureSet, impl llmshap_core::PayoffSource) {
        let set = FeatureSet::from_labels(["a", "b", "c", "d"]).unwrap();
        let g = ClosureGame::new("g", |c: &Coalition| {
            let s: f64 = c.members().iter().map(|&m| m as f64 + 1.0).sum();
            s.sqrt()
        });
        (set, g)
    }

    #[test]
    fn identical_and_scaled() {
        let (set, g) = game();
        let gold = attribute_exact(&g, &set, &AttributionOptions::default()).unwrap();
        assert!((compare_attributions(&gold, &gold).unwrap() - 1.0).abs() < 1e-15);
        let mut doubled = gold.clone();
        for s in &mut doubled.scores {
            s.score *= 2.0;
        }
        assert!((compare_attributions(&doubled, &gold).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cached_matches_exact_on_deterministic_game() {
        let (set, g) = game();
        let opts = AttributionOptions::default();
        let gold = attribute_exact(&g, &set, &opts).unwrap();
        let cs = attribute_cached(&g, &set, &opts).unwrap();
        assert!((compare_attributions(&cs, &gold).unwrap() - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn zero_vector_and_mismatch() {
        let (set, _) = game();
        let zero = attribute_exact(&llmshap_core::TableGame::new(1.0), &set, &AttributionOptions::default())
            .unwrap();
        assert!(matches!(
            compare_attributions(&zero, &zero),
            Err(CompareError::Similarity(_))
        ));
        let mut other = zero.clone();
        other.scores.pop();
        assert!(matches!(
            compare_attributions(&other, &zero),
            Err(CompareError::FeatureMismatch)
        ));
    }

    proptest! {
        #[test]
        fn invariant_under_positive_scaling(k in 0.001f64..1000.0, j in 0.001f64..1000.0) {
            let (set, g) = game();
            let gold = attribute_exact(&g, &set, &AttributionOptions::default()).unwrap();
            let mut a = gold.clone();
            a.scores[0].score += 0.3;
            let base = compare_attributions(&a, &gold).unwrap();
            let mut ak = a.clone();
            for s in &mut ak.scores { s.score *= k; }
            let mut gj = gold.clone();
            for s in &mut gj.scores { s.score *= j; }
            prop_assert!((compare_attributions(&ak, &gj).unwrap() - base).abs() < 1e-12);
        }
    }
}
