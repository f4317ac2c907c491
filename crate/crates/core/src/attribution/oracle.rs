use std::time::Instant;

use super::engine::{check_size, Evaluator};
use super::{AttributionOptions, AttributionResult, Method};
use crate::error::AttributionError;
use crate::feature::FeatureSet;
use crate::game::PayoffSource;
use crate::weight::CompensatedSum;

/// Largest feature set the permutation oracle accepts (8! orderings).
pub const ORACLE_LIMIT: usize = 8;

/// Shapley values as the average marginal contribution over all `n!`
/// orderings of the players.
///
/// Shares no code path with the subset-weighted sum, so it serves as an
/// independent reference for the other methods. Each coalition is evaluated
/// once up front, which is why the source must be deterministic.
pub fn attribute_oracle<S: PayoffSource>(
    source: &S,
    features: &FeatureSet,
) -> Result<AttributionResult, AttributionError> {
    let started = Instant::now();
    let n = features.len();
    check_size(n, ORACLE_LIMIT)?;
    if !source.is_deterministic() {
        return Err(AttributionError::NonDeterministicSource);
    }
    let mut eval = Evaluator::new(source, features, &AttributionOptions::default())?;
    let masks: Vec<u64> = (0..1u64 << n).collect();
    let table = eval.eval(&masks).map_err(|source| AttributionError::Payoff {
        source,
        stats: eval.stats(),
    })?;

    let mut sums = vec![CompensatedSum::new(); n];
    let mut orderings = 0u64;
    let mut order: Vec<usize> = (0..n).collect();
    for_each_permutation(&mut order, n, &mut |perm| {
        orderings += 1;
        let mut prefix = 0u64;
        for &x in perm {
            let next = prefix | 1 << x;
            sums[x].add(table[next as usize] - table[prefix as usize]);
            prefix = next;
        }
    });
    let scores = sums
        .iter()
        .map(|s| s.value() / orderings as f64)
        .collect();
    Ok(AttributionResult::build(
        Method::Oracle,
        features,
        scores,
        eval.observed,
        eval.stats(),
        1,
        started,
    ))
}

// Heap's algorithm.
fn for_each_permutation(items: &mut [usize], k: usize, f: &mut impl FnMut(&[usize])) {
    if k <= 1 {
        f(items);
        return;
    }
    for i in 0..k - 1 {
        for_each_permutation(items, k - 1, f);
        if k.is_multiple_of(2) {
            items.swap(i, k - 1);
        } else {
            items.swap(0, k - 1);
        }
    }
    for_each_permutation(items, k - 1, f);
}
