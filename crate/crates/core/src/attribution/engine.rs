//! Batched coalition evaluation with an optional worker pool.

use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;

use super::{AttributionError, AttributionOptions, CallStats, MAX_FEATURES};
use crate::error::PayoffError;
use crate::feature::FeatureSet;
use crate::game::PayoffSource;

/// Last payoffs seen for `∅` and `X`, in enumeration order.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct Observed {
    pub empty: Option<f64>,
    pub grand: Option<f64>,
}

pub(crate) fn check_size(n: usize, limit: usize) -> Result<(), AttributionError> {
    let limit = limit.min(MAX_FEATURES);
    if n > limit {
        return Err(AttributionError::FeatureLimitExceeded { n, limit });
    }
    Ok(())
}

/// Evaluates batches of coalition masks against one source.
///
/// Results come back in request order whatever the completion order, so
/// downstream sums are independent of scheduling.
pub(crate) struct Evaluator<'a, S: ?Sized> {
    source: &'a S,
    features: &'a FeatureSet,
    full_mask: u64,
    pool: Option<rayon::ThreadPool>,
    calls: AtomicU64,
    pub observed: Observed,
}

impl<'a, S: PayoffSource + ?Sized> Evaluator<'a, S> {
    pub fn new(
        source: &'a S,
        features: &'a FeatureSet,
        options: &AttributionOptions,
    ) -> Result<Self, AttributionError> {
        options.validate()?;
        check_size(features.len(), MAX_FEATURES)?;
        let pool = if options.workers > 1 {
            Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(options.workers)
                    .build()
                    .map_err(|e| AttributionError::InvalidArgument(e.to_string()))?,
            )
        } else {
            None
        };
        Ok(Self {
            source,
            features,
            full_mask: (1u64 << features.len()) - 1,
            pool,
            calls: AtomicU64::new(0),
            observed: Observed::default(),
        })
    }

    pub fn full_mask(&self) -> u64 {
        self.full_mask
    }

    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::SeqCst)
    }

    fn one(&self, mask: u64) -> Result<f64, PayoffError> {
        let coalition = self.features.coalition_from_mask(mask);
        self.calls.fetch_add(1, Ordering::SeqCst);
        let v = self.source.evaluate(&coalition)?;
        if !v.is_finite() {
            return Err(PayoffError::NonFinite {
                key: coalition.key(),
                value: v,
            });
        }
        Ok(v)
    }

    /// Evaluates `masks` in order. On failure the payoff error is returned
    /// so the caller can attach its own call statistics.
    pub fn eval(&mut self, masks: &[u64]) -> Result<Vec<f64>, PayoffError> {
        let values = match &self.pool {
            None => masks.iter().map(|&m| self.one(m)).collect::<Result<Vec<_>, _>>()?,
            Some(pool) => {
                let this = &*self;
                pool.install(|| {
                    masks
                        .par_iter()
                        .map(|&m| this.one(m))
                        .collect::<Result<Vec<_>, _>>()
                })?
            }
        };
        for (&m, &v) in masks.iter().zip(&values) {
            if m == 0 {
                self.observed.empty = Some(v);
            }
            if m == self.full_mask {
                self.observed.grand = Some(v);
            }
        }
        Ok(values)
    }

    pub fn stats(&self) -> CallStats {
        CallStats {
            inference_calls: self.calls(),
            cache_hits: 0,
        }
    }
}
