//! Memoizing inference wrapper with an order-invariant coalition cache.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, PoisonError};

use crate::error::PayoffError;
use crate::feature::Coalition;
use crate::game::PayoffSource;

#[derive(Default)]
struct Slot {
    value: Mutex<Option<f64>>,
}

/// Freezes the first successful draw of every coalition.
///
/// Concurrent misses on the same key are single-flight: the first caller
/// evaluates the inner source while the others wait on the key's slot and
/// then read the stored value. Failures are not stored, so the next caller
/// for that key retries.
pub struct CachingWrapper<S> {
    inner: S,
    slots: Mutex<HashMap<String, Arc<Slot>>>,
    calls_to_inner: AtomicU64,
    cache_hits: AtomicU64,
}

impl<S: PayoffSource> CachingWrapper<S> {
    pub fn new(inner: S) -> Self {
        Self {
            inner,
            slots: Mutex::new(HashMap::new()),
            calls_to_inner: AtomicU64::new(0),
            cache_hits: AtomicU64::new(0),
        }
    }

    pub fn inner(&self) -> &S {
        &self.inner
    }

    pub fn calls_to_inner(&self) -> u64 {
        self.calls_to_inner.load(Ordering::SeqCst)
    }

    pub fn cache_hits(&self) -> u64 {
        self.cache_hits.load(Ordering::SeqCst)
    }

    /// Number of coalitions with a stored payoff.
    pub fn len(&self) -> usize {
        let slots = self.slots.lock().unwrap_or_else(PoisonError::into_inner);
        slots
            .values()
            .filter(|s| s.value.lock().unwrap_or_else(PoisonError::into_inner).is_some())
            .count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The frozen payoff of `coalition`, if it has been evaluated.
    pub fn cached(&self, coalition: &Coalition) -> Option<f64> {
        let slot = {
            let slots = self.slots.lock().unwrap_or_else(PoisonError::into_inner);
            slots.get(&coalition.key()).cloned()
        }?;
        let v = *slot.value.lock().unwrap_or_else(PoisonError::into_inner);
        v
    }

    fn slot(&self, key: String) -> Arc<Slot> {
        let mut slots = self.slots.lock().unwrap_or_else(PoisonError::into_inner);
        slots.entry(key).or_default().clone()
    }
}

impl<S: PayoffSource> PayoffSource for CachingWrapper<S> {
    fn evaluate(&self, coalition: &Coalition) -> Result<f64, PayoffError> {
        let slot = self.slot(coalition.key());
        // Holding the slot lock across the inner call is what makes misses
        // single-flight per key; other keys proceed independently.
        let mut value = slot.value.lock().unwrap_or_else(PoisonError::into_inner);
        if let Some(v) = *value {
            self.cache_hits.fetch_add(1, Ordering::SeqCst);
            return Ok(v);
        }
        self.calls_to_inner.fetch_add(1, Ordering::SeqCst);
        let v = self.inner.evaluate(coalition)?;
        *value = Some(v);
        Ok(v)
    }

    fn is_deterministic(&self) -> bool {
        true
    }

    fn description(&self) -> String {
        format!("cached({})", self.inner.description())
    }
}
