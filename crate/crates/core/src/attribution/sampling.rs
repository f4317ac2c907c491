use crate::error::PayoffError;
use crate::feature::Coalition;
use crate::game::PayoffSource;
use crate::weight::CompensatedSum;

/// Arithmetic mean of `n_samples` independent evaluations of `coalition`.
/// Any failed draw aborts the whole mean.
pub fn sample_mean_payoff<S: PayoffSource + ?Sized>(
    source: &S,
    coalition: &Coalition,
    n_samples: usize,
) -> Result<f64, PayoffError> {
    if n_samples == 0 {
        return Err(PayoffError::NoSamples);
    }
    if n_samples == 1 {
        return source.evaluate(coalition);
    }
    let mut acc = CompensatedSum::new();
    for _ in 0..n_samples {
        acc.add(source.evaluate(coalition)?);
    }
    Ok(acc.value() / n_samples as f64)
}

/// `h_n`: a source whose every evaluation is the mean of `samples` draws.
pub struct SampleMean<S> {
    inner: S,
    samples: usize,
}

impl<S: PayoffSource> SampleMean<S> {
    pub fn new(inner: S, samples: usize) -> Self {
        Self { inner, samples }
    }

    pub fn samples(&self) -> usize {
        self.samples
    }
}

impl<S: PayoffSource> PayoffSource for SampleMean<S> {
    fn evaluate(&self, coalition: &Coalition) -> Result<f64, PayoffError> {
        sample_mean_payoff(&self.inner, coalition, self.samples)
    }

    fn is_deterministic(&self) -> bool {
        self.inner.is_deterministic()
    }

    fn description(&self) -> String {
        format!("mean of {} draws of {}", self.samples, self.inner.description())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{NoisyGame, TableGame};

    #[test]
    fn deterministic_mean_is_the_value() {
        let g = TableGame::new(0.3).with_entry([1], 0.7);
        let c = Coalition::from_ids([1]);
        for n in [1, 2, 17] {
            assert_eq!(sample_mean_payoff(&g, &c, n).unwrap(), 0.7);
        }
    }

    #[test]
    fn one_sample_is_one_raw_draw() {
        let a = NoisyGame::new(TableGame::new(0.0), 1.0, 42).unwrap();
        let b = NoisyGame::new(TableGame::new(0.0), 1.0, 42).unwrap();
        let c = Coalition::empty();
        assert_eq!(sample_mean_payoff(&a, &c, 1).unwrap(), b.evaluate(&c).unwrap());
        assert_eq!(a.draws(), 1);
    }

    #[test]
    fn mean_of_unit_noise_shrinks() {
        // standard error 1/sqrt(10000) = 0.01
        let g = NoisyGame::new(TableGame::new(0.0), 1.0, 2024).unwrap();
        let m = sample_mean_payoff(&g, &Coalition::empty(), 10_000).unwrap();
        assert!(m.abs() < 0.05, "{m}");
        assert_eq!(g.draws(), 10_000);
    }

    #[test]
    fn zero_samples_rejected() {
        assert!(matches!(
            sample_mean_payoff(&TableGame::new(0.0), &Coalition::empty(), 0),
            Err(PayoffError::NoSamples)
        ));
    }
}
