//! Shapley coalition weights and a compensated accumulator.

use crate::error::AttributionError;

/// Weight `s!·(n−s−1)!/n!` of a coalition of size `s` that excludes the
/// player, in a game of `n` players.
///
/// Computed as `1 / (n · C(n−1, s))` with a multiplicative binomial, so no
/// factorial is ever materialised.
pub fn shapley_weight(s: usize, n: usize) -> Result<f64, AttributionError> {
    if n == 0 || s >= n {
        return Err(AttributionError::InvalidArgument(format!(
            "coalition size {s} must be below player count {n}"
        )));
    }
    Ok(1.0 / (n as f64 * binomial(n - 1, s)))
}

/// Weights for every coalition size `0..n`, indexed by size.
pub fn weight_table(n: usize) -> Result<Vec<f64>, AttributionError> {
    (0..n).map(|s| shapley_weight(s, n)).collect()
}

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Self::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: u64) -> f64 {
        (1..=n).map(|k| k as f64).product()
    }

    #[test]
    fn single_player_gets_full_weight() {
        assert_eq!(shapley_weight(0, 1).unwrap(), 1.0);
    }

    #[test]
    fn matches_direct_factorials() {
        // 1!·1!/3! = 1/6
        assert!((shapley_weight(1, 3).unwrap() - 1.0 / 6.0).abs() < 1e-15);
        for n in 1..=15u64 {
            for s in 0..n {
                let direct = factorial(s) * factorial(n - s - 1) / factorial(n);
                let w = shapley_weight(s as usize, n as usize).unwrap();
                assert!(((w - direct) / direct).abs() < 1e-12, "s={s} n={n}");
            }
        }
    }

    #[test]
    fn weights_over_subsets_sum_to_one() {
        for n in 1..=25usize {
            // Σ_s C(n−1, s)·w(s, n) over all subsets of X\{x}
            let total: CompensatedSum = (0..n)
                .map(|s| binomial(n - 1, s) * shapley_weight(s, n).unwrap())
                .collect();
            assert!((total.value() - 1.0).abs() < 1e-12, "n={n}");
        }
        let by_subset: f64 = (0u32..16)
            .map(|m| shapley_weight(m.count_ones() as usize, 5).unwrap())
            .sum();
        assert!((by_subset - 1.0).abs() < 1e-12);
    }

    #[test]
    fn finite_up_to_twenty_five() {
        for s in 0..25 {
            let w = shapley_weight(s, 25).unwrap();
            assert!(w.is_finite() && w > 0.0);
        }
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(shapley_weight(3, 3).is_err());
        assert!(shapley_weight(0, 0).is_err());
    }

    #[test]
    fn compensated_sum_recovers_cancellation() {
        let xs = [1e16, 1.0, -1e16, 1.0];
        let naive: f64 = xs.iter().sum();
        let comp: CompensatedSum = xs.into_iter().collect();
        assert_eq!(comp.value(), 2.0);
        assert_ne!(naive, 2.0);
    }
}
