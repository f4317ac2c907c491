//! Game-theoretic feature attribution for stochastic payoff functions.
//!
//! A [`PayoffSource`] maps coalitions of features to a scalar payoff. The
//! [`attribution`] module distributes `h(X) − h(∅)` over the features with
//! four methods (exact Shapley, cached Shapley, sliding window,
//! counterfactual) plus a permutation oracle, and [`audit`] checks the
//! efficiency, symmetry and null-player axioms against the results.

pub mod attribution;
pub mod audit;
pub mod cache;
pub mod error;
pub mod feature;
pub mod game;
pub mod weight;

pub use attribution::{
    attribute, attribute_cached, attribute_counterfactual, attribute_exact, attribute_oracle,
    attribute_sliding_window, attribute_through_cache, expected_calls, sample_mean_payoff,
    AttributionOptions, AttributionResult, CallStats, FeatureScore, Method, OutsideFeatures,
    SampleMean, WindowSpec,
};
pub use cache::CachingWrapper;
pub use error::{AttributionError, AuditError, GameError, PayoffError};
pub use feature::{canonical_key, Coalition, Feature, FeatureId, FeatureSet, EMPTY_KEY};
pub use game::{ClosureGame, GameFixture, NoisyGame, PayoffSource, TableGame};
pub use weight::{shapley_weight, CompensatedSum};
