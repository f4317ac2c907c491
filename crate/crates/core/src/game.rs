//! Payoff sources: the value function `h` that maps a coalition to a scalar.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{GameError, PayoffError};
use crate::feature::{Coalition, Feature, FeatureId, FeatureSet};

/// A value function over coalitions, deterministic or stochastic.
///
/// Implementations must return a finite payoff for every coalition,
/// including the empty one.
pub trait PayoffSource: Send + Sync {
    fn evaluate(&self, coalition: &Coalition) -> Result<f64, PayoffError>;

    /// True when repeated evaluation of the same coalition is guaranteed to
    /// return bit-identical payoffs.
    fn is_deterministic(&self) -> bool;

    fn description(&self) -> String;
}

impl<T: PayoffSource + ?Sized> PayoffSource for &T {
    fn evaluate(&self, coalition: &Coalition) -> Result<f64, PayoffError> {
        (**self).evaluate(coalition)
    }
    fn is_deterministic(&self) -> bool {
        (**self).is_deterministic()
    }
    fn description(&self) -> String {
        (**self).description()
    }
}

impl<T: PayoffSource + ?Sized> PayoffSource for Arc<T> {
    fn evaluate(&self, coalition: &Coalition) -> Result<f64, PayoffError> {
        (**self).evaluate(coalition)
    }
    fn is_deterministic(&self) -> bool {
        (**self).is_deterministic()
    }
    fn description(&self) -> String {
        (**self).description()
    }
}

impl<T: PayoffSource + ?Sized> PayoffSource for Box<T> {
    fn evaluate(&self, coalition: &Coalition) -> Result<f64, PayoffError> {
        (**self).evaluate(coalition)
    }
    fn is_deterministic(&self) -> bool {
        (**self).is_deterministic()
    }
    fn description(&self) -> String {
        (**self).description()
    }
}

/// Deterministic game given by an explicit payoff table.
#[derive(Clone, Debug, PartialEq)]
pub struct TableGame {
    entries: HashMap<String, f64>,
    default_payoff: f64,
}

impl TableGame {
    pub fn new(default_payoff: f64) -> Self {
        Self {
            entries: HashMap::new(),
            default_payoff,
        }
    }

    pub fn with_entry<I: IntoIterator<Item = FeatureId>>(mut self, members: I, payoff: f64) -> Self {
        self.insert(&Coalition::from_ids(members), payoff);
        self
    }

    pub fn insert(&mut self, coalition: &Coalition, payoff: f64) {
        self.entries.insert(coalition.key(), payoff);
    }

    pub fn default_payoff(&self) -> f64 {
        self.default_payoff
    }

    pub fn entries(&self) -> &HashMap<String, f64> {
        &self.entries
    }

    /// Tabulates `f` over every subset of `features`.
    pub fn tabulate<F>(features: &FeatureSet, mut f: F) -> Self
    where
        F: FnMut(&Coalition) -> f64,
    {
        let mut game = Self::new(0.0);
        for mask in 0..(1u64 << features.len()) {
            let c = features.coalition_from_mask(mask);
            let v = f(&c);
            game.insert(&c, v);
        }
        game
    }

    fn lookup(&self, coalition: &Coalition) -> f64 {
        self.entries
            .get(&coalition.key())
            .copied()
            .unwrap_or(self.default_payoff)
    }
}

impl PayoffSource for TableGame {
    fn evaluate(&self, coalition: &Coalition) -> Result<f64, PayoffError> {
        Ok(self.lookup(coalition))
    }

    fn is_deterministic(&self) -> bool {
        true
    }

    fn description(&self) -> String {
        format!(
            "table game ({} entries, default {})",
            self.entries.len(),
            self.default_payoff
        )
    }
}

/// Deterministic game backed by a closure, handy for additive or
/// structurally defined games.
pub struct ClosureGame<F> {
    f: F,
    label: String,
}

impl<F> ClosureGame<F>
where
    F: Fn(&Coalition) -> f64 + Send + Sync,
{
    pub fn new(label: impl Into<String>, f: F) -> Self {
        Self {
            f,
            label: label.into(),
        }
    }
}

impl<F> PayoffSource for ClosureGame<F>
where
    F: Fn(&Coalition) -> f64 + Send + Sync,
{
    fn evaluate(&self, coalition: &Coalition) -> Result<f64, PayoffError> {
        let v = (self.f)(coalition);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(PayoffError::NonFinite {
                key: coalition.key(),
                value: v,
            })
        }
    }

    fn is_deterministic(&self) -> bool {
        true
    }

    fn description(&self) -> String {
        self.label.clone()
    }
}

/// Adds zero-mean Gaussian noise to every evaluation of `base`.
///
/// Noise is drawn per call, not per coalition: the `k`-th evaluation uses
/// ChaCha stream `k` of the seeded generator, so two evaluations of the same
/// coalition are independent draws while the whole sequence replays
/// identically for a fixed seed and evaluation order.
pub struct NoisyGame<S> {
    base: S,
    noise: Option<Normal<f64>>,
    noise_std: f64,
    seed: u64,
    draw_counter: AtomicU64,
}

impl<S: PayoffSource> NoisyGame<S> {
    pub fn new(base: S, noise_std: f64, seed: u64) -> Result<Self, GameError> {
        if !noise_std.is_finite() || noise_std < 0.0 {
            return Err(GameError::BadNoise(noise_std));
        }
        let noise = if noise_std > 0.0 {
            Some(Normal::new(0.0, noise_std).map_err(|_| GameError::BadNoise(noise_std))?)
        } else {
            None
        };
        Ok(Self {
            base,
            noise,
            noise_std,
            seed,
            draw_counter: AtomicU64::new(0),
        })
    }

    pub fn base(&self) -> &S {
        &self.base
    }

    pub fn noise_std(&self) -> f64 {
        self.noise_std
    }

    /// Number of evaluations performed so far.
    pub fn draws(&self) -> u64 {
        self.draw_counter.load(Ordering::SeqCst)
    }
}

impl<S: PayoffSource> PayoffSource for NoisyGame<S> {
    fn evaluate(&self, coalition: &Coalition) -> Result<f64, PayoffError> {
        let draw = self.draw_counter.fetch_add(1, Ordering::SeqCst);
        let v = self.base.evaluate(coalition)?;
        match &self.noise {
            None => Ok(v),
            Some(normal) => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                rng.set_stream(draw);
                Ok(v + normal.sample(&mut rng))
            }
        }
    }

    fn is_deterministic(&self) -> bool {
        false
    }

    fn description(&self) -> String {
        format!(
            "noisy({}, std={}, seed={})",
            self.base.description(),
            self.noise_std,
            self.seed
        )
    }
}

/// On-disk representation of a table game.
///
/// ```json
/// { "name": "...", "features": ["a", "b"], "default": 0,
///   "entries": { "{0,1}": 1 } }
/// ```
///
/// `features` is optional; when absent, features `0..=max id` are created
/// with labels equal to their ids.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GameDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub features: Option<Vec<FixtureFeature>>,
    pub default: f64,
    pub entries: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FixtureFeature {
    Label(String),
    Full(Feature),
}

/// A named table game together with the features it is played over.
#[derive(Clone, Debug)]
pub struct GameFixture {
    pub name: String,
    pub features: FeatureSet,
    pub game: TableGame,
}

impl GameFixture {
    pub fn from_document(doc: GameDocument, fallback_name: &str) -> Result<Self, GameError> {
        if !doc.default.is_finite() {
            return Err(GameError::Fixture("default payoff is not finite".into()));
        }
        let mut game = TableGame::new(doc.default);
        let mut max_id: Option<FeatureId> = None;
        for (key, &payoff) in &doc.entries {
            if !payoff.is_finite() {
                return Err(GameError::Fixture(format!("payoff for {key} is not finite")));
            }
            let c = Coalition::parse_key(key)?;
            if let Some(&m) = c.members().last() {
                max_id = Some(max_id.map_or(m, |x| x.max(m)));
            }
            game.insert(&c, payoff);
        }
        let features = match doc.features {
            Some(list) => FeatureSet::new(
                list.into_iter()
                    .enumerate()
                    .map(|(i, f)| match f {
                        FixtureFeature::Label(l) => Feature::labelled(i as FeatureId, l),
                        FixtureFeature::Full(f) => f,
                    })
                    .collect(),
            )?,
            None => {
                let n = max_id.map_or(0, |m| m + 1);
                FeatureSet::from_labels((0..n).map(|i| i.to_string()))?
            }
        };
        for key in doc.entries.keys() {
            let c = Coalition::parse_key(key)?;
            features.mask_of(&c)?;
        }
        Ok(Self {
            name: doc.name.unwrap_or_else(|| fallback_name.to_string()),
            features,
            game,
        })
    }

    pub fn from_json(text: &str, fallback_name: &str) -> Result<Self, GameError> {
        Self::from_document(serde_json::from_str(text)?, fallback_name)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, GameError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "game".into());
        Self::from_json(&text, &stem)
    }
}

/// Built-in copies of the shipped fixture games.
pub mod fixtures {
    use super::GameFixture;

    pub const WINDOW_COUNTEREXAMPLE: &str =
        include_str!("../../../fixtures/games/window_counterexample.json");
    pub const COUNTERFACTUAL_COUNTEREXAMPLE: &str =
        include_str!("../../../fixtures/games/counterfactual_counterexample.json");
    pub const DUMMY_EXTENSION: &str = include_str!("../../../fixtures/games/dummy_extension.json");

    /// Four features a..d; `{a,b}` and `{b,c}` pay 1, the grand coalition 2.
    pub fn window_counterexample() -> GameFixture {
        GameFixture::from_json(WINDOW_COUNTEREXAMPLE, "window_counterexample").expect("shipped fixture")
    }

    /// Two features that only pay together.
    pub fn counterfactual_counterexample() -> GameFixture {
        GameFixture::from_json(COUNTERFACTUAL_COUNTEREXAMPLE, "counterfactual_counterexample")
            .expect("shipped fixture")
    }

    /// The two-feature game plus a dummy third feature.
    pub fn dummy_extension() -> GameFixture {
        GameFixture::from_json(DUMMY_EXTENSION, "dummy_extension").expect("shipped fixture")
    }

    pub fn all() -> Vec<GameFixture> {
        vec![
            window_counterexample(),
            counterfactual_counterexample(),
            dummy_extension(),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_game_defaults_unlisted() {
        let g = TableGame::new(-1.5).with_entry([0, 1], 2.0);
        assert_eq!(g.evaluate(&Coalition::from_ids([1, 0])).unwrap(), 2.0);
        assert_eq!(g.evaluate(&Coalition::empty()).unwrap(), -1.5);
        assert!(g.is_deterministic());
    }

    #[test]
    fn noisy_game_redraws_same_coalition() {
        let g = NoisyGame::new(TableGame::new(0.0), 1.0, 7).unwrap();
        let c = Coalition::from_ids([0]);
        let a = g.evaluate(&c).unwrap();
        let b = g.evaluate(&c).unwrap();
        assert_ne!(a, b);
        assert!(!g.is_deterministic());
        assert_eq!(g.draws(), 2);
    }

    #[test]
    fn noisy_game_zero_std_equals_base() {
        let base = TableGame::new(0.25).with_entry([0], 0.75);
        let g = NoisyGame::new(base.clone(), 0.0, 1).unwrap();
        for ids in [vec![], vec![0], vec![0, 1]] {
            let c = Coalition::from_ids(ids);
            assert_eq!(g.evaluate(&c).unwrap(), base.evaluate(&c).unwrap());
        }
    }

    #[test]
    fn noisy_game_replays_with_same_seed() {
        let run = |seed| {
            let g = NoisyGame::new(TableGame::new(0.0), 0.5, seed).unwrap();
            (0..20)
                .map(|i| g.evaluate(&Coalition::from_ids([i % 3])).unwrap())
                .collect::<Vec<_>>()
        };
        assert_eq!(run(3), run(3));
        assert_ne!(run(3), run(4));
    }

    #[test]
    fn noisy_game_rejects_negative_std() {
        assert!(NoisyGame::new(TableGame::new(0.0), -0.1, 0).is_err());
        assert!(NoisyGame::new(TableGame::new(0.0), f64::NAN, 0).is_err());
    }

    #[test]
    fn closure_game_rejects_non_finite() {
        let g = ClosureGame::new("nan", |_| f64::NAN);
        assert!(matches!(
            g.evaluate(&Coalition::empty()),
            Err(PayoffError::NonFinite { .. })
        ));
    }

    #[test]
    fn fixture_without_features_infers_ids() {
        let fx = GameFixture::from_json(r#"{"default": 0, "entries": {"{0,2}": 1}}"#, "x").unwrap();
        assert_eq!(fx.features.len(), 3);
        assert_eq!(fx.name, "x");
    }

    #[test]
    fn fixture_rejects_unknown_ids() {
        let text = r#"{"features": ["a"], "default": 0, "entries": {"{0,1}": 1}}"#;
        assert!(GameFixture::from_json(text, "x").is_err());
    }

    #[test]
    fn shipped_fixtures_parse() {
        let w = fixtures::window_counterexample();
        assert_eq!(w.features.len(), 4);
        let labels: Vec<_> = w.features.iter().map(|f| f.label.as_str()).collect();
        assert_eq!(labels, ["a", "b", "c", "d"]);
        assert_eq!(w.game.evaluate(&w.features.grand()).unwrap(), 2.0);
        assert_eq!(w.game.evaluate(&Coalition::from_ids([0, 1])).unwrap(), 1.0);
        assert_eq!(w.game.evaluate(&Coalition::from_ids([1, 2])).unwrap(), 1.0);
        assert_eq!(w.game.evaluate(&Coalition::from_ids([0, 2])).unwrap(), 0.0);

        let c = fixtures::counterfactual_counterexample();
        assert_eq!(c.features.len(), 2);
        assert_eq!(c.game.evaluate(&c.features.grand()).unwrap(), 1.0);
        assert_eq!(c.game.evaluate(&Coalition::empty()).unwrap(), 0.0);

        let d = fixtures::dummy_extension();
        assert_eq!(d.features.len(), 3);
    }
}
