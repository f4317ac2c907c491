//! Features, feature sets and order-invariant coalitions.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::GameError;

/// Stable identifier of a feature inside a [`FeatureSet`].
pub type FeatureId = u32;

/// A text fragment playing the role of a player in the attribution game.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Feature {
    pub id: FeatureId,
    pub label: String,
    /// Text inserted into prompts when the feature is present. May be empty.
    #[serde(default)]
    pub content: String,
}

impl Feature {
    pub fn new(id: FeatureId, label: impl Into<String>, content: impl Into<String>) -> Self {
        Self {
            id,
            label: label.into(),
            content: content.into(),
        }
    }

    /// A feature whose label doubles as its prompt content.
    pub fn labelled(id: FeatureId, label: impl Into<String>) -> Self {
        let label = label.into();
        Self {
            id,
            content: label.clone(),
            label,
        }
    }
}

/// Ordered, non-empty collection of features.
///
/// The order is significant: it is the traversal order of the sliding
/// window and the order in which coalition members are rendered.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FeatureSet {
    features: Vec<Feature>,
}

impl FeatureSet {
    pub fn new(features: Vec<Feature>) -> Result<Self, GameError> {
        if features.is_empty() {
            return Err(GameError::EmptyFeatureSet);
        }
        let mut ids = HashSet::new();
        let mut labels = HashSet::new();
        for f in &features {
            if f.label.is_empty() {
                return Err(GameError::EmptyLabel(f.id));
            }
            if !ids.insert(f.id) {
                return Err(GameError::DuplicateId(f.id));
            }
            if !labels.insert(f.label.as_str()) {
                return Err(GameError::DuplicateLabel(f.label.clone()));
            }
        }
        Ok(Self { features })
    }

    /// Features `0..labels.len()` labelled (and contented) by `labels`.
    pub fn from_labels<I, S>(labels: I) -> Result<Self, GameError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let features = labels
            .into_iter()
            .enumerate()
            .map(|(i, l)| Feature::labelled(i as FeatureId, l))
            .collect();
        Self::new(features)
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    /// Always false; kept for API symmetry with `len`.
    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn features(&self) -> &[Feature] {
        &self.features
    }

    pub fn get(&self, index: usize) -> Option<&Feature> {
        self.features.get(index)
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Feature> {
        self.features.iter()
    }

    pub fn ids(&self) -> impl Iterator<Item = FeatureId> + '_ {
        self.features.iter().map(|f| f.id)
    }

    pub fn index_of(&self, id: FeatureId) -> Option<usize> {
        self.features.iter().position(|f| f.id == id)
    }

    pub fn index_of_label(&self, label: &str) -> Option<usize> {
        self.features.iter().position(|f| f.label == label)
    }

    /// The grand coalition X.
    pub fn grand(&self) -> Coalition {
        Coalition::from_ids(self.ids())
    }

    /// Bitmask over feature *indices* to a coalition of feature *ids*.
    pub fn coalition_from_mask(&self, mask: u64) -> Coalition {
        Coalition::from_ids(
            self.features
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, f)| f.id),
        )
    }

    /// Inverse of [`FeatureSet::coalition_from_mask`]; fails if the coalition
    /// mentions an id outside the set.
    pub fn mask_of(&self, coalition: &Coalition) -> Result<u64, GameError> {
        let mut mask = 0u64;
        for &id in coalition.members() {
            let idx = self.index_of(id).ok_or(GameError::UnknownFeature(id))?;
            mask |= 1 << idx;
        }
        Ok(mask)
    }
}

impl<'a> IntoIterator for &'a FeatureSet {
    type Item = &'a Feature;
    type IntoIter = std::slice::Iter<'a, Feature>;

    fn into_iter(self) -> Self::IntoIter {
        self.features.iter()
    }
}

/// Key of the empty coalition.
pub const EMPTY_KEY: &str = "{}";

/// Order-invariant set of feature ids.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Coalition {
    // sorted ascending, no duplicates
    members: Vec<FeatureId>,
}

impl Coalition {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn from_ids<I: IntoIterator<Item = FeatureId>>(ids: I) -> Self {
        let mut members: Vec<FeatureId> = ids.into_iter().collect();
        members.sort_unstable();
        members.dedup();
        Self { members }
    }

    pub fn members(&self) -> &[FeatureId] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, id: FeatureId) -> bool {
        self.members.binary_search(&id).is_ok()
    }

    pub fn with(&self, id: FeatureId) -> Self {
        let mut members = self.members.clone();
        if let Err(pos) = members.binary_search(&id) {
            members.insert(pos, id);
        }
        Self { members }
    }

    pub fn without(&self, id: FeatureId) -> Self {
        Self {
            members: self.members.iter().copied().filter(|&m| m != id).collect(),
        }
    }

    pub fn key(&self) -> String {
        canonical_key(self.members.iter().copied())
    }

    /// Parses a key produced by [`canonical_key`]. Whitespace and member
    /// order are tolerated so hand-written fixtures stay forgiving.
    pub fn parse_key(key: &str) -> Result<Self, GameError> {
        let inner = key
            .trim()
            .strip_prefix('{')
            .and_then(|k| k.strip_suffix('}'))
            .ok_or_else(|| GameError::BadKey(key.to_string()))?;
        if inner.trim().is_empty() {
            return Ok(Self::empty());
        }
        let ids = inner
            .split(',')
            .map(|t| t.trim().parse::<FeatureId>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| GameError::BadKey(key.to_string()))?;
        Ok(Self::from_ids(ids))
    }
}

impl fmt::Display for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.key())
    }
}

impl FromIterator<FeatureId> for Coalition {
    fn from_iter<I: IntoIterator<Item = FeatureId>>(iter: I) -> Self {
        Self::from_ids(iter)
    }
}

/// Canonical cache key of a set of feature ids: members sorted ascending,
/// comma-joined, wrapped in braces. The empty set maps to [`EMPTY_KEY`].
pub fn canonical_key<I: IntoIterator<Item = FeatureId>>(members: I) -> String {
    let mut ids: Vec<FeatureId> = members.into_iter().collect();
    ids.sort_unstable();
    ids.dedup();
    let body = ids
        .iter()
        .map(|id| id.to_string())
        .collect::<Vec<_>>()
        .join(",");
    format!("{{{body}}}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    #[test]
    fn key_is_order_invariant() {
        assert_eq!(canonical_key([3, 1, 2]), canonical_key([2, 3, 1]));
        assert_eq!(canonical_key([3, 1, 2]), "{1,2,3}");
    }

    #[test]
    fn empty_key_is_distinguished() {
        assert_eq!(canonical_key([]), EMPTY_KEY);
        assert_ne!(canonical_key([0]), EMPTY_KEY);
    }

    #[test]
    fn keys_are_injective_over_small_universe() {
        let mut seen = HashMap::new();
        for mask in 0u32..(1 << 10) {
            let ids: Vec<u32> = (0..10).filter(|i| mask >> i & 1 == 1).collect();
            let key = canonical_key(ids);
            assert!(seen.insert(key, mask).is_none());
        }
        assert_ne!(canonical_key([7]), canonical_key([7, 8]));
        assert_ne!(canonical_key([1, 2]), canonical_key([12]));
    }

    #[test]
    fn parse_key_round_trips() {
        for key in ["{}", "{0}", "{1,5,9}"] {
            assert_eq!(Coalition::parse_key(key).unwrap().key(), key);
        }
        assert_eq!(Coalition::parse_key("{ 2, 0 }").unwrap().key(), "{0,2}");
        assert!(Coalition::parse_key("1,2").is_err());
        assert!(Coalition::parse_key("{a}").is_err());
    }

    #[test]
    fn feature_set_rejects_bad_input() {
        assert!(matches!(FeatureSet::new(vec![]), Err(GameError::EmptyFeatureSet)));
        let dup = vec![Feature::labelled(1, "a"), Feature::labelled(1, "b")];
        assert!(matches!(FeatureSet::new(dup), Err(GameError::DuplicateId(1))));
        let blank = vec![Feature::new(0, "", "x")];
        assert!(matches!(FeatureSet::new(blank), Err(GameError::EmptyLabel(0))));
        // empty content is fine
        assert!(FeatureSet::new(vec![Feature::new(0, "a", "")]).is_ok());
    }

    #[test]
    fn masks_map_indices_to_ids() {
        let set = FeatureSet::new(vec![
            Feature::labelled(10, "a"),
            Feature::labelled(4, "b"),
            Feature::labelled(7, "c"),
        ])
        .unwrap();
        let c = set.coalition_from_mask(0b101);
        assert_eq!(c.members(), &[7, 10]);
        assert_eq!(set.mask_of(&c).unwrap(), 0b101);
        assert!(set.mask_of(&Coalition::from_ids([99])).is_err());
    }
}
