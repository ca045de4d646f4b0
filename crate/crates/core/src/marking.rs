//! Markings: multisets of tokens over place names.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// A multiset over places. Places with zero tokens are never stored, so two
/// markings compare equal iff they assign the same count to every place.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Marking(BTreeMap<String, u32>);

impl Marking {
    pub fn new() -> Self {
        Self::default()
    }

    /// Set-valued marking with one token in each listed place.
    pub fn from_places<I, S>(places: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut m = Self::new();
        for p in places {
            m.add(p, 1);
        }
        m
    }

    pub fn get(&self, place: &str) -> u32 {
        self.0.get(place).copied().unwrap_or(0)
    }

    pub fn set(&mut self, place: impl Into<String>, count: u32) {
        let place = place.into();
        if count == 0 {
            self.0.remove(&place);
        } else {
            self.0.insert(place, count);
        }
    }

    pub fn add(&mut self, place: impl Into<String>, count: u32) {
        if count == 0 {
            return;
        }
        *self.0.entry(place.into()).or_insert(0) += count;
    }

    /// Marked places with their counts, in place-name order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, u32)> {
        self.0.iter().map(|(p, &n)| (p.as_str(), n))
    }

    /// Places carrying at least one token.
    pub fn support(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(String::as_str)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.0.values().map(|&n| n as u64).sum()
    }

    /// True when every place holds at most one token.
    pub fn is_set(&self) -> bool {
        self.0.values().all(|&n| n <= 1)
    }

    /// Multiset inclusion `self ⊆ other`.
    pub fn is_sub_of(&self, other: &Marking) -> bool {
        self.iter().all(|(p, n)| other.get(p) >= n)
    }

    /// Strict multiset cover: `other ⊆ self` and `other ≠ self`.
    pub fn strictly_covers(&self, other: &Marking) -> bool {
        other.is_sub_of(self) && self != other
    }

    /// Keeps only the places accepted by `keep`.
    pub fn restrict(&self, mut keep: impl FnMut(&str) -> bool) -> Marking {
        Marking(
            self.0
                .iter()
                .filter(|(p, _)| keep(p))
                .map(|(p, &n)| (p.clone(), n))
                .collect(),
        )
    }

    /// Renames every place through `f`, summing counts of places that collide.
    pub fn map_places(&self, mut f: impl FnMut(&str) -> String) -> Marking {
        let mut out = Marking::new();
        for (p, n) in self.iter() {
            out.add(f(p), n);
        }
        out
    }

    /// Set image of the support under `f`: each image place gets one token.
    pub fn image_set(&self, mut f: impl FnMut(&str) -> String) -> Marking {
        Marking::from_places(
            self.support()
                .map(&mut f)
                .collect::<std::collections::BTreeSet<_>>(),
        )
    }

    /// Union of two markings taken as sets.
    pub fn union_set(&self, other: &Marking) -> Marking {
        Marking::from_places(
            self.support()
                .chain(other.support())
                .map(str::to_string)
                .collect::<std::collections::BTreeSet<_>>(),
        )
    }
}

impl fmt::Display for Marking {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (p, n)) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{p}:{n}")?;
        }
        f.write_str("}")
    }
}

impl<S: Into<String>> FromIterator<(S, u32)> for Marking {
    fn from_iter<I: IntoIterator<Item = (S, u32)>>(iter: I) -> Self {
        let mut m = Marking::new();
        for (p, n) in iter {
            m.add(p, n);
        }
        m
    }
}
