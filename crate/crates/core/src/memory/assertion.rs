use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::MemoryError;
use crate::taxonomy::Taxonomy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Present,
    Absent,
}

impl Polarity {
    pub fn as_str(self) -> &'static str {
        match self {
            Polarity::Present => "present",
            Polarity::Absent => "absent",
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Polarity::Present => Polarity::Absent,
            Polarity::Absent => Polarity::Present,
        }
    }
}

/// One atomic visual finding, keyed by a canonical taxonomy concept.
///
/// Ordering is by `concept_id` first, so sorted sets of assertions come out
/// in concept order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Assertion {
    pub concept_id: String,
    pub polarity: Polarity,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qualifier: Option<String>,
}

impl Assertion {
    pub fn new(concept_id: impl Into<String>, polarity: Polarity) -> Self {
        Self {
            concept_id: concept_id.into(),
            polarity,
            qualifier: None,
        }
    }

    pub fn present(concept_id: impl Into<String>) -> Self {
        Self::new(concept_id, Polarity::Present)
    }

    pub fn absent(concept_id: impl Into<String>) -> Self {
        Self::new(concept_id, Polarity::Absent)
    }

    pub fn with_qualifier(mut self, qualifier: impl Into<String>) -> Self {
        self.qualifier = Some(qualifier.into());
        self
    }

    /// Evidence identifier: `concept=polarity` or `concept=polarity@qualifier`.
    pub fn id(&self) -> String {
        match &self.qualifier {
            Some(q) => format!("{}={}@{}", self.concept_id, self.polarity.as_str(), q),
            None => format!("{}={}", self.concept_id, self.polarity.as_str()),
        }
    }

    pub fn parse_id(id: &str) -> Option<Self> {
        let (concept, rest) = id.split_once('=')?;
        let (pol, qualifier) = match rest.split_once('@') {
            Some((p, q)) => (p, Some(q.to_string())),
            None => (rest, None),
        };
        let polarity = match pol {
            "present" => Polarity::Present,
            "absent" => Polarity::Absent,
            _ => return None,
        };
        if concept.is_empty() || qualifier.as_deref() == Some("") {
            return None;
        }
        Some(Self {
            concept_id: concept.to_string(),
            polarity,
            qualifier,
        })
    }
}

impl fmt::Display for Assertion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

/// ⌈R/2⌉, never below one.
pub fn default_min_support(views: usize) -> usize {
    views.div_ceil(2).max(1)
}

/// Fuses `R` perception views into a conservative assertion set.
///
/// A `(concept, polarity)` pair survives when at least `min_support` views
/// report it and the concept never occurs with both polarities in any view.
/// A view supports a pair at most once. The qualifier is kept only when every
/// supporting view reports the same single qualifier for the pair.
pub fn consensus_assertions<V>(views: &[V], min_support: usize) -> Result<BTreeSet<Assertion>, MemoryError>
where
    V: AsRef<[Assertion]>,
{
    let r = views.len();
    if r == 0 || min_support == 0 || min_support > r {
        return Err(MemoryError::InvalidSupport { min_support, views: r });
    }

    let mut polarities: BTreeMap<&str, BTreeSet<Polarity>> = BTreeMap::new();
    // (concept, polarity) -> per supporting view, the qualifiers it reported
    let mut support: BTreeMap<(&str, Polarity), Vec<BTreeSet<Option<&str>>>> = BTreeMap::new();

    for view in views {
        let mut in_view: BTreeMap<(&str, Polarity), BTreeSet<Option<&str>>> = BTreeMap::new();
        for a in view.as_ref() {
            polarities.entry(a.concept_id.as_str()).or_default().insert(a.polarity);
            in_view
                .entry((a.concept_id.as_str(), a.polarity))
                .or_default()
                .insert(a.qualifier.as_deref());
        }
        for (key, quals) in in_view {
            support.entry(key).or_default().push(quals);
        }
    }

    let mut out = BTreeSet::new();
    for ((concept, polarity), per_view) in support {
        if polarities[concept].len() > 1 || per_view.len() < min_support {
            continue;
        }
        let first = &per_view[0];
        let qualifier = if first.len() == 1 && per_view.iter().all(|q| q == first) {
            first.iter().next().copied().flatten().map(str::to_string)
        } else {
            None
        };
        out.insert(Assertion {
            concept_id: concept.to_string(),
            polarity,
            qualifier,
        });
    }
    Ok(out)
}

/// Free-form perception output before it is mapped onto the taxonomy.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawAssertion {
    pub text: String,
    pub polarity: Polarity,
    #[serde(default)]
    pub qualifier: Option<String>,
}

/// Maps raw perception output onto canonical concept ids.
///
/// Embedding-based clustering backends plug in here; the bundled
/// [`TaxonomyNormalizer`] does exact id / display-name matching.
pub trait AssertionNormalizer {
    fn normalize(&self, raw: &RawAssertion) -> Option<Assertion>;
}

pub struct TaxonomyNormalizer<'a> {
    taxonomy: &'a Taxonomy,
}

impl<'a> TaxonomyNormalizer<'a> {
    pub fn new(taxonomy: &'a Taxonomy) -> Self {
        Self { taxonomy }
    }
}

impl AssertionNormalizer for TaxonomyNormalizer<'_> {
    fn normalize(&self, raw: &RawAssertion) -> Option<Assertion> {
        let text = raw.text.trim();
        let concept = if self.taxonomy.contains(text) {
            Some(text.to_string())
        } else {
            self.taxonomy
                .concepts()
                .find(|(_, e)| e.display_name.eq_ignore_ascii_case(text))
                .map(|(id, _)| id.to_string())
        }?;
        Some(Assertion {
            concept_id: concept,
            polarity: raw.polarity,
            qualifier: raw.qualifier.clone(),
        })
    }
}
