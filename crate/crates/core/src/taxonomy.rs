//! Concept vocabulary and coarse semantic buckets.
//!
//! The taxonomy file is line oriented: `concept_id<TAB>display_name`, with an
//! optional third column naming the concept's bucket. Concepts without a
//! bucket column fall into a bucket named after themselves. Blank lines and
//! lines starting with `#` are ignored.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TaxonomyError {
    #[error("taxonomy line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("taxonomy line {line}: duplicate concept `{concept}`")]
    Duplicate { line: usize, concept: String },
    #[error("invalid concept id `{0}`")]
    InvalidConceptId(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConceptEntry {
    pub display_name: String,
    pub bucket: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Taxonomy {
    concepts: BTreeMap<String, ConceptEntry>,
}

/// Characters reserved by the assertion-id encoding (`concept=polarity@qualifier`).
pub(crate) fn is_valid_token(s: &str) -> bool {
    !s.is_empty() && !s.chars().any(|c| c == '=' || c == '@' || c.is_whitespace() || c.is_control())
}

impl Taxonomy {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, concept_id: &str, display_name: &str, bucket: Option<&str>) -> Result<(), TaxonomyError> {
        if !is_valid_token(concept_id) {
            return Err(TaxonomyError::InvalidConceptId(concept_id.to_string()));
        }
        let bucket = bucket.unwrap_or(concept_id);
        if !is_valid_token(bucket) {
            return Err(TaxonomyError::InvalidConceptId(bucket.to_string()));
        }
        self.concepts.insert(
            concept_id.to_string(),
            ConceptEntry {
                display_name: display_name.to_string(),
                bucket: bucket.to_string(),
            },
        );
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self, TaxonomyError> {
        let mut tax = Taxonomy::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim_end_matches('\r');
            if trimmed.trim().is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = trimmed.split('\t').collect();
            if cols.len() < 2 || cols.len() > 3 {
                return Err(TaxonomyError::Parse {
                    line,
                    message: format!("expected 2 or 3 tab-separated columns, found {}", cols.len()),
                });
            }
            let concept = cols[0].trim();
            let display = cols[1].trim();
            if display.is_empty() {
                return Err(TaxonomyError::Parse {
                    line,
                    message: "empty display name".into(),
                });
            }
            if tax.contains(concept) {
                return Err(TaxonomyError::Duplicate {
                    line,
                    concept: concept.to_string(),
                });
            }
            let bucket = cols.get(2).map(|b| b.trim()).filter(|b| !b.is_empty());
            tax.insert(concept, display, bucket).map_err(|e| TaxonomyError::Parse {
                line,
                message: e.to_string(),
            })?;
        }
        Ok(tax)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, TaxonomyError> {
        Self::parse(&fs::read_to_string(path)?)
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (id, entry) in &self.concepts {
            out.push_str(&format!("{id}\t{}\t{}\n", entry.display_name, entry.bucket));
        }
        out
    }

    pub fn contains(&self, concept_id: &str) -> bool {
        self.concepts.contains_key(concept_id)
    }

    pub fn display_name(&self, concept_id: &str) -> Option<&str> {
        self.concepts.get(concept_id).map(|e| e.display_name.as_str())
    }

    pub fn concepts(&self) -> impl Iterator<Item = (&str, &ConceptEntry)> {
        self.concepts.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.concepts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.concepts.is_empty()
    }

    pub fn bucket_map(&self) -> BucketMap {
        BucketMap {
            buckets: self.concepts.iter().map(|(k, v)| (k.clone(), v.bucket.clone())).collect(),
        }
    }
}

/// Maps concept ids to the coarse bucket ids used in release signatures.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BucketMap {
    buckets: BTreeMap<String, String>,
}

impl BucketMap {
    pub fn from_pairs<I, S>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (S, S)>,
        S: Into<String>,
    {
        Self {
            buckets: pairs.into_iter().map(|(k, v)| (k.into(), v.into())).collect(),
        }
    }

    pub fn bucket_of(&self, concept_id: &str) -> Option<&str> {
        self.buckets.get(concept_id).map(String::as_str)
    }

    /// Distinct bucket ids, sorted.
    pub fn vocabulary(&self) -> Vec<String> {
        let mut v: Vec<String> = self.buckets.values().cloned().collect();
        v.sort();
        v.dedup();
        v
    }
}
