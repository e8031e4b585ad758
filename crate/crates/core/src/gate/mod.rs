//! Semantic release gate: signatures, equivalence-class index and the
//! (k, l) visibility rule.
//!
//! A card is released only when its signature is shared by at least `k`
//! records of the fitting population and those records carry at least `l`
//! distinct sensitive values. Everything else, including signatures the
//! index has never seen, is redacted down to its prototype id.

mod frontier;

pub use frontier::{sweep_frontier, write_frontier_csv, FrontierPoint, SweepInputs, FRONTIER_HEADER};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::json::to_canonical_line;
use crate::memory::{Assertion, CaseCard, ClassLabel, ProtoCard, QuantizedRecord};
use crate::taxonomy::BucketMap;

#[derive(Debug, Error)]
pub enum GateError {
    #[error("quasi-identifier field `{0}` is missing from the card record")]
    MissingQuasiField(String),
    #[error("concept `{0}` has no semantic bucket")]
    UnbucketedConcept(String),
    #[error("cannot fit a gate on an empty population")]
    EmptyPopulation,
    #[error("all neighborhood similarities are zero")]
    AllZeroSimilarity,
    #[error("similarity for prototype {0} is negative or not finite")]
    InvalidSimilarity(u32),
    #[error("invalid gate configuration: {0}")]
    InvalidConfig(String),
    #[error("card {0} has no sensitive value for the configured field")]
    MissingSensitive(u32),
    #[error("index line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("linkage evaluation failed: {0}")]
    Linkage(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Which attribute the l-diversity rule counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "String", into = "String")]
pub enum SensitiveField {
    ClassLabel,
    Field(String),
}

impl From<String> for SensitiveField {
    fn from(s: String) -> Self {
        if s == "class_label" {
            SensitiveField::ClassLabel
        } else {
            SensitiveField::Field(s)
        }
    }
}

impl From<SensitiveField> for String {
    fn from(s: SensitiveField) -> Self {
        match s {
            SensitiveField::ClassLabel => "class_label".into(),
            SensitiveField::Field(f) => f,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateConfig {
    pub k: usize,
    pub l: usize,
    pub quasi_fields: Vec<String>,
    #[serde(default = "default_sensitive")]
    pub sensitive_field: SensitiveField,
}

fn default_sensitive() -> SensitiveField {
    SensitiveField::ClassLabel
}

impl GateConfig {
    /// Operating point (k, l) = (5, 2) over the given quasi-identifiers.
    pub fn with_quasi_fields(quasi_fields: Vec<String>) -> Self {
        Self {
            k: 5,
            l: 2,
            quasi_fields,
            sensitive_field: SensitiveField::ClassLabel,
        }
    }

    pub fn validate(&self) -> Result<(), GateError> {
        if self.k == 0 || self.l == 0 {
            return Err(GateError::InvalidConfig("k and l must be at least 1".into()));
        }
        if self.quasi_fields.is_empty() {
            return Err(GateError::InvalidConfig("quasi_fields must not be empty".into()));
        }
        let distinct: BTreeSet<_> = self.quasi_fields.iter().collect();
        if distinct.len() != self.quasi_fields.len() {
            return Err(GateError::InvalidConfig("quasi_fields contains duplicates".into()));
        }
        if let SensitiveField::Field(f) = &self.sensitive_field {
            if self.quasi_fields.contains(f) {
                return Err(GateError::InvalidConfig(format!(
                    "sensitive field `{f}` is also a quasi-identifier"
                )));
            }
        }
        Ok(())
    }

    pub fn with_thresholds(&self, k: usize, l: usize) -> Self {
        Self { k, l, ..self.clone() }
    }
}

/// Quasi-identifier tuple plus sorted semantic buckets.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ReleaseSignature {
    pub quasi_values: Vec<String>,
    pub semantic_buckets: Vec<String>,
}

impl ReleaseSignature {
    /// Display / persistence key, e.g. `65-80|F#degenerative,overlay`.
    pub fn key(&self) -> String {
        format!("{}#{}", self.quasi_values.join("|"), self.semantic_buckets.join(","))
    }
}

impl fmt::Display for ReleaseSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.key())
    }
}

/// Anything carrying assertions and a quantized record.
pub trait CardContent {
    fn assertions(&self) -> &BTreeSet<Assertion>;
    fn record(&self) -> &QuantizedRecord;
    fn class_label(&self) -> Option<&ClassLabel>;
}

impl CardContent for ProtoCard {
    fn assertions(&self) -> &BTreeSet<Assertion> {
        &self.assertions
    }
    fn record(&self) -> &QuantizedRecord {
        &self.record
    }
    fn class_label(&self) -> Option<&ClassLabel> {
        Some(&self.class_label)
    }
}

impl CardContent for CaseCard {
    fn assertions(&self) -> &BTreeSet<Assertion> {
        &self.assertions
    }
    fn record(&self) -> &QuantizedRecord {
        &self.record
    }
    fn class_label(&self) -> Option<&ClassLabel> {
        None
    }
}

pub fn signature_from_parts(
    assertions: &BTreeSet<Assertion>,
    record: &QuantizedRecord,
    config: &GateConfig,
    buckets: &BucketMap,
) -> Result<ReleaseSignature, GateError> {
    let quasi_values = config
        .quasi_fields
        .iter()
        .map(|f| {
            record
                .get(f)
                .map(str::to_string)
                .ok_or_else(|| GateError::MissingQuasiField(f.clone()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut semantic_buckets = assertions
        .iter()
        .map(|a| {
            buckets
                .bucket_of(&a.concept_id)
                .map(str::to_string)
                .ok_or_else(|| GateError::UnbucketedConcept(a.concept_id.clone()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    semantic_buckets.sort();
    semantic_buckets.dedup();
    Ok(ReleaseSignature {
        quasi_values,
        semantic_buckets,
    })
}

pub fn signature<C: CardContent + ?Sized>(
    card: &C,
    config: &GateConfig,
    buckets: &BucketMap,
) -> Result<ReleaseSignature, GateError> {
    signature_from_parts(card.assertions(), card.record(), config, buckets)
}

/// The value l-diversity is computed over, for one card.
pub fn sensitive_value<C: CardContent + ?Sized>(card: &C, config: &GateConfig) -> Option<String> {
    match &config.sensitive_field {
        SensitiveField::ClassLabel => card.class_label().map(|c| c.0.clone()),
        SensitiveField::Field(f) => card.record().get(f).map(str::to_string),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ClassStats {
    pub count: usize,
    pub sensitive: BTreeSet<String>,
}

/// Equivalence-class counts and distinct sensitive values per signature.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GateIndex {
    classes: BTreeMap<ReleaseSignature, ClassStats>,
}

#[derive(Serialize, Deserialize)]
struct IndexLine {
    signature: String,
    quasi_values: Vec<String>,
    semantic_buckets: Vec<String>,
    count: usize,
    sensitive: Vec<String>,
}

impl GateIndex {
    pub fn count(&self, sig: &ReleaseSignature) -> usize {
        self.classes.get(sig).map_or(0, |c| c.count)
    }

    pub fn ldiv(&self, sig: &ReleaseSignature) -> usize {
        self.classes.get(sig).map_or(0, |c| c.sensitive.len())
    }

    pub fn stats(&self, sig: &ReleaseSignature) -> Option<&ClassStats> {
        self.classes.get(sig)
    }

    pub fn signatures(&self) -> impl Iterator<Item = &ReleaseSignature> {
        self.classes.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ReleaseSignature, &ClassStats)> {
        self.classes.iter()
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    /// Population size the index was fit on.
    pub fn population(&self) -> usize {
        self.classes.values().map(|c| c.count).sum()
    }

    /// The (k, l) release rule. Unseen signatures fail both tests.
    pub fn admits(&self, sig: &ReleaseSignature, k: usize, l: usize) -> bool {
        match self.classes.get(sig) {
            Some(c) => c.count >= k && c.sensitive.len() >= l,
            None => false,
        }
    }

    pub fn write<W: Write>(&self, mut out: W) -> Result<(), GateError> {
        for (sig, stats) in &self.classes {
            let line = IndexLine {
                signature: sig.key(),
                quasi_values: sig.quasi_values.clone(),
                semantic_buckets: sig.semantic_buckets.clone(),
                count: stats.count,
                sensitive: stats.sensitive.iter().cloned().collect(),
            };
            let text = to_canonical_line(&line).map_err(|e| GateError::Parse {
                line: 0,
                message: e.to_string(),
            })?;
            writeln!(out, "{text}")?;
        }
        Ok(())
    }

    pub fn read<R: BufRead>(input: R) -> Result<Self, GateError> {
        let mut classes = BTreeMap::new();
        for (idx, line) in input.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let err = |message: String| GateError::Parse { line: idx + 1, message };
            let rec: IndexLine = serde_json::from_str(&line).map_err(|e| err(e.to_string()))?;
            if rec.count == 0 || rec.sensitive.len() > rec.count || rec.sensitive.is_empty() {
                return Err(err("count must be positive and bound the sensitive set".into()));
            }
            let sig = ReleaseSignature {
                quasi_values: rec.quasi_values,
                semantic_buckets: rec.semantic_buckets,
            };
            if sig.key() != rec.signature {
                return Err(err(format!("signature key `{}` does not match its fields", rec.signature)));
            }
            let stats = ClassStats {
                count: rec.count,
                sensitive: rec.sensitive.into_iter().collect(),
            };
            if classes.insert(sig, stats).is_some() {
                return Err(err("duplicate signature".into()));
            }
        }
        Ok(Self { classes })
    }
}

/// Single pass over `(signature, sensitive value)` pairs.
pub fn fit_gate<I>(population: I) -> Result<GateIndex, GateError>
where
    I: IntoIterator<Item = (ReleaseSignature, String)>,
{
    let mut classes: BTreeMap<ReleaseSignature, ClassStats> = BTreeMap::new();
    for (sig, sensitive) in population {
        let entry = classes.entry(sig).or_default();
        entry.count += 1;
        entry.sensitive.insert(sensitive);
    }
    if classes.is_empty() {
        return Err(GateError::EmptyPopulation);
    }
    Ok(GateIndex { classes })
}

/// A card as it leaves the gate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum GatedCard {
    Visible { card: ProtoCard },
    Redacted { prototype_id: u32 },
}

impl GatedCard {
    pub fn prototype_id(&self) -> u32 {
        match self {
            GatedCard::Visible { card } => card.prototype_id,
            GatedCard::Redacted { prototype_id } => *prototype_id,
        }
    }

    pub fn visible(&self) -> Option<&ProtoCard> {
        match self {
            GatedCard::Visible { card } => Some(card),
            GatedCard::Redacted { .. } => None,
        }
    }

    pub fn is_visible(&self) -> bool {
        matches!(self, GatedCard::Visible { .. })
    }
}

/// Applies the release rule. Cards whose signature cannot be formed are
/// redacted, like unseen signatures.
pub fn apply_gate(card: &ProtoCard, index: &GateIndex, config: &GateConfig, buckets: &BucketMap) -> GatedCard {
    let admitted = signature(card, config, buckets)
        .map(|sig| index.admits(&sig, config.k, config.l))
        .unwrap_or(false);
    if admitted {
        GatedCard::Visible { card: card.clone() }
    } else {
        GatedCard::Redacted {
            prototype_id: card.prototype_id,
        }
    }
}

pub fn write_gated<W: Write>(cards: &[GatedCard], mut out: W) -> Result<(), GateError> {
    for c in cards {
        let text = to_canonical_line(c).map_err(|e| GateError::Parse {
            line: 0,
            message: e.to_string(),
        })?;
        writeln!(out, "{text}")?;
    }
    Ok(())
}

pub fn read_gated<R: BufRead>(input: R) -> Result<Vec<GatedCard>, GateError> {
    let mut out = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| GateError::Parse {
            line: idx + 1,
            message: e.to_string(),
        })?);
    }
    Ok(out)
}

/// Similarity-weighted share of the neighborhood that survives the gate:
/// `sum(s_j, j visible) / sum(s_j, all j)`.
pub fn evidence_utility(gated: &[GatedCard], neighborhood: &[(u32, f64)]) -> Result<f64, GateError> {
    let visible: BTreeSet<u32> = gated.iter().filter(|g| g.is_visible()).map(GatedCard::prototype_id).collect();
    let mut total = 0.0;
    let mut kept = 0.0;
    for &(id, s) in neighborhood {
        if !s.is_finite() || s < 0.0 {
            return Err(GateError::InvalidSimilarity(id));
        }
        total += s;
        if visible.contains(&id) {
            kept += s;
        }
    }
    if total <= 0.0 {
        return Err(GateError::AllZeroSimilarity);
    }
    Ok((kept / total).clamp(0.0, 1.0))
}
