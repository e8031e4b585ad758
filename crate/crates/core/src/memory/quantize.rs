use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::MemoryError;

/// A raw tabular value as it arrives from a prototype or case record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RawValue {
    Number(f64),
    Text(String),
}

impl From<f64> for RawValue {
    fn from(v: f64) -> Self {
        RawValue::Number(v)
    }
}

impl From<&str> for RawValue {
    fn from(v: &str) -> Self {
        RawValue::Text(v.to_string())
    }
}

pub type RawRecord = BTreeMap<String, RawValue>;

#[derive(Debug, Clone, PartialEq)]
pub enum FieldSpec {
    Numeric {
        name: String,
        edges: Vec<f64>,
        labels: Vec<String>,
    },
    Categorical {
        name: String,
        categories: Vec<String>,
    },
}

impl FieldSpec {
    pub fn name(&self) -> &str {
        match self {
            FieldSpec::Numeric { name, .. } | FieldSpec::Categorical { name, .. } => name,
        }
    }

    /// Every bin label this field can produce, in configured order.
    pub fn labels(&self) -> &[String] {
        match self {
            FieldSpec::Numeric { labels, .. } => labels,
            FieldSpec::Categorical { categories, .. } => categories,
        }
    }
}

fn format_edge(v: f64) -> String {
    format!("{v}")
}

/// Default label for the bin `[lo, hi)`, e.g. `65-80`.
pub fn default_bin_label(lo: f64, hi: f64) -> String {
    format!("{}-{}", format_edge(lo), format_edge(hi))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawFieldSpec {
    name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    edges: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    categories: Option<Vec<String>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawSchema {
    fields: Vec<RawFieldSpec>,
}

/// Ordered tabular schema: per-field bin edges or category lists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSchema", into = "RawSchema")]
pub struct BinSchema {
    fields: Vec<FieldSpec>,
}

impl TryFrom<RawSchema> for BinSchema {
    type Error = MemoryError;

    fn try_from(raw: RawSchema) -> Result<Self, Self::Error> {
        let mut fields = Vec::with_capacity(raw.fields.len());
        for f in raw.fields {
            let spec = match (f.edges, f.categories) {
                (Some(edges), None) => BinSchema::numeric(&f.name, edges, f.labels)?,
                (None, Some(categories)) => {
                    if f.labels.is_some() {
                        return Err(MemoryError::InvalidSchema(format!(
                            "field `{}`: labels only apply to numeric fields",
                            f.name
                        )));
                    }
                    BinSchema::categorical(&f.name, categories)?
                }
                _ => {
                    return Err(MemoryError::InvalidSchema(format!(
                        "field `{}` needs exactly one of `edges` or `categories`",
                        f.name
                    )))
                }
            };
            fields.push(spec);
        }
        BinSchema::new(fields)
    }
}

impl From<BinSchema> for RawSchema {
    fn from(s: BinSchema) -> Self {
        RawSchema {
            fields: s
                .fields
                .into_iter()
                .map(|f| match f {
                    FieldSpec::Numeric { name, edges, labels } => RawFieldSpec {
                        name,
                        edges: Some(edges),
                        labels: Some(labels),
                        categories: None,
                    },
                    FieldSpec::Categorical { name, categories } => RawFieldSpec {
                        name,
                        edges: None,
                        labels: None,
                        categories: Some(categories),
                    },
                })
                .collect(),
        }
    }
}

impl BinSchema {
    pub fn new(fields: Vec<FieldSpec>) -> Result<Self, MemoryError> {
        let mut names = BTreeSet::new();
        for f in &fields {
            if !crate::taxonomy::is_valid_token(f.name()) {
                return Err(MemoryError::InvalidSchema(format!("invalid field name `{}`", f.name())));
            }
            if !names.insert(f.name().to_string()) {
                return Err(MemoryError::InvalidSchema(format!("duplicate field `{}`", f.name())));
            }
        }
        Ok(Self { fields })
    }

    pub fn numeric(name: &str, edges: Vec<f64>, labels: Option<Vec<String>>) -> Result<FieldSpec, MemoryError> {
        let bad = |msg: &str| MemoryError::InvalidSchema(format!("field `{name}`: {msg}"));
        if edges.len() < 2 {
            return Err(bad("needs at least two edges"));
        }
        if edges.iter().any(|e| !e.is_finite()) {
            return Err(bad("edges must be finite"));
        }
        if edges.windows(2).any(|w| w[0] >= w[1]) {
            return Err(bad("edges must be strictly increasing"));
        }
        let labels = match labels {
            Some(l) => {
                if l.len() != edges.len() - 1 {
                    return Err(bad("needs one label per bin"));
                }
                l
            }
            None => edges.windows(2).map(|w| default_bin_label(w[0], w[1])).collect(),
        };
        let distinct: BTreeSet<_> = labels.iter().collect();
        if distinct.len() != labels.len() || labels.iter().any(|l| l.is_empty()) {
            return Err(bad("bin labels must be distinct and nonempty"));
        }
        Ok(FieldSpec::Numeric {
            name: name.to_string(),
            edges,
            labels,
        })
    }

    pub fn categorical(name: &str, categories: Vec<String>) -> Result<FieldSpec, MemoryError> {
        let distinct: BTreeSet<_> = categories.iter().collect();
        if categories.is_empty() || distinct.len() != categories.len() || categories.iter().any(|c| c.is_empty()) {
            return Err(MemoryError::InvalidSchema(format!(
                "field `{name}`: categories must be distinct, nonempty and not blank"
            )));
        }
        Ok(FieldSpec::Categorical {
            name: name.to_string(),
            categories,
        })
    }

    pub fn fields(&self) -> &[FieldSpec] {
        &self.fields
    }

    pub fn field(&self, name: &str) -> Option<&FieldSpec> {
        self.fields.iter().find(|f| f.name() == name)
    }

    pub fn field_names(&self) -> impl Iterator<Item = &str> {
        self.fields.iter().map(FieldSpec::name)
    }

    pub fn from_toml_str(text: &str) -> Result<Self, MemoryError> {
        toml::from_str(text).map_err(|e| MemoryError::InvalidSchema(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, MemoryError> {
        Self::from_toml_str(&fs::read_to_string(path)?)
    }

    /// Tabular fields used by the bone-health cohort: age, BMI, sex and T-score.
    pub fn bone_health_default() -> Self {
        let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
        BinSchema::new(vec![
            BinSchema::numeric("age", vec![40.0, 50.0, 60.0, 70.0, 80.0, 90.0, 100.0], None).unwrap(),
            BinSchema::numeric("bmi", vec![12.0, 18.5, 25.0, 30.0, 35.0, 50.0], None).unwrap(),
            BinSchema::categorical("sex", s(&["F", "M"])).unwrap(),
            BinSchema::numeric(
                "tscore",
                vec![-6.0, -2.5, -1.0, 4.0],
                Some(s(&["osteoporotic", "osteopenic", "normal"])),
            )
            .unwrap(),
        ])
        .unwrap()
    }
}

/// Tabular record after quantization: one bin label per schema field.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(transparent)]
pub struct QuantizedRecord {
    pub bins: BTreeMap<String, String>,
}

impl QuantizedRecord {
    pub fn get(&self, field: &str) -> Option<&str> {
        self.bins.get(field).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    /// Checks the record against a schema: every field present once, every
    /// label configured.
    pub fn validate(&self, schema: &BinSchema) -> Result<(), MemoryError> {
        for key in self.bins.keys() {
            if schema.field(key).is_none() {
                return Err(MemoryError::UnknownField(key.clone()));
            }
        }
        for f in schema.fields() {
            let label = self
                .bins
                .get(f.name())
                .ok_or_else(|| MemoryError::MissingField(f.name().into()))?;
            if !f.labels().contains(label) {
                return Err(MemoryError::UnknownCategory {
                    field: f.name().into(),
                    value: label.clone(),
                });
            }
        }
        Ok(())
    }
}

fn bin_index(edges: &[f64], v: f64) -> Option<usize> {
    let last = edges.len() - 1;
    if v < edges[0] || v > edges[last] {
        return None;
    }
    if v == edges[last] {
        return Some(last - 1);
    }
    // first edge strictly greater than v closes the bin
    let upper = edges.partition_point(|e| *e <= v);
    Some(upper - 1)
}

/// Projects a raw record onto the configured bins.
///
/// Numeric bins are half-open `[lo, hi)` except the last, which is closed.
pub fn quantize(record: &RawRecord, schema: &BinSchema) -> Result<QuantizedRecord, MemoryError> {
    for key in record.keys() {
        if schema.field(key).is_none() {
            return Err(MemoryError::UnknownField(key.clone()));
        }
    }
    let mut bins = BTreeMap::new();
    for field in schema.fields() {
        let name = field.name();
        let value = record.get(name).ok_or_else(|| MemoryError::MissingField(name.into()))?;
        let label = match (field, value) {
            (FieldSpec::Numeric { edges, labels, .. }, RawValue::Number(v)) => {
                if !v.is_finite() {
                    return Err(MemoryError::NonFinite(name.into()));
                }
                let idx = bin_index(edges, *v).ok_or_else(|| MemoryError::OutOfRange {
                    field: name.into(),
                    value: *v,
                })?;
                labels[idx].clone()
            }
            (FieldSpec::Numeric { .. }, RawValue::Text(_)) => {
                return Err(MemoryError::TypeMismatch {
                    field: name.into(),
                    expected: "numeric",
                })
            }
            (FieldSpec::Categorical { categories, .. }, RawValue::Text(t)) => {
                if !categories.contains(t) {
                    return Err(MemoryError::UnknownCategory {
                        field: name.into(),
                        value: t.clone(),
                    });
                }
                t.clone()
            }
            (FieldSpec::Categorical { .. }, RawValue::Number(_)) => {
                return Err(MemoryError::TypeMismatch {
                    field: name.into(),
                    expected: "categorical",
                })
            }
        };
        bins.insert(name.to_string(), label);
    }
    Ok(QuantizedRecord { bins })
}
