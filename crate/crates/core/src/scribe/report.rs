//! Report documents, atomic claim extraction and admissible evidence.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::diff::GroundedState;

pub const REPORT_SCHEMA: &str = "report/v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClaimPartition {
    Shared,
    QueryOnly,
    ProtoOnly,
    Tabular,
}

impl ClaimPartition {
    pub const ALL: [ClaimPartition; 4] = [
        ClaimPartition::Shared,
        ClaimPartition::QueryOnly,
        ClaimPartition::ProtoOnly,
        ClaimPartition::Tabular,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ClaimPartition::Shared => "shared",
            ClaimPartition::QueryOnly => "query_only",
            ClaimPartition::ProtoOnly => "proto_only",
            ClaimPartition::Tabular => "tabular",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.as_str() == s)
    }

    /// Partitions backed by image-derived assertions.
    pub fn is_visual(self) -> bool {
        self != ClaimPartition::Tabular
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConfidenceBand {
    Low,
    Moderate,
    High,
}

impl ConfidenceBand {
    pub fn as_str(self) -> &'static str {
        match self {
            ConfidenceBand::Low => "low",
            ConfidenceBand::Moderate => "moderate",
            ConfidenceBand::High => "high",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [ConfidenceBand::Low, ConfidenceBand::Moderate, ConfidenceBand::High]
            .into_iter()
            .find(|b| b.as_str() == s)
    }

    /// Band for the share of neighborhood weight on visible cards that agree
    /// with the predicted class.
    pub fn from_support(support: f64) -> Self {
        if support < 1.0 / 3.0 {
            ConfidenceBand::Low
        } else if support < 2.0 / 3.0 {
            ConfidenceBand::Moderate
        } else {
            ConfidenceBand::High
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TypedValue {
    pub field: String,
    pub bin: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Claim {
    pub claim_id: String,
    pub partition: ClaimPartition,
    pub evidence_ids: Vec<String>,
    pub prototype_id: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub typed_value: Option<TypedValue>,
    pub sentence: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Report {
    pub schema_version: String,
    pub case_id: String,
    pub predicted_class: String,
    pub confidence_band: ConfidenceBand,
    pub impression: String,
    pub claims: Vec<Claim>,
}

/// One atomic claim: which partition of which prototype an evidence item is
/// asserted to belong to.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ClaimTriple {
    pub partition: ClaimPartition,
    pub prototype_id: u32,
    pub evidence_id: String,
}

pub fn extract_claims(report: &Report) -> BTreeSet<ClaimTriple> {
    report
        .claims
        .iter()
        .flat_map(|c| {
            c.evidence_ids.iter().map(move |e| ClaimTriple {
                partition: c.partition,
                prototype_id: c.prototype_id,
                evidence_id: e.clone(),
            })
        })
        .collect()
}

/// Every triple a report may assert given the grounded state.
pub fn admissible_triples(state: &GroundedState) -> BTreeSet<ClaimTriple> {
    let mut out = BTreeSet::new();
    for v in &state.visible {
        let d = &v.differential;
        let pid = d.prototype_id;
        let parts = [
            (ClaimPartition::Shared, &d.shared),
            (ClaimPartition::QueryOnly, &d.query_only),
            (ClaimPartition::ProtoOnly, &d.proto_only),
        ];
        for (partition, ids) in parts {
            for id in ids {
                out.insert(ClaimTriple {
                    partition,
                    prototype_id: pid,
                    evidence_id: id.clone(),
                });
            }
        }
        for m in &d.tabular_mismatch {
            out.insert(ClaimTriple {
                partition: ClaimPartition::Tabular,
                prototype_id: pid,
                evidence_id: m.field.clone(),
            });
        }
    }
    out
}

/// Share of total neighborhood weight held by visible cards of the predicted
/// class. Redacted neighbors never count as support.
pub fn evidence_support(state: &GroundedState) -> f64 {
    let total: f64 = state.backbone.neighborhood.iter().map(|n| n.weight).sum();
    if total <= 0.0 {
        return 0.0;
    }
    let agree: f64 = state
        .visible
        .iter()
        .filter(|v| v.card.class_label == state.backbone.predicted_class)
        .map(|v| v.weight)
        .sum();
    agree / total
}

pub fn expected_band(state: &GroundedState) -> ConfidenceBand {
    ConfidenceBand::from_support(evidence_support(state))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(claims: Vec<Claim>) -> Report {
        Report {
            schema_version: REPORT_SCHEMA.into(),
            case_id: "c".into(),
            predicted_class: "N".into(),
            confidence_band: ConfidenceBand::High,
            impression: String::new(),
            claims,
        }
    }

    #[test]
    fn extraction_examples() {
        assert!(extract_claims(&report(vec![])).is_empty());
        let claim = Claim {
            claim_id: "c1".into(),
            partition: ClaimPartition::Shared,
            evidence_ids: vec!["b".into()],
            prototype_id: 3,
            typed_value: None,
            sentence: "b".into(),
        };
        let got = extract_claims(&report(vec![claim]));
        assert_eq!(
            got,
            BTreeSet::from([ClaimTriple {
                partition: ClaimPartition::Shared,
                prototype_id: 3,
                evidence_id: "b".into()
            }])
        );
    }

    #[test]
    fn band_cuts() {
        assert_eq!(ConfidenceBand::from_support(0.0), ConfidenceBand::Low);
        assert_eq!(ConfidenceBand::from_support(0.5), ConfidenceBand::Moderate);
        assert_eq!(ConfidenceBand::from_support(1.0), ConfidenceBand::High);
        assert_eq!(ConfidenceBand::parse("moderate"), Some(ConfidenceBand::Moderate));
    }

    #[test]
    fn serde_shape() {
        let line = crate::json::to_canonical_line(&report(vec![])).unwrap();
        assert_eq!(
            line,
            r#"{"case_id":"c","claims":[],"confidence_band":"high","impression":"","predicted_class":"N","schema_version":"report/v1"}"#
        );
    }
}
