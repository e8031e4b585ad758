//! Deterministic scribe: one claim per differential item.

use serde_json::Value;

use super::critic::{concept_name, CriticVerdict};
use super::report::{expected_band, Claim, ClaimPartition, Report, TypedValue, REPORT_SCHEMA};
use super::{Scribe, ScribeError};
use crate::diff::GroundedState;
use crate::memory::{Assertion, Polarity};
use crate::taxonomy::Taxonomy;

pub struct TemplateScribe<'a> {
    pub taxonomy: &'a Taxonomy,
}

impl<'a> TemplateScribe<'a> {
    pub fn new(taxonomy: &'a Taxonomy) -> Self {
        Self { taxonomy }
    }

    fn phrase(&self, id: &str) -> String {
        match Assertion::parse_id(id) {
            Some(a) => {
                let name = concept_name(self.taxonomy, &a.concept_id);
                let base = match a.polarity {
                    Polarity::Present => name,
                    Polarity::Absent => format!("no {name}"),
                };
                match a.qualifier {
                    Some(q) => format!("{base} ({q})"),
                    None => base,
                }
            }
            None => id.replace('_', " "),
        }
    }

    pub fn sentence(&self, partition: ClaimPartition, prototype_id: u32, evidence: &str, state: &GroundedState) -> String {
        match partition {
            ClaimPartition::Shared => format!("Both the case and prototype {prototype_id} show {}.", self.phrase(evidence)),
            ClaimPartition::QueryOnly => format!("The case shows {}, unlike prototype {prototype_id}.", self.phrase(evidence)),
            ClaimPartition::ProtoOnly => {
                format!(
                    "Prototype {prototype_id} shows {}, which the case does not.",
                    self.phrase(evidence)
                )
            }
            ClaimPartition::Tabular => {
                let field = evidence.replace('_', " ");
                let m = state.evidence(prototype_id).and_then(|v| v.differential.mismatch(evidence));
                match m {
                    Some(m) => format!(
                        "The case falls in the {field} bin {} while prototype {prototype_id} falls in {}.",
                        m.query_bin, m.proto_bin
                    ),
                    None => format!("The case and prototype {prototype_id} differ in {field}."),
                }
            }
        }
    }

    pub fn impression(state: &GroundedState) -> String {
        let total = state.visible.len() + state.redacted_count;
        let mut text = format!(
            "{} with {} confidence; {} of {} retrieved prototypes are visible.",
            state.backbone.predicted_class,
            expected_band(state).as_str(),
            state.visible.len(),
            total
        );
        if state.deferral.is_active() {
            text.push_str(" Visual comparison is deferred; only tabular differences are reported.");
        }
        text
    }

    /// The faithful report for `state`. Claim ids are `c1`, `c2`, ... in
    /// neighborhood order, then partition order.
    pub fn render(&self, state: &GroundedState) -> Report {
        let mut claims = Vec::new();
        for v in &state.visible {
            let d = &v.differential;
            let pid = d.prototype_id;
            let visual = [
                (ClaimPartition::Shared, &d.shared),
                (ClaimPartition::QueryOnly, &d.query_only),
                (ClaimPartition::ProtoOnly, &d.proto_only),
            ];
            for (partition, ids) in visual {
                for id in ids {
                    claims.push(Claim {
                        claim_id: format!("c{}", claims.len() + 1),
                        partition,
                        evidence_ids: vec![id.clone()],
                        prototype_id: pid,
                        typed_value: None,
                        sentence: self.sentence(partition, pid, id, state),
                    });
                }
            }
            for m in &d.tabular_mismatch {
                claims.push(Claim {
                    claim_id: format!("c{}", claims.len() + 1),
                    partition: ClaimPartition::Tabular,
                    evidence_ids: vec![m.field.clone()],
                    prototype_id: pid,
                    typed_value: Some(TypedValue {
                        field: m.field.clone(),
                        bin: m.proto_bin.clone(),
                    }),
                    sentence: self.sentence(ClaimPartition::Tabular, pid, &m.field, state),
                });
            }
        }
        Report {
            schema_version: REPORT_SCHEMA.to_string(),
            case_id: state.case.case_id.clone(),
            predicted_class: state.backbone.predicted_class.0.clone(),
            confidence_band: expected_band(state),
            impression: Self::impression(state),
            claims,
        }
    }
}

impl Scribe for TemplateScribe<'_> {
    fn propose(&mut self, state: &GroundedState, _feedback: Option<&CriticVerdict>) -> Result<Value, ScribeError> {
        serde_json::to_value(self.render(state)).map_err(|e| ScribeError::UnparseableResponse(e.to_string()))
    }
}
