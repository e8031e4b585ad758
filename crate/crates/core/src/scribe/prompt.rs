//! Prompt rendering. The grounded state document is the only case content a
//! scribe backend ever receives.

use super::critic::CriticVerdict;
use crate::diff::GroundedState;
use crate::json::to_canonical_pretty;

pub const SYSTEM_PROMPT: &str = "You write structured comparison reports. Reply with one JSON object and nothing else. \
Fields: schema_version (\"report/v1\"), case_id, predicted_class, confidence_band (low|moderate|high), impression, claims. \
Each claim has claim_id, partition (shared|query_only|proto_only|tabular), evidence_ids (nonempty), prototype_id, \
optional typed_value {field, bin} and sentence. Cite only evidence ids listed in the matching partition of a visible \
prototype's differential; tabular claims cite mismatched field names. When deferral mode is visual, write tabular claims only. \
Name every cited finding in the sentence, writing \"no <finding>\" for absent findings.";

/// Canonical, versioned serialization of the grounded state.
pub fn render_state(state: &GroundedState) -> String {
    to_canonical_pretty(state).expect("grounded state serializes")
}

pub fn user_message(state: &GroundedState, feedback: Option<&CriticVerdict>) -> String {
    let mut text = format!("Grounded state ({}):\n{}\n", state.schema_version, render_state(state));
    if let Some(v) = feedback {
        text.push_str("\nThe previous draft was rejected:\n");
        text.push_str(&v.critique_text());
        text.push_str("\nReturn a corrected report.\n");
    }
    text
}

/// The exact text sent to a backend for one proposal.
pub fn render_prompt(state: &GroundedState, feedback: Option<&CriticVerdict>) -> String {
    format!("{SYSTEM_PROMPT}\n\n{}", user_message(state, feedback))
}
