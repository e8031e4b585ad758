//! Deterministic barrier critic.
//!
//! The critic works on the raw JSON a scribe returned, so malformed output
//! turns into schema violations instead of errors. A claim that fails the
//! schema is not checked further; every other claim goes through citation,
//! type and entailment checks independently.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::report::{expected_band, Claim, ClaimPartition, ConfidenceBand, Report, TypedValue, REPORT_SCHEMA};
use crate::diff::{Differential, GroundedState};
use crate::memory::Assertion;
use crate::taxonomy::Taxonomy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ViolationClass {
    Schema,
    Cite,
    Type,
    Nli,
}

impl ViolationClass {
    pub fn as_str(self) -> &'static str {
        match self {
            ViolationClass::Schema => "schema",
            ViolationClass::Cite => "cite",
            ViolationClass::Type => "type",
            ViolationClass::Nli => "nli",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Violation {
    pub class: ViolationClass,
    /// Offending claim, or `None` for report-level problems.
    pub claim_id: Option<String>,
    pub message: String,
    /// Values that would have been accepted in place of the offending one.
    pub admissible: Vec<String>,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let target = self
            .claim_id
            .as_deref()
            .map_or_else(|| "report".to_string(), |c| format!("claim {c}"));
        write!(f, "[{}] {}: {}", self.class.as_str(), target, self.message)?;
        if !self.admissible.is_empty() {
            write!(f, "; admissible: {}", self.admissible.join(", "))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Energy {
    Zero,
    Infinite,
    Soft { value: f64 },
}

impl Energy {
    pub fn is_zero(&self) -> bool {
        matches!(self, Energy::Zero)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum EnergyMode {
    /// Any violation makes the energy infinite.
    Barrier,
    /// Weighted violation counts. Weights must be positive so that zero
    /// energy still means zero violations.
    Weighted {
        schema: f64,
        cite: f64,
        type_check: f64,
        nli: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticVerdict {
    pub schema_violations: Vec<Violation>,
    pub cite_violations: Vec<Violation>,
    pub type_violations: Vec<Violation>,
    pub nli_violations: Vec<Violation>,
    pub energy: Energy,
    /// One line per violation, in the order schema, cite, type, nli.
    pub critique: Vec<String>,
}

impl CriticVerdict {
    pub fn violations(&self) -> impl Iterator<Item = &Violation> {
        self.schema_violations
            .iter()
            .chain(&self.cite_violations)
            .chain(&self.type_violations)
            .chain(&self.nli_violations)
    }

    pub fn violation_count(&self) -> usize {
        self.schema_violations.len() + self.cite_violations.len() + self.type_violations.len() + self.nli_violations.len()
    }

    pub fn is_accepted(&self) -> bool {
        self.energy.is_zero()
    }

    pub fn critique_text(&self) -> String {
        self.critique.join("\n")
    }
}

/// Sentence-level entailment check for a single claim.
pub trait EntailmentCheck {
    /// Returns one message per entailment failure.
    fn check(&self, claim: &Claim, state: &GroundedState) -> Vec<String>;
}

const NEGATION_CUES: [&str; 4] = ["no", "not", "without", "absent"];
const NEGATION_WINDOW: usize = 3;

fn words(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Human-readable name of a concept: its taxonomy display name, or the id
/// with underscores read as spaces.
pub fn concept_name(taxonomy: &Taxonomy, concept_id: &str) -> String {
    taxonomy
        .display_name(concept_id)
        .map_or_else(|| concept_id.replace('_', " "), str::to_string)
}

/// Whether the first mention of `phrase` in `sentence` is negated, or `None`
/// when the phrase is not mentioned at all.
pub fn mention_negated(sentence: &str, phrase: &str) -> Option<bool> {
    let hay = words(sentence);
    let needle = words(phrase);
    if needle.is_empty() || needle.len() > hay.len() {
        return None;
    }
    let at = (0..=hay.len() - needle.len()).find(|&i| hay[i..i + needle.len()] == needle[..])?;
    let from = at.saturating_sub(NEGATION_WINDOW);
    Some(hay[from..at].iter().any(|w| NEGATION_CUES.contains(&w.as_str())))
}

/// Default entailment check: each cited assertion must be named in the
/// sentence with matching polarity; tabular claims must name their field.
pub struct PolarityEntailment<'a> {
    pub taxonomy: &'a Taxonomy,
}

impl EntailmentCheck for PolarityEntailment<'_> {
    fn check(&self, claim: &Claim, _state: &GroundedState) -> Vec<String> {
        let mut out = Vec::new();
        for id in &claim.evidence_ids {
            if claim.partition == ClaimPartition::Tabular {
                if mention_negated(&claim.sentence, &id.replace('_', " ")).is_none() {
                    out.push(format!("sentence does not mention field `{id}`"));
                }
                continue;
            }
            let Some(a) = Assertion::parse_id(id) else {
                out.push(format!("`{id}` is not an assertion id"));
                continue;
            };
            let name = concept_name(self.taxonomy, &a.concept_id);
            match mention_negated(&claim.sentence, &name) {
                None => out.push(format!("sentence does not mention `{name}`")),
                Some(negated) => {
                    let absent = a.polarity == crate::memory::Polarity::Absent;
                    if negated != absent {
                        out.push(format!(
                            "sentence states `{name}` as {} but the evidence is {}",
                            if negated { "absent" } else { "present" },
                            a.polarity.as_str()
                        ));
                    }
                }
            }
        }
        out
    }
}

pub struct Critic<'a> {
    pub entailment: Box<dyn EntailmentCheck + Send + Sync + 'a>,
    pub mode: EnergyMode,
}

impl<'a> Critic<'a> {
    /// Barrier critic with the polarity entailment check.
    pub fn new(taxonomy: &'a Taxonomy) -> Self {
        Self {
            entailment: Box::new(PolarityEntailment { taxonomy }),
            mode: EnergyMode::Barrier,
        }
    }

    pub fn with_mode(mut self, mode: EnergyMode) -> Result<Self, String> {
        if let EnergyMode::Weighted {
            schema,
            cite,
            type_check,
            nli,
        } = mode
        {
            if [schema, cite, type_check, nli].iter().any(|w| !w.is_finite() || *w <= 0.0) {
                return Err("weighted energy needs positive, finite weights".into());
            }
        }
        self.mode = mode;
        Ok(self)
    }

    pub fn evaluate(&self, raw: &Value, state: &GroundedState) -> CriticVerdict {
        let mut schema = Vec::new();
        let mut cite = Vec::new();
        let mut types = Vec::new();
        let mut nli = Vec::new();

        let parsed = check_schema(raw, &mut schema);
        if let Some(parsed) = &parsed {
            check_header(parsed, state, &mut types);
            for claim in &parsed.claims {
                check_claim(claim, state, &mut cite, &mut types);
                for message in self.entailment.check(claim, state) {
                    nli.push(violation(ViolationClass::Nli, Some(&claim.claim_id), message, vec![]));
                }
            }
        }

        let total = schema.len() + cite.len() + types.len() + nli.len();
        let energy = match self.mode {
            _ if total == 0 => Energy::Zero,
            EnergyMode::Barrier => Energy::Infinite,
            EnergyMode::Weighted {
                schema: a,
                cite: b,
                type_check: c,
                nli: d,
            } => Energy::Soft {
                value: a * schema.len() as f64 + b * cite.len() as f64 + c * types.len() as f64 + d * nli.len() as f64,
            },
        };
        let critique = schema
            .iter()
            .chain(&cite)
            .chain(&types)
            .chain(&nli)
            .map(Violation::to_string)
            .collect();
        CriticVerdict {
            schema_violations: schema,
            cite_violations: cite,
            type_violations: types,
            nli_violations: nli,
            energy,
            critique,
        }
    }
}

fn violation(class: ViolationClass, claim_id: Option<&str>, message: String, admissible: Vec<String>) -> Violation {
    Violation {
        class,
        claim_id: claim_id.map(str::to_string),
        message,
        admissible,
    }
}

/// Header fields and the claims that passed the schema.
struct Parsed {
    case_id: Option<String>,
    predicted_class: Option<String>,
    band: Option<ConfidenceBand>,
    claims: Vec<Claim>,
}

const REPORT_KEYS: [&str; 6] = [
    "case_id",
    "claims",
    "confidence_band",
    "impression",
    "predicted_class",
    "schema_version",
];
const CLAIM_KEYS: [&str; 6] = [
    "claim_id",
    "evidence_ids",
    "partition",
    "prototype_id",
    "sentence",
    "typed_value",
];

fn unknown_keys(obj: &Map<String, Value>, allowed: &[&str]) -> Vec<String> {
    obj.keys().filter(|k| !allowed.contains(&k.as_str())).cloned().collect()
}

fn check_schema(raw: &Value, out: &mut Vec<Violation>) -> Option<Parsed> {
    let bad =
        |out: &mut Vec<Violation>, claim: Option<&str>, m: String| out.push(violation(ViolationClass::Schema, claim, m, vec![]));
    let Some(obj) = raw.as_object() else {
        bad(out, None, "report must be a JSON object".into());
        return None;
    };
    for k in unknown_keys(obj, &REPORT_KEYS) {
        bad(out, None, format!("unknown field `{k}`"));
    }
    let string = |out: &mut Vec<Violation>, key: &str| -> Option<String> {
        match obj.get(key) {
            Some(Value::String(s)) => Some(s.clone()),
            Some(_) => {
                bad(out, None, format!("`{key}` must be a string"));
                None
            }
            None => {
                bad(out, None, format!("missing field `{key}`"));
                None
            }
        }
    };
    if let Some(v) = string(out, "schema_version") {
        if v != REPORT_SCHEMA {
            bad(out, None, format!("schema_version must be `{REPORT_SCHEMA}`"));
        }
    }
    let case_id = string(out, "case_id");
    let predicted_class = string(out, "predicted_class");
    let band = string(out, "confidence_band").and_then(|b| {
        let parsed = ConfidenceBand::parse(&b);
        if parsed.is_none() {
            bad(out, None, format!("confidence_band `{b}` is not one of low, moderate, high"));
        }
        parsed
    });
    string(out, "impression");

    let mut claims = Vec::new();
    match obj.get("claims") {
        Some(Value::Array(items)) => {
            let mut seen = BTreeSet::new();
            for (i, item) in items.iter().enumerate() {
                if let Some(claim) = check_claim_schema(item, i, out) {
                    if seen.insert(claim.claim_id.clone()) {
                        claims.push(claim);
                    } else {
                        bad(out, Some(&claim.claim_id), "duplicate claim_id".into());
                    }
                }
            }
        }
        Some(_) => bad(out, None, "`claims` must be an array".into()),
        None => bad(out, None, "missing field `claims`".into()),
    }
    Some(Parsed {
        case_id,
        predicted_class,
        band,
        claims,
    })
}

fn check_claim_schema(item: &Value, index: usize, out: &mut Vec<Violation>) -> Option<Claim> {
    let fallback = format!("#{index}");
    let Some(obj) = item.as_object() else {
        out.push(violation(
            ViolationClass::Schema,
            Some(&fallback),
            "claim must be an object".into(),
            vec![],
        ));
        return None;
    };
    let id = match obj.get("claim_id") {
        Some(Value::String(s)) if !s.is_empty() => Some(s.clone()),
        _ => None,
    };
    let label = id.clone().unwrap_or(fallback);
    let before = out.len();
    let mut bad = |m: String| out.push(violation(ViolationClass::Schema, Some(&label), m, vec![]));
    if id.is_none() {
        bad("claim_id must be a nonempty string".into());
    }
    for k in unknown_keys(obj, &CLAIM_KEYS) {
        bad(format!("unknown field `{k}`"));
    }
    let partition = match obj.get("partition") {
        Some(Value::String(s)) => ClaimPartition::parse(s).or_else(|| {
            bad(format!(
                "partition `{s}` is not one of shared, query_only, proto_only, tabular"
            ));
            None
        }),
        _ => {
            bad("partition must be a string".into());
            None
        }
    };
    let evidence_ids = match obj.get("evidence_ids") {
        Some(Value::Array(ids)) if ids.is_empty() => {
            bad("evidence_ids must not be empty".into());
            None
        }
        Some(Value::Array(ids)) => {
            let strings: Option<Vec<String>> = ids
                .iter()
                .map(|v| v.as_str().filter(|s| !s.is_empty()).map(str::to_string))
                .collect();
            if strings.is_none() {
                bad("evidence_ids must be nonempty strings".into());
            }
            strings
        }
        _ => {
            bad("evidence_ids must be an array".into());
            None
        }
    };
    let prototype_id = match obj.get("prototype_id").and_then(Value::as_u64) {
        Some(n) if n <= u64::from(u32::MAX) => Some(n as u32),
        _ => {
            bad("prototype_id must be a nonnegative integer".into());
            None
        }
    };
    let typed_value = match obj.get("typed_value") {
        None | Some(Value::Null) => Some(None),
        Some(v) => match serde_json::from_value::<TypedValue>(v.clone()) {
            Ok(t) => Some(Some(t)),
            Err(_) => {
                bad("typed_value must be {field, bin} strings".into());
                None
            }
        },
    };
    let sentence = match obj.get("sentence") {
        Some(Value::String(s)) if !s.trim().is_empty() => Some(s.clone()),
        _ => {
            bad("sentence must be a nonempty string".into());
            None
        }
    };
    if out.len() != before {
        return None;
    }
    Some(Claim {
        claim_id: id?,
        partition: partition?,
        evidence_ids: evidence_ids?,
        prototype_id: prototype_id?,
        typed_value: typed_value?,
        sentence: sentence?,
    })
}

fn check_header(parsed: &Parsed, state: &GroundedState, out: &mut Vec<Violation>) {
    if let Some(case_id) = &parsed.case_id {
        if *case_id != state.case.case_id {
            out.push(violation(
                ViolationClass::Type,
                None,
                format!("case_id `{case_id}` does not match the case"),
                vec![state.case.case_id.clone()],
            ));
        }
    }
    let predicted = state.backbone.predicted_class.as_str();
    if let Some(class) = &parsed.predicted_class {
        if class != predicted {
            out.push(violation(
                ViolationClass::Type,
                None,
                format!("predicted_class `{class}` differs from the backbone"),
                vec![predicted.to_string()],
            ));
        }
    }
    if let Some(band) = parsed.band {
        let expected = expected_band(state);
        if band != expected {
            out.push(violation(
                ViolationClass::Type,
                None,
                format!("confidence_band `{}` does not match the evidence support", band.as_str()),
                vec![expected.as_str().to_string()],
            ));
        }
    }
}

fn partition_ids(d: &Differential, p: ClaimPartition) -> Vec<String> {
    match p {
        ClaimPartition::Shared => d.shared.iter().cloned().collect(),
        ClaimPartition::QueryOnly => d.query_only.iter().cloned().collect(),
        ClaimPartition::ProtoOnly => d.proto_only.iter().cloned().collect(),
        ClaimPartition::Tabular => d.tabular_mismatch.iter().map(|m| m.field.clone()).collect(),
    }
}

fn check_claim(claim: &Claim, state: &GroundedState, cite: &mut Vec<Violation>, types: &mut Vec<Violation>) {
    let cid = Some(claim.claim_id.as_str());
    if claim.partition.is_visual() && state.deferral.is_active() {
        types.push(violation(
            ViolationClass::Type,
            cid,
            format!("{} claims are not allowed under visual deferral", claim.partition.as_str()),
            vec![ClaimPartition::Tabular.as_str().to_string()],
        ));
    }
    let Some(evidence) = state.evidence(claim.prototype_id) else {
        cite.push(violation(
            ViolationClass::Cite,
            cid,
            format!("prototype {} is not a visible card", claim.prototype_id),
            state.visible.iter().map(|v| v.card.prototype_id.to_string()).collect(),
        ));
        return;
    };
    let allowed = partition_ids(&evidence.differential, claim.partition);
    for id in &claim.evidence_ids {
        if !allowed.contains(id) {
            cite.push(violation(
                ViolationClass::Cite,
                cid,
                format!(
                    "`{id}` is not in {} of prototype {}",
                    claim.partition.as_str(),
                    claim.prototype_id
                ),
                allowed.clone(),
            ));
        }
    }
    if let Some(tv) = &claim.typed_value {
        match evidence.card.record.get(&tv.field) {
            None => types.push(violation(
                ViolationClass::Type,
                cid,
                format!("unknown field `{}`", tv.field),
                vec![],
            )),
            Some(bin) if bin != tv.bin => types.push(violation(
                ViolationClass::Type,
                cid,
                format!(
                    "`{}` of prototype {} is `{bin}`, not `{}`",
                    tv.field, claim.prototype_id, tv.bin
                ),
                vec![bin.to_string()],
            )),
            Some(_) => {}
        }
    }
}

/// Parses a document the critic accepted. Returns `None` for anything with
/// schema violations.
pub fn parse_report(raw: &Value) -> Option<Report> {
    let mut v = Vec::new();
    check_schema(raw, &mut v)?;
    if !v.is_empty() {
        return None;
    }
    serde_json::from_value(raw.clone()).ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn negation_window() {
        assert_eq!(mention_negated("The case shows no hip fracture.", "hip fracture"), Some(true));
        assert_eq!(
            mention_negated("The case shows hip fracture, unlike prototype 3.", "hip fracture"),
            Some(false)
        );
        assert_eq!(
            mention_negated("Not seen anywhere in the case: hip fracture", "hip fracture"),
            Some(false)
        );
        assert_eq!(mention_negated("nothing here", "hip fracture"), None);
        assert_eq!(
            mention_negated("Prototype 2 shows osteophyte, which the case does not.", "osteophyte"),
            Some(false)
        );
    }

    #[test]
    fn violation_line() {
        let v = violation(
            ViolationClass::Cite,
            Some("c2"),
            "`x` is not in shared of prototype 1".into(),
            vec!["a=present".into()],
        );
        assert_eq!(
            v.to_string(),
            "[cite] claim c2: `x` is not in shared of prototype 1; admissible: a=present"
        );
    }

    #[test]
    fn schema_itemizes_claim_problems() {
        let raw = serde_json::json!({
            "schema_version": "report/v1", "case_id": "q", "predicted_class": "N",
            "confidence_band": "certain", "impression": "", "extra": 1,
            "claims": [
                {"claim_id": "c1", "partition": "shared", "evidence_ids": [], "prototype_id": 1, "sentence": "x"},
                {"claim_id": "c1", "partition": "shared", "evidence_ids": ["a"], "prototype_id": 1, "sentence": "x"},
                {"claim_id": "c1", "partition": "shared", "evidence_ids": ["a"], "prototype_id": 1, "sentence": "x"},
                7
            ]
        });
        let mut out = Vec::new();
        let parsed = check_schema(&raw, &mut out).unwrap();
        assert_eq!(parsed.claims.len(), 1);
        let msgs: Vec<String> = out.iter().map(ToString::to_string).collect();
        assert_eq!(msgs.len(), 5, "{msgs:?}");
        assert!(parse_report(&raw).is_none());
        let mut out = Vec::new();
        assert!(check_schema(&serde_json::json!([1]), &mut out).is_none());
        assert_eq!(out.len(), 1);
    }
}
