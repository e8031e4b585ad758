//! Fault-injecting scribe used to exercise the repair loop.

use std::collections::BTreeSet;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::critic::CriticVerdict;
use super::report::{Claim, ClaimPartition, Report, TypedValue};
use super::template::TemplateScribe;
use super::{Scribe, ScribeError};
use crate::diff::GroundedState;
use crate::memory::Assertion;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fault {
    /// Cites an evidence id that exists nowhere in the state.
    FabricatedEvidence,
    /// Moves the claim to a partition that does not hold its evidence.
    WrongPartition,
    /// Reports the case's bin as the prototype's.
    WrongBin,
    /// Empties the citation list.
    DroppedCitation,
    /// Negates the sentence while keeping the evidence.
    FlippedPolarity,
}

impl Fault {
    pub const ALL: [Fault; 5] = [
        Fault::FabricatedEvidence,
        Fault::WrongPartition,
        Fault::WrongBin,
        Fault::DroppedCitation,
        Fault::FlippedPolarity,
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdversaryConfig {
    /// Per-claim fault probability; also the chance of one extra fabricated claim.
    pub fault_rate: f64,
    pub faults: Vec<Fault>,
    /// Chance of ignoring a critique and resubmitting the previous proposal.
    pub persistence: f64,
    pub seed: u64,
}

impl AdversaryConfig {
    pub fn repairing(fault_rate: f64, seed: u64) -> Self {
        Self {
            fault_rate,
            faults: Fault::ALL.to_vec(),
            persistence: 0.0,
            seed,
        }
    }

    pub fn persistent(fault_rate: f64, seed: u64) -> Self {
        Self {
            persistence: 1.0,
            ..Self::repairing(fault_rate, seed)
        }
    }
}

pub struct AdversarialScribe<'a> {
    template: TemplateScribe<'a>,
    config: AdversaryConfig,
    rng: ChaCha8Rng,
    last: Option<Report>,
}

fn case_seed(seed: u64, case_id: &str) -> u64 {
    let mut h = 0xcbf29ce484222325u64 ^ seed.rotate_left(17);
    for b in case_id.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

impl<'a> AdversarialScribe<'a> {
    pub fn new(template: TemplateScribe<'a>, config: AdversaryConfig) -> Self {
        let rng = ChaCha8Rng::seed_from_u64(config.seed);
        Self {
            template,
            config,
            rng,
            last: None,
        }
    }

    fn fault_claim(&mut self, claim: &mut Claim, state: &GroundedState, serial: usize) {
        let fault = *self.config.faults.choose(&mut self.rng).unwrap_or(&Fault::FabricatedEvidence);
        let fabricate = |claim: &mut Claim| {
            claim.evidence_ids = vec![format!("fabricated_{serial}=present")];
        };
        match fault {
            Fault::FabricatedEvidence => fabricate(claim),
            Fault::WrongPartition => {
                let options: Vec<ClaimPartition> = ClaimPartition::ALL.into_iter().filter(|p| *p != claim.partition).collect();
                claim.partition = *options.choose(&mut self.rng).expect("three alternatives");
            }
            Fault::WrongBin => {
                let mismatch = claim.typed_value.as_ref().and_then(|tv| {
                    state
                        .evidence(claim.prototype_id)
                        .and_then(|v| v.differential.mismatch(&tv.field))
                        .cloned()
                });
                match mismatch {
                    Some(m) => {
                        claim.typed_value = Some(TypedValue {
                            field: m.field,
                            bin: m.query_bin,
                        })
                    }
                    None => fabricate(claim),
                }
            }
            Fault::DroppedCitation => claim.evidence_ids.clear(),
            Fault::FlippedPolarity => {
                let polarity = claim
                    .evidence_ids
                    .first()
                    .and_then(|id| Assertion::parse_id(id))
                    .map(|a| a.polarity);
                match (claim.partition.is_visual(), polarity) {
                    (true, Some(p)) => {
                        let flipped =
                            claim.evidence_ids[0].replacen(&format!("={}", p.as_str()), &format!("={}", p.flipped().as_str()), 1);
                        claim.sentence = self.template.sentence(claim.partition, claim.prototype_id, &flipped, state);
                    }
                    _ => fabricate(claim),
                }
            }
        }
    }

    fn corrupt(&mut self, mut report: Report, state: &GroundedState) -> Report {
        let n = report.claims.len();
        for i in 0..n {
            if self.rng.random_bool(self.config.fault_rate) {
                let mut claim = report.claims[i].clone();
                self.fault_claim(&mut claim, state, i);
                report.claims[i] = claim;
            }
        }
        if self.rng.random_bool(self.config.fault_rate) {
            let pid = state.visible.first().map_or(0, |v| v.card.prototype_id);
            report.claims.push(Claim {
                claim_id: "x1".into(),
                partition: ClaimPartition::Shared,
                evidence_ids: vec!["fabricated_extra=present".into()],
                prototype_id: pid,
                typed_value: None,
                sentence: format!("Both the case and prototype {pid} show fabricated extra."),
            });
        }
        report
    }

    fn repair(&self, mut report: Report, faithful: &Report, verdict: &CriticVerdict) -> Report {
        let flagged: BTreeSet<Option<&str>> = verdict.violations().map(|v| v.claim_id.as_deref()).collect();
        if flagged.contains(&None) {
            report.schema_version = faithful.schema_version.clone();
            report.case_id = faithful.case_id.clone();
            report.predicted_class = faithful.predicted_class.clone();
            report.confidence_band = faithful.confidence_band;
            report.impression = faithful.impression.clone();
        }
        report.claims = report
            .claims
            .into_iter()
            .filter_map(|c| {
                if !flagged.contains(&Some(c.claim_id.as_str())) {
                    return Some(c);
                }
                faithful.claims.iter().find(|f| f.claim_id == c.claim_id).cloned()
            })
            .collect();
        report
    }
}

impl Scribe for AdversarialScribe<'_> {
    fn propose(&mut self, state: &GroundedState, feedback: Option<&CriticVerdict>) -> Result<Value, ScribeError> {
        let faithful = self.template.render(state);
        let report = match (feedback, self.last.take()) {
            (Some(verdict), Some(prev)) if prev.case_id == state.case.case_id => {
                if self.rng.random_bool(self.config.persistence) {
                    prev
                } else {
                    self.repair(prev, &faithful, verdict)
                }
            }
            _ => {
                self.rng = ChaCha8Rng::seed_from_u64(case_seed(self.config.seed, &state.case.case_id));
                self.corrupt(faithful, state)
            }
        };
        let value = serde_json::to_value(&report).map_err(|e| ScribeError::UnparseableResponse(e.to_string()))?;
        self.last = Some(report);
        Ok(value)
    }
}
