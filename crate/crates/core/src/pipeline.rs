//! Glue between the stages: distillation, gating, grounding and attacks.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::backbone::{BackboneOutput, CaseRecord, PopulationRecord, PrototypeRecord};
use crate::diff::{supervise_or_empty, DiffError, GroundedState};
use crate::eval::{
    aia, link_top1, mia, released_artifact, AiaTarget, AttackResult, ClassMajorityAttacker, EvalError, LinkCase, RegistryEntry,
    ReleasedArtifact, SignatureMatchScorer, SignatureOverlapMia, TiePolicy,
};
use crate::gate::{apply_gate, sensitive_value, signature, GateConfig, GateError, GateIndex, GatedCard, ReleaseSignature};
use crate::memory::{Distiller, MemoryBank, MemoryError, ProtoCard};
use crate::taxonomy::BucketMap;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("record `{record}`: {source}")]
    Memory { record: String, source: MemoryError },
    #[error(transparent)]
    Gate(#[from] GateError),
    #[error(transparent)]
    Diff(#[from] DiffError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("case `{0}` has no backbone output")]
    MissingBackbone(String),
    #[error("case `{case}` references prototype {prototype_id}, which is not in the bank")]
    UnknownPrototype { case: String, prototype_id: u32 },
    #[error("duplicate id `{0}`")]
    Duplicate(String),
}

fn memory_err(record: &str) -> impl FnOnce(MemoryError) -> PipelineError + '_ {
    move |source| PipelineError::Memory {
        record: record.to_string(),
        source,
    }
}

pub fn distill_bank(records: &[PrototypeRecord], distiller: &Distiller) -> Result<MemoryBank, PipelineError> {
    let cards = records
        .iter()
        .map(|r| {
            distiller
                .protocard(r.prototype_id, r.class_label.clone(), &r.views, &r.raw)
                .map_err(memory_err(&r.record_id))
        })
        .collect::<Result<Vec<_>, _>>()?;
    MemoryBank::new(cards).map_err(memory_err("bank"))
}

/// Distills population records; card ids are the record positions.
pub fn distill_population(records: &[PopulationRecord], distiller: &Distiller) -> Result<Vec<ProtoCard>, PipelineError> {
    records
        .iter()
        .enumerate()
        .map(|(i, r)| {
            distiller
                .protocard(i as u32, r.class_label.clone(), &r.views, &r.raw)
                .map_err(memory_err(&r.record_id))
        })
        .collect()
}

/// `(signature, sensitive value)` for every card, ready for `fit_gate`.
pub fn population_pairs(
    cards: &[ProtoCard],
    config: &GateConfig,
    buckets: &BucketMap,
) -> Result<Vec<(ReleaseSignature, String)>, PipelineError> {
    cards
        .iter()
        .map(|c| {
            let sig = signature(c, config, buckets)?;
            let s = sensitive_value(c, config).ok_or(GateError::MissingSensitive(c.prototype_id))?;
            Ok((sig, s))
        })
        .collect()
}

/// Gate output in bank order.
pub fn gate_bank(bank: &MemoryBank, index: &GateIndex, config: &GateConfig, buckets: &BucketMap) -> Vec<GatedCard> {
    bank.cards().iter().map(|c| apply_gate(c, index, config, buckets)).collect()
}

/// Gated cards sorted by prototype id, with lookup.
#[derive(Debug, Clone)]
pub struct GatedBank {
    cards: Vec<GatedCard>,
}

impl GatedBank {
    pub fn new(mut cards: Vec<GatedCard>) -> Result<Self, PipelineError> {
        cards.sort_by_key(GatedCard::prototype_id);
        if let Some(w) = cards.windows(2).find(|w| w[0].prototype_id() == w[1].prototype_id()) {
            return Err(PipelineError::Duplicate(w[0].prototype_id().to_string()));
        }
        Ok(Self { cards })
    }

    pub fn get(&self, prototype_id: u32) -> Option<&GatedCard> {
        self.cards
            .binary_search_by_key(&prototype_id, GatedCard::prototype_id)
            .ok()
            .map(|i| &self.cards[i])
    }

    pub fn cards(&self) -> &[GatedCard] {
        &self.cards
    }
}

/// Pairs every case with its backbone record by case id.
pub fn pair_cases<'a>(
    cases: &'a [CaseRecord],
    outputs: &'a [BackboneOutput],
) -> Result<Vec<(&'a CaseRecord, &'a BackboneOutput)>, PipelineError> {
    let mut by_id: BTreeMap<&str, &BackboneOutput> = BTreeMap::new();
    for o in outputs {
        if by_id.insert(o.case_id.as_str(), o).is_some() {
            return Err(PipelineError::Duplicate(o.case_id.clone()));
        }
    }
    cases
        .iter()
        .map(|c| {
            by_id
                .get(c.case_id.as_str())
                .map(|o| (c, *o))
                .ok_or_else(|| PipelineError::MissingBackbone(c.case_id.clone()))
        })
        .collect()
}

/// Builds the case card, gathers the gated neighborhood and supervises it.
/// A case whose neighbors are all redacted yields a tabular-only state.
pub fn ground_case(
    case: &CaseRecord,
    backbone: &BackboneOutput,
    gated: &GatedBank,
    distiller: &Distiller,
    tau: f64,
) -> Result<GroundedState, PipelineError> {
    let card = distiller
        .casecard(&case.case_id, &case.views, &case.raw)
        .map_err(memory_err(&case.case_id))?;
    let neighborhood = backbone
        .neighborhood
        .iter()
        .map(|n| {
            gated
                .get(n.prototype_id)
                .cloned()
                .ok_or_else(|| PipelineError::UnknownPrototype {
                    case: case.case_id.clone(),
                    prototype_id: n.prototype_id,
                })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(supervise_or_empty(&card, &neighborhood, backbone, tau)?)
}

/// A record whose card may be released, with the id the attacker knows it by.
#[derive(Debug, Clone)]
pub struct Subject {
    pub record_id: String,
    pub card: ProtoCard,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Release {
    /// Cards pass through the (k, l) gate.
    Gated,
    /// Every card is released as-is.
    Ungated,
}

pub struct AttackInputs<'a> {
    /// Records in the protected memory.
    pub members: &'a [Subject],
    /// Comparable records outside it.
    pub non_members: &'a [Subject],
    /// Identified records available for linkage; must contain every member.
    pub registry: &'a [RegistryEntry],
    pub index: &'a GateIndex,
    pub config: &'a GateConfig,
    pub buckets: &'a BucketMap,
    pub release: Release,
    pub mia_threshold: f64,
    pub tie_policy: TiePolicy,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct AttackSuite {
    pub mia: AttackResult,
    pub aia: AttackResult,
    pub link: AttackResult,
}

fn release(subject: &Subject, inputs: &AttackInputs<'_>) -> Result<(ReleasedArtifact, ReleaseSignature), PipelineError> {
    let sig = signature(&subject.card, inputs.config, inputs.buckets)?;
    let gated = match inputs.release {
        Release::Gated => apply_gate(&subject.card, inputs.index, inputs.config, inputs.buckets),
        Release::Ungated => GatedCard::Visible {
            card: subject.card.clone(),
        },
    };
    Ok((released_artifact(&subject.record_id, &gated, &sig), sig))
}

/// Runs the built-in membership, attribute and linkage attackers against one
/// release of the members (and non-members, for membership).
pub fn run_attacks(inputs: &AttackInputs<'_>) -> Result<AttackSuite, PipelineError> {
    let vocabulary = inputs.buckets.vocabulary().len();
    let members: Vec<(ReleasedArtifact, ReleaseSignature)> =
        inputs.members.iter().map(|s| release(s, inputs)).collect::<Result<_, _>>()?;
    let outsiders: Vec<(ReleasedArtifact, ReleaseSignature)> = inputs
        .non_members
        .iter()
        .map(|s| release(s, inputs))
        .collect::<Result<_, _>>()?;

    let corpus = inputs.index.signatures().cloned();
    let mia_attacker = SignatureOverlapMia::new(corpus, vocabulary, inputs.mia_threshold);
    let labelled: Vec<(ReleasedArtifact, bool)> = members
        .iter()
        .map(|(a, _)| (a.clone(), true))
        .chain(outsiders.iter().map(|(a, _)| (a.clone(), false)))
        .collect();
    let mia_result = mia(&labelled, &mia_attacker)?;

    let sensitive: Vec<String> = inputs
        .members
        .iter()
        .map(|s| sensitive_value(&s.card, inputs.config).ok_or(GateError::MissingSensitive(s.card.prototype_id)))
        .collect::<Result<_, _>>()?;
    let surface = members
        .iter()
        .zip(&sensitive)
        .filter_map(|((a, _), v)| a.disclosed.clone().map(|sig| (sig, v.clone())));
    let fallback = sensitive.iter().min().cloned().unwrap_or_default();
    let aia_attacker = ClassMajorityAttacker::new(surface, fallback, inputs.seed);
    let targets: Vec<AiaTarget<ReleasedArtifact, ReleaseSignature>> = members
        .iter()
        .zip(&sensitive)
        .map(|((a, sig), v)| AiaTarget {
            artifact: a.clone(),
            aux: sig.clone(),
            sensitive: v.clone(),
        })
        .collect();
    let aia_result = aia(&targets, &aia_attacker)?;

    let positions: BTreeMap<&str, usize> = inputs
        .registry
        .iter()
        .enumerate()
        .map(|(i, r)| (r.record_id.as_str(), i))
        .collect();
    let cases = members
        .iter()
        .map(|(a, _)| {
            let truth = *positions
                .get(a.source_id.as_str())
                .ok_or_else(|| GateError::Linkage(format!("record `{}` is not in the registry", a.source_id)))?;
            Ok(LinkCase {
                artifact: a,
                candidates: inputs.registry,
                truth,
            })
        })
        .collect::<Result<Vec<_>, PipelineError>>()?;
    let scorer = SignatureMatchScorer {
        bucket_vocabulary: vocabulary,
    };
    let link_result = link_top1(&cases, &scorer, inputs.tie_policy)?;

    Ok(AttackSuite {
        mia: mia_result,
        aia: aia_result,
        link: link_result,
    })
}
