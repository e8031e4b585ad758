//! Exact case/prototype differentials and the grounded state.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backbone::BackboneOutput;
use crate::gate::GatedCard;
use crate::memory::{Assertion, CaseCard, ProtoCard, QuantizedRecord};

pub const GROUNDED_STATE_SCHEMA: &str = "grounded-state/v1";

/// Default visual-deferral threshold.
pub const DEFAULT_TAU: f64 = 0.5;

#[derive(Debug, Error)]
pub enum DiffError {
    #[error("case and prototype {prototype_id} use different tabular fields")]
    SchemaMismatch { prototype_id: u32 },
    #[error("prototype {0} is not in the backbone neighborhood")]
    NeighborhoodMismatch(u32),
    #[error("threshold {0} is outside [0, 1]")]
    InvalidThreshold(f64),
    /// Every neighbor was redacted; the state is still usable for a
    /// tabular-only report.
    #[error("no visible prototype cards for case `{}`", .0.case.case_id)]
    NoVisibleCards(Box<GroundedState>),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TabularMismatch {
    pub field: String,
    pub query_bin: String,
    pub proto_bin: String,
}

/// Four-part comparison of a case against one visible prototype. Assertion
/// partitions hold assertion ids (`concept=polarity[@qualifier]`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Differential {
    pub prototype_id: u32,
    pub shared: BTreeSet<String>,
    pub query_only: BTreeSet<String>,
    pub proto_only: BTreeSet<String>,
    pub tabular_mismatch: Vec<TabularMismatch>,
}

impl Differential {
    pub fn mismatch(&self, field: &str) -> Option<&TabularMismatch> {
        self.tabular_mismatch.iter().find(|m| m.field == field)
    }

    fn blank_visual(&mut self) {
        self.shared.clear();
        self.query_only.clear();
        self.proto_only.clear();
    }
}

fn ids(a: &BTreeSet<Assertion>) -> BTreeSet<String> {
    a.iter().map(Assertion::id).collect()
}

fn same_fields(a: &QuantizedRecord, b: &QuantizedRecord) -> bool {
    a.bins.len() == b.bins.len() && a.bins.keys().zip(b.bins.keys()).all(|(x, y)| x == y)
}

pub fn differential(case: &CaseCard, card: &ProtoCard) -> Result<Differential, DiffError> {
    if !same_fields(&case.record, &card.record) {
        return Err(DiffError::SchemaMismatch {
            prototype_id: card.prototype_id,
        });
    }
    let q = ids(&case.assertions);
    let p = ids(&card.assertions);
    let tabular_mismatch = case
        .record
        .bins
        .iter()
        .zip(card.record.bins.values())
        .filter(|((_, qb), pb)| qb != pb)
        .map(|((field, qb), pb)| TabularMismatch {
            field: field.clone(),
            query_bin: qb.clone(),
            proto_bin: pb.clone(),
        })
        .collect();
    Ok(Differential {
        prototype_id: card.prototype_id,
        shared: q.intersection(&p).cloned().collect(),
        query_only: q.difference(&p).cloned().collect(),
        proto_only: p.difference(&q).cloned().collect(),
        tabular_mismatch,
    })
}

fn jaccard_distance(q: &BTreeSet<String>, p: &BTreeSet<String>) -> f64 {
    let union = q.union(p).count();
    if union == 0 {
        return 0.0;
    }
    1.0 - q.intersection(p).count() as f64 / union as f64
}

/// Jaccard distance between assertion-id sets; two empty sets are concordant.
pub fn discordance(case: &CaseCard, card: &ProtoCard) -> Result<f64, DiffError> {
    if !same_fields(&case.record, &card.record) {
        return Err(DiffError::SchemaMismatch {
            prototype_id: card.prototype_id,
        });
    }
    Ok(jaccard_distance(&ids(&case.assertions), &ids(&card.assertions)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Deferral {
    None,
    Visual { reason: String },
}

impl Deferral {
    pub fn is_active(&self) -> bool {
        matches!(self, Deferral::Visual { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisibleEvidence {
    pub card: ProtoCard,
    pub weight: f64,
    pub similarity: f64,
    pub discordance: f64,
    pub differential: Differential,
}

/// Everything a report writer may cite for one case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundedState {
    pub schema_version: String,
    pub case: CaseCard,
    pub visible: Vec<VisibleEvidence>,
    pub redacted_count: usize,
    pub weighted_discordance: f64,
    pub deferral: Deferral,
    pub backbone: BackboneOutput,
}

impl GroundedState {
    pub fn evidence(&self, prototype_id: u32) -> Option<&VisibleEvidence> {
        self.visible.iter().find(|v| v.card.prototype_id == prototype_id)
    }
}

/// Similarity-weighted mean of per-card discordance; unweighted when every
/// similarity is zero.
pub fn weighted_discordance(items: &[(f64, f64)]) -> f64 {
    if items.is_empty() {
        return 0.0;
    }
    let total: f64 = items.iter().map(|(s, _)| s).sum();
    if total > 0.0 {
        items.iter().map(|(s, d)| s * d).sum::<f64>() / total
    } else {
        items.iter().map(|(_, d)| d).sum::<f64>() / items.len() as f64
    }
}

/// Assembles the grounded state from gate output only. Defers visual claims
/// when the weighted discordance exceeds `tau`.
pub fn supervise(case: &CaseCard, gated: &[GatedCard], backbone: &BackboneOutput, tau: f64) -> Result<GroundedState, DiffError> {
    if !(0.0..=1.0).contains(&tau) {
        return Err(DiffError::InvalidThreshold(tau));
    }
    let neighbors: BTreeMap<u32, (f64, f64)> = backbone
        .neighborhood
        .iter()
        .map(|n| (n.prototype_id, (n.weight, n.similarity)))
        .collect();
    for g in gated {
        if !neighbors.contains_key(&g.prototype_id()) {
            return Err(DiffError::NeighborhoodMismatch(g.prototype_id()));
        }
    }
    let mut visible = Vec::new();
    let mut redacted_count = 0;
    for g in gated {
        match g {
            GatedCard::Visible { card } => {
                let (weight, similarity) = neighbors[&card.prototype_id];
                visible.push(VisibleEvidence {
                    card: card.clone(),
                    weight,
                    similarity,
                    discordance: discordance(case, card)?,
                    differential: differential(case, card)?,
                });
            }
            GatedCard::Redacted { .. } => redacted_count += 1,
        }
    }
    let mean = weighted_discordance(&visible.iter().map(|v| (v.similarity, v.discordance)).collect::<Vec<_>>());
    let mut state = GroundedState {
        schema_version: GROUNDED_STATE_SCHEMA.to_string(),
        case: case.clone(),
        visible,
        redacted_count,
        weighted_discordance: mean,
        deferral: Deferral::None,
        backbone: backbone.clone(),
    };
    if state.visible.is_empty() {
        return Err(DiffError::NoVisibleCards(Box::new(state)));
    }
    if mean > tau {
        state.deferral = Deferral::Visual {
            reason: format!("weighted discordance {mean:.3} exceeds threshold {tau:.3}"),
        };
        for v in &mut state.visible {
            v.differential.blank_visual();
        }
    }
    Ok(state)
}

/// Like [`supervise`] but returns the tabular-only state when nothing is visible.
pub fn supervise_or_empty(
    case: &CaseCard,
    gated: &[GatedCard],
    backbone: &BackboneOutput,
    tau: f64,
) -> Result<GroundedState, DiffError> {
    match supervise(case, gated, backbone, tau) {
        Err(DiffError::NoVisibleCards(state)) => Ok(*state),
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backbone::Neighbor;
    use crate::memory::{ClassLabel, Provenance};
    use proptest::prelude::*;

    fn rec(pairs: &[(&str, &str)]) -> QuantizedRecord {
        QuantizedRecord {
            bins: pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
        }
    }

    fn set(names: &[&str]) -> BTreeSet<Assertion> {
        names.iter().map(|n| Assertion::present(*n)).collect()
    }

    fn case(names: &[&str], record: QuantizedRecord) -> CaseCard {
        CaseCard {
            case_id: "q".into(),
            assertions: set(names),
            record,
        }
    }

    fn proto(id: u32, names: &[&str], record: QuantizedRecord) -> ProtoCard {
        ProtoCard {
            prototype_id: id,
            class_label: ClassLabel::new("N"),
            assertions: set(names),
            record,
            summary: format!("prototype {id}"),
            provenance: Provenance {
                source_views: 1,
                min_support: 1,
            },
        }
    }

    fn backbone(ns: &[(u32, f64)]) -> BackboneOutput {
        BackboneOutput::new(
            "q",
            ClassLabel::new("N"),
            0.0,
            0.5,
            ns.iter()
                .map(|&(id, s)| Neighbor {
                    prototype_id: id,
                    weight: 1.0 / ns.len() as f64,
                    similarity: s,
                })
                .collect(),
        )
    }

    #[test]
    fn partitions_and_mismatch() {
        let d = differential(
            &case(&["a", "b"], rec(&[("age", "60-70"), ("sex", "F")])),
            &proto(3, &["b", "c"], rec(&[("age", "70-80"), ("sex", "F")])),
        )
        .unwrap();
        assert_eq!(d.shared, BTreeSet::from(["b=present".to_string()]));
        assert_eq!(d.query_only, BTreeSet::from(["a=present".to_string()]));
        assert_eq!(d.proto_only, BTreeSet::from(["c=present".to_string()]));
        assert_eq!(
            d.tabular_mismatch,
            vec![TabularMismatch {
                field: "age".into(),
                query_bin: "60-70".into(),
                proto_bin: "70-80".into()
            }]
        );
    }

    #[test]
    fn identical_cards() {
        let r = rec(&[("age", "60-70")]);
        let d = differential(&case(&["a", "b"], r.clone()), &proto(0, &["a", "b"], r.clone())).unwrap();
        assert_eq!(d.shared.len(), 2);
        assert!(d.query_only.is_empty() && d.proto_only.is_empty() && d.tabular_mismatch.is_empty());
        let e = differential(&case(&["a"], r), &proto(0, &[], rec(&[("bmi", "x")])));
        assert!(matches!(e, Err(DiffError::SchemaMismatch { prototype_id: 0 })));
    }

    #[test]
    fn qualifier_is_part_of_identity() {
        let r = rec(&[]);
        let mut c = case(&[], r.clone());
        c.assertions.insert(Assertion::present("a").with_qualifier("L1"));
        let d = differential(&c, &proto(0, &["a"], r)).unwrap();
        assert!(d.shared.is_empty());
        assert_eq!(d.query_only.len() + d.proto_only.len(), 2);
    }

    #[test]
    fn discordance_examples() {
        let r = rec(&[]);
        assert_eq!(
            discordance(&case(&["a"], r.clone()), &proto(0, &["a"], r.clone())).unwrap(),
            0.0
        );
        assert_eq!(
            discordance(&case(&["a"], r.clone()), &proto(0, &["b"], r.clone())).unwrap(),
            1.0
        );
        assert_eq!(discordance(&case(&[], r.clone()), &proto(0, &[], r.clone())).unwrap(), 0.0);
        assert_eq!(
            discordance(&case(&["a", "b", "c"], r.clone()), &proto(0, &["b", "c", "d"], r)).unwrap(),
            0.5
        );
    }

    #[test]
    fn threshold_extremes() {
        let r = rec(&[("age", "x")]);
        let c = case(&["a"], r.clone());
        let gated = vec![
            GatedCard::Visible {
                card: proto(1, &["b"], r.clone()),
            },
            GatedCard::Redacted { prototype_id: 2 },
        ];
        let bb = backbone(&[(1, 0.9), (2, 0.4)]);
        let never = supervise(&c, &gated, &bb, 1.0).unwrap();
        assert_eq!(never.deferral, Deferral::None);
        assert_eq!(never.redacted_count, 1);
        assert_eq!(never.visible[0].differential.query_only.len(), 1);
        let always = supervise(&c, &gated, &bb, 0.0).unwrap();
        assert!(always.deferral.is_active());
        let d = &always.visible[0].differential;
        assert!(d.shared.is_empty() && d.query_only.is_empty() && d.proto_only.is_empty());
    }

    #[test]
    fn supervise_errors() {
        let r = rec(&[]);
        let c = case(&[], r.clone());
        let bb = backbone(&[(1, 0.9)]);
        let err = supervise(&c, &[GatedCard::Redacted { prototype_id: 1 }], &bb, 0.5).unwrap_err();
        match err {
            DiffError::NoVisibleCards(state) => assert_eq!(state.redacted_count, 1),
            other => panic!("unexpected {other:?}"),
        }
        assert!(supervise_or_empty(&c, &[GatedCard::Redacted { prototype_id: 1 }], &bb, 0.5).is_ok());
        assert!(matches!(
            supervise(&c, &[GatedCard::Redacted { prototype_id: 5 }], &bb, 0.5),
            Err(DiffError::NeighborhoodMismatch(5))
        ));
    }

    fn arb_ids() -> impl Strategy<Value = Vec<String>> {
        proptest::collection::vec(0u8..12, 0..8).prop_map(|v| v.into_iter().map(|i| format!("c{i}")).collect())
    }

    proptest! {
        #[test]
        fn partitions_are_lossless_and_symmetric(q in arb_ids(), p in arb_ids()) {
            let r = rec(&[("f", "x")]);
            let qs: Vec<&str> = q.iter().map(String::as_str).collect();
            let ps: Vec<&str> = p.iter().map(String::as_str).collect();
            let c = case(&qs, r.clone());
            let card = proto(0, &ps, r.clone());
            let d = differential(&c, &card).unwrap();
            let qid = ids(&c.assertions);
            let pid = ids(&card.assertions);
            prop_assert_eq!(d.shared.union(&d.query_only).cloned().collect::<BTreeSet<_>>(), qid);
            prop_assert_eq!(d.shared.union(&d.proto_only).cloned().collect::<BTreeSet<_>>(), pid);
            prop_assert!(d.query_only.is_disjoint(&d.proto_only));
            let swapped = differential(
                &CaseCard { case_id: "x".into(), assertions: card.assertions.clone(), record: r.clone() },
                &proto(0, &qs, r),
            ).unwrap();
            prop_assert_eq!(swapped.proto_only, d.query_only);
        }

        #[test]
        fn lowering_tau_keeps_deferral(q in arb_ids(), p in arb_ids(), t1 in 0.0f64..=1.0, t2 in 0.0f64..=1.0) {
            let (hi, lo) = if t1 >= t2 { (t1, t2) } else { (t2, t1) };
            let r = rec(&[]);
            let qs: Vec<&str> = q.iter().map(String::as_str).collect();
            let ps: Vec<&str> = p.iter().map(String::as_str).collect();
            let gated = vec![GatedCard::Visible { card: proto(1, &ps, r.clone()) }];
            let bb = backbone(&[(1, 0.7)]);
            let at_hi = supervise(&case(&qs, r.clone()), &gated, &bb, hi).unwrap();
            let at_lo = supervise(&case(&qs, r), &gated, &bb, lo).unwrap();
            if at_hi.deferral.is_active() {
                prop_assert!(at_lo.deferral.is_active());
            }
        }
    }
}
