use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::diff::Differential;
use crate::scribe::{ClaimPartition, ClaimTriple};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartitionLabel {
    Shared,
    QueryOnly,
    ProtoOnly,
}

impl PartitionLabel {
    pub const ALL: [PartitionLabel; 3] = [PartitionLabel::Shared, PartitionLabel::QueryOnly, PartitionLabel::ProtoOnly];

    pub fn is_difference(self) -> bool {
        !matches!(self, PartitionLabel::Shared)
    }

    pub fn from_claim(p: ClaimPartition) -> Option<Self> {
        match p {
            ClaimPartition::Shared => Some(PartitionLabel::Shared),
            ClaimPartition::QueryOnly => Some(PartitionLabel::QueryOnly),
            ClaimPartition::ProtoOnly => Some(PartitionLabel::ProtoOnly),
            ClaimPartition::Tabular => None,
        }
    }
}

impl fmt::Display for PartitionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PartitionLabel::Shared => "shared",
            PartitionLabel::QueryOnly => "query_only",
            PartitionLabel::ProtoOnly => "proto_only",
        })
    }
}

/// One evidence item of a case: an assertion id scoped to a prototype.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EvidenceItem {
    pub prototype_id: u32,
    pub evidence_id: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub enum ClassWeights {
    /// w_c = share of reference items labelled c.
    #[default]
    ReferenceFrequency,
    Explicit(BTreeMap<PartitionLabel, f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UnknownItemPolicy {
    #[default]
    Reject,
    /// Claimed items outside the universe count as unsupported differences.
    CountAsUnsupported,
}

/// `None` marks an empty denominator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsfResult {
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
    pub weighted_accuracy: Option<f64>,
    pub per_class_accuracy: BTreeMap<PartitionLabel, Option<f64>>,
    pub class_weights: BTreeMap<PartitionLabel, f64>,
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// Comparison-set faithfulness for one case.
///
/// `reference` holds the exact differential of every visible prototype;
/// `predicted` is the extracted claim set. Tabular claims are ignored.
pub fn csf(
    reference: &[Differential],
    predicted: &BTreeSet<ClaimTriple>,
    weights: &ClassWeights,
    policy: UnknownItemPolicy,
) -> Result<CsfResult, EvalError> {
    let mut truth: BTreeMap<EvidenceItem, PartitionLabel> = BTreeMap::new();
    for d in reference {
        for (label, ids) in [
            (PartitionLabel::Shared, &d.shared),
            (PartitionLabel::QueryOnly, &d.query_only),
            (PartitionLabel::ProtoOnly, &d.proto_only),
        ] {
            for id in ids {
                truth.insert(
                    EvidenceItem {
                        prototype_id: d.prototype_id,
                        evidence_id: id.clone(),
                    },
                    label,
                );
            }
        }
    }

    let mut claimed: BTreeMap<EvidenceItem, BTreeSet<PartitionLabel>> = BTreeMap::new();
    for t in predicted {
        let Some(label) = PartitionLabel::from_claim(t.partition) else {
            continue;
        };
        let item = EvidenceItem {
            prototype_id: t.prototype_id,
            evidence_id: t.evidence_id.clone(),
        };
        if !truth.contains_key(&item) && policy == UnknownItemPolicy::Reject {
            return Err(EvalError::UnknownEvidenceItem {
                prototype_id: item.prototype_id,
                evidence_id: item.evidence_id,
            });
        }
        claimed.entry(item).or_default().insert(label);
    }

    let ref_diff: BTreeSet<&EvidenceItem> = truth.iter().filter(|(_, l)| l.is_difference()).map(|(i, _)| i).collect();
    let pred_diff: BTreeSet<&EvidenceItem> = claimed
        .iter()
        .filter(|(_, ls)| ls.iter().any(|l| l.is_difference()))
        .map(|(i, _)| i)
        .collect();
    let hits = pred_diff.intersection(&ref_diff).count();
    let precision = ratio(hits, pred_diff.len());
    let recall = ratio(hits, ref_diff.len());
    let f1 = match (precision, recall) {
        (Some(p), Some(r)) if p + r > 0.0 => Some(2.0 * p * r / (p + r)),
        (Some(_), Some(_)) => Some(0.0),
        _ => None,
    };

    let mut per_class = BTreeMap::new();
    let mut class_weights = BTreeMap::new();
    let total = truth.len();
    for c in PartitionLabel::ALL {
        let members: Vec<&EvidenceItem> = truth.iter().filter(|(_, l)| **l == c).map(|(i, _)| i).collect();
        let correct = members
            .iter()
            .filter(|i| claimed.get(**i).is_some_and(|ls| ls.len() == 1 && ls.contains(&c)))
            .count();
        per_class.insert(c, ratio(correct, members.len()));
        let w = match weights {
            ClassWeights::ReferenceFrequency => ratio(members.len(), total).unwrap_or(0.0),
            ClassWeights::Explicit(m) => {
                let w = m.get(&c).copied().unwrap_or(0.0);
                if !w.is_finite() || w < 0.0 {
                    return Err(EvalError::InvalidWeight(c.to_string()));
                }
                w
            }
        };
        class_weights.insert(c, w);
    }
    let (num, den) = PartitionLabel::ALL.iter().fold((0.0, 0.0), |(n, d), c| match per_class[c] {
        Some(acc) => (n + class_weights[c] * acc, d + class_weights[c]),
        None => (n, d),
    });
    let weighted_accuracy = (den > 0.0).then(|| num / den);

    Ok(CsfResult {
        precision,
        recall,
        f1,
        weighted_accuracy,
        per_class_accuracy: per_class,
        class_weights,
    })
}

/// Macro average over cases; undefined values are skipped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsfSummary {
    pub cases: usize,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
    pub weighted_accuracy: Option<f64>,
    pub defined: BTreeMap<String, usize>,
}

impl CsfSummary {
    pub fn aggregate(results: &[CsfResult]) -> Self {
        fn mean(vals: impl Iterator<Item = Option<f64>>) -> (Option<f64>, usize) {
            let defined: Vec<f64> = vals.flatten().collect();
            let n = defined.len();
            ((n > 0).then(|| defined.iter().sum::<f64>() / n as f64), n)
        }
        let (precision, np) = mean(results.iter().map(|r| r.precision));
        let (recall, nr) = mean(results.iter().map(|r| r.recall));
        let (f1, nf) = mean(results.iter().map(|r| r.f1));
        let (weighted_accuracy, nw) = mean(results.iter().map(|r| r.weighted_accuracy));
        let defined = BTreeMap::from([
            ("precision".to_string(), np),
            ("recall".to_string(), nr),
            ("f1".to_string(), nf),
            ("weighted_accuracy".to_string(), nw),
        ]);
        Self {
            cases: results.len(),
            precision,
            recall,
            f1,
            weighted_accuracy,
            defined,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diff(id: u32, shared: &[&str], q: &[&str], p: &[&str]) -> Differential {
        let set = |v: &[&str]| v.iter().map(|s| s.to_string()).collect();
        Differential {
            prototype_id: id,
            shared: set(shared),
            query_only: set(q),
            proto_only: set(p),
            tabular_mismatch: vec![],
        }
    }

    fn triple(p: ClaimPartition, id: u32, e: &str) -> ClaimTriple {
        ClaimTriple {
            partition: p,
            prototype_id: id,
            evidence_id: e.into(),
        }
    }

    fn reference_as_claims(d: &Differential) -> BTreeSet<ClaimTriple> {
        let mut out = BTreeSet::new();
        for e in &d.shared {
            out.insert(triple(ClaimPartition::Shared, d.prototype_id, e));
        }
        for e in &d.query_only {
            out.insert(triple(ClaimPartition::QueryOnly, d.prototype_id, e));
        }
        for e in &d.proto_only {
            out.insert(triple(ClaimPartition::ProtoOnly, d.prototype_id, e));
        }
        out
    }

    #[test]
    fn identical_partitions_score_one() {
        let d = diff(1, &["s"], &["a"], &["c"]);
        let r = csf(
            std::slice::from_ref(&d),
            &reference_as_claims(&d),
            &ClassWeights::default(),
            UnknownItemPolicy::Reject,
        )
        .unwrap();
        assert_eq!(
            (r.precision, r.recall, r.f1, r.weighted_accuracy),
            (Some(1.0), Some(1.0), Some(1.0), Some(1.0))
        );
    }

    #[test]
    fn half_overlap() {
        // reference diff = {a, c}; predicted diff = {a, b}
        let d = diff(1, &["b"], &["a"], &["c"]);
        let pred = BTreeSet::from([
            triple(ClaimPartition::QueryOnly, 1, "a"),
            triple(ClaimPartition::ProtoOnly, 1, "b"),
        ]);
        let r = csf(&[d], &pred, &ClassWeights::default(), UnknownItemPolicy::Reject).unwrap();
        assert_eq!(r.precision, Some(0.5));
        assert_eq!(r.recall, Some(0.5));
        assert_eq!(r.f1, Some(0.5));
    }

    #[test]
    fn undefined_flags_and_unknown_items() {
        let d = diff(1, &["s"], &[], &[]);
        let r = csf(
            std::slice::from_ref(&d),
            &BTreeSet::new(),
            &ClassWeights::default(),
            UnknownItemPolicy::Reject,
        )
        .unwrap();
        assert_eq!((r.precision, r.recall, r.f1), (None, None, None));
        assert_eq!(r.weighted_accuracy, Some(0.0));
        let bogus = BTreeSet::from([triple(ClaimPartition::QueryOnly, 1, "zzz")]);
        assert!(matches!(
            csf(
                std::slice::from_ref(&d),
                &bogus,
                &ClassWeights::default(),
                UnknownItemPolicy::Reject
            ),
            Err(EvalError::UnknownEvidenceItem { .. })
        ));
        let r = csf(&[d], &bogus, &ClassWeights::default(), UnknownItemPolicy::CountAsUnsupported).unwrap();
        assert_eq!(r.precision, Some(0.0));
    }

    #[test]
    fn tabular_claims_are_ignored() {
        let d = diff(1, &[], &["a"], &[]);
        let pred = BTreeSet::from([
            triple(ClaimPartition::QueryOnly, 1, "a"),
            triple(ClaimPartition::Tabular, 1, "age"),
        ]);
        let r = csf(&[d], &pred, &ClassWeights::default(), UnknownItemPolicy::Reject).unwrap();
        assert_eq!(r.precision, Some(1.0));
    }

    #[test]
    fn explicit_weights() {
        let d = diff(1, &["s"], &["a"], &[]);
        let pred = BTreeSet::from([triple(ClaimPartition::Shared, 1, "s")]);
        let w = ClassWeights::Explicit(BTreeMap::from([
            (PartitionLabel::Shared, 3.0),
            (PartitionLabel::QueryOnly, 1.0),
        ]));
        let r = csf(std::slice::from_ref(&d), &pred, &w, UnknownItemPolicy::Reject).unwrap();
        assert_eq!(r.weighted_accuracy, Some(0.75));
        let bad = ClassWeights::Explicit(BTreeMap::from([(PartitionLabel::Shared, -1.0)]));
        assert!(csf(&[d], &pred, &bad, UnknownItemPolicy::Reject).is_err());
    }

    #[test]
    fn summary_skips_undefined() {
        let a = CsfResult {
            precision: Some(1.0),
            recall: None,
            f1: None,
            weighted_accuracy: Some(0.5),
            per_class_accuracy: BTreeMap::new(),
            class_weights: BTreeMap::new(),
        };
        let b = CsfResult {
            precision: Some(0.0),
            recall: Some(1.0),
            ..a.clone()
        };
        let s = CsfSummary::aggregate(&[a, b]);
        assert_eq!(s.precision, Some(0.5));
        assert_eq!(s.recall, Some(1.0));
        assert_eq!(s.f1, None);
        assert_eq!(s.defined["recall"], 1);
    }
}
