//! Comparison-set faithfulness and artifact-level disclosure attacks.

mod attacks;
mod csf;

pub use attacks::{
    aia, link_top1, mia, released_artifact, AiaTarget, AttackKind, AttackResult, AttributeAttacker, ClassMajorityAttacker,
    LinkCase, LinkScorer, MembershipAttacker, RegistryEntry, ReleasedArtifact, SignatureMatchScorer, SignatureOverlapMia,
    TiePolicy,
};
pub use csf::{csf, ClassWeights, CsfResult, CsfSummary, EvidenceItem, PartitionLabel, UnknownItemPolicy};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("claimed item `{evidence_id}` on prototype {prototype_id} is not in the reference universe")]
    UnknownEvidenceItem { prototype_id: u32, evidence_id: String },
    #[error("membership population must contain both members and non-members")]
    SingleClassPopulation,
    #[error("attack input is empty")]
    EmptyInput,
    #[error("candidate set {0} is empty")]
    EmptyCandidateSet(usize),
    #[error("ground truth index {truth} is outside candidate set {case} of size {size}")]
    TruthNotInCandidates { case: usize, truth: usize, size: usize },
    #[error("class weight for {0} must be finite and non-negative")]
    InvalidWeight(String),
}
