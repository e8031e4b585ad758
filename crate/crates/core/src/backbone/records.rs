//! Line-delimited record schemas for cohort inputs.

use serde::{Deserialize, Serialize};

use crate::memory::{Assertion, ClassLabel, RawRecord};

/// One individual of the gate-fitting population.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationRecord {
    pub record_id: String,
    pub class_label: ClassLabel,
    /// Per-view assertion lists, already mapped to taxonomy ids.
    pub views: Vec<Vec<Assertion>>,
    pub raw: RawRecord,
}

/// A population record selected as a memory prototype.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrototypeRecord {
    pub prototype_id: u32,
    pub record_id: String,
    pub class_label: ClassLabel,
    pub views: Vec<Vec<Assertion>>,
    pub raw: RawRecord,
}

/// A query case presented to the backbone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseRecord {
    pub case_id: String,
    pub views: Vec<Vec<Assertion>>,
    pub raw: RawRecord,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub true_class: Option<ClassLabel>,
}

/// Ground truth for membership inference.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MembershipLabel {
    pub record_id: String,
    pub member: bool,
}
