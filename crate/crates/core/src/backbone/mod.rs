//! Backbone ingestion contract and seeded synthetic cohorts.
//!
//! Each backbone record is one JSON object per line:
//!
//! ```text
//! {"case_id":"case-00001","modality_gate":0.4,"neighborhood":[{"prototype_id":3,"similarity":0.8,"weight":0.5}],
//!  "predicted_class":"Osteopenia","schema_version":"backbone/v1","severity":-1.7}
//! ```

mod records;
mod synth;

pub use records::{CaseRecord, MembershipLabel, PopulationRecord, PrototypeRecord};
pub use synth::{synth_cohort, ClassLayout, ClassPlan, CohortError, SyntheticCohort, SyntheticCohortSpec};

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufRead, BufReader, Lines, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::json::to_canonical_line;
use crate::memory::ClassLabel;

pub const BACKBONE_SCHEMA: &str = "backbone/v1";

/// Neighborhood size used when none is configured.
pub const DEFAULT_NEIGHBORHOOD: usize = 3;

#[derive(Debug, Error)]
pub enum BackboneError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: invalid `{field}`: {message}")]
    InvariantViolation { line: usize, field: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Neighbor {
    pub prototype_id: u32,
    pub weight: f64,
    pub similarity: f64,
}

/// Frozen-classifier output for one query case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackboneOutput {
    #[serde(default = "schema_tag")]
    pub schema_version: String,
    pub case_id: String,
    pub predicted_class: ClassLabel,
    pub severity: f64,
    pub modality_gate: f64,
    pub neighborhood: Vec<Neighbor>,
}

fn schema_tag() -> String {
    BACKBONE_SCHEMA.to_string()
}

impl BackboneOutput {
    pub fn new(
        case_id: impl Into<String>,
        predicted_class: ClassLabel,
        severity: f64,
        modality_gate: f64,
        neighborhood: Vec<Neighbor>,
    ) -> Self {
        Self {
            schema_version: schema_tag(),
            case_id: case_id.into(),
            predicted_class,
            severity,
            modality_gate,
            neighborhood,
        }
    }

    /// Checks the record invariants, returning the offending field and reason.
    pub fn check(&self) -> Result<(), (&'static str, String)> {
        if self.schema_version != BACKBONE_SCHEMA {
            return Err((
                "schema_version",
                format!("expected `{BACKBONE_SCHEMA}`, got `{}`", self.schema_version),
            ));
        }
        if self.case_id.is_empty() {
            return Err(("case_id", "must not be empty".into()));
        }
        if !self.severity.is_finite() {
            return Err(("severity", "must be finite".into()));
        }
        if !(0.0..=1.0).contains(&self.modality_gate) {
            return Err(("modality_gate", format!("{} is outside [0, 1]", self.modality_gate)));
        }
        if self.neighborhood.is_empty() {
            return Err(("neighborhood", "must not be empty".into()));
        }
        let mut seen = BTreeSet::new();
        for n in &self.neighborhood {
            if !seen.insert(n.prototype_id) {
                return Err(("neighborhood.prototype_id", format!("{} appears twice", n.prototype_id)));
            }
            if !n.weight.is_finite() || n.weight < 0.0 {
                return Err(("neighborhood.weight", format!("{} is negative or not finite", n.weight)));
            }
            if !(0.0..=1.0).contains(&n.similarity) {
                return Err(("neighborhood.similarity", format!("{} is outside [0, 1]", n.similarity)));
            }
        }
        Ok(())
    }

    pub fn similarities(&self) -> Vec<(u32, f64)> {
        self.neighborhood.iter().map(|n| (n.prototype_id, n.similarity)).collect()
    }
}

/// Streaming, validating reader over a backbone JSONL source.
pub struct BackboneReader<R> {
    lines: Lines<R>,
    line: usize,
}

impl<R: BufRead> BackboneReader<R> {
    pub fn new(input: R) -> Self {
        Self {
            lines: input.lines(),
            line: 0,
        }
    }
}

impl<R: BufRead> Iterator for BackboneReader<R> {
    type Item = Result<BackboneOutput, BackboneError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let text = match self.lines.next()? {
                Ok(t) => t,
                Err(e) => return Some(Err(e.into())),
            };
            self.line += 1;
            if text.trim().is_empty() {
                continue;
            }
            let line = self.line;
            let rec: BackboneOutput = match serde_json::from_str(&text) {
                Ok(r) => r,
                Err(e) => {
                    return Some(Err(BackboneError::Parse {
                        line,
                        message: e.to_string(),
                    }))
                }
            };
            return Some(match rec.check() {
                Ok(()) => Ok(rec),
                Err((field, message)) => Err(BackboneError::InvariantViolation {
                    line,
                    field: field.into(),
                    message,
                }),
            });
        }
    }
}

pub fn load_backbone_outputs(path: impl AsRef<Path>) -> Result<BackboneReader<BufReader<File>>, BackboneError> {
    Ok(BackboneReader::new(BufReader::new(File::open(path)?)))
}

pub fn write_backbone_outputs<W: Write>(outputs: &[BackboneOutput], mut out: W) -> Result<(), BackboneError> {
    for o in outputs {
        let text = to_canonical_line(o).map_err(|e| BackboneError::Parse {
            line: 0,
            message: e.to_string(),
        })?;
        writeln!(out, "{text}")?;
    }
    Ok(())
}
