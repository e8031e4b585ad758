//! Discrete memory bank: quantized records, consensus assertions and cards.

mod assertion;
mod bank;
mod card;
mod quantize;

pub use assertion::{
    consensus_assertions, default_min_support, Assertion, AssertionNormalizer, Polarity, RawAssertion, TaxonomyNormalizer,
};
pub use bank::{read_bank, write_bank, MemoryBank};
pub use card::{build_casecard, build_protocard, CaseCard, ClassLabel, Distiller, ProtoCard, Provenance};
pub use quantize::{quantize, BinSchema, FieldSpec, QuantizedRecord, RawRecord, RawValue};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MemoryError {
    #[error("field `{0}` is not part of the tabular schema")]
    UnknownField(String),
    #[error("schema field `{0}` is missing from the record")]
    MissingField(String),
    #[error("field `{field}`: value {value} lies outside the configured edges")]
    OutOfRange { field: String, value: f64 },
    #[error("field `{0}`: value is not finite")]
    NonFinite(String),
    #[error("field `{field}`: expected a {expected} value")]
    TypeMismatch { field: String, expected: &'static str },
    #[error("field `{field}`: category `{value}` is not configured")]
    UnknownCategory { field: String, value: String },
    #[error("min_support {min_support} is invalid for {views} view(s)")]
    InvalidSupport { min_support: usize, views: usize },
    #[error("concept `{0}` is not in the taxonomy")]
    UnknownConcept(String),
    #[error("class label `{0}` is not configured")]
    UnknownClass(String),
    #[error("invalid schema: {0}")]
    InvalidSchema(String),
    #[error("bank line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
