//! Privacy-gated prototype evidence pipeline.
//!
//! A frozen prototype classifier returns a retrieval neighborhood for every
//! query. This crate turns that neighborhood into a structured report whose
//! every claim can be traced back to an exact case/prototype comparison:
//!
//! * [`memory`] distills prototypes into discrete cards (consensus assertions
//!   plus quantized tabular bins).
//! * [`gate`] enforces a (k, l) release rule over card signatures and sweeps
//!   the privacy/utility frontier.
//! * [`diff`] computes exact set differentials and the grounded state handed
//!   to report writers.
//! * [`scribe`] runs the propose/critique repair loop against a barrier critic.
//! * [`eval`] scores comparison faithfulness and artifact-level attacks.
//! * [`backbone`] ingests backbone outputs and generates seeded synthetic cohorts.

pub mod backbone;
pub mod config;
pub mod diff;
pub mod eval;
pub mod gate;
pub mod json;
pub mod memory;
pub mod pipeline;
pub mod scribe;
pub mod taxonomy;

pub use backbone::{BackboneOutput, Neighbor};
pub use diff::{Deferral, Differential, GroundedState, TabularMismatch, VisibleEvidence};
pub use gate::{FrontierPoint, GateConfig, GateIndex, GatedCard, ReleaseSignature};
pub use memory::{Assertion, BinSchema, CaseCard, ClassLabel, Polarity, ProtoCard, QuantizedRecord};
pub use scribe::{Claim, ClaimPartition, CriticVerdict, OptimizationOutcome, Report};
pub use taxonomy::{BucketMap, Taxonomy};
