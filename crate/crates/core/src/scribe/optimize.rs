//! The propose/critique loop.

use serde::{Deserialize, Serialize};

use super::critic::{parse_report, Critic, CriticVerdict};
use super::report::Report;
use super::{Scribe, ScribeError};
use crate::diff::GroundedState;

pub const DEFAULT_MAX_ITERATIONS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoopConfig {
    /// Maximum number of critic evaluations, `T`.
    pub max_iterations: usize,
    /// Extra attempts allowed for each proposal when the backend fails.
    pub retry_budget: usize,
}

impl Default for LoopConfig {
    fn default() -> Self {
        Self {
            max_iterations: DEFAULT_MAX_ITERATIONS,
            retry_budget: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DeferReason {
    /// `T` proposals were rejected.
    Exhausted,
    BackendFailure {
        message: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum OptimizationOutcome {
    Accepted {
        report: Report,
        iterations_used: usize,
    },
    Deferred {
        reason: DeferReason,
        last_verdict: Option<CriticVerdict>,
        iterations_used: usize,
    },
}

impl OptimizationOutcome {
    pub fn iterations_used(&self) -> usize {
        match self {
            OptimizationOutcome::Accepted { iterations_used, .. } | OptimizationOutcome::Deferred { iterations_used, .. } => {
                *iterations_used
            }
        }
    }

    pub fn report(&self) -> Option<&Report> {
        match self {
            OptimizationOutcome::Accepted { report, .. } => Some(report),
            OptimizationOutcome::Deferred { .. } => None,
        }
    }
}

/// Full record of one loop run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationTrace {
    pub outcome: OptimizationOutcome,
    pub verdicts: Vec<CriticVerdict>,
}

fn propose_with_retry(
    scribe: &mut dyn Scribe,
    state: &GroundedState,
    feedback: Option<&CriticVerdict>,
    budget: usize,
) -> Result<serde_json::Value, ScribeError> {
    let mut attempt = 0;
    loop {
        match scribe.propose(state, feedback) {
            Ok(v) => return Ok(v),
            Err(e) if attempt >= budget => return Err(e),
            Err(_) => attempt += 1,
        }
    }
}

/// Proposes `R_0`, then for `t = 0..T` evaluates `R_t`, accepts it at zero
/// energy, and otherwise feeds the critique into the next proposal. No
/// proposal is requested after the last evaluation.
pub fn optimize_report(
    state: &GroundedState,
    scribe: &mut dyn Scribe,
    critic: &Critic<'_>,
    config: LoopConfig,
) -> OptimizationTrace {
    let t_max = config.max_iterations.max(1);
    let mut verdicts: Vec<CriticVerdict> = Vec::new();
    let backend_failure = |e: ScribeError, verdicts: Vec<CriticVerdict>| {
        let iterations_used = verdicts.len();
        OptimizationTrace {
            outcome: OptimizationOutcome::Deferred {
                reason: DeferReason::BackendFailure { message: e.to_string() },
                last_verdict: verdicts.last().cloned(),
                iterations_used,
            },
            verdicts,
        }
    };
    let mut current = match propose_with_retry(scribe, state, None, config.retry_budget) {
        Ok(v) => v,
        Err(e) => return backend_failure(e, verdicts),
    };
    for t in 0..t_max {
        let verdict = critic.evaluate(&current, state);
        let accepted = verdict.is_accepted();
        verdicts.push(verdict);
        if accepted {
            if let Some(report) = parse_report(&current) {
                return OptimizationTrace {
                    outcome: OptimizationOutcome::Accepted {
                        report,
                        iterations_used: t + 1,
                    },
                    verdicts,
                };
            }
        }
        if t + 1 < t_max {
            current = match propose_with_retry(scribe, state, verdicts.last(), config.retry_budget) {
                Ok(v) => v,
                Err(e) => return backend_failure(e, verdicts),
            };
        }
    }
    OptimizationTrace {
        outcome: OptimizationOutcome::Deferred {
            reason: DeferReason::Exhausted,
            last_verdict: verdicts.last().cloned(),
            iterations_used: t_max,
        },
        verdicts,
    }
}
