//! Privacy/utility frontier over a grid of (k, l) thresholds.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{apply_gate, evidence_utility, fit_gate, signature, GateConfig, GateError, GatedCard, ReleaseSignature};
use crate::eval::{link_top1, LinkCase, RegistryEntry, ReleasedArtifact, SignatureMatchScorer, TiePolicy};
use crate::memory::ProtoCard;
use crate::taxonomy::BucketMap;

pub const FRONTIER_HEADER: &str = "k,l,utility,visible_rate,redaction_rate,linkage";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontierPoint {
    pub k: usize,
    pub l: usize,
    pub utility: f64,
    pub visible_rate: f64,
    pub redaction_rate: f64,
    pub linkage: f64,
}

pub struct SweepInputs<'a> {
    /// Cards that would be released.
    pub cards: &'a [ProtoCard],
    /// `(signature, sensitive value)` pairs the index is fit on.
    pub population: &'a [(ReleaseSignature, String)],
    /// Per-case retrieval neighborhoods `(prototype_id, similarity)`.
    /// Utility is averaged over them; with none, utility equals the visible rate.
    pub neighborhoods: &'a [Vec<(u32, f64)>],
    /// Identified records available to the linkage attacker.
    pub registry: &'a [RegistryEntry],
    /// Source record of each card, keyed by prototype id.
    pub card_sources: &'a BTreeMap<u32, String>,
    pub config: &'a GateConfig,
    pub buckets: &'a BucketMap,
}

pub fn sweep_frontier(inputs: &SweepInputs<'_>, k_values: &[usize], l_values: &[usize]) -> Result<Vec<FrontierPoint>, GateError> {
    if k_values.is_empty() || l_values.is_empty() {
        return Err(GateError::InvalidConfig("k and l grids must be nonempty".into()));
    }
    let index = fit_gate(inputs.population.iter().cloned())?;
    let signatures: Vec<Option<ReleaseSignature>> = inputs
        .cards
        .iter()
        .map(|c| signature(c, inputs.config, inputs.buckets).ok())
        .collect();
    let positions: BTreeMap<&str, usize> = inputs
        .registry
        .iter()
        .enumerate()
        .map(|(i, r)| (r.record_id.as_str(), i))
        .collect();
    let scorer = SignatureMatchScorer {
        bucket_vocabulary: inputs.buckets.vocabulary().len(),
    };

    let mut points = Vec::with_capacity(k_values.len() * l_values.len());
    for &l in l_values {
        for &k in k_values {
            let cfg = inputs.config.with_thresholds(k, l);
            cfg.validate()?;
            let gated: Vec<GatedCard> = inputs
                .cards
                .iter()
                .map(|c| apply_gate(c, &index, &cfg, inputs.buckets))
                .collect();
            let visible = gated.iter().filter(|g| g.is_visible()).count();
            let total = gated.len();
            let visible_rate = if total == 0 { 0.0 } else { visible as f64 / total as f64 };

            let utility = if inputs.neighborhoods.is_empty() {
                visible_rate
            } else {
                let mut sum = 0.0;
                for nb in inputs.neighborhoods {
                    sum += evidence_utility(&gated, nb)?;
                }
                sum / inputs.neighborhoods.len() as f64
            };

            let mut artifacts = Vec::new();
            for (card, (g, sig)) in inputs.cards.iter().zip(gated.iter().zip(&signatures)) {
                let (true, Some(sig)) = (g.is_visible(), sig) else { continue };
                let source = inputs
                    .card_sources
                    .get(&card.prototype_id)
                    .ok_or_else(|| GateError::Linkage(format!("no source record for prototype {}", card.prototype_id)))?;
                let truth = *positions
                    .get(source.as_str())
                    .ok_or_else(|| GateError::Linkage(format!("source `{source}` is not in the registry")))?;
                artifacts.push((
                    ReleasedArtifact {
                        source_id: source.clone(),
                        disclosed: Some(sig.clone()),
                    },
                    truth,
                ));
            }
            let cases: Vec<LinkCase<'_, ReleasedArtifact, RegistryEntry>> = artifacts
                .iter()
                .map(|(a, truth)| LinkCase {
                    artifact: a,
                    candidates: inputs.registry,
                    truth: *truth,
                })
                .collect();
            let linkage = link_top1(&cases, &scorer, TiePolicy::Fractional)
                .map_err(|e| GateError::Linkage(e.to_string()))?
                .accuracy;

            points.push(FrontierPoint {
                k,
                l,
                utility,
                visible_rate,
                redaction_rate: 1.0 - visible_rate,
                linkage,
            });
        }
    }
    Ok(points)
}

pub fn write_frontier_csv<W: Write>(points: &[FrontierPoint], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{FRONTIER_HEADER}")?;
    for p in points {
        writeln!(
            out,
            "{},{},{:.6},{:.6},{:.6},{:.6}",
            p.k, p.l, p.utility, p.visible_rate, p.redaction_rate, p.linkage
        )?;
    }
    Ok(())
}
