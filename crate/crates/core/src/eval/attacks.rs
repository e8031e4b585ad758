use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::gate::{GatedCard, ReleaseSignature};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AttackKind {
    #[serde(rename = "MIA")]
    Mia,
    #[serde(rename = "AIA")]
    Aia,
    #[serde(rename = "Link@1")]
    Link,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackResult {
    pub attack: AttackKind,
    pub accuracy: f64,
    pub successes: f64,
    pub trials: usize,
    pub tie_events: usize,
}

impl AttackResult {
    fn new(attack: AttackKind, successes: f64, trials: usize, tie_events: usize) -> Self {
        let accuracy = if trials == 0 { 0.0 } else { successes / trials as f64 };
        Self {
            attack,
            accuracy,
            successes,
            trials,
            tie_events,
        }
    }
}

pub trait MembershipAttacker<A> {
    fn predict(&self, artifact: &A) -> bool;
}

impl<A, F: Fn(&A) -> bool> MembershipAttacker<A> for F {
    fn predict(&self, artifact: &A) -> bool {
        self(artifact)
    }
}

pub trait AttributeAttacker<A, Z> {
    fn predict(&self, artifact: &A, aux: &Z) -> String;
}

impl<A, Z, F: Fn(&A, &Z) -> String> AttributeAttacker<A, Z> for F {
    fn predict(&self, artifact: &A, aux: &Z) -> String {
        self(artifact, aux)
    }
}

pub trait LinkScorer<A, C> {
    fn score(&self, artifact: &A, candidate: &C) -> f64;
}

impl<A, C, F: Fn(&A, &C) -> f64> LinkScorer<A, C> for F {
    fn score(&self, artifact: &A, candidate: &C) -> f64 {
        self(artifact, candidate)
    }
}

/// Membership accuracy: share of artifacts whose predicted membership
/// matches the label.
pub fn mia<A>(items: &[(A, bool)], attacker: &impl MembershipAttacker<A>) -> Result<AttackResult, EvalError> {
    let members = items.iter().filter(|(_, m)| *m).count();
    if members == 0 || members == items.len() {
        return Err(EvalError::SingleClassPopulation);
    }
    let hits = items.iter().filter(|(a, m)| attacker.predict(a) == *m).count();
    Ok(AttackResult::new(AttackKind::Mia, hits as f64, items.len(), 0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct AiaTarget<A, Z> {
    pub artifact: A,
    pub aux: Z,
    pub sensitive: String,
}

pub fn aia<A, Z>(targets: &[AiaTarget<A, Z>], attacker: &impl AttributeAttacker<A, Z>) -> Result<AttackResult, EvalError> {
    if targets.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let hits = targets
        .iter()
        .filter(|t| attacker.predict(&t.artifact, &t.aux) == t.sensitive)
        .count();
    Ok(AttackResult::new(AttackKind::Aia, hits as f64, targets.len(), 0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TiePolicy {
    /// A tie that contains the truth earns 1/|argmax|.
    #[default]
    Fractional,
    /// Only a unique, correct argmax counts.
    Strict,
    /// The attacker picks uniformly among the argmax set.
    Random { seed: u64 },
}

pub struct LinkCase<'a, A, C> {
    pub artifact: &'a A,
    pub candidates: &'a [C],
    /// Index of the true source record inside `candidates`.
    pub truth: usize,
}

/// Top-1 linkage success. An empty case list scores 0 over 0 trials.
pub fn link_top1<A, C>(
    cases: &[LinkCase<'_, A, C>],
    scorer: &impl LinkScorer<A, C>,
    policy: TiePolicy,
) -> Result<AttackResult, EvalError> {
    let mut rng = match policy {
        TiePolicy::Random { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
        _ => None,
    };
    let mut successes = 0.0;
    let mut ties = 0;
    for (i, case) in cases.iter().enumerate() {
        if case.candidates.is_empty() {
            return Err(EvalError::EmptyCandidateSet(i));
        }
        if case.truth >= case.candidates.len() {
            return Err(EvalError::TruthNotInCandidates {
                case: i,
                truth: case.truth,
                size: case.candidates.len(),
            });
        }
        let scores: Vec<f64> = case.candidates.iter().map(|c| scorer.score(case.artifact, c)).collect();
        let best = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let argmax: Vec<usize> = (0..scores.len()).filter(|&j| scores[j] == best).collect();
        if argmax.len() > 1 {
            ties += 1;
        }
        let truth_in = argmax.contains(&case.truth);
        successes += match policy {
            TiePolicy::Strict => f64::from(u8::from(argmax.len() == 1 && truth_in)),
            TiePolicy::Fractional => {
                if truth_in {
                    1.0 / argmax.len() as f64
                } else {
                    0.0
                }
            }
            TiePolicy::Random { .. } => {
                let pick = if argmax.len() == 1 {
                    argmax[0]
                } else {
                    argmax[rng.as_mut().expect("seeded").random_range(0..argmax.len())]
                };
                f64::from(u8::from(pick == case.truth))
            }
        };
    }
    Ok(AttackResult::new(AttackKind::Link, successes, cases.len(), ties))
}

/// What an attacker sees of one released card: its signature, or nothing
/// when the card was redacted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReleasedArtifact {
    pub source_id: String,
    pub disclosed: Option<ReleaseSignature>,
}

/// Builds the attacker view of a gated card given its signature.
pub fn released_artifact(source_id: &str, gated: &GatedCard, signature: &ReleaseSignature) -> ReleasedArtifact {
    ReleasedArtifact {
        source_id: source_id.to_string(),
        disclosed: gated.is_visible().then(|| signature.clone()),
    }
}

/// An identified record held by the linkage attacker.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegistryEntry {
    pub record_id: String,
    pub signature: ReleaseSignature,
}

fn sym_diff_len(a: &[String], b: &[String]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
            std::cmp::Ordering::Less => {
                n += 1;
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                n += 1;
                j += 1;
            }
        }
    }
    n + (a.len() - i) + (b.len() - j)
}

/// Matching quasi-identifier positions plus matching bucket indicators
/// (both present or both absent) over the bucket vocabulary.
fn matching_elements(a: &ReleaseSignature, b: &ReleaseSignature, vocabulary: usize) -> usize {
    let quasi = a.quasi_values.iter().zip(&b.quasi_values).filter(|(x, y)| x == y).count();
    let diff = sym_diff_len(&a.semantic_buckets, &b.semantic_buckets);
    quasi + vocabulary.saturating_sub(diff)
}

/// Built-in linkage scorer.
#[derive(Debug, Clone)]
pub struct SignatureMatchScorer {
    pub bucket_vocabulary: usize,
}

impl LinkScorer<ReleasedArtifact, RegistryEntry> for SignatureMatchScorer {
    fn score(&self, artifact: &ReleasedArtifact, candidate: &RegistryEntry) -> f64 {
        match &artifact.disclosed {
            Some(sig) => matching_elements(sig, &candidate.signature, self.bucket_vocabulary) as f64,
            None => 0.0,
        }
    }
}

/// Built-in membership attacker: predicts "member" when the disclosed
/// signature overlaps some protected-corpus signature by at least
/// `threshold` (fraction of signature elements that match).
#[derive(Debug, Clone)]
pub struct SignatureOverlapMia {
    corpus: BTreeSet<ReleaseSignature>,
    bucket_vocabulary: usize,
    pub threshold: f64,
}

impl SignatureOverlapMia {
    pub fn new(corpus: impl IntoIterator<Item = ReleaseSignature>, bucket_vocabulary: usize, threshold: f64) -> Self {
        Self {
            corpus: corpus.into_iter().collect(),
            bucket_vocabulary,
            threshold,
        }
    }

    pub fn overlap(&self, sig: &ReleaseSignature) -> f64 {
        if self.corpus.contains(sig) {
            return 1.0;
        }
        let total = (sig.quasi_values.len() + self.bucket_vocabulary).max(1) as f64;
        self.corpus
            .iter()
            .map(|c| matching_elements(sig, c, self.bucket_vocabulary) as f64 / total)
            .fold(0.0, f64::max)
    }
}

impl MembershipAttacker<ReleasedArtifact> for SignatureOverlapMia {
    fn predict(&self, artifact: &ReleasedArtifact) -> bool {
        match &artifact.disclosed {
            Some(sig) => self.overlap(sig) >= self.threshold,
            None => false,
        }
    }
}

fn fnv1a(bytes: &[u8], seed: u64) -> u64 {
    let mut h = 0xcbf29ce484222325u64 ^ seed;
    for b in bytes {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Built-in attribute attacker: majority sensitive value among released
/// cards sharing the target's signature, falling back to the released-surface
/// majority, then to `fallback`. Ties break by a seeded hash of the signature.
#[derive(Debug, Clone)]
pub struct ClassMajorityAttacker {
    surface: BTreeMap<ReleaseSignature, BTreeMap<String, usize>>,
    global: BTreeMap<String, usize>,
    fallback: String,
    seed: u64,
}

impl ClassMajorityAttacker {
    pub fn new(released: impl IntoIterator<Item = (ReleaseSignature, String)>, fallback: impl Into<String>, seed: u64) -> Self {
        let mut surface: BTreeMap<ReleaseSignature, BTreeMap<String, usize>> = BTreeMap::new();
        let mut global: BTreeMap<String, usize> = BTreeMap::new();
        for (sig, value) in released {
            *surface.entry(sig).or_default().entry(value.clone()).or_default() += 1;
            *global.entry(value).or_default() += 1;
        }
        Self {
            surface,
            global,
            fallback: fallback.into(),
            seed,
        }
    }

    fn vote(&self, counts: &BTreeMap<String, usize>, key: &str) -> String {
        let best = counts.values().copied().max().unwrap_or(0);
        let tied: Vec<&String> = counts.iter().filter(|(_, c)| **c == best).map(|(v, _)| v).collect();
        if tied.is_empty() {
            return self.fallback.clone();
        }
        let pick = (fnv1a(key.as_bytes(), self.seed) % tied.len() as u64) as usize;
        tied[pick].clone()
    }
}

impl AttributeAttacker<ReleasedArtifact, ReleaseSignature> for ClassMajorityAttacker {
    fn predict(&self, artifact: &ReleasedArtifact, aux: &ReleaseSignature) -> String {
        let sig = artifact.disclosed.as_ref().unwrap_or(aux);
        match self.surface.get(sig) {
            Some(counts) => self.vote(counts, &sig.key()),
            None => self.vote(&self.global, "<global>"),
        }
    }
}
