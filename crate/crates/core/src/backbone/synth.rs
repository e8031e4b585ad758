//! Seeded synthetic cohorts with a known equivalence-class structure.
//!
//! Every equivalence class gets its own combination of quasi-identifier bins
//! (age, BMI, sex) and semantic buckets, so the class sizes and sensitive
//! compositions requested in the cohort spec are exactly what a gate fitted on the
//! population will observe. View noise is restricted to perturbations that
//! the default consensus threshold removes again.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::records::{CaseRecord, MembershipLabel, PopulationRecord, PrototypeRecord};
use super::{BackboneOutput, Neighbor, DEFAULT_NEIGHBORHOOD};
use crate::json::{write_jsonl, JsonlError};
use crate::memory::{Assertion, BinSchema, ClassLabel, Polarity, RawRecord, RawValue};
use crate::taxonomy::Taxonomy;

#[derive(Debug, Error)]
pub enum CohortError {
    #[error("invalid cohort spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Write(#[from] JsonlError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Size and number of distinct sensitive values of one equivalence class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassPlan {
    pub size: usize,
    pub distinct: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClassLayout {
    /// Exactly these classes, in order.
    Explicit { classes: Vec<ClassPlan> },
    /// Class sizes drawn from `size_weights` (entry `i` weighs size `i + 1`)
    /// until `population_size` is reached. A class is single-valued with
    /// probability `concentration`.
    Random { size_weights: Vec<f64>, concentration: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticCohortSpec {
    pub seed: u64,
    /// Ignored by explicit layouts unless nonzero, in which case it must
    /// match the planned total.
    pub population_size: usize,
    pub class_labels: Vec<String>,
    pub class_priors: Vec<f64>,
    pub layout: ClassLayout,
    pub views: usize,
    pub noise_rate: f64,
    pub neighborhood_k: usize,
    pub cases: usize,
    /// Number of population records promoted to prototypes; `None` promotes all.
    pub prototypes: Option<usize>,
    pub non_members: usize,
    /// Chance that a non-member shares the signature of an existing record.
    pub non_member_overlap: f64,
    /// Adds a unique marker concept and site value to every record.
    pub canaries: bool,
}

impl Default for SyntheticCohortSpec {
    fn default() -> Self {
        Self {
            seed: 7,
            population_size: 400,
            class_labels: vec!["Normal".into(), "Osteopenia".into(), "Osteoporosis".into()],
            class_priors: vec![0.4, 0.35, 0.25],
            layout: ClassLayout::Random {
                size_weights: vec![3.0, 2.0, 2.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0],
                concentration: 0.4,
            },
            views: 3,
            noise_rate: 0.1,
            neighborhood_k: DEFAULT_NEIGHBORHOOD,
            cases: 50,
            prototypes: None,
            non_members: 400,
            non_member_overlap: 0.5,
            canaries: false,
        }
    }
}

impl SyntheticCohortSpec {
    pub fn validate(&self) -> Result<(), CohortError> {
        let bad = |m: &str| Err(CohortError::InvalidSpec(m.to_string()));
        if self.class_labels.is_empty() || self.class_labels.len() != self.class_priors.len() {
            return bad("class_labels and class_priors must be nonempty and the same length");
        }
        if self.class_labels.iter().collect::<BTreeSet<_>>().len() != self.class_labels.len() {
            return bad("class labels must be distinct");
        }
        if self.class_priors.iter().any(|p| !p.is_finite() || *p <= 0.0) {
            return bad("class priors must be positive");
        }
        if self.views == 0 {
            return bad("views must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.noise_rate) || !(0.0..=1.0).contains(&self.non_member_overlap) {
            return bad("rates must lie in [0, 1]");
        }
        if self.neighborhood_k == 0 {
            return bad("neighborhood_k must be at least 1");
        }
        match &self.layout {
            ClassLayout::Explicit { classes } => {
                for c in classes {
                    if c.size == 0 || c.distinct == 0 || c.distinct > c.size || c.distinct > self.class_labels.len() {
                        return bad("each class needs 1 <= distinct <= min(size, labels)");
                    }
                }
                let total: usize = classes.iter().map(|c| c.size).sum();
                if self.population_size != 0 && self.population_size != total {
                    return bad("population_size does not match the explicit class sizes");
                }
            }
            ClassLayout::Random {
                size_weights,
                concentration,
            } => {
                if size_weights.is_empty()
                    || size_weights.iter().any(|w| !w.is_finite() || *w < 0.0)
                    || size_weights.iter().all(|w| *w == 0.0)
                {
                    return bad("size_weights must be nonnegative with a positive entry");
                }
                if !(0.0..=1.0).contains(concentration) {
                    return bad("concentration must lie in [0, 1]");
                }
            }
        }
        if let Some(p) = self.prototypes {
            if p > self.total_population() {
                return bad("more prototypes than population records");
            }
        }
        Ok(())
    }

    fn total_population(&self) -> usize {
        match &self.layout {
            ClassLayout::Explicit { classes } => classes.iter().map(|c| c.size).sum(),
            ClassLayout::Random { .. } => self.population_size,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCohort {
    pub taxonomy: Taxonomy,
    pub schema: BinSchema,
    pub quasi_fields: Vec<String>,
    /// Realized equivalence classes; `class_of[i]` indexes into it.
    pub classes: Vec<ClassPlan>,
    pub class_of: Vec<usize>,
    pub population: Vec<PopulationRecord>,
    pub prototypes: Vec<PrototypeRecord>,
    pub cases: Vec<CaseRecord>,
    pub backbone: Vec<BackboneOutput>,
    pub non_members: Vec<PopulationRecord>,
    pub membership: Vec<MembershipLabel>,
}

impl SyntheticCohort {
    pub fn write_to_dir(&self, dir: &Path) -> Result<(), CohortError> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("taxonomy.tsv"), self.taxonomy.to_tsv())?;
        let schema = toml::to_string(&self.schema).map_err(|e| CohortError::InvalidSpec(e.to_string()))?;
        fs::write(dir.join("schema.toml"), schema)?;
        let file = |name: &str| fs::File::create(dir.join(name)).map(std::io::BufWriter::new);
        write_jsonl(&self.population, file("population.jsonl")?)?;
        write_jsonl(&self.prototypes, file("prototypes.jsonl")?)?;
        write_jsonl(&self.cases, file("cases.jsonl")?)?;
        write_jsonl(&self.backbone, file("backbone.jsonl")?)?;
        write_jsonl(&self.non_members, file("non_members.jsonl")?)?;
        write_jsonl(&self.membership, file("membership.jsonl")?)?;
        Ok(())
    }
}

const AGE_EDGES: [f64; 9] = [20.0, 30.0, 40.0, 50.0, 60.0, 70.0, 80.0, 90.0, 100.0];
const BMI_EDGES: [f64; 6] = [12.0, 18.5, 25.0, 30.0, 35.0, 50.0];
const TSCORE_EDGES: [f64; 4] = [-6.0, -2.5, -1.0, 4.0];
const SEXES: [&str; 2] = ["F", "M"];

const BUCKETS: [(&str, [(&str, &str); 2]); 6] = [
    (
        "degenerative",
        [("endplate_sclerosis", "endplate sclerosis"), ("osteophyte", "osteophyte")],
    ),
    (
        "fracture",
        [
            ("wedge_fracture", "vertebral wedge fracture"),
            ("hip_fracture", "hip fracture"),
        ],
    ),
    (
        "artifact",
        [("metal_artifact", "metal artifact"), ("overlay", "radiopaque overlay")],
    ),
    (
        "density",
        [
            ("cortical_thinning", "cortical thinning"),
            ("trabecular_loss", "trabecular loss"),
        ],
    ),
    ("alignment", [("scoliosis", "scoliosis"), ("kyphosis", "kyphosis")]),
    (
        "soft_tissue",
        [
            ("vascular_calcification", "vascular calcification"),
            ("soft_tissue_mass", "soft tissue mass"),
        ],
    ),
];

const COMBOS: usize = (AGE_EDGES.len() - 1) * (BMI_EDGES.len() - 1) * SEXES.len() * (1 << BUCKETS.len());

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Combo {
    age: usize,
    bmi: usize,
    sex: usize,
    mask: u32,
}

impl Combo {
    fn decode(mut i: usize) -> Self {
        let mask = (i % (1 << BUCKETS.len())) as u32;
        i /= 1 << BUCKETS.len();
        let sex = i % SEXES.len();
        i /= SEXES.len();
        let bmi = i % (BMI_EDGES.len() - 1);
        let age = i / (BMI_EDGES.len() - 1);
        Self { age, bmi, sex, mask }
    }
}

fn canary_id(tag: &str) -> String {
    format!("marker_{tag}")
}

fn build_taxonomy(canary_tags: &[String]) -> Taxonomy {
    let mut tax = Taxonomy::new();
    for (bucket, concepts) in BUCKETS {
        for (id, name) in concepts {
            tax.insert(id, name, Some(bucket)).expect("static taxonomy");
        }
    }
    for tag in canary_tags {
        tax.insert(&canary_id(tag), &format!("marker {tag}"), Some("marker"))
            .expect("generated id");
    }
    tax
}

fn build_schema(sites: Option<Vec<String>>) -> BinSchema {
    let mut fields = vec![
        BinSchema::numeric("age", AGE_EDGES.to_vec(), None).expect("static edges"),
        BinSchema::numeric("bmi", BMI_EDGES.to_vec(), None).expect("static edges"),
        BinSchema::categorical("sex", SEXES.iter().map(|s| s.to_string()).collect()).expect("static"),
        BinSchema::numeric(
            "tscore",
            TSCORE_EDGES.to_vec(),
            Some(vec!["osteoporotic".into(), "osteopenic".into(), "normal".into()]),
        )
        .expect("static edges"),
    ];
    if let Some(sites) = sites {
        fields.push(BinSchema::categorical("site", sites).expect("unique sites"));
    }
    BinSchema::new(fields).expect("static schema")
}

/// A value strictly inside bin `b`, on a 0.1 grid.
fn sample_in(rng: &mut ChaCha8Rng, edges: &[f64], b: usize) -> f64 {
    let (lo, hi) = (edges[b], edges[b + 1]);
    let steps = ((hi - lo) * 10.0).round() as u64;
    let v = lo + rng.random_range(0..steps) as f64 / 10.0;
    (v * 10.0).round() / 10.0
}

fn tscore_bin_for(label: &str, rng: &mut ChaCha8Rng) -> usize {
    match label {
        "Osteoporosis" => 0,
        "Osteopenia" => 1,
        "Normal" => 2,
        _ => rng.random_range(0..TSCORE_EDGES.len() - 1),
    }
}

struct Generator<'a> {
    spec: &'a SyntheticCohortSpec,
    rng: ChaCha8Rng,
    priors: WeightedIndex<f64>,
}

impl Generator<'_> {
    fn label(&mut self) -> usize {
        self.priors.sample(&mut self.rng)
    }

    /// `n` distinct label indices drawn by prior weight without replacement.
    fn distinct_labels(&mut self, n: usize) -> Vec<usize> {
        let mut pool: Vec<usize> = (0..self.spec.class_labels.len()).collect();
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            let w: Vec<f64> = pool.iter().map(|&i| self.spec.class_priors[i]).collect();
            let pick = WeightedIndex::new(&w).expect("positive priors").sample(&mut self.rng);
            out.push(pool.remove(pick));
        }
        out
    }

    fn assertions_for(&mut self, mask: u32) -> Vec<Assertion> {
        let mut out = Vec::new();
        for (b, (_, concepts)) in BUCKETS.iter().enumerate() {
            if mask & (1 << b) == 0 {
                continue;
            }
            let both = self.rng.random_bool(0.3);
            let first = self.rng.random_range(0..2);
            for (c, (id, _)) in concepts.iter().enumerate() {
                if both || c == first {
                    let pol = if self.rng.random_bool(0.8) {
                        Polarity::Present
                    } else {
                        Polarity::Absent
                    };
                    out.push(Assertion::new(*id, pol));
                }
            }
        }
        out
    }

    /// Views whose consensus at the default threshold is exactly `truth`.
    fn views_for(&mut self, truth: &[Assertion]) -> Vec<Vec<Assertion>> {
        let r = self.spec.views;
        let mut views = vec![truth.to_vec(); r];
        if self.spec.noise_rate == 0.0 {
            return views;
        }
        if r >= 2 {
            for a in truth {
                if self.rng.random_bool(self.spec.noise_rate) {
                    let v = self.rng.random_range(0..r);
                    views[v].retain(|x| x != a);
                }
            }
        }
        if r >= 3 {
            let used: BTreeSet<&str> = truth.iter().map(|a| a.concept_id.as_str()).collect();
            let mut pool: Vec<&str> = BUCKETS
                .iter()
                .flat_map(|(_, cs)| cs.iter().map(|(id, _)| *id))
                .filter(|id| !used.contains(id))
                .collect();
            pool.shuffle(&mut self.rng);
            for view in views.iter_mut() {
                if self.rng.random_bool(self.spec.noise_rate) {
                    if let Some(id) = pool.pop() {
                        view.push(Assertion::present(id));
                    }
                }
            }
        }
        views
    }

    fn raw_for(&mut self, combo: Combo, label: &str, site: Option<&str>) -> RawRecord {
        let mut raw = RawRecord::new();
        raw.insert(
            "age".into(),
            RawValue::Number(sample_in(&mut self.rng, &AGE_EDGES, combo.age)),
        );
        raw.insert(
            "bmi".into(),
            RawValue::Number(sample_in(&mut self.rng, &BMI_EDGES, combo.bmi)),
        );
        raw.insert("sex".into(), RawValue::from(SEXES[combo.sex]));
        let t = tscore_bin_for(label, &mut self.rng);
        raw.insert("tscore".into(), RawValue::Number(sample_in(&mut self.rng, &TSCORE_EDGES, t)));
        if let Some(site) = site {
            raw.insert("site".into(), RawValue::from(site));
        }
        raw
    }

    fn record(&mut self, record_id: String, combo: Combo, label: usize, canary: Option<&str>) -> PopulationRecord {
        let class = self.spec.class_labels[label].clone();
        let mut truth = self.assertions_for(combo.mask);
        if let Some(tag) = canary {
            truth.push(Assertion::present(canary_id(tag)));
        }
        let views = self.views_for(&truth);
        let raw = self.raw_for(combo, &class, canary);
        PopulationRecord {
            record_id,
            class_label: ClassLabel::new(class),
            views,
            raw,
        }
    }

    fn plan(&mut self) -> Vec<ClassPlan> {
        match &self.spec.layout {
            ClassLayout::Explicit { classes } => classes.clone(),
            ClassLayout::Random {
                size_weights,
                concentration,
            } => {
                let sizes = WeightedIndex::new(size_weights).expect("validated weights");
                let labels = self.spec.class_labels.len();
                let mut remaining = self.spec.population_size;
                let mut out = Vec::new();
                while remaining > 0 {
                    let size = (sizes.sample(&mut self.rng) + 1).min(remaining);
                    let cap = size.min(labels);
                    let distinct = if cap == 1 || self.rng.random_bool(*concentration) {
                        1
                    } else {
                        self.rng.random_range(2..=cap)
                    };
                    out.push(ClassPlan { size, distinct });
                    remaining -= size;
                }
                out
            }
        }
    }
}

fn assertion_ids(views: &[Vec<Assertion>]) -> BTreeSet<String> {
    // views share the truth; the first view is enough for geometry
    views.iter().flatten().map(Assertion::id).collect()
}

fn jaccard_distance(a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        return 0.0;
    }
    1.0 - a.intersection(b).count() as f64 / union as f64
}

/// Generates a cohort. Identical specs give identical cohorts.
pub fn synth_cohort(spec: &SyntheticCohortSpec) -> Result<SyntheticCohort, CohortError> {
    spec.validate()?;
    let mut g = Generator {
        spec,
        rng: ChaCha8Rng::seed_from_u64(spec.seed),
        priors: WeightedIndex::new(&spec.class_priors).map_err(|e| CohortError::InvalidSpec(e.to_string()))?,
    };
    let classes = g.plan();
    if classes.len() > COMBOS {
        return Err(CohortError::InvalidSpec(format!(
            "{} classes exceed the {COMBOS} available signatures",
            classes.len()
        )));
    }
    let population_size: usize = classes.iter().map(|c| c.size).sum();
    let tag = |prefix: &str, i: usize| format!("{prefix}{i:05}");
    let canary_tags: Vec<String> = if spec.canaries {
        (0..population_size)
            .map(|i| tag("p", i))
            .chain((0..spec.non_members).map(|i| tag("n", i)))
            .collect()
    } else {
        Vec::new()
    };
    let sites = spec.canaries.then(|| {
        canary_tags
            .iter()
            .cloned()
            .chain((0..spec.cases).map(|i| tag("q", i)))
            .collect::<Vec<_>>()
    });
    let taxonomy = build_taxonomy(&canary_tags);
    let schema = build_schema(sites);

    let mut order: Vec<usize> = (0..COMBOS).collect();
    order.shuffle(&mut g.rng);

    let mut population = Vec::with_capacity(population_size);
    let mut class_of = Vec::with_capacity(population_size);
    let mut combos_of = Vec::with_capacity(population_size);
    for (ci, plan) in classes.iter().enumerate() {
        let combo = Combo::decode(order[ci]);
        let labels = g.distinct_labels(plan.distinct);
        let mut slots: Vec<usize> = (0..plan.size).map(|i| labels[i % plan.distinct]).collect();
        slots.shuffle(&mut g.rng);
        for label in slots {
            let i = population.len();
            let canary = spec.canaries.then(|| tag("p", i));
            let rec = g.record(tag("rec-", i), combo, label, canary.as_deref());
            population.push(rec);
            class_of.push(ci);
            combos_of.push(combo);
        }
    }

    let chosen: Vec<usize> = match spec.prototypes {
        None => (0..population_size).collect(),
        Some(n) => {
            let mut idx = rand::seq::index::sample(&mut g.rng, population_size, n).into_vec();
            idx.sort_unstable();
            idx
        }
    };
    let prototypes: Vec<PrototypeRecord> = chosen
        .iter()
        .enumerate()
        .map(|(pid, &i)| {
            let r = &population[i];
            PrototypeRecord {
                prototype_id: pid as u32,
                record_id: r.record_id.clone(),
                class_label: r.class_label.clone(),
                views: r.views.clone(),
                raw: r.raw.clone(),
            }
        })
        .collect();

    let mut non_members = Vec::with_capacity(spec.non_members);
    let mut fresh = order.iter().skip(classes.len()).copied();
    if population_size > 0 {
        for i in 0..spec.non_members {
            let collide = g.rng.random_bool(spec.non_member_overlap);
            let combo = match (collide, fresh.next_back()) {
                (false, Some(c)) => Combo::decode(c),
                _ => combos_of[g.rng.random_range(0..population_size)],
            };
            let label = g.label();
            let canary = spec.canaries.then(|| tag("n", i));
            non_members.push(g.record(tag("non-", i), combo, label, canary.as_deref()));
        }
    }
    let membership = prototypes
        .iter()
        .map(|p| MembershipLabel {
            record_id: p.record_id.clone(),
            member: true,
        })
        .chain(non_members.iter().map(|n| MembershipLabel {
            record_id: n.record_id.clone(),
            member: false,
        }))
        .collect();

    let mut cases = Vec::with_capacity(spec.cases);
    let mut backbone = Vec::with_capacity(spec.cases);
    if !prototypes.is_empty() {
        let proto_ids: Vec<BTreeSet<String>> = prototypes.iter().map(|p| assertion_ids(&p.views)).collect();
        let labels = spec.class_labels.len();
        for i in 0..spec.cases {
            let case_id = tag("case-", i);
            let base = g.rng.random_range(0..prototypes.len());
            let base_rec = &population[chosen[base]];
            let label_idx = spec
                .class_labels
                .iter()
                .position(|l| *l == base_rec.class_label.0)
                .unwrap_or(0);
            let base_truth: BTreeSet<Assertion> =
                crate::memory::consensus_assertions(&base_rec.views, crate::memory::default_min_support(base_rec.views.len()))
                    .unwrap_or_default();
            let mut truth: Vec<Assertion> = base_truth
                .into_iter()
                .filter(|a| !a.concept_id.starts_with("marker_"))
                .filter(|_| g.rng.random_bool(0.8))
                .collect();
            if g.rng.random_bool(0.5) {
                let all: Vec<&str> = BUCKETS.iter().flat_map(|(_, cs)| cs.iter().map(|(id, _)| *id)).collect();
                let id = *all.choose(&mut g.rng).expect("static concepts");
                if truth.iter().all(|a| a.concept_id != id) {
                    truth.push(Assertion::present(id));
                }
            }
            let views = g.views_for(&truth);
            let mut combo = combos_of[chosen[base]];
            if g.rng.random_bool(0.3) {
                combo.age = g.rng.random_range(0..AGE_EDGES.len() - 1);
            }
            if g.rng.random_bool(0.3) {
                combo.bmi = g.rng.random_range(0..BMI_EDGES.len() - 1);
            }
            let site = spec.canaries.then(|| tag("q", i));
            let raw = g.raw_for(combo, &base_rec.class_label.0, site.as_deref());
            let severity = match raw.get("tscore") {
                Some(RawValue::Number(t)) => *t,
                _ => 0.0,
            };

            let predicted = if labels == 1 || g.rng.random_bool(0.85) {
                label_idx
            } else {
                (label_idx + g.rng.random_range(1..labels)) % labels
            };
            let case_ids: BTreeSet<String> = truth.iter().map(Assertion::id).collect();
            let mut candidates: BTreeSet<usize> = BTreeSet::from([base]);
            let pool = (4 * spec.neighborhood_k).min(prototypes.len());
            for j in rand::seq::index::sample(&mut g.rng, prototypes.len(), pool) {
                candidates.insert(j);
            }
            let mut scored: Vec<(f64, usize)> = candidates
                .into_iter()
                .map(|j| (1.0 - 0.9 * jaccard_distance(&case_ids, &proto_ids[j]), j))
                .collect();
            scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
            scored.truncate(spec.neighborhood_k);
            let total: f64 = scored.iter().map(|(s, _)| s).sum();
            let neighborhood = scored
                .iter()
                .map(|&(s, j)| Neighbor {
                    prototype_id: j as u32,
                    weight: s / total,
                    similarity: s,
                })
                .collect();
            let gate = g.rng.random_range(0..=100) as f64 / 100.0;
            backbone.push(BackboneOutput::new(
                case_id.clone(),
                ClassLabel::new(spec.class_labels[predicted].clone()),
                severity,
                gate,
                neighborhood,
            ));
            cases.push(CaseRecord {
                case_id,
                views,
                raw,
                true_class: Some(base_rec.class_label.clone()),
            });
        }
    }

    let realized = classes;
    Ok(SyntheticCohort {
        taxonomy,
        schema,
        quasi_fields: vec!["age".into(), "bmi".into(), "sex".into()],
        classes: realized,
        class_of,
        population,
        prototypes,
        cases,
        backbone,
        non_members,
        membership,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gate::{fit_gate, signature_from_parts, GateConfig};
    use crate::memory::{consensus_assertions, default_min_support, quantize};

    fn explicit(classes: Vec<ClassPlan>) -> SyntheticCohortSpec {
        SyntheticCohortSpec {
            layout: ClassLayout::Explicit { classes },
            population_size: 0,
            cases: 20,
            non_members: 20,
            ..SyntheticCohortSpec::default()
        }
    }

    #[test]
    fn size_zero_is_empty() {
        let c = synth_cohort(&explicit(vec![])).unwrap();
        assert!(c.population.is_empty() && c.cases.is_empty() && c.backbone.is_empty() && c.non_members.is_empty());
        let spec = SyntheticCohortSpec {
            population_size: 0,
            ..SyntheticCohortSpec::default()
        };
        assert!(synth_cohort(&spec).unwrap().population.is_empty());
    }

    #[test]
    fn same_seed_same_cohort() {
        let spec = SyntheticCohortSpec {
            canaries: true,
            ..SyntheticCohortSpec::default()
        };
        assert_eq!(synth_cohort(&spec).unwrap(), synth_cohort(&spec).unwrap());
        let other = SyntheticCohortSpec { seed: 8, ..spec.clone() };
        assert_ne!(
            synth_cohort(&spec).unwrap().population,
            synth_cohort(&other).unwrap().population
        );
    }

    #[test]
    fn classes_of_five_with_two_values() {
        let c = synth_cohort(&explicit(vec![ClassPlan { size: 5, distinct: 2 }; 40])).unwrap();
        let config = GateConfig::with_quasi_fields(c.quasi_fields.clone());
        let buckets = c.taxonomy.bucket_map();
        let pairs: Vec<_> = c
            .population
            .iter()
            .map(|r| {
                let a = consensus_assertions(&r.views, default_min_support(r.views.len())).unwrap();
                let q = quantize(&r.raw, &c.schema).unwrap();
                (
                    signature_from_parts(&a, &q, &config, &buckets).unwrap(),
                    r.class_label.0.clone(),
                )
            })
            .collect();
        let idx = fit_gate(pairs).unwrap();
        assert_eq!(idx.len(), 40);
        for (_, stats) in idx.iter() {
            assert_eq!((stats.count, stats.sensitive.len()), (5, 2));
        }
    }

    #[test]
    fn backbone_records_are_valid() {
        let c = synth_cohort(&SyntheticCohortSpec::default()).unwrap();
        assert_eq!(c.backbone.len(), 50);
        for b in &c.backbone {
            b.check().unwrap();
            assert_eq!(b.neighborhood.len(), 3);
            assert!(b.neighborhood.iter().all(|n| (n.prototype_id as usize) < c.prototypes.len()));
        }
        for r in c.population.iter().chain(&c.non_members) {
            quantize(&r.raw, &c.schema).unwrap();
        }
    }

    #[test]
    fn invalid_specs() {
        assert!(synth_cohort(&explicit(vec![ClassPlan { size: 2, distinct: 3 }])).is_err());
        let spec = SyntheticCohortSpec {
            class_priors: vec![1.0],
            ..SyntheticCohortSpec::default()
        };
        assert!(matches!(synth_cohort(&spec), Err(CohortError::InvalidSpec(_))));
    }
}
