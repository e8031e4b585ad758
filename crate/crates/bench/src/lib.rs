//! Shared fixtures for the pipeline benchmarks.

use std::collections::BTreeMap;

use protoscribe_core::backbone::{synth_cohort, SyntheticCohort, SyntheticCohortSpec};
use protoscribe_core::diff::GroundedState;
use protoscribe_core::eval::RegistryEntry;
use protoscribe_core::gate::{fit_gate, signature, GateConfig, ReleaseSignature};
use protoscribe_core::memory::{ClassLabel, Distiller, MemoryBank};
use protoscribe_core::pipeline::{
    distill_bank, distill_population, gate_bank, ground_case, pair_cases, population_pairs, GatedBank,
};

pub struct Fixture {
    pub cohort: SyntheticCohort,
    pub distiller: Distiller,
    pub config: GateConfig,
    pub bank: MemoryBank,
    pub pairs: Vec<(ReleaseSignature, String)>,
    pub registry: Vec<RegistryEntry>,
    pub card_sources: BTreeMap<u32, String>,
    pub states: Vec<GroundedState>,
}

pub fn fixture(population: usize, cases: usize) -> Fixture {
    let spec = SyntheticCohortSpec {
        seed: 1,
        population_size: population,
        cases,
        ..SyntheticCohortSpec::default()
    };
    let cohort = synth_cohort(&spec).expect("valid spec");
    let distiller = Distiller {
        taxonomy: cohort.taxonomy.clone(),
        schema: cohort.schema.clone(),
        classes: spec.class_labels.iter().map(ClassLabel::new).collect(),
        min_support: None,
    };
    let config = GateConfig::with_quasi_fields(cohort.quasi_fields.clone());
    let buckets = cohort.taxonomy.bucket_map();
    let bank = distill_bank(&cohort.prototypes, &distiller).expect("distills");
    let population_cards = distill_population(&cohort.population, &distiller).expect("distills");
    let pairs = population_pairs(&population_cards, &config, &buckets).expect("signatures");
    let registry = cohort
        .population
        .iter()
        .zip(&population_cards)
        .map(|(r, c)| RegistryEntry {
            record_id: r.record_id.clone(),
            signature: signature(c, &config, &buckets).expect("signature"),
        })
        .collect();
    let card_sources = cohort
        .prototypes
        .iter()
        .map(|p| (p.prototype_id, p.record_id.clone()))
        .collect();
    let index = fit_gate(pairs.clone()).expect("fits");
    let gated = GatedBank::new(gate_bank(&bank, &index, &config, &buckets)).expect("unique ids");
    let states = pair_cases(&cohort.cases, &cohort.backbone)
        .expect("paired")
        .into_iter()
        .map(|(c, b)| ground_case(c, b, &gated, &distiller, 0.5).expect("grounds"))
        .collect();
    Fixture {
        cohort,
        distiller,
        config,
        bank,
        pairs,
        registry,
        card_sources,
        states,
    }
}
