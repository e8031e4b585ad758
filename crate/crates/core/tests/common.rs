#![allow(dead_code)]

use protoscribe_core::backbone::{synth_cohort, SyntheticCohort, SyntheticCohortSpec};
use protoscribe_core::diff::GroundedState;
use protoscribe_core::gate::{fit_gate, GateConfig};
use protoscribe_core::memory::{ClassLabel, Distiller};
use protoscribe_core::pipeline::{
    distill_bank, distill_population, gate_bank, ground_case, pair_cases, population_pairs, GatedBank,
};

pub struct World {
    pub cohort: SyntheticCohort,
    pub distiller: Distiller,
    pub config: GateConfig,
    pub gated: GatedBank,
    pub states: Vec<GroundedState>,
}

pub fn world(spec: &SyntheticCohortSpec, tau: f64) -> World {
    let cohort = synth_cohort(spec).unwrap();
    let distiller = Distiller {
        taxonomy: cohort.taxonomy.clone(),
        schema: cohort.schema.clone(),
        classes: spec.class_labels.iter().map(ClassLabel::new).collect(),
        min_support: None,
    };
    let config = GateConfig::with_quasi_fields(cohort.quasi_fields.clone());
    let buckets = cohort.taxonomy.bucket_map();
    let bank = distill_bank(&cohort.prototypes, &distiller).unwrap();
    let population = distill_population(&cohort.population, &distiller).unwrap();
    let index = fit_gate(population_pairs(&population, &config, &buckets).unwrap()).unwrap();
    let gated = GatedBank::new(gate_bank(&bank, &index, &config, &buckets)).unwrap();
    let states = pair_cases(&cohort.cases, &cohort.backbone)
        .unwrap()
        .into_iter()
        .map(|(c, b)| ground_case(c, b, &gated, &distiller, tau).unwrap())
        .collect();
    World {
        cohort,
        distiller,
        config,
        gated,
        states,
    }
}
