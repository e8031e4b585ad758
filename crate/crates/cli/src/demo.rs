//! Seeded end-to-end run: cohort, memory, gate, frontier, reports, metrics, attacks.

use std::path::Path;

use protoscribe_core::backbone::{synth_cohort, SyntheticCohortSpec, BACKBONE_SCHEMA};
use protoscribe_core::diff::GROUNDED_STATE_SCHEMA;
use protoscribe_core::eval::UnknownItemPolicy;
use protoscribe_core::pipeline::{distill_bank, gate_bank, AttackSuite, GatedBank, Release};
use protoscribe_core::scribe::REPORT_SCHEMA;
use serde::{Deserialize, Serialize};

use crate::args::DemoArgs;
use crate::commands::*;
use crate::error::CliError;
use crate::io::{write_document, write_records, write_text};
use crate::manifest::ManifestBuilder;

/// Artifacts written by `demo`, relative to its output directory.
pub const DEMO_OUTPUTS: [&str; 10] = [
    "config.toml",
    "bank.jsonl",
    "gate_index.jsonl",
    "gated_bank.jsonl",
    "frontier.csv",
    "states.jsonl",
    "reports.jsonl",
    "evaluation.json",
    "attacks.json",
    "summary.json",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackComparison {
    pub schema_version: String,
    pub seed: u64,
    pub gated: AttackSuite,
    pub ungated: AttackSuite,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemoSummary {
    pub seed: u64,
    pub backend: String,
    pub prototypes: usize,
    pub visible_cards: usize,
    pub cases: usize,
    pub accepted: usize,
    pub deferred: usize,
    pub visual_deferrals: usize,
    pub csf_f1: Option<f64>,
    pub mia: (f64, f64),
    pub aia: (f64, f64),
    pub link: (f64, f64),
}

fn demo_config(spec: &SyntheticCohortSpec, quasi: &[String], backend: &str, seed: u64) -> String {
    let list = |v: &[String]| v.iter().map(|s| format!("{s:?}")).collect::<Vec<_>>().join(", ");
    format!(
        "[memory]\ntaxonomy = \"inputs/taxonomy.tsv\"\nschema = \"inputs/schema.toml\"\nclasses = [{}]\n\n\
         [gate]\nk = 5\nl = 2\nquasi_fields = [{}]\n\n\
         [supervisor]\ntau = 0.5\n\n\
         [scribe]\nbackend = \"{backend}\"\nmax_iterations = 4\nseed = {seed}\n\n\
         [sweep]\nk_values = [3, 5, 7, 9]\nl_values = [1, 2, 3]\n\n\
         [attack]\nseed = {seed}\n",
        list(&spec.class_labels),
        list(quasi),
    )
}

pub fn run_demo(a: &DemoArgs) -> Result<ManifestBuilder, CliError> {
    let dir = &a.out_dir;
    let out = |name: &str| dir.join(name);
    let spec = SyntheticCohortSpec {
        seed: a.seed,
        ..SyntheticCohortSpec::default()
    };
    let cohort = synth_cohort(&spec)?;
    let inputs = out("inputs");
    cohort.write_to_dir(&inputs)?;

    let backend = match a.backend {
        crate::args::BackendArg::Template => "template",
        crate::args::BackendArg::Adversarial => "adversarial",
        crate::args::BackendArg::Http => "http",
    };
    let config_path = out("config.toml");
    write_text(&config_path, &demo_config(&spec, &cohort.quasi_fields, backend, a.seed))?;
    let cfg = load_config(&config_path)?;
    let distiller = cfg.distiller()?;
    let buckets = distiller.taxonomy.bucket_map();

    let bank = distill_bank(&cohort.prototypes, &distiller)?;
    write_bank_file(&out("bank.jsonl"), &bank)?;
    let index = fit_population(&cfg, &distiller, &cohort.population)?;
    write_index_file(&out("gate_index.jsonl"), &index)?;
    let gated_cards = gate_bank(&bank, &index, &cfg.gate, &buckets);
    write_records(&out("gated_bank.jsonl"), &gated_cards)?;
    let visible_cards = gated_cards.iter().filter(|g| g.is_visible()).count();
    let gated = GatedBank::new(gated_cards)?;

    let sweep_data = SweepData {
        config: &cfg,
        distiller: &distiller,
        prototypes: &cohort.prototypes,
        population: &cohort.population,
        backbone: &cohort.backbone,
    };
    let frontier = sweep(&sweep_data, &cfg.sweep.k_values, &cfg.sweep.l_values)?;
    write_frontier_file(&out("frontier.csv"), &frontier)?;

    let states = ground_cases(&cohort.cases, &cohort.backbone, &gated, &distiller, cfg.supervisor.tau)?;
    write_records(&out("states.jsonl"), &states)?;
    let (records, _) = generate_reports(&states, &cfg, &distiller.taxonomy, a.workers)?;
    write_records(&out("reports.jsonl"), &records)?;
    let evaluation = evaluate_reports(&records, &states, UnknownItemPolicy::Reject)?;
    write_document(&out("evaluation.json"), &evaluation)?;

    let attack_data = AttackData {
        config: &cfg,
        distiller: &distiller,
        members: &cohort.prototypes,
        population: &cohort.population,
        non_members: &cohort.non_members,
    };
    let tie = cfg.attack.tie_policy();
    let attacks = AttackComparison {
        schema_version: ATTACK_SCHEMA.into(),
        seed: cfg.attack.seed,
        gated: attack_suite(&attack_data, Release::Gated, tie, cfg.attack.seed)?,
        ungated: attack_suite(&attack_data, Release::Ungated, tie, cfg.attack.seed)?,
    };
    write_document(&out("attacks.json"), &attacks)?;

    let summary = DemoSummary {
        seed: a.seed,
        backend: backend.into(),
        prototypes: bank.len(),
        visible_cards,
        cases: states.len(),
        accepted: evaluation.accepted,
        deferred: evaluation.deferred,
        visual_deferrals: states.iter().filter(|s| s.deferral.is_active()).count(),
        csf_f1: evaluation.summary.as_ref().and_then(|s| s.f1),
        mia: (attacks.gated.mia.accuracy, attacks.ungated.mia.accuracy),
        aia: (attacks.gated.aia.accuracy, attacks.ungated.aia.accuracy),
        link: (attacks.gated.link.accuracy, attacks.ungated.link.accuracy),
    };
    write_document(&out("summary.json"), &summary)?;
    print_summary(&summary, &evaluation);

    let mut m = ManifestBuilder::new("demo");
    m.config(&cfg)
        .seed("cohort", spec.seed)
        .seed("scribe", cfg.scribe.seed)
        .seed("attack", cfg.attack.seed);
    for f in COHORT_FILES {
        m.output(&inputs.join(f));
    }
    for f in DEMO_OUTPUTS {
        m.output(&out(f));
    }
    m.schema("backbone", BACKBONE_SCHEMA)
        .schema("grounded_state", GROUNDED_STATE_SCHEMA)
        .schema("generation", GENERATION_SCHEMA)
        .schema("report", REPORT_SCHEMA)
        .schema("evaluation", EVALUATION_SCHEMA)
        .schema("attack", ATTACK_SCHEMA);
    Ok(m)
}

fn print_summary(s: &DemoSummary, evaluation: &EvaluationDocument) {
    println!("prototypes {} ({} visible), cases {}", s.prototypes, s.visible_cards, s.cases);
    println!(
        "accepted {}, deferred {}, visual deferrals {}",
        s.accepted, s.deferred, s.visual_deferrals
    );
    print!("{}", evaluation.render_table());
    println!("{:<8} {:>8} {:>8}", "attack", "gated", "ungated");
    for (name, (g, u)) in [("MIA", s.mia), ("AIA", s.aia), ("Link@1", s.link)] {
        println!("{name:<8} {g:>8.4} {u:>8.4}");
    }
}

/// Paths compared by the determinism check.
pub fn deterministic_outputs(dir: &Path) -> Vec<std::path::PathBuf> {
    [
        "frontier.csv",
        "reports.jsonl",
        "states.jsonl",
        "evaluation.json",
        "attacks.json",
        "summary.json",
    ]
    .iter()
    .map(|f| dir.join(f))
    .collect()
}
