use std::collections::BTreeMap;
use std::path::Path;

use protoscribe_core::backbone::BACKBONE_SCHEMA;
use protoscribe_core::backbone::{
    synth_cohort, BackboneOutput, CaseRecord, PopulationRecord, PrototypeRecord, SyntheticCohortSpec,
};
use protoscribe_core::config::{Backend, PipelineConfig, TieMode};
use protoscribe_core::diff::{GroundedState, GROUNDED_STATE_SCHEMA};
use protoscribe_core::eval::{csf, ClassWeights, CsfResult, CsfSummary, RegistryEntry, TiePolicy, UnknownItemPolicy};
use protoscribe_core::gate::{
    fit_gate, read_gated, signature, sweep_frontier, write_frontier_csv, FrontierPoint, GateIndex, SweepInputs,
};
use protoscribe_core::memory::{read_bank, write_bank, Distiller, MemoryBank};
use protoscribe_core::pipeline::{
    distill_bank, distill_population, gate_bank, ground_case, pair_cases, population_pairs, run_attacks, AttackInputs,
    AttackSuite, GatedBank, Release, Subject,
};
use protoscribe_core::scribe::{
    extract_claims, optimize_report, AdversarialScribe, AdversaryConfig, Critic, DeferReason, HttpScribe, HttpScribeConfig,
    OptimizationOutcome, Scribe, TemplateScribe, Transcript, REPORT_SCHEMA,
};
use protoscribe_core::taxonomy::Taxonomy;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::args::*;
use crate::error::CliError;
use crate::io::{create, open, read_backbone, read_records, write_document, write_records, write_text};
use crate::manifest::{default_manifest_path, ManifestBuilder};

pub const GENERATION_SCHEMA: &str = "generation/v1";
pub const EVALUATION_SCHEMA: &str = "evaluation/v1";
pub const ATTACK_SCHEMA: &str = "attack/v1";

pub fn run(cli: Cli) -> Result<(), CliError> {
    let manifest = cli.manifest;
    let finish = |m: &ManifestBuilder, primary: &Path| -> Result<(), CliError> {
        let path = manifest.clone().unwrap_or_else(|| default_manifest_path(primary));
        m.finish(&path).map(|_| ())
    };
    match cli.command {
        Command::Distill(a) => finish(&cmd_distill(&a)?, &a.out),
        Command::Gate(GateCommand::Fit(a)) => finish(&cmd_gate_fit(&a)?, &a.out),
        Command::Gate(GateCommand::Apply(a)) => finish(&cmd_gate_apply(&a)?, &a.out),
        Command::Gate(GateCommand::Sweep(a)) => finish(&cmd_gate_sweep(&a)?, &a.out),
        Command::Generate(a) => {
            let (m, failure) = cmd_generate(&a)?;
            finish(&m, &a.out)?;
            failure.map_or(Ok(()), Err)
        }
        Command::Evaluate(EvaluateCommand::Csf(a)) => finish(&cmd_evaluate_csf(&a)?, &a.out),
        Command::Attack(a) => finish(&cmd_attack(&a)?, &a.out),
        Command::Cohort(a) => finish(&cmd_cohort(&a)?, &a.out_dir.join("cohort")),
        Command::Demo(a) => {
            let m = crate::demo::run_demo(&a)?;
            let path = manifest.unwrap_or_else(|| a.out_dir.join("manifest.json"));
            m.finish(&path).map(|_| ())
        }
    }
}

pub fn load_config(path: &Path) -> Result<PipelineConfig, CliError> {
    Ok(PipelineConfig::load(path)?)
}

fn started(command: &str, config_path: &Path, config: &PipelineConfig) -> ManifestBuilder {
    let mut m = ManifestBuilder::new(command);
    m.config(config).input(config_path);
    m
}

pub fn read_bank_file(path: &Path) -> Result<MemoryBank, CliError> {
    read_bank(open(path)?).map_err(|e| CliError::data(path.display(), e))
}

pub fn write_bank_file(path: &Path, bank: &MemoryBank) -> Result<(), CliError> {
    let mut out = create(path)?;
    write_bank(bank, &mut out).map_err(|e| CliError::data(path.display(), e))?;
    std::io::Write::flush(&mut out).map_err(|e| CliError::data(path.display(), e))
}

fn cmd_distill(a: &DistillArgs) -> Result<ManifestBuilder, CliError> {
    let cfg = load_config(&a.config)?;
    let distiller = cfg.distiller()?;
    let records: Vec<PrototypeRecord> = read_records(&a.prototypes)?;
    let bank = distill_bank(&records, &distiller)?;
    write_bank_file(&a.out, &bank)?;
    eprintln!("distilled {} prototype cards", bank.len());
    let mut m = started("distill", &a.config, &cfg);
    m.input(&a.prototypes).output(&a.out).schema("bank", "protocard/v1");
    Ok(m)
}

/// Fits the gate index on a population file.
pub fn fit_population(
    cfg: &PipelineConfig,
    distiller: &Distiller,
    population: &[PopulationRecord],
) -> Result<GateIndex, CliError> {
    let cards = distill_population(population, distiller)?;
    let buckets = distiller.taxonomy.bucket_map();
    Ok(fit_gate(population_pairs(&cards, &cfg.gate, &buckets)?)?)
}

pub fn write_index_file(path: &Path, index: &GateIndex) -> Result<(), CliError> {
    let mut out = create(path)?;
    index.write(&mut out).map_err(|e| CliError::data(path.display(), e))?;
    std::io::Write::flush(&mut out).map_err(|e| CliError::data(path.display(), e))
}

fn cmd_gate_fit(a: &GateFitArgs) -> Result<ManifestBuilder, CliError> {
    let cfg = load_config(&a.config)?;
    let distiller = cfg.distiller()?;
    let population: Vec<PopulationRecord> = read_records(&a.population)?;
    let index = fit_population(&cfg, &distiller, &population)?;
    write_index_file(&a.out, &index)?;
    eprintln!("fit {} signatures over {} records", index.len(), index.population());
    let mut m = started("gate fit", &a.config, &cfg);
    m.input(&a.population).output(&a.out).schema("gate_index", "gate-index/v1");
    Ok(m)
}

fn cmd_gate_apply(a: &GateApplyArgs) -> Result<ManifestBuilder, CliError> {
    let mut cfg = load_config(&a.config)?;
    cfg.gate = cfg.gate.with_thresholds(a.k.unwrap_or(cfg.gate.k), a.l.unwrap_or(cfg.gate.l));
    cfg.validate()?;
    let taxonomy = cfg.taxonomy()?;
    let bank = read_bank_file(&a.bank)?;
    let index = GateIndex::read(open(&a.index)?).map_err(|e| CliError::data(a.index.display(), e))?;
    let gated = gate_bank(&bank, &index, &cfg.gate, &taxonomy.bucket_map());
    write_records(&a.out, &gated)?;
    let visible = gated.iter().filter(|g| g.is_visible()).count();
    eprintln!(
        "{visible} of {} cards visible at k={} l={}",
        gated.len(),
        cfg.gate.k,
        cfg.gate.l
    );
    let mut m = started("gate apply", &a.config, &cfg);
    m.input(&a.bank)
        .input(&a.index)
        .output(&a.out)
        .schema("gated_bank", "gated-card/v1");
    Ok(m)
}

pub struct SweepData<'a> {
    pub config: &'a PipelineConfig,
    pub distiller: &'a Distiller,
    pub prototypes: &'a [PrototypeRecord],
    pub population: &'a [PopulationRecord],
    pub backbone: &'a [BackboneOutput],
}

pub fn registry(
    cfg: &PipelineConfig,
    distiller: &Distiller,
    population: &[PopulationRecord],
) -> Result<Vec<RegistryEntry>, CliError> {
    let cards = distill_population(population, distiller)?;
    let buckets = distiller.taxonomy.bucket_map();
    population
        .iter()
        .zip(&cards)
        .map(|(r, c)| {
            let signature = signature(c, &cfg.gate, &buckets)?;
            Ok(RegistryEntry {
                record_id: r.record_id.clone(),
                signature,
            })
        })
        .collect()
}

pub fn sweep(data: &SweepData<'_>, k_values: &[usize], l_values: &[usize]) -> Result<Vec<FrontierPoint>, CliError> {
    let bank = distill_bank(data.prototypes, data.distiller)?;
    let population_cards = distill_population(data.population, data.distiller)?;
    let buckets = data.distiller.taxonomy.bucket_map();
    let pairs = population_pairs(&population_cards, &data.config.gate, &buckets)?;
    let registry = registry(data.config, data.distiller, data.population)?;
    let card_sources: BTreeMap<u32, String> = data
        .prototypes
        .iter()
        .map(|p| (p.prototype_id, p.record_id.clone()))
        .collect();
    let neighborhoods: Vec<Vec<(u32, f64)>> = data
        .backbone
        .iter()
        .map(|b| b.neighborhood.iter().map(|n| (n.prototype_id, n.similarity)).collect())
        .collect();
    let inputs = SweepInputs {
        cards: bank.cards(),
        population: &pairs,
        neighborhoods: &neighborhoods,
        registry: &registry,
        card_sources: &card_sources,
        config: &data.config.gate,
        buckets: &buckets,
    };
    Ok(sweep_frontier(&inputs, k_values, l_values)?)
}

pub fn write_frontier_file(path: &Path, points: &[FrontierPoint]) -> Result<(), CliError> {
    let mut buf = Vec::new();
    write_frontier_csv(points, &mut buf).map_err(|e| CliError::data(path.display(), e))?;
    write_text(path, &String::from_utf8_lossy(&buf))
}

fn cmd_gate_sweep(a: &GateSweepArgs) -> Result<ManifestBuilder, CliError> {
    let cfg = load_config(&a.config)?;
    let distiller = cfg.distiller()?;
    let prototypes: Vec<PrototypeRecord> = read_records(&a.prototypes)?;
    let population: Vec<PopulationRecord> = read_records(&a.population)?;
    let backbone = match &a.backbone {
        Some(p) => read_backbone(p)?,
        None => Vec::new(),
    };
    let k_values = a.k.clone().unwrap_or_else(|| cfg.sweep.k_values.clone());
    let l_values = a.l.clone().unwrap_or_else(|| cfg.sweep.l_values.clone());
    if k_values.is_empty() || l_values.is_empty() || k_values.contains(&0) || l_values.contains(&0) {
        return Err(CliError::Config("sweep grids need positive values".into()));
    }
    let data = SweepData {
        config: &cfg,
        distiller: &distiller,
        prototypes: &prototypes,
        population: &population,
        backbone: &backbone,
    };
    let points = sweep(&data, &k_values, &l_values)?;
    write_frontier_file(&a.out, &points)?;
    let mut m = started("gate sweep", &a.config, &cfg);
    m.input(&a.prototypes).input(&a.population);
    if let Some(p) = &a.backbone {
        m.input(p).schema("backbone", BACKBONE_SCHEMA);
    }
    m.output(&a.out).schema("frontier", "frontier-csv/v1");
    Ok(m)
}

/// One line of `reports.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub schema_version: String,
    pub case_id: String,
    pub outcome: OptimizationOutcome,
}

/// Grounds every case against the gated bank, in case order.
pub fn ground_cases(
    cases: &[CaseRecord],
    backbone: &[BackboneOutput],
    gated: &GatedBank,
    distiller: &Distiller,
    tau: f64,
) -> Result<Vec<GroundedState>, CliError> {
    pair_cases(cases, backbone)?
        .into_iter()
        .map(|(c, b)| Ok(ground_case(c, b, gated, distiller, tau)?))
        .collect()
}

pub fn backend_of(b: BackendArg) -> Backend {
    match b {
        BackendArg::Template => Backend::Template,
        BackendArg::Adversarial => Backend::Adversarial,
        BackendArg::Http => Backend::Http,
    }
}

/// Runs the repair loop over `states` on a pool of `workers` threads.
/// Output order follows `states`.
pub fn generate_reports(
    states: &[GroundedState],
    cfg: &PipelineConfig,
    taxonomy: &Taxonomy,
    workers: usize,
) -> Result<(Vec<GenerationRecord>, Vec<Transcript>), CliError> {
    let scribe_cfg = &cfg.scribe;
    let http = match scribe_cfg.backend {
        Backend::Http => Some(HttpScribeConfig::from_env()?),
        _ => None,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| CliError::Config(format!("worker pool: {e}")))?;
    let loop_config = scribe_cfg.loop_config();
    let results: Vec<Result<(GenerationRecord, Vec<Transcript>), CliError>> = pool.install(|| {
        states
            .par_iter()
            .map(|state| {
                let critic = Critic::new(taxonomy);
                let template = TemplateScribe::new(taxonomy);
                let (trace, transcripts) = match scribe_cfg.backend {
                    Backend::Template => {
                        let mut s = template;
                        (
                            optimize_report(state, &mut s as &mut dyn Scribe, &critic, loop_config),
                            Vec::new(),
                        )
                    }
                    Backend::Adversarial => {
                        let config = AdversaryConfig {
                            fault_rate: scribe_cfg.fault_rate,
                            faults: scribe_cfg.faults.clone(),
                            persistence: scribe_cfg.persistence,
                            seed: scribe_cfg.seed,
                        };
                        let mut s = AdversarialScribe::new(template, config);
                        (optimize_report(state, &mut s, &critic, loop_config), Vec::new())
                    }
                    Backend::Http => {
                        let config = http.clone().expect("http config is loaded for the http backend");
                        let mut s = HttpScribe::new(config)?;
                        let trace = optimize_report(state, &mut s, &critic, loop_config);
                        (trace, s.take_transcripts())
                    }
                };
                let record = GenerationRecord {
                    schema_version: GENERATION_SCHEMA.into(),
                    case_id: state.case.case_id.clone(),
                    outcome: trace.outcome,
                };
                Ok((record, transcripts))
            })
            .collect()
    });
    let mut records = Vec::with_capacity(results.len());
    let mut transcripts = Vec::new();
    for r in results {
        let (rec, t) = r?;
        records.push(rec);
        transcripts.extend(t);
    }
    Ok((records, transcripts))
}

fn backend_failures(records: &[GenerationRecord]) -> Option<CliError> {
    let failed: Vec<&str> = records
        .iter()
        .filter(|r| {
            matches!(
                r.outcome,
                OptimizationOutcome::Deferred {
                    reason: DeferReason::BackendFailure { .. },
                    ..
                }
            )
        })
        .map(|r| r.case_id.as_str())
        .collect();
    (!failed.is_empty()).then(|| {
        CliError::Backend(format!(
            "{} case(s) deferred after backend failure, first `{}`",
            failed.len(),
            failed[0]
        ))
    })
}

pub fn read_gated_file(path: &Path) -> Result<GatedBank, CliError> {
    let cards = read_gated(open(path)?).map_err(|e| CliError::data(path.display(), e))?;
    Ok(GatedBank::new(cards)?)
}

fn cmd_generate(a: &GenerateArgs) -> Result<(ManifestBuilder, Option<CliError>), CliError> {
    let mut cfg = load_config(&a.config)?;
    if let Some(b) = a.backend {
        cfg.scribe.backend = backend_of(b);
    }
    if let Some(t) = a.max_iterations {
        cfg.scribe.max_iterations = t;
    }
    cfg.validate()?;
    let distiller = cfg.distiller()?;
    let gated = read_gated_file(&a.gated)?;
    let cases: Vec<CaseRecord> = read_records(&a.cases)?;
    let backbone = read_backbone(&a.backbone)?;
    let states = ground_cases(&cases, &backbone, &gated, &distiller, cfg.supervisor.tau)?;
    let (records, transcripts) = generate_reports(&states, &cfg, &distiller.taxonomy, a.workers)?;

    let mut m = started("generate", &a.config, &cfg);
    m.seed("scribe", cfg.scribe.seed)
        .input(&a.gated)
        .input(&a.cases)
        .input(&a.backbone)
        .schema("backbone", BACKBONE_SCHEMA)
        .schema("generation", GENERATION_SCHEMA)
        .schema("report", REPORT_SCHEMA);
    write_records(&a.out, &records)?;
    m.output(&a.out);
    if let Some(p) = &a.states {
        write_records(p, &states)?;
        m.output(p).schema("grounded_state", GROUNDED_STATE_SCHEMA);
    }
    if let Some(p) = &a.transcripts {
        write_records(p, &transcripts)?;
        m.output(p);
    }
    let accepted = records.iter().filter(|r| r.outcome.report().is_some()).count();
    eprintln!("{accepted} of {} reports accepted", records.len());
    Ok((m, backend_failures(&records)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseScore {
    pub case_id: String,
    pub visual_deferral: bool,
    pub csf: CsfResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub metric: String,
    pub value: Option<f64>,
    pub defined_cases: usize,
}

/// Per-case blocks plus a flat summary table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationDocument {
    pub schema_version: String,
    /// `"ok"`, or `"empty"` when there was nothing to score.
    pub status: String,
    pub reports: usize,
    pub accepted: usize,
    pub deferred: usize,
    pub summary: Option<CsfSummary>,
    pub per_case: Vec<CaseScore>,
    pub table: Vec<TableRow>,
}

impl EvaluationDocument {
    pub fn render_table(&self) -> String {
        let mut s = format!("{:<20} {:>10} {:>8}\n", "metric", "value", "cases");
        for row in &self.table {
            let v = row.value.map_or_else(|| "n/a".to_string(), |v| format!("{v:.4}"));
            s.push_str(&format!("{:<20} {:>10} {:>8}\n", row.metric, v, row.defined_cases));
        }
        s
    }
}

/// Scores accepted reports against their grounded states. Under visual
/// deferral the reference holds no visual items.
pub fn evaluate_reports(
    records: &[GenerationRecord],
    states: &[GroundedState],
    policy: UnknownItemPolicy,
) -> Result<EvaluationDocument, CliError> {
    let by_case: BTreeMap<&str, &GroundedState> = states.iter().map(|s| (s.case.case_id.as_str(), s)).collect();
    let mut per_case = Vec::new();
    let mut deferred = 0;
    for r in records {
        let Some(report) = r.outcome.report() else {
            deferred += 1;
            continue;
        };
        let state = by_case
            .get(r.case_id.as_str())
            .ok_or_else(|| CliError::Data(format!("no reference state for case `{}`", r.case_id)))?;
        let deferral = state.deferral.is_active();
        let reference: Vec<_> = if deferral {
            Vec::new()
        } else {
            state.visible.iter().map(|v| v.differential.clone()).collect()
        };
        let result = csf(&reference, &extract_claims(report), &ClassWeights::ReferenceFrequency, policy)
            .map_err(|e| CliError::data(format!("case `{}`", r.case_id), e))?;
        per_case.push(CaseScore {
            case_id: r.case_id.clone(),
            visual_deferral: deferral,
            csf: result,
        });
    }
    let accepted = per_case.len();
    let (status, summary, table) = if accepted == 0 {
        ("empty", None, Vec::new())
    } else {
        let results: Vec<CsfResult> = per_case.iter().map(|c| c.csf.clone()).collect();
        let summary = CsfSummary::aggregate(&results);
        let row = |metric: &str, value: Option<f64>, key: &str| TableRow {
            metric: metric.into(),
            value,
            defined_cases: summary.defined.get(key).copied().unwrap_or(0),
        };
        let table = vec![
            row("csf_precision", summary.precision, "precision"),
            row("csf_recall", summary.recall, "recall"),
            row("csf_f1", summary.f1, "f1"),
            row("csf_weighted_acc", summary.weighted_accuracy, "weighted_accuracy"),
        ];
        ("ok", Some(summary), table)
    };
    Ok(EvaluationDocument {
        schema_version: EVALUATION_SCHEMA.into(),
        status: status.into(),
        reports: records.len(),
        accepted,
        deferred,
        summary,
        per_case,
        table,
    })
}

fn cmd_evaluate_csf(a: &CsfArgs) -> Result<ManifestBuilder, CliError> {
    let records: Vec<GenerationRecord> = read_records(&a.reports)?;
    let states: Vec<GroundedState> = read_records(&a.references)?;
    let policy = if a.lenient {
        UnknownItemPolicy::CountAsUnsupported
    } else {
        UnknownItemPolicy::Reject
    };
    let doc = evaluate_reports(&records, &states, policy)?;
    write_document(&a.out, &doc)?;
    if doc.status == "empty" {
        println!("no accepted reports to score");
    } else {
        print!("{}", doc.render_table());
    }
    let mut m = ManifestBuilder::new("evaluate csf");
    m.input(&a.reports)
        .input(&a.references)
        .output(&a.out)
        .schema("generation", GENERATION_SCHEMA)
        .schema("grounded_state", GROUNDED_STATE_SCHEMA)
        .schema("evaluation", EVALUATION_SCHEMA);
    Ok(m)
}

pub struct AttackData<'a> {
    pub config: &'a PipelineConfig,
    pub distiller: &'a Distiller,
    pub members: &'a [PrototypeRecord],
    pub population: &'a [PopulationRecord],
    pub non_members: &'a [PopulationRecord],
}

/// All three built-in attacks on one release.
pub fn attack_suite(data: &AttackData<'_>, release: Release, tie_policy: TiePolicy, seed: u64) -> Result<AttackSuite, CliError> {
    let bank = distill_bank(data.members, data.distiller)?;
    let members: Vec<Subject> = data
        .members
        .iter()
        .map(|p| {
            let card = bank
                .get(p.prototype_id)
                .cloned()
                .expect("bank holds every distilled prototype");
            Subject {
                record_id: p.record_id.clone(),
                card,
            }
        })
        .collect();
    let outsiders: Vec<Subject> = data
        .non_members
        .iter()
        .zip(distill_population(data.non_members, data.distiller)?)
        .map(|(r, card)| Subject {
            record_id: r.record_id.clone(),
            card,
        })
        .collect();
    let index = fit_population(data.config, data.distiller, data.population)?;
    let registry = registry(data.config, data.distiller, data.population)?;
    let buckets = data.distiller.taxonomy.bucket_map();
    let inputs = AttackInputs {
        members: &members,
        non_members: &outsiders,
        registry: &registry,
        index: &index,
        config: &data.config.gate,
        buckets: &buckets,
        release,
        mia_threshold: data.config.attack.mia_threshold,
        tie_policy,
        seed,
    };
    Ok(run_attacks(&inputs)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackDocument {
    pub schema_version: String,
    pub release: String,
    pub seed: u64,
    pub result: protoscribe_core::eval::AttackResult,
}

fn cmd_attack(a: &AttackArgs) -> Result<ManifestBuilder, CliError> {
    let mut cfg = load_config(&a.config)?;
    if let Some(t) = a.tie_policy {
        cfg.attack.tie_policy = match t {
            TieArg::Fractional => TieMode::Fractional,
            TieArg::Strict => TieMode::Strict,
        };
    }
    if let Some(s) = a.seed {
        cfg.attack.seed = s;
    }
    let distiller = cfg.distiller()?;
    let members: Vec<PrototypeRecord> = read_records(&a.members)?;
    let population: Vec<PopulationRecord> = read_records(&a.population)?;
    let non_members: Vec<PopulationRecord> = read_records(&a.non_members)?;
    let data = AttackData {
        config: &cfg,
        distiller: &distiller,
        members: &members,
        population: &population,
        non_members: &non_members,
    };
    let (release, name) = match a.release {
        ReleaseArg::Gated => (Release::Gated, "gated"),
        ReleaseArg::Ungated => (Release::Ungated, "ungated"),
    };
    let suite = attack_suite(&data, release, cfg.attack.tie_policy(), cfg.attack.seed)?;
    let result = match a.kind {
        AttackKindArg::Mia => suite.mia,
        AttackKindArg::Aia => suite.aia,
        AttackKindArg::Link => suite.link,
    };
    println!(
        "{} on {name} release: {:.4} over {} trials",
        serde_json::to_value(result.attack)
            .unwrap_or_default()
            .as_str()
            .unwrap_or("attack"),
        result.accuracy,
        result.trials
    );
    let doc = AttackDocument {
        schema_version: ATTACK_SCHEMA.into(),
        release: name.into(),
        seed: cfg.attack.seed,
        result,
    };
    write_document(&a.out, &doc)?;
    let mut m = started("attack", &a.config, &cfg);
    m.seed("attack", cfg.attack.seed)
        .input(&a.members)
        .input(&a.population)
        .input(&a.non_members)
        .output(&a.out)
        .schema("attack", ATTACK_SCHEMA);
    Ok(m)
}

/// Files written by [`SyntheticCohort::write_to_dir`](protoscribe_core::backbone::SyntheticCohort::write_to_dir).
pub const COHORT_FILES: [&str; 8] = [
    "taxonomy.tsv",
    "schema.toml",
    "population.jsonl",
    "prototypes.jsonl",
    "cases.jsonl",
    "backbone.jsonl",
    "non_members.jsonl",
    "membership.jsonl",
];

fn cmd_cohort(a: &CohortArgs) -> Result<ManifestBuilder, CliError> {
    let mut spec = match &a.spec {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
            toml::from_str::<SyntheticCohortSpec>(&text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?
        }
        None => SyntheticCohortSpec::default(),
    };
    if let Some(s) = a.seed {
        spec.seed = s;
    }
    spec.validate().map_err(|e| CliError::Config(e.to_string()))?;
    let cohort = synth_cohort(&spec)?;
    cohort.write_to_dir(&a.out_dir)?;
    let mut m = ManifestBuilder::new("cohort");
    m.config(&spec).seed("cohort", spec.seed).schema("backbone", BACKBONE_SCHEMA);
    if let Some(p) = &a.spec {
        m.input(p);
    }
    for f in COHORT_FILES {
        m.output(&a.out_dir.join(f));
    }
    Ok(m)
}
