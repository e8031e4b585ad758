//! End-to-end checks of the `protoscribe` binary.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use protoscribe_cli::commands::{EvaluationDocument, GenerationRecord};
use protoscribe_core::diff::GroundedState;
use protoscribe_core::eval::{csf, ClassWeights, UnknownItemPolicy};
use protoscribe_core::json::read_jsonl;
use protoscribe_core::scribe::{admissible_triples, extract_claims, OptimizationOutcome};
use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_protoscribe"));
    c.env_remove("SCRIBE_ENDPOINT").env_remove("SCRIBE_API_KEY");
    c
}

fn run(args: &[&str], paths: &[&Path]) -> Output {
    let mut c = bin();
    c.args(args);
    for p in paths {
        c.arg(p);
    }
    c.output().unwrap()
}

fn ok(out: Output) -> Output {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn lines(path: &Path) -> Vec<Value> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

fn records<T: serde::de::DeserializeOwned>(path: &Path) -> Vec<T> {
    read_jsonl(std::io::BufReader::new(std::fs::File::open(path).unwrap())).unwrap()
}

struct Fixture {
    dir: TempDir,
}

impl Fixture {
    /// A small synthetic cohort plus a config file pointing at it.
    fn new(extra_config: &str) -> Self {
        let dir = tempfile::tempdir().unwrap();
        ok(run(&["cohort", "--seed", "5", "--out-dir"], &[dir.path()]));
        let config = format!(
            "[memory]\ntaxonomy = \"taxonomy.tsv\"\nschema = \"schema.toml\"\nclasses = [\"Normal\", \"Osteopenia\", \"Osteoporosis\"]\n\n\
             [gate]\nk = 5\nl = 2\nquasi_fields = [\"age\", \"bmi\", \"sex\"]\n{extra_config}"
        );
        std::fs::write(dir.path().join("config.toml"), config).unwrap();
        Self { dir }
    }

    fn p(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn cmd(&self, args: &[&str]) -> Output {
        // `@name` expands to a path inside the fixture directory
        let mut c = bin();
        for a in args {
            match a.strip_prefix('@') {
                Some(name) => c.arg(self.p(name)),
                None => c.arg(a),
            };
        }
        c.output().unwrap()
    }

    fn prepare_gated(&self) {
        ok(self.cmd(&[
            "distill",
            "--config",
            "@config.toml",
            "--prototypes",
            "@prototypes.jsonl",
            "--out",
            "@bank.jsonl",
        ]));
        ok(self.cmd(&[
            "gate",
            "fit",
            "--config",
            "@config.toml",
            "--population",
            "@population.jsonl",
            "--out",
            "@index.jsonl",
        ]));
        ok(self.cmd(&[
            "gate",
            "apply",
            "--config",
            "@config.toml",
            "--bank",
            "@bank.jsonl",
            "--index",
            "@index.jsonl",
            "--out",
            "@gated.jsonl",
        ]));
    }

    fn generate(&self, out: &str, extra: &[&str]) -> Output {
        let mut args = vec![
            "generate",
            "--config",
            "@config.toml",
            "--gated",
            "@gated.jsonl",
            "--cases",
            "@cases.jsonl",
            "--backbone",
            "@backbone.jsonl",
            "--states",
            "@states.jsonl",
            "--out",
        ];
        args.push(out);
        args.extend_from_slice(extra);
        self.cmd(&args)
    }
}

#[test]
fn distill_sizes_and_determinism() {
    let f = Fixture::new("");
    ok(f.cmd(&[
        "distill",
        "--config",
        "@config.toml",
        "--prototypes",
        "@prototypes.jsonl",
        "--out",
        "@bank.jsonl",
    ]));
    let first = std::fs::read(f.p("bank.jsonl")).unwrap();
    assert_eq!(lines(&f.p("bank.jsonl")).len(), lines(&f.p("prototypes.jsonl")).len());
    ok(f.cmd(&[
        "distill",
        "--config",
        "@config.toml",
        "--prototypes",
        "@prototypes.jsonl",
        "--out",
        "@bank.jsonl",
    ]));
    assert_eq!(first, std::fs::read(f.p("bank.jsonl")).unwrap());

    std::fs::write(f.p("empty.jsonl"), "").unwrap();
    ok(f.cmd(&[
        "distill",
        "--config",
        "@config.toml",
        "--prototypes",
        "@empty.jsonl",
        "--out",
        "@empty_bank.jsonl",
    ]));
    assert_eq!(std::fs::read_to_string(f.p("empty_bank.jsonl")).unwrap(), "");

    let manifest: Value = serde_json::from_str(&std::fs::read_to_string(f.p("bank.jsonl.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["schema_version"], "manifest/v1");
    assert_eq!(manifest["command"], "distill");
    let outputs: Vec<&str> = manifest["outputs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap())
        .collect();
    assert!(outputs.contains(&f.p("bank.jsonl").to_str().unwrap()));
    assert!(outputs.contains(&f.p("bank.jsonl.manifest.json").to_str().unwrap()));
}

#[test]
fn gate_apply_thresholds() {
    let f = Fixture::new("");
    f.prepare_gated();
    let gated = lines(&f.p("gated.jsonl"));
    let visible = gated.iter().filter(|g| g["status"] == "visible").count();
    assert!(visible > 0 && visible < gated.len());
    ok(f.cmd(&[
        "gate",
        "apply",
        "--config",
        "@config.toml",
        "--bank",
        "@bank.jsonl",
        "--index",
        "@index.jsonl",
        "--k",
        "1",
        "--l",
        "1",
        "--out",
        "@open.jsonl",
    ]));
    assert!(lines(&f.p("open.jsonl")).iter().all(|g| g["status"] == "visible"));
}

fn read_frontier(path: &Path) -> Vec<BTreeMap<String, f64>> {
    let text = std::fs::read_to_string(path).unwrap();
    let mut rows = text.lines();
    let header: Vec<&str> = rows.next().unwrap().split(',').collect();
    rows.map(|r| {
        header
            .iter()
            .map(|h| h.to_string())
            .zip(r.split(',').map(|v| v.parse().unwrap()))
            .collect()
    })
    .collect()
}

#[test]
fn sweep_matches_per_cell_gating() {
    let f = Fixture::new("");
    f.prepare_gated();
    ok(f.cmd(&[
        "gate",
        "sweep",
        "--config",
        "@config.toml",
        "--prototypes",
        "@prototypes.jsonl",
        "--population",
        "@population.jsonl",
        "--backbone",
        "@backbone.jsonl",
        "--k",
        "1,3,5",
        "--l",
        "1,2,4",
        "--out",
        "@frontier.csv",
    ]));
    let rows = read_frontier(&f.p("frontier.csv"));
    assert_eq!(rows.len(), 9);
    for row in &rows {
        let (k, l) = (row["k"] as usize, row["l"] as usize);
        if l == 4 {
            assert!(row["utility"] == 0.0 && row["visible_rate"] == 0.0 && row["linkage"] == 0.0);
        }
        if k == 1 && l == 1 {
            assert_eq!(row["visible_rate"], 1.0);
            assert_eq!(row["redaction_rate"], 0.0);
        }
        let out = format!("cell_{k}_{l}.jsonl");
        ok(f.cmd(&[
            "gate",
            "apply",
            "--config",
            "@config.toml",
            "--bank",
            "@bank.jsonl",
            "--index",
            "@index.jsonl",
            "--k",
            &k.to_string(),
            "--l",
            &l.to_string(),
            "--out",
            &format!("@{out}"),
        ]));
        let cell = lines(&f.p(&out));
        let rate = cell.iter().filter(|g| g["status"] == "visible").count() as f64 / cell.len() as f64;
        assert_eq!(format!("{rate:.6}"), format!("{:.6}", row["visible_rate"]), "k={k} l={l}");
    }
}

#[test]
fn generate_backends() {
    let f = Fixture::new("");
    f.prepare_gated();
    ok(f.generate("@template.jsonl", &["--backend", "template"]));
    let template: Vec<GenerationRecord> = records(&f.p("template.jsonl"));
    assert!(!template.is_empty());
    assert!(template
        .iter()
        .all(|r| matches!(r.outcome, OptimizationOutcome::Accepted { iterations_used: 1, .. })));

    let states: Vec<GroundedState> = records(&f.p("states.jsonl"));
    ok(f.generate("@repaired.jsonl", &["--backend", "adversarial", "--workers", "3"]));
    let repaired: Vec<GenerationRecord> = records(&f.p("repaired.jsonl"));
    for (r, s) in repaired.iter().zip(&states) {
        assert_eq!(r.case_id, s.case.case_id);
        if let Some(report) = r.outcome.report() {
            assert!(extract_claims(report).is_subset(&admissible_triples(s)));
        }
    }
    ok(f.generate("@repaired_serial.jsonl", &["--backend", "adversarial", "--workers", "1"]));
    assert_eq!(
        std::fs::read(f.p("repaired.jsonl")).unwrap(),
        std::fs::read(f.p("repaired_serial.jsonl")).unwrap()
    );
}

#[test]
fn persistent_adversary_defers_everything() {
    let f = Fixture::new("\n[scribe]\nbackend = \"adversarial\"\nfault_rate = 1.0\npersistence = 1.0\nmax_iterations = 3\n");
    f.prepare_gated();
    ok(f.generate("@reports.jsonl", &[]));
    let reports: Vec<GenerationRecord> = records(&f.p("reports.jsonl"));
    assert!(!reports.is_empty());
    assert!(reports
        .iter()
        .all(|r| matches!(r.outcome, OptimizationOutcome::Deferred { iterations_used: 3, .. })));

    let out = ok(f.cmd(&[
        "evaluate",
        "csf",
        "--reports",
        "@reports.jsonl",
        "--references",
        "@states.jsonl",
        "--out",
        "@eval.json",
    ]));
    let doc: EvaluationDocument = serde_json::from_str(&std::fs::read_to_string(f.p("eval.json")).unwrap()).unwrap();
    assert_eq!(doc.status, "empty");
    assert_eq!(doc.deferred, reports.len());
    assert!(String::from_utf8_lossy(&out.stdout).contains("no accepted reports"));
}

#[test]
fn evaluate_matches_direct_scoring() {
    let f = Fixture::new("");
    f.prepare_gated();
    ok(f.generate("@reports.jsonl", &[]));
    ok(f.cmd(&[
        "evaluate",
        "csf",
        "--reports",
        "@reports.jsonl",
        "--references",
        "@states.jsonl",
        "--out",
        "@eval.json",
    ]));
    let doc: EvaluationDocument = serde_json::from_str(&std::fs::read_to_string(f.p("eval.json")).unwrap()).unwrap();
    assert_eq!(doc.status, "ok");
    let summary = doc.summary.as_ref().unwrap();
    for v in [summary.precision, summary.recall, summary.f1, summary.weighted_accuracy] {
        assert_eq!(v, Some(1.0));
    }

    let reports: Vec<GenerationRecord> = records(&f.p("reports.jsonl"));
    let states: Vec<GroundedState> = records(&f.p("states.jsonl"));
    let scored: BTreeMap<&str, _> = doc.per_case.iter().map(|c| (c.case_id.as_str(), &c.csf)).collect();
    for (r, s) in reports.iter().zip(&states) {
        let reference: Vec<_> = if s.deferral.is_active() {
            vec![]
        } else {
            s.visible.iter().map(|v| v.differential.clone()).collect()
        };
        let direct = csf(
            &reference,
            &extract_claims(r.outcome.report().unwrap()),
            &ClassWeights::ReferenceFrequency,
            UnknownItemPolicy::Reject,
        )
        .unwrap();
        assert_eq!(scored[r.case_id.as_str()], &direct);
    }

    std::fs::write(f.p("none.jsonl"), "").unwrap();
    let out = f.cmd(&[
        "evaluate",
        "csf",
        "--reports",
        "@none.jsonl",
        "--references",
        "@states.jsonl",
        "--out",
        "@empty.json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let empty: Value = serde_json::from_str(&std::fs::read_to_string(f.p("empty.json")).unwrap()).unwrap();
    assert_eq!(empty["status"], "empty");
}

#[test]
fn attacks_report_each_kind() {
    let f = Fixture::new("");
    let mut acc = BTreeMap::new();
    for kind in ["mia", "aia", "link"] {
        for release in ["gated", "ungated"] {
            let out = format!("{kind}_{release}.json");
            ok(f.cmd(&[
                "attack",
                kind,
                "--config",
                "@config.toml",
                "--members",
                "@prototypes.jsonl",
                "--population",
                "@population.jsonl",
                "--non-members",
                "@non_members.jsonl",
                "--release",
                release,
                "--out",
                &format!("@{out}"),
            ]));
            let doc: Value = serde_json::from_str(&std::fs::read_to_string(f.p(&out)).unwrap()).unwrap();
            assert_eq!(doc["release"], release);
            let a = doc["result"]["accuracy"].as_f64().unwrap();
            assert!((0.0..=1.0).contains(&a));
            acc.insert((kind, release), a);
        }
        assert!(acc[&(kind, "gated")] <= acc[&(kind, "ungated")], "{kind}");
    }
}

#[test]
fn exit_codes() {
    let f = Fixture::new("");
    // usage error
    assert_eq!(f.cmd(&["gate", "fit"]).status.code(), Some(2));
    // configuration error
    std::fs::write(f.p("bad.toml"), "[gate]\nk = 0\n").unwrap();
    let out = f.cmd(&[
        "distill",
        "--config",
        "@bad.toml",
        "--prototypes",
        "@prototypes.jsonl",
        "--out",
        "@bank.jsonl",
    ]);
    assert_eq!(out.status.code(), Some(2));
    // data error, with the line number
    std::fs::write(f.p("broken.jsonl"), "{\"prototype_id\": 1}\n").unwrap();
    let out = f.cmd(&[
        "distill",
        "--config",
        "@config.toml",
        "--prototypes",
        "@broken.jsonl",
        "--out",
        "@bank.jsonl",
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));
    // backend failure
    f.prepare_gated();
    let port = std::net::TcpListener::bind("127.0.0.1:0")
        .unwrap()
        .local_addr()
        .unwrap()
        .port();
    let mut c = bin();
    c.args(["generate", "--backend", "http", "--config"])
        .arg(f.p("config.toml"))
        .arg("--gated")
        .arg(f.p("gated.jsonl"))
        .arg("--cases")
        .arg(f.p("cases.jsonl"))
        .arg("--backbone")
        .arg(f.p("backbone.jsonl"))
        .arg("--out")
        .arg(f.p("http.jsonl"))
        .arg("--transcripts")
        .arg(f.p("transcripts.jsonl"))
        .env("SCRIBE_ENDPOINT", format!("http://127.0.0.1:{port}/"));
    let out = c.output().unwrap();
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(!lines(&f.p("transcripts.jsonl")).is_empty());
    // http backend without credentials configured
    let out = f.generate("@http2.jsonl", &["--backend", "http"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn demo_writes_every_listed_artifact() {
    let dir = tempfile::tempdir().unwrap();
    ok(run(&["demo", "--seed", "3", "--out-dir"], &[dir.path()]));
    let manifest: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    let outputs: Vec<PathBuf> = manifest["outputs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| PathBuf::from(v.as_str().unwrap()))
        .collect();
    for p in &outputs {
        assert!(p.exists(), "{}", p.display());
    }
    let mut on_disk = Vec::new();
    for entry in walk(dir.path()) {
        on_disk.push(entry);
    }
    for p in on_disk {
        assert!(outputs.contains(&p), "{} is not in the manifest", p.display());
    }
}

fn walk(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    for e in std::fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            out.extend(walk(&p));
        } else {
            out.push(p);
        }
    }
    out
}
