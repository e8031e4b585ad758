//! Generated cohorts survive a write/read cycle unchanged.

use std::fs::File;
use std::io::BufReader;

use protoscribe_core::backbone::{
    load_backbone_outputs, synth_cohort, CaseRecord, MembershipLabel, PopulationRecord, PrototypeRecord, SyntheticCohortSpec,
};
use protoscribe_core::json::read_jsonl;
use protoscribe_core::memory::BinSchema;
use protoscribe_core::taxonomy::Taxonomy;

fn read<T: serde::de::DeserializeOwned>(path: &std::path::Path) -> Vec<T> {
    read_jsonl(BufReader::new(File::open(path).unwrap())).unwrap()
}

#[test]
fn write_then_read_is_identity() {
    let spec = SyntheticCohortSpec {
        seed: 3,
        cases: 40,
        canaries: true,
        ..SyntheticCohortSpec::default()
    };
    let cohort = synth_cohort(&spec).unwrap();
    let dir = tempfile::tempdir().unwrap();
    cohort.write_to_dir(dir.path()).unwrap();
    let p = |f: &str| dir.path().join(f);

    let backbone: Vec<_> = load_backbone_outputs(p("backbone.jsonl"))
        .unwrap()
        .collect::<Result<_, _>>()
        .unwrap();
    assert_eq!(backbone, cohort.backbone);
    assert_eq!(read::<PopulationRecord>(&p("population.jsonl")), cohort.population);
    assert_eq!(read::<PrototypeRecord>(&p("prototypes.jsonl")), cohort.prototypes);
    assert_eq!(read::<CaseRecord>(&p("cases.jsonl")), cohort.cases);
    assert_eq!(read::<PopulationRecord>(&p("non_members.jsonl")), cohort.non_members);
    assert_eq!(read::<MembershipLabel>(&p("membership.jsonl")), cohort.membership);
    assert_eq!(Taxonomy::load(p("taxonomy.tsv")).unwrap(), cohort.taxonomy);
    assert_eq!(BinSchema::load(p("schema.toml")).unwrap(), cohort.schema);
}

#[test]
fn same_seed_writes_identical_bytes() {
    let spec = SyntheticCohortSpec {
        seed: 9,
        cases: 10,
        ..SyntheticCohortSpec::default()
    };
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        synth_cohort(&spec).unwrap().write_to_dir(d.path()).unwrap();
    }
    for f in [
        "population.jsonl",
        "prototypes.jsonl",
        "cases.jsonl",
        "backbone.jsonl",
        "membership.jsonl",
        "schema.toml",
    ] {
        let a = std::fs::read(dirs[0].path().join(f)).unwrap();
        let b = std::fs::read(dirs[1].path().join(f)).unwrap();
        assert_eq!(a, b, "{f}");
    }
}
