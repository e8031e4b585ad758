//! Linkage and attribute attacks against releases with known structure.

use proptest::prelude::*;
use protoscribe_core::eval::{
    aia, link_top1, AiaTarget, ClassMajorityAttacker, LinkCase, RegistryEntry, ReleasedArtifact, SignatureMatchScorer, TiePolicy,
};
use protoscribe_core::gate::ReleaseSignature;

fn sig(class: usize) -> ReleaseSignature {
    ReleaseSignature {
        quasi_values: vec![format!("a{}", class % 7), format!("b{}", class / 7)],
        semantic_buckets: if class.is_multiple_of(2) {
            vec!["fracture".into()]
        } else {
            vec![]
        },
    }
}

/// `classes` equivalence classes of exactly `k` records each.
fn registry(classes: usize, k: usize) -> Vec<RegistryEntry> {
    (0..classes * k)
        .map(|i| RegistryEntry {
            record_id: format!("r{i}"),
            signature: sig(i / k),
        })
        .collect()
}

fn released(registry: &[RegistryEntry], disclose: bool) -> Vec<ReleasedArtifact> {
    registry
        .iter()
        .map(|r| ReleasedArtifact {
            source_id: r.record_id.clone(),
            disclosed: disclose.then(|| r.signature.clone()),
        })
        .collect()
}

fn cases<'a>(
    artifacts: &'a [ReleasedArtifact],
    registry: &'a [RegistryEntry],
) -> Vec<LinkCase<'a, ReleasedArtifact, RegistryEntry>> {
    artifacts
        .iter()
        .enumerate()
        .map(|(i, a)| LinkCase {
            artifact: a,
            candidates: registry,
            truth: i,
        })
        .collect()
}

const SCORER: SignatureMatchScorer = SignatureMatchScorer { bucket_vocabulary: 1 };

#[test]
fn redacted_artifacts_link_at_chance() {
    let n = 8;
    let reg = registry(1, n);
    let once = released(&reg, false);
    let artifacts: Vec<ReleasedArtifact> = (0..4000).map(|i| once[i % n].clone()).collect();
    let cs: Vec<_> = artifacts
        .iter()
        .enumerate()
        .map(|(i, a)| LinkCase {
            artifact: a,
            candidates: &reg[..],
            truth: i % n,
        })
        .collect();
    let frac = link_top1(&cs, &SCORER, TiePolicy::Fractional).unwrap();
    assert!((frac.accuracy - 1.0 / n as f64).abs() < 1e-12);
    let mc = link_top1(&cs, &SCORER, TiePolicy::Random { seed: 4 }).unwrap();
    let sd = ((1.0 / n as f64) * (1.0 - 1.0 / n as f64) / cs.len() as f64).sqrt();
    assert!((mc.accuracy - 1.0 / n as f64).abs() < 4.0 * sd, "{}", mc.accuracy);
    assert_eq!(link_top1(&cs, &SCORER, TiePolicy::Strict).unwrap().accuracy, 0.0);
}

#[test]
fn classes_of_size_k_bound_linkage() {
    for k in [2, 5, 10] {
        let reg = registry(60, k);
        let artifacts = released(&reg, true);
        let cs = cases(&artifacts, &reg);
        let frac = link_top1(&cs, &SCORER, TiePolicy::Fractional).unwrap();
        assert!((frac.accuracy - 1.0 / k as f64).abs() < 1e-9, "k={k}: {}", frac.accuracy);
        let mc = link_top1(&cs, &SCORER, TiePolicy::Random { seed: k as u64 }).unwrap();
        assert!(mc.accuracy <= 1.0 / k as f64 + 0.05, "k={k}: {}", mc.accuracy);
    }
}

#[test]
fn balanced_two_value_classes_bound_attribute_inference() {
    let reg = registry(500, 4);
    let artifacts = released(&reg, true);
    let values: Vec<String> = (0..reg.len())
        .map(|i| if i % 2 == 0 { "A" } else { "B" }.to_string())
        .collect();
    let attacker = ClassMajorityAttacker::new(reg.iter().zip(&values).map(|(r, v)| (r.signature.clone(), v.clone())), "A", 3);
    let targets: Vec<_> = artifacts
        .iter()
        .zip(&reg)
        .zip(&values)
        .map(|((a, r), v)| AiaTarget {
            artifact: a.clone(),
            aux: r.signature.clone(),
            sensitive: v.clone(),
        })
        .collect();
    let result = aia(&targets, &attacker).unwrap();
    assert_eq!(result.accuracy, 0.5);
}

proptest! {
    #[test]
    fn fractional_credit_is_bounded_by_strict_plus_ties(
        sizes in proptest::collection::vec(1usize..6, 1..12),
        disclose in proptest::collection::vec(any::<bool>(), 1..40),
        seed in any::<u64>(),
    ) {
        let reg: Vec<RegistryEntry> = sizes
            .iter()
            .enumerate()
            .flat_map(|(c, &k)| (0..k).map(move |j| RegistryEntry { record_id: format!("r{c}-{j}"), signature: sig(c) }))
            .collect();
        let artifacts: Vec<ReleasedArtifact> = reg
            .iter()
            .zip(disclose.iter().cycle())
            .map(|(r, d)| ReleasedArtifact { source_id: r.record_id.clone(), disclosed: d.then(|| r.signature.clone()) })
            .collect();
        let cs = cases(&artifacts, &reg);
        let strict = link_top1(&cs, &SCORER, TiePolicy::Strict).unwrap();
        let frac = link_top1(&cs, &SCORER, TiePolicy::Fractional).unwrap();
        let random = link_top1(&cs, &SCORER, TiePolicy::Random { seed }).unwrap();
        let tie_mass = frac.tie_events as f64 / frac.trials as f64;
        for r in [&strict, &frac, &random] {
            prop_assert!((0.0..=1.0).contains(&r.accuracy));
        }
        prop_assert!(strict.accuracy <= frac.accuracy + 1e-12);
        prop_assert!(frac.accuracy <= strict.accuracy + tie_mass + 1e-12);
        prop_assert_eq!(random, link_top1(&cs, &SCORER, TiePolicy::Random { seed }).unwrap());
    }
}
