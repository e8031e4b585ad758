use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::assertion::{consensus_assertions, default_min_support, Assertion};
use super::quantize::{quantize, BinSchema, QuantizedRecord, RawRecord};
use super::MemoryError;
use crate::taxonomy::Taxonomy;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClassLabel(pub String);

impl ClassLabel {
    pub fn new(s: impl Into<String>) -> Self {
        Self(s.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub source_views: usize,
    pub min_support: usize,
}

/// Discrete abstraction of one training prototype.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProtoCard {
    pub prototype_id: u32,
    pub class_label: ClassLabel,
    pub assertions: BTreeSet<Assertion>,
    pub record: QuantizedRecord,
    pub summary: String,
    pub provenance: Provenance,
}

/// The same abstraction computed for a query case.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseCard {
    pub case_id: String,
    pub assertions: BTreeSet<Assertion>,
    pub record: QuantizedRecord,
}

fn fuse<V: AsRef<[Assertion]>>(views: &[V], min_support: usize) -> Result<BTreeSet<Assertion>, MemoryError> {
    if views.is_empty() {
        // tabular-only source: nothing to fuse
        return Ok(BTreeSet::new());
    }
    consensus_assertions(views, min_support)
}

fn render_summary(
    class_label: &ClassLabel,
    prototype_id: u32,
    assertions: &BTreeSet<Assertion>,
    record: &QuantizedRecord,
) -> String {
    let findings = if assertions.is_empty() {
        "none recorded".to_string()
    } else {
        assertions
            .iter()
            .map(|a| match &a.qualifier {
                Some(q) => format!("{} {} ({q})", a.concept_id, a.polarity.as_str()),
                None => format!("{} {}", a.concept_id, a.polarity.as_str()),
            })
            .collect::<Vec<_>>()
            .join(", ")
    };
    let profile = record
        .bins
        .iter()
        .map(|(k, v)| format!("{k} {v}"))
        .collect::<Vec<_>>()
        .join(", ");
    format!("{class_label} prototype {prototype_id}. Findings: {findings}. Profile: {profile}.")
}

/// Distills one prototype: consensus over its views plus quantized bins.
///
/// With zero views the card carries no assertions. The summary is a fixed
/// template over the card contents.
pub fn build_protocard<V: AsRef<[Assertion]>>(
    prototype_id: u32,
    class_label: ClassLabel,
    views: &[V],
    raw_record: &RawRecord,
    schema: &BinSchema,
    min_support: usize,
) -> Result<ProtoCard, MemoryError> {
    let assertions = fuse(views, min_support)?;
    let record = quantize(raw_record, schema)?;
    let summary = render_summary(&class_label, prototype_id, &assertions, &record);
    Ok(ProtoCard {
        prototype_id,
        class_label,
        assertions,
        record,
        summary,
        provenance: Provenance {
            source_views: views.len(),
            min_support,
        },
    })
}

pub fn build_casecard<V: AsRef<[Assertion]>>(
    case_id: &str,
    views: &[V],
    raw_record: &RawRecord,
    schema: &BinSchema,
    min_support: usize,
) -> Result<CaseCard, MemoryError> {
    Ok(CaseCard {
        case_id: case_id.to_string(),
        assertions: fuse(views, min_support)?,
        record: quantize(raw_record, schema)?,
    })
}

/// Card builder bound to a taxonomy, schema and class vocabulary.
///
/// Unlike the free functions it rejects concepts outside the taxonomy and
/// labels outside the class list, and picks ⌈R/2⌉ support when none is set.
#[derive(Debug, Clone)]
pub struct Distiller {
    pub taxonomy: Taxonomy,
    pub schema: BinSchema,
    pub classes: Vec<ClassLabel>,
    pub min_support: Option<usize>,
}

impl Distiller {
    fn support_for(&self, views: usize) -> usize {
        self.min_support.unwrap_or_else(|| default_min_support(views))
    }

    fn check_concepts<V: AsRef<[Assertion]>>(&self, views: &[V]) -> Result<(), MemoryError> {
        for a in views.iter().flat_map(|v| v.as_ref()) {
            if !self.taxonomy.contains(&a.concept_id) {
                return Err(MemoryError::UnknownConcept(a.concept_id.clone()));
            }
        }
        Ok(())
    }

    pub fn protocard<V: AsRef<[Assertion]>>(
        &self,
        prototype_id: u32,
        class_label: ClassLabel,
        views: &[V],
        raw_record: &RawRecord,
    ) -> Result<ProtoCard, MemoryError> {
        if !self.classes.is_empty() && !self.classes.contains(&class_label) {
            return Err(MemoryError::UnknownClass(class_label.0));
        }
        self.check_concepts(views)?;
        build_protocard(
            prototype_id,
            class_label,
            views,
            raw_record,
            &self.schema,
            self.support_for(views.len()),
        )
    }

    pub fn casecard<V: AsRef<[Assertion]>>(
        &self,
        case_id: &str,
        views: &[V],
        raw_record: &RawRecord,
    ) -> Result<CaseCard, MemoryError> {
        self.check_concepts(views)?;
        build_casecard(case_id, views, raw_record, &self.schema, self.support_for(views.len()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::memory::RawValue;
    use proptest::prelude::*;

    fn schema() -> BinSchema {
        BinSchema::new(vec![
            BinSchema::numeric("age", vec![0.0, 65.0, 80.0, 120.0], None).unwrap(),
            BinSchema::categorical("sex", vec!["F".into(), "M".into()]).unwrap(),
        ])
        .unwrap()
    }

    fn raw(age: f64, sex: &str) -> RawRecord {
        RawRecord::from([
            ("age".to_string(), RawValue::Number(age)),
            ("sex".to_string(), RawValue::from(sex)),
        ])
    }

    #[test]
    fn empty_views_give_empty_assertions() {
        let views: Vec<Vec<Assertion>> = vec![vec![], vec![], vec![]];
        let card = build_protocard(0, ClassLabel::new("Normal"), &views, &raw(70.0, "F"), &schema(), 1).unwrap();
        assert!(card.assertions.is_empty());
        assert_eq!(card.record.get("age"), Some("65-80"));
        assert_eq!(
            card.provenance,
            Provenance {
                source_views: 3,
                min_support: 1
            }
        );
        let none: Vec<Vec<Assertion>> = vec![];
        let card = build_protocard(0, ClassLabel::new("Normal"), &none, &raw(70.0, "F"), &schema(), 1).unwrap();
        assert!(card.assertions.is_empty());
    }

    #[test]
    fn single_uncontradicted_assertion() {
        let views = vec![vec![Assertion::present("scl")]];
        let card = build_casecard("q1", &views, &raw(50.0, "M"), &schema(), 1).unwrap();
        assert_eq!(
            card.assertions.iter().cloned().collect::<Vec<_>>(),
            vec![Assertion::present("scl")]
        );
    }

    #[test]
    fn errors_propagate() {
        let views = vec![vec![Assertion::present("scl")]];
        assert!(matches!(
            build_protocard(1, ClassLabel::new("N"), &views, &raw(130.0, "F"), &schema(), 1),
            Err(MemoryError::OutOfRange { .. })
        ));
        assert!(matches!(
            build_protocard(1, ClassLabel::new("N"), &views, &raw(30.0, "F"), &schema(), 2),
            Err(MemoryError::InvalidSupport { .. })
        ));
    }

    #[test]
    fn distiller_checks_vocabulary() {
        let d = Distiller {
            taxonomy: Taxonomy::parse("scl\tSclerosis\n").unwrap(),
            schema: schema(),
            classes: vec![ClassLabel::new("Normal")],
            min_support: None,
        };
        let ok = vec![vec![Assertion::present("scl")], vec![Assertion::present("scl")], vec![]];
        let card = d.protocard(3, ClassLabel::new("Normal"), &ok, &raw(70.0, "F")).unwrap();
        assert_eq!(card.provenance.min_support, 2);
        assert_eq!(card.assertions.len(), 1);
        let bad = vec![vec![Assertion::present("nope")]];
        assert!(matches!(
            d.casecard("q", &bad, &raw(70.0, "F")),
            Err(MemoryError::UnknownConcept(_))
        ));
        assert!(matches!(
            d.protocard(3, ClassLabel::new("Other"), &ok, &raw(70.0, "F")),
            Err(MemoryError::UnknownClass(_))
        ));
    }

    #[test]
    fn summary_is_templated() {
        let views = vec![vec![Assertion::present("scl"), Assertion::absent("ovl").with_qualifier("L4")]];
        let card = build_protocard(7, ClassLabel::new("Osteopenia"), &views, &raw(70.0, "F"), &schema(), 1).unwrap();
        assert_eq!(
            card.summary,
            "Osteopenia prototype 7. Findings: ovl absent (L4), scl present. Profile: age 65-80, sex F."
        );
    }

    proptest! {
        #[test]
        fn card_is_composition_of_components(
            seeds in proptest::collection::vec(proptest::collection::vec((0u8..6, any::<bool>()), 0..5), 1..5),
            age in 0.0f64..=120.0,
            male in any::<bool>(),
        ) {
            let views: Vec<Vec<Assertion>> = seeds
                .iter()
                .map(|v| v.iter().map(|(c, p)| if *p { Assertion::present(format!("k{c}")) } else { Assertion::absent(format!("k{c}")) }).collect())
                .collect();
            let m = default_min_support(views.len());
            let r = raw(age, if male { "M" } else { "F" });
            let card = build_protocard(1, ClassLabel::new("N"), &views, &r, &schema(), m).unwrap();
            prop_assert_eq!(&card.assertions, &consensus_assertions(&views, m).unwrap());
            prop_assert_eq!(&card.record, &quantize(&r, &schema()).unwrap());
            let again = build_protocard(1, ClassLabel::new("N"), &views, &r, &schema(), m).unwrap();
            prop_assert_eq!(
                crate::json::to_canonical_line(&card).unwrap(),
                crate::json::to_canonical_line(&again).unwrap()
            );
        }
    }
}
