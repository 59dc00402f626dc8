mod common;

use selfx_core::bundled;
use selfx_core::inference::infer_to_fixpoint;
use selfx_core::kb::{KnowledgeBase, LinkKind};
use selfx_core::schema::{
    self, list_requirements, new_kb, validate_component, vocab, RequireKind, SchemaError, RULE_FEATURED_PROPERTY,
    RULE_HAS_REQUIREMENT, RULE_KIND_PATTERN,
};
use selfx_core::sxdl;

use common::canonical;

fn components(kb: &KnowledgeBase) -> Vec<selfx_core::kb::FactId> {
    kb.instances().map(|i| i.id).filter(|i| kb.is_a(*i, vocab::COMPONENT)).collect()
}

#[test]
fn builtin_schema_is_closed_over_bundled_files() {
    let kb = new_kb();
    for (name, text) in bundled::SXDL_FILES {
        let mut scratch = kb.clone();
        sxdl::load_str(text, &mut scratch).unwrap_or_else(|e| panic!("{name}: {e}"));
        for l in scratch.links() {
            if let LinkKind::Role(r) = l.kind {
                let role = &scratch.role(r).name;
                assert!(kb.role_id(role).is_some(), "{name}: role `{role}` is not built in");
            }
        }
    }
    for root in [vocab::COMPONENT, vocab::CREATION, vocab::FEATURING, vocab::RESOURCE, vocab::PHENOMENA, vocab::DATA] {
        assert!(kb.class_id(root).is_some(), "{root}");
    }
}

#[test]
fn bundled_components_conform() {
    let kb = bundled::search_mission(false);
    let all = components(&kb);
    assert!(all.len() >= 6);
    for c in all {
        let report = validate_component(&kb, c).unwrap();
        assert!(report.is_conformant(), "{}: {:?}", kb.label(c), report.violations);
        assert!(!list_requirements(&kb, c).is_empty());
    }
}

#[test]
fn validation_is_read_only() {
    let mut kb = bundled::search_mission(false);
    infer_to_fixpoint(&mut kb).unwrap();
    let before = canonical(&kb, false);
    let facts = (kb.instance_count(), kb.link_count());
    for c in components(&kb) {
        validate_component(&kb, c).unwrap();
    }
    assert_eq!(canonical(&kb, false), before);
    assert_eq!((kb.instance_count(), kb.link_count()), facts);
    assert!(!kb.is_dirty());
}

#[test]
fn violations_are_reported() {
    let extra = r#"
        class Thermometer : Sensor;
        class Idle : Functional;
        instance thermometer : Thermometer {}
        instance idle : Idle {}
        instance _f_empty : Featuring {}
        instance idle_in : Signal { role subject -> _f_empty; }
        instance idle_out : Signal {}
        instance idle_fr : FunctionalRequirement {
          role petitioner -> idle;
          role input -> _f_empty;
          role output -> idle_out;
        }
    "#;
    let kb = bundled::scenario(&[bundled::CAMERA, extra]).unwrap();
    let thermometer = validate_component(&kb, kb.lookup("thermometer").unwrap()).unwrap();
    let rules: Vec<_> = thermometer.violations.iter().map(|v| v.rule).collect();
    assert!(rules.contains(&RULE_HAS_REQUIREMENT), "{rules:?}");
    assert!(rules.contains(&RULE_KIND_PATTERN), "{rules:?}");

    let idle = validate_component(&kb, kb.lookup("idle").unwrap()).unwrap();
    let rules: Vec<_> = idle.violations.iter().map(|v| v.rule).collect();
    assert_eq!(rules, [RULE_FEATURED_PROPERTY]);

    let image = kb.lookup("camera_image").unwrap();
    assert!(matches!(validate_component(&kb, image), Err(SchemaError::NotAComponent(_))));
}

#[test]
fn requirement_tuples_name_their_kind() {
    let kb = bundled::camera_detector();
    let camera = kb.lookup("camera").unwrap();
    let kinds: Vec<RequireKind> = list_requirements(&kb, camera).iter().map(|t| t.kind).collect();
    assert!(kinds.contains(&RequireKind::Environmental));
    assert!(kinds.contains(&RequireKind::NonFunctional));
    let image = kb.lookup("camera_image").unwrap();
    let power = kb.lookup("camera_power").unwrap();
    let tuples = list_requirements(&kb, camera);
    let nfr = tuples.iter().find(|t| t.kind == RequireKind::NonFunctional).unwrap();
    assert_eq!((nfr.call_role.as_str(), nfr.product), ("service", image));
    assert_eq!(nfr.featurings.len(), 1);
    assert!(schema::featuring_subjects(&kb, nfr.featurings[0]).contains(&power));
    for t in &tuples {
        let own = schema::products_of(&kb, t.require);
        assert!(own.is_empty() || own.contains(&t.product));
    }
}
