//! Built-in component ontology and design-pattern validation.
//!
//! Installs the Component / Creation / Require / Property hierarchies and the
//! role vocabulary, and checks component instances against the sensor,
//! actuator, functional and appliance patterns.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::kb::{ClassId, ClassParent, FactId, KbError, KnowledgeBase, LinkKind, MetaKind};

/// Class and role names the engine itself depends on.
pub mod vocab {
    pub const COMPONENT: &str = "Component";
    pub const SENSOR: &str = "Sensor";
    pub const ACTUATOR: &str = "Actuator";
    pub const FUNCTIONAL: &str = "Functional";
    pub const APPLIANCE: &str = "Appliance";
    pub const CREATION: &str = "Creation";
    pub const DATA: &str = "Data";
    pub const RESOURCE: &str = "Resource";
    pub const PHENOMENA: &str = "PhysicalPhenomena";
    pub const BEHAVIOR: &str = "Behavior";

    pub const REQUIRE: &str = "Require";
    pub const FR: &str = "FunctionalRequirement";
    pub const NFR: &str = "NonFunctionalRequirement";
    pub const ER: &str = "EnvironmentalRequirement";
    pub const FEATURING: &str = "Featuring";
    pub const REALIZING: &str = "Realizing";
    pub const PROCESSING: &str = "Processing";
    pub const PROCESSING_REQUIREMENT: &str = "ProcessingRequirement";

    pub const PROPERTY: &str = "Property";
    pub const QUALITY: &str = "Quality";
    pub const RATE: &str = "Rate";
    pub const FORMAT: &str = "Format";
    pub const LOCATION: &str = "Location";
    pub const RANGE: &str = "Range";
    pub const MIN: &str = "Min";
    pub const MAX: &str = "Max";
    pub const EXACT: &str = "Exact";
    pub const CAPACITY: &str = "Capacity";
    pub const THROUGHPUT: &str = "Throughput";
    pub const PHYSICAL_QUANTITY: &str = "PhysicalQuantity";
    pub const HEALTH_STATE: &str = "HealthState";
    pub const NAME: &str = "Name";
    pub const MODALITY: &str = "Modality";

    pub const PETITIONER: &str = "petitioner";
    pub const CALL: &str = "call";
    pub const INPUT: &str = "input";
    pub const SERVICE: &str = "service";
    pub const STATE: &str = "state";
    pub const PRODUCT: &str = "product";
    pub const OUTPUT: &str = "output";
    pub const OUTCOME: &str = "outcome";
    pub const SUBJECT: &str = "subject";
    pub const FEATURE: &str = "feature";
    pub const REQUESTER: &str = "requester";
    pub const PROVIDER: &str = "provider";
    pub const EXECUTOR: &str = "executor";
    pub const EFFECT: &str = "effect";
}

use vocab::*;

/// `(class, parent)` pairs in installation order; parents precede children.
pub const BUILTIN_CLASSES: &[(&str, &str)] = &[
    // components
    (COMPONENT, "Entity"),
    (SENSOR, COMPONENT),
    (ACTUATOR, COMPONENT),
    (FUNCTIONAL, COMPONENT),
    (APPLIANCE, COMPONENT),
    // creations
    (CREATION, "Entity"),
    (DATA, CREATION),
    ("Signal", DATA),
    ("Information", DATA),
    ("Knowledge", DATA),
    (RESOURCE, CREATION),
    ("ElectricalPower", RESOURCE),
    ("Computation", RESOURCE),
    ("Communication", RESOURCE),
    (PHENOMENA, CREATION),
    ("Light", PHENOMENA),
    ("Sound", PHENOMENA),
    ("Speed", PHENOMENA),
    (BEHAVIOR, "Entity"),
    // relations
    (REQUIRE, "Relation"),
    (FR, REQUIRE),
    (NFR, REQUIRE),
    (ER, REQUIRE),
    (FEATURING, "Relation"),
    (REALIZING, "Relation"),
    (PROCESSING, "Relation"),
    (PROCESSING_REQUIREMENT, "Relation"),
    // properties
    (PROPERTY, "Attribute"),
    (QUALITY, PROPERTY),
    (RATE, PROPERTY),
    ("FPS", RATE),
    ("PS", RATE),
    (FORMAT, PROPERTY),
    ("ROSmsgs", FORMAT),
    (LOCATION, PROPERTY),
    ("ROStopic", LOCATION),
    (RANGE, PROPERTY),
    (MIN, RANGE),
    (MAX, RANGE),
    (EXACT, RANGE),
    (CAPACITY, PROPERTY),
    (THROUGHPUT, PROPERTY),
    ("Power", THROUGHPUT),
    (PHYSICAL_QUANTITY, PROPERTY),
    ("Wavelength", PHYSICAL_QUANTITY),
    ("Intensity", PHYSICAL_QUANTITY),
    ("Voltage", PHYSICAL_QUANTITY),
    (HEALTH_STATE, PROPERTY),
    (NAME, "Attribute"),
    (MODALITY, "Attribute"),
];

/// `(role, parent)` pairs of the built-in role vocabulary.
pub const BUILTIN_ROLES: &[(&str, Option<&str>)] = &[
    (PETITIONER, None),
    (CALL, None),
    (INPUT, Some(CALL)),
    (SERVICE, Some(CALL)),
    (STATE, Some(CALL)),
    (PRODUCT, None),
    (OUTPUT, Some(PRODUCT)),
    (OUTCOME, Some(PRODUCT)),
    (SUBJECT, None),
    (FEATURE, None),
    (REQUESTER, None),
    (PROVIDER, None),
    (EXECUTOR, None),
    (EFFECT, None),
];

pub fn is_builtin_class(name: &str) -> bool {
    MetaKind::ALL.iter().any(|k| k.root_name() == name)
        || BUILTIN_CLASSES.iter().any(|(c, _)| *c == name)
}

pub fn is_builtin_role(name: &str) -> bool {
    BUILTIN_ROLES.iter().any(|(r, _)| *r == name)
}

#[derive(Debug, Error, PartialEq)]
pub enum SchemaError {
    #[error("built-in schema collides with existing class `{0}`")]
    ClassCollision(String),
    #[error("built-in schema collides with existing role `{0}`")]
    RoleCollision(String),
    #[error("instance {0} is not a component")]
    NotAComponent(FactId),
    #[error(transparent)]
    Kb(#[from] KbError),
}

/// Installs the built-in hierarchy and role vocabulary. Returns the number of
/// classes registered. Fails without touching the KB if any name is taken.
pub fn load_builtin_schema(kb: &mut KnowledgeBase) -> Result<usize, SchemaError> {
    if let Some((c, _)) = BUILTIN_CLASSES.iter().find(|(c, _)| kb.class_id(c).is_some()) {
        return Err(SchemaError::ClassCollision(c.to_string()));
    }
    if let Some((r, _)) = BUILTIN_ROLES.iter().find(|(r, _)| kb.role_id(r).is_some()) {
        return Err(SchemaError::RoleCollision(r.to_string()));
    }
    for (class, parent) in BUILTIN_CLASSES {
        let parent = match MetaKind::ALL.iter().find(|k| k.root_name() == *parent) {
            Some(kind) => ClassParent::Root(*kind),
            None => ClassParent::Class(parent),
        };
        kb.define_class(class, parent)?;
    }
    for (role, parent) in BUILTIN_ROLES {
        kb.define_role(role, *parent)?;
    }
    Ok(BUILTIN_CLASSES.len())
}

/// A fresh KB with the built-in schema installed.
pub fn new_kb() -> KnowledgeBase {
    let mut kb = KnowledgeBase::new();
    load_builtin_schema(&mut kb).expect("fresh KB has no collisions");
    kb
}

// ---------------------------------------------------------------- navigation

/// Require relations petitioned by `component`, by id.
pub fn requirements_of(kb: &KnowledgeBase, component: FactId) -> Vec<FactId> {
    kb.role_sources(component, PETITIONER)
        .into_iter()
        .filter(|r| kb.is_a(*r, REQUIRE))
        .collect()
}

/// Products (outputs and outcomes) of a Require relation.
pub fn products_of(kb: &KnowledgeBase, require: FactId) -> BTreeSet<FactId> {
    kb.role_targets(require, PRODUCT)
}

/// Calls of a Require relation as `(role name, featuring)` pairs.
pub fn calls_of(kb: &KnowledgeBase, require: FactId) -> Vec<(String, FactId)> {
    let Some(call) = kb.role_id(CALL) else {
        return Vec::new();
    };
    kb.outgoing(require)
        .filter_map(|l| match l.kind {
            LinkKind::Role(r) if kb.role_refines(r, call) => {
                Some((kb.role(r).name.clone(), l.target))
            }
            _ => None,
        })
        .collect()
}

/// Creations that play the subject of a featuring.
pub fn featuring_subjects(kb: &KnowledgeBase, featuring: FactId) -> BTreeSet<FactId> {
    kb.role_sources(featuring, SUBJECT)
}

/// Properties attached to a featuring through the `feature` role.
pub fn featured_properties(kb: &KnowledgeBase, featuring: FactId) -> BTreeSet<FactId> {
    kb.role_sources(featuring, FEATURE)
}

/// Featurings a creation is the subject of.
pub fn featurings_of(kb: &KnowledgeBase, creation: FactId) -> BTreeSet<FactId> {
    kb.role_targets(creation, SUBJECT)
        .into_iter()
        .filter(|f| kb.is_a(*f, FEATURING))
        .collect()
}

/// True for creations requested through at least one featuring.
pub fn is_requested(kb: &KnowledgeBase, creation: FactId) -> bool {
    !featurings_of(kb, creation).is_empty()
}

/// Every creation linked as a product of some Require relation.
pub fn component_products(kb: &KnowledgeBase) -> BTreeSet<FactId> {
    kb.instances_of_named(REQUIRE)
        .into_iter()
        .flat_map(|r| products_of(kb, r))
        .collect()
}

// ---------------------------------------------------------------- validation

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum RequireKind {
    #[serde(rename = "FR")]
    Functional,
    #[serde(rename = "NFR")]
    NonFunctional,
    #[serde(rename = "ER")]
    Environmental,
    /// A Require without one of the three refinements.
    #[serde(rename = "Require")]
    Unrefined,
}

impl RequireKind {
    pub fn of(kb: &KnowledgeBase, require: FactId) -> RequireKind {
        if kb.is_a(require, FR) {
            RequireKind::Functional
        } else if kb.is_a(require, NFR) {
            RequireKind::NonFunctional
        } else if kb.is_a(require, ER) {
            RequireKind::Environmental
        } else {
            RequireKind::Unrefined
        }
    }

    /// The call role this kind of requirement is expected to use.
    pub fn call_role(self) -> Option<&'static str> {
        match self {
            RequireKind::Functional => Some(INPUT),
            RequireKind::NonFunctional => Some(SERVICE),
            RequireKind::Environmental => Some(STATE),
            RequireKind::Unrefined => None,
        }
    }
}

impl fmt::Display for RequireKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RequireKind::Functional => "FR",
            RequireKind::NonFunctional => "NFR",
            RequireKind::Environmental => "ER",
            RequireKind::Unrefined => "Require",
        })
    }
}

/// One requirement of a component, grouped per call role and product.
/// Conjunctive inputs (several featurings under one call role) share a tuple.
/// A Require without products of its own gates every product of the
/// component.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct RequirementTuple {
    pub require: FactId,
    pub kind: RequireKind,
    pub call_role: String,
    pub featurings: Vec<FactId>,
    pub product: FactId,
}

pub fn list_requirements(kb: &KnowledgeBase, component: FactId) -> Vec<RequirementTuple> {
    let mut out = Vec::new();
    let requires = requirements_of(kb, component);
    let all_products: BTreeSet<FactId> = requires.iter().flat_map(|r| products_of(kb, *r)).collect();
    for r in requires {
        let kind = RequireKind::of(kb, r);
        let mut by_role: Vec<(String, Vec<FactId>)> = Vec::new();
        for (role, f) in calls_of(kb, r) {
            match by_role.iter_mut().find(|(name, _)| *name == role) {
                Some((_, fs)) => fs.push(f),
                None => by_role.push((role, vec![f])),
            }
        }
        let own = products_of(kb, r);
        let products = if own.is_empty() { &all_products } else { &own };
        for &product in products {
            for (role, fs) in &by_role {
                out.push(RequirementTuple {
                    require: r,
                    kind,
                    call_role: role.clone(),
                    featurings: fs.clone(),
                    product,
                });
            }
        }
    }
    out.sort();
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub rule: &'static str,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub subject: FactId,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_conformant(&self) -> bool {
        self.violations.is_empty()
    }
}

pub const RULE_HAS_REQUIREMENT: &str = "has-requirement";
pub const RULE_KIND_PATTERN: &str = "kind-pattern";
pub const RULE_FEATURED_PROPERTY: &str = "featuring-has-property";
pub const RULE_CALL_ROLE: &str = "call-role";

#[derive(Clone, Copy, PartialEq, Eq)]
enum ComponentKind {
    Sensor,
    Actuator,
    Functional,
    Appliance,
    Generic,
}

/// Checks a component instance against its design pattern. Read-only.
pub fn validate_component(kb: &KnowledgeBase, component: FactId) -> Result<ValidationReport, SchemaError> {
    kb.instance(component)?;
    if !kb.is_a(component, COMPONENT) {
        return Err(SchemaError::NotAComponent(component));
    }
    let label = kb.label(component);
    let mut violations = Vec::new();
    let mut flag = |rule: &'static str, message: String| violations.push(Violation { rule, message });

    let requires = requirements_of(kb, component);
    if requires.is_empty() {
        flag(RULE_HAS_REQUIREMENT, format!("{label} petitions no requirement"));
    }

    let kind = if kb.is_a(component, SENSOR) {
        ComponentKind::Sensor
    } else if kb.is_a(component, ACTUATOR) {
        ComponentKind::Actuator
    } else if kb.is_a(component, FUNCTIONAL) {
        ComponentKind::Functional
    } else if kb.is_a(component, APPLIANCE) {
        ComponentKind::Appliance
    } else {
        ComponentKind::Generic
    };

    // Per requirement: which creation categories appear as call subjects and products.
    let subjects_via = |r: FactId, role: &str| -> BTreeSet<FactId> {
        calls_of(kb, r)
            .into_iter()
            .filter(|(name, _)| name == role)
            .flat_map(|(_, f)| featuring_subjects(kb, f))
            .collect()
    };
    let any_is = |ids: &BTreeSet<FactId>, class: &str| ids.iter().any(|i| kb.is_a(*i, class));
    let all_are = |ids: &BTreeSet<FactId>, class: &str| ids.iter().all(|i| kb.is_a(*i, class));

    let products: BTreeSet<FactId> = requires.iter().flat_map(|r| products_of(kb, *r)).collect();
    match kind {
        ComponentKind::Sensor => {
            let ok = requires.iter().any(|r| {
                RequireKind::of(kb, *r) == RequireKind::Environmental
                    && any_is(&subjects_via(*r, STATE), PHENOMENA)
                    && any_is(&kb.role_targets(*r, OUTCOME), DATA)
            });
            if !ok {
                flag(RULE_KIND_PATTERN, format!("sensor {label} needs an ER with a phenomena state and a data outcome"));
            }
            if !all_are(&products, DATA) {
                flag(RULE_KIND_PATTERN, format!("sensor {label} produces something other than data"));
            }
        }
        ComponentKind::Actuator => {
            let ok = requires.iter().any(|r| {
                RequireKind::of(kb, *r) == RequireKind::Functional
                    && any_is(&subjects_via(*r, INPUT), DATA)
                    && any_is(&kb.role_targets(*r, OUTPUT), PHENOMENA)
            });
            if !ok {
                flag(RULE_KIND_PATTERN, format!("actuator {label} needs an FR with a data input and a phenomena output"));
            }
        }
        ComponentKind::Functional => {
            let ok = requires.iter().any(|r| {
                RequireKind::of(kb, *r) == RequireKind::Functional
                    && any_is(&subjects_via(*r, INPUT), DATA)
                    && any_is(&kb.role_targets(*r, OUTPUT), DATA)
            });
            if !ok {
                flag(RULE_KIND_PATTERN, format!("functional {label} needs an FR with a data input and a data output"));
            }
            if !all_are(&products, DATA) {
                flag(RULE_KIND_PATTERN, format!("functional {label} produces something other than data"));
            }
        }
        ComponentKind::Appliance => {
            if products.is_empty() || !all_are(&products, RESOURCE) {
                flag(RULE_KIND_PATTERN, format!("appliance {label} must produce a resource"));
            }
        }
        ComponentKind::Generic => {}
    }

    for r in &requires {
        let rkind = RequireKind::of(kb, *r);
        for (role, f) in calls_of(kb, *r) {
            if let Some(expected) = rkind.call_role() {
                if role != expected {
                    flag(
                        RULE_CALL_ROLE,
                        format!("{rkind} {} calls through `{role}`, expected `{expected}`", kb.label(*r)),
                    );
                }
            }
            if kb.is_a(f, FEATURING) && featured_properties(kb, f).is_empty() {
                flag(RULE_FEATURED_PROPERTY, format!("featuring {} features no property", kb.label(f)));
            }
        }
    }

    Ok(ValidationReport {
        subject: component,
        violations,
    })
}

/// Direct subclasses by name, for reporting.
pub fn subclass_names(kb: &KnowledgeBase, class: ClassId) -> BTreeSet<String> {
    kb.subclasses(class)
        .into_iter()
        .map(|c| kb.class_name(c).to_string())
        .collect()
}
