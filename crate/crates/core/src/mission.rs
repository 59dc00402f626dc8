//! Behaviors, feasibility and the "can I do it?" question.
//!
//! A behavior is feasible when a supported Processing produces a creation
//! matching its effect. A Processing is supported when each of its inputs is
//! realized by a provider that is either not produced by any component, or
//! is the output of another supported Processing.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::assess::{
    acoustic_position_inaccuracy, visual_position_inaccuracy, Conditions, ConditionsError,
    MetricError, SomError, SomMap, DEFAULT_ROBOT_POS_ACCURACY,
};
use crate::assess::conditions::{ROBOT_POS_ACCURACY, ROOM_LENGTH, ROOM_WIDTH, TARGET_DISTANCE};
use crate::inference::constraints::{amounts_of, constraints_of, satisfied};
use crate::inference::rules::{processings, realized_pairs};
use crate::kb::{FactId, KnowledgeBase, Value};
use crate::schema::{self, vocab};
use crate::sxdl::{
    self, AttrAssign, BehaviorDecl, Document, Ident, LoadError, Member, Span, Statement,
    StatementKind,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Modality {
    Visual,
    Acoustic,
}

impl Modality {
    pub fn as_str(self) -> &'static str {
        match self {
            Modality::Visual => "visual",
            Modality::Acoustic => "acoustic",
        }
    }

    fn parse(s: &str) -> Option<Modality> {
        match s {
            "visual" => Some(Modality::Visual),
            "acoustic" => Some(Modality::Acoustic),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Behavior {
    pub id: FactId,
    pub name: String,
    pub modality: Option<Modality>,
    pub requirement: FactId,
    /// The featured creation the behavior must produce.
    pub effect: FactId,
    pub effect_class: String,
    pub featured_props: Vec<FactId>,
}

/// A constraint on a behavior's effect, e.g. `Quality` with `Min 0.9`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeaturedProp {
    pub class: String,
    pub value: Value,
    /// `(Min|Max|Exact, bound)` children.
    pub ranges: Vec<(String, f64)>,
}

#[derive(Debug, Error)]
pub enum MissionError {
    #[error("knowledge base has changed since the last inference run; run `infer` first")]
    Stale,
    #[error("unknown behavior `{0}`")]
    UnknownBehavior(String),
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error(transparent)]
    Conditions(#[from] ConditionsError),
    #[error(transparent)]
    Som(#[from] SomError),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

type Res<T> = Result<T, MissionError>;

/// Asserts a behavior and its processing requirement.
pub fn register_behavior(
    kb: &mut KnowledgeBase,
    name: &str,
    effect_class: &str,
    modality: Option<Modality>,
    featured: &[FeaturedProp],
) -> Res<Behavior> {
    let ident = |s: &str| Ident {
        name: s.to_string(),
        span: Span::default(),
    };
    let attr = |class: &str, value: Value, members: Vec<Member>| AttrAssign {
        span: Span::default(),
        class: ident(class),
        name: None,
        value,
        members,
    };
    let decl = BehaviorDecl {
        span: Span::default(),
        name: name.to_string(),
        binding: None,
        attrs: modality
            .map(|m| attr(vocab::MODALITY, Value::text(m.as_str()), Vec::new()))
            .into_iter()
            .collect(),
        effect_class: ident(effect_class),
        effect_attrs: featured
            .iter()
            .map(|f| {
                let ranges = f
                    .ranges
                    .iter()
                    .map(|(c, b)| Member::Attr(attr(c, Value::from(*b), Vec::new())))
                    .collect();
                attr(&f.class, f.value.clone(), ranges)
            })
            .collect(),
    };
    let doc = Document {
        statements: vec![Statement {
            span: Span::default(),
            kind: StatementKind::Behavior(decl),
        }],
    };
    sxdl::load(&doc, kb)?;
    find_behavior(kb, name)
}

/// Every behavior with a processing requirement, sorted by name.
pub fn behaviors(kb: &KnowledgeBase) -> Vec<Behavior> {
    let mut out = Vec::new();
    for pc in kb.instances_of_named(vocab::PROCESSING_REQUIREMENT) {
        let Some(&b) = kb.role_targets(pc, vocab::PETITIONER).first() else { continue };
        let Some(&effect) = kb.role_targets(pc, vocab::EFFECT).first() else { continue };
        let text = |class: &str| {
            kb.has(b, class)
                .into_iter()
                .find_map(|a| kb.value(a).and_then(Value::as_text).map(str::to_string))
        };
        out.push(Behavior {
            id: b,
            name: text(vocab::NAME).unwrap_or_else(|| kb.label(b)),
            modality: text(vocab::MODALITY).as_deref().and_then(Modality::parse),
            requirement: pc,
            effect,
            effect_class: kb.class_of(effect).map(|c| kb.class_name(c).to_string()).unwrap_or_default(),
            featured_props: schema::featurings_of(kb, effect)
                .into_iter()
                .flat_map(|f| schema::featured_properties(kb, f))
                .collect(),
        });
    }
    out.sort_by(|a, b| a.name.cmp(&b.name).then(a.id.cmp(&b.id)));
    out
}

pub fn find_behavior(kb: &KnowledgeBase, name: &str) -> Res<Behavior> {
    behaviors(kb)
        .into_iter()
        .find(|b| b.name == name)
        .ok_or_else(|| MissionError::UnknownBehavior(name.to_string()))
}

/// Processings whose whole input chain is grounded in non-produced
/// creations.
pub fn supported_processings(kb: &KnowledgeBase) -> BTreeSet<FactId> {
    let produced = schema::component_products(kb);
    let mut providers: BTreeMap<FactId, Vec<FactId>> = BTreeMap::new();
    for (req, prov) in realized_pairs(kb).into_keys() {
        providers.entry(req).or_default().push(prov);
    }
    let all = processings(kb);
    let mut supported = BTreeSet::new();
    let mut outputs = BTreeSet::new();
    loop {
        let before = supported.len();
        for p in &all {
            if supported.contains(&p.id) {
                continue;
            }
            let grounded = p.inputs.iter().all(|i| {
                providers
                    .get(i)
                    .is_some_and(|ps| ps.iter().any(|v| !produced.contains(v) || outputs.contains(v)))
            });
            if grounded {
                supported.insert(p.id);
                if let Some(o) = p.output {
                    outputs.insert(o);
                }
            }
        }
        if supported.len() == before {
            return supported;
        }
    }
}

/// Whether `creation` is of the effect class and meets every featured
/// property: the same text or boolean value, and satisfying amounts for
/// any numeric constraints.
pub fn satisfies_effect(kb: &KnowledgeBase, behavior: &Behavior, creation: FactId) -> bool {
    if !kb.is_a(creation, &behavior.effect_class) {
        return false;
    }
    behavior.featured_props.iter().all(|&q| {
        let Some(class) = kb.class_of(q) else { return false };
        let wanted = kb.value(q);
        let constraints = constraints_of(kb, q);
        kb.query_has(creation, class).unwrap_or_default().into_iter().any(|a| {
            let same_value = match wanted {
                Some(Value::Text(_)) | Some(Value::Bool(_)) => kb.value(a) == wanted,
                _ => true,
            };
            same_value && satisfied(&constraints, &amounts_of(kb, a))
        })
    })
}

/// Supported processings producing the behavior's effect.
pub fn supporting_processings(kb: &KnowledgeBase, behavior: &Behavior) -> Vec<FactId> {
    let supported = supported_processings(kb);
    processings(kb)
        .into_iter()
        .filter(|p| supported.contains(&p.id))
        .filter(|p| p.output.is_some_and(|o| satisfies_effect(kb, behavior, o)))
        .map(|p| p.id)
        .collect()
}

fn ensure_current(kb: &KnowledgeBase) -> Res<()> {
    if kb.is_dirty() {
        Err(MissionError::Stale)
    } else {
        Ok(())
    }
}

pub fn feasible_behaviors(kb: &KnowledgeBase) -> Res<BTreeSet<String>> {
    ensure_current(kb)?;
    Ok(behaviors(kb)
        .into_iter()
        .filter(|b| !supporting_processings(kb, b).is_empty())
        .map(|b| b.name)
        .collect())
}

/// Predicts the success probability of a behavior under given conditions.
pub trait SuccessPredictor {
    fn predict(&self, conditions: &Conditions) -> Res<f64>;
}

impl SuccessPredictor for SomMap {
    fn predict(&self, conditions: &Conditions) -> Res<f64> {
        let x = conditions.vector(&self.feature_names)?;
        Ok(SomMap::predict(self, &x)?.p_success)
    }
}

/// Fixed prediction, for tests and for behaviors without experience.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantPredictor(pub f64);

impl SuccessPredictor for ConstantPredictor {
    fn predict(&self, _: &Conditions) -> Res<f64> {
        Ok(self.0)
    }
}

/// Predictors keyed by behavior name.
#[derive(Default)]
pub struct Predictors {
    by_behavior: BTreeMap<String, Box<dyn SuccessPredictor + Send + Sync>>,
}

impl Predictors {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, behavior: &str, p: impl SuccessPredictor + Send + Sync + 'static) -> &mut Self {
        self.by_behavior.insert(behavior.to_string(), Box::new(p));
        self
    }

    pub fn get(&self, behavior: &str) -> Option<&dyn SuccessPredictor> {
        self.by_behavior.get(behavior).map(|b| b.as_ref() as &dyn SuccessPredictor)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssessmentResult {
    pub behavior: String,
    pub modality: Option<Modality>,
    pub feasible: bool,
    /// Present only when feasible and a predictor is bound.
    pub p_success: Option<f64>,
    /// Meters; absent when the conditions lack the needed readings.
    pub position_inaccuracy: Option<f64>,
    pub supporting_processing: Vec<FactId>,
}

fn position_inaccuracy(modality: Option<Modality>, c: &Conditions) -> Res<Option<f64>> {
    Ok(match modality {
        Some(Modality::Visual) => match c.get(TARGET_DISTANCE) {
            Some(d) => Some(visual_position_inaccuracy(
                c.get(ROBOT_POS_ACCURACY).unwrap_or(DEFAULT_ROBOT_POS_ACCURACY),
                d,
            )?),
            None => None,
        },
        Some(Modality::Acoustic) => match (c.get(ROOM_WIDTH), c.get(ROOM_LENGTH)) {
            (Some(w), Some(l)) => Some(acoustic_position_inaccuracy(w, l)?),
            _ => None,
        },
        None => None,
    })
}

pub fn assess_behavior(
    kb: &KnowledgeBase,
    name: &str,
    conditions: &Conditions,
    predictor: Option<&dyn SuccessPredictor>,
) -> Res<AssessmentResult> {
    let behavior = find_behavior(kb, name)?;
    ensure_current(kb)?;
    let supporting = supporting_processings(kb, &behavior);
    let feasible = !supporting.is_empty();
    let p_success = match predictor {
        Some(p) if feasible => Some(p.predict(conditions)?.clamp(0.0, 1.0)),
        _ => None,
    };
    Ok(AssessmentResult {
        behavior: behavior.name,
        modality: behavior.modality,
        feasible,
        p_success,
        position_inaccuracy: position_inaccuracy(behavior.modality, conditions)?,
        supporting_processing: supporting,
    })
}

/// Feasible behaviors ranked best first: highest success probability, then
/// name. Behaviors without a predictor rank last.
pub fn rank_behaviors(kb: &KnowledgeBase, conditions: &Conditions, predictors: &Predictors) -> Res<Vec<AssessmentResult>> {
    ensure_current(kb)?;
    let mut out = Vec::new();
    for name in feasible_behaviors(kb)? {
        out.push(assess_behavior(kb, &name, conditions, predictors.get(&name))?);
    }
    out.sort_by(|a, b| {
        let pa = a.p_success.unwrap_or(f64::NEG_INFINITY);
        let pb = b.p_success.unwrap_or(f64::NEG_INFINITY);
        pb.total_cmp(&pa).then_with(|| a.behavior.cmp(&b.behavior))
    });
    Ok(out)
}

/// The best feasible behavior meeting `min_performance`, if any.
pub fn select_behavior(
    kb: &KnowledgeBase,
    conditions: &Conditions,
    predictors: &Predictors,
    min_performance: Option<f64>,
) -> Res<Option<String>> {
    Ok(rank_behaviors(kb, conditions, predictors)?
        .into_iter()
        .find(|r| match min_performance {
            Some(t) => r.p_success.is_some_and(|p| p >= t),
            None => true,
        })
        .map(|r| r.behavior))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Answer {
    pub yes: bool,
    pub result: AssessmentResult,
}

/// Yes iff the behavior is feasible and its predicted success reaches
/// `min_performance`. Without a predictor only a threshold of 0 or less
/// can be met.
pub fn can_i_do_it(
    kb: &KnowledgeBase,
    name: &str,
    min_performance: f64,
    conditions: &Conditions,
    predictor: Option<&dyn SuccessPredictor>,
) -> Res<Answer> {
    let result = assess_behavior(kb, name, conditions, predictor)?;
    let yes = result.feasible
        && match result.p_success {
            Some(p) => p >= min_performance,
            None => min_performance <= 0.0,
        };
    Ok(Answer { yes, result })
}
