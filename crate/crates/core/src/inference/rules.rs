//! Rule bodies. Each rule inserts only conclusions that are not yet present
//! and returns the number of derivations it recorded.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use super::constraints::{amounts_of, constraints_of, satisfied, Constraint};
use crate::kb::{FactId, KbError, KnowledgeBase, LinkKind, Rule, Value};
use crate::schema::{self, vocab};

type Res<T> = Result<T, KbError>;

/// Properties requested for `creation` across all its featurings.
pub fn requested_properties(kb: &KnowledgeBase, creation: FactId) -> BTreeSet<FactId> {
    schema::featurings_of(kb, creation)
        .into_iter()
        .flat_map(|f| schema::featured_properties(kb, f))
        .collect()
}

/// `(requester, provider)` pairs of every Realizing relation, with the
/// lowest relation id per pair.
pub fn realized_pairs(kb: &KnowledgeBase) -> BTreeMap<(FactId, FactId), FactId> {
    let mut out = BTreeMap::new();
    for rel in kb.instances_of_named(vocab::REALIZING) {
        for req in kb.role_targets(rel, vocab::REQUESTER) {
            for prov in kb.role_targets(rel, vocab::PROVIDER) {
                out.entry((req, prov)).or_insert(rel);
            }
        }
    }
    out
}

/// Requesters of some Realizing, mapped to the lowest relation id.
pub fn realized_requesters(kb: &KnowledgeBase) -> BTreeMap<FactId, FactId> {
    let mut out = BTreeMap::new();
    for ((req, _), rel) in realized_pairs(kb) {
        out.entry(req).or_insert(rel);
    }
    out
}

fn is_provider_candidate(kb: &KnowledgeBase, requester: FactId, provider: FactId, category: &str) -> bool {
    requester != provider
        && kb.is_a(requester, category)
        && kb.is_a(provider, category)
        && schema::is_requested(kb, requester)
        && !schema::is_requested(kb, provider)
}

/// The data-realizing predicate: a shared format, and one provider rate
/// meeting every featured rate constraint.
pub fn data_realizes(kb: &KnowledgeBase, requester: FactId, provider: FactId) -> bool {
    if !is_provider_candidate(kb, requester, provider, vocab::DATA) {
        return false;
    }
    let props = requested_properties(kb, requester);
    let texts = |ids: &mut dyn Iterator<Item = FactId>| -> BTreeSet<String> {
        ids.filter_map(|i| kb.value(i).and_then(Value::as_text).map(str::to_string))
            .collect()
    };
    let wanted = texts(&mut props.iter().copied().filter(|p| kb.is_a(*p, vocab::FORMAT)));
    let offered = texts(&mut kb.has(provider, vocab::FORMAT).into_iter());
    if wanted.is_disjoint(&offered) {
        return false;
    }
    let rate_constraints: Vec<Constraint> = props
        .iter()
        .filter(|p| kb.is_a(**p, vocab::RATE))
        .flat_map(|p| constraints_of(kb, *p))
        .collect();
    let rates: Vec<f64> = kb
        .has(provider, vocab::RATE)
        .into_iter()
        .flat_map(|r| amounts_of(kb, r))
        .collect();
    satisfied(&rate_constraints, &rates)
}

/// True for featured properties checked on resources and phenomena.
pub fn is_quantity(kb: &KnowledgeBase, prop: FactId) -> bool {
    [vocab::PHYSICAL_QUANTITY, vocab::THROUGHPUT, vocab::CAPACITY]
        .iter()
        .any(|c| kb.is_a(prop, c))
}

/// The resource/phenomena predicate for `category`: the provider refines
/// the requested class, and every featured quantity is offered with the
/// same unit and a satisfying amount.
pub fn quantity_realizes(kb: &KnowledgeBase, requester: FactId, provider: FactId, category: &str) -> bool {
    if !is_provider_candidate(kb, requester, provider, category) {
        return false;
    }
    let (Some(rc), Some(pc)) = (kb.class_of(requester), kb.class_of(provider)) else {
        return false;
    };
    if !kb.descends(pc, rc) {
        return false;
    }
    requested_properties(kb, requester)
        .into_iter()
        .filter(|q| is_quantity(kb, *q))
        .all(|q| {
            let class = kb.class_of(q).expect("featured property exists");
            let unit = kb.value(q).and_then(Value::as_text);
            let constraints = constraints_of(kb, q);
            kb.query_has(provider, class).unwrap_or_default().into_iter().any(|a| {
                unit.is_none_or(|u| kb.value(a).and_then(Value::as_text) == Some(u))
                    && satisfied(&constraints, &amounts_of(kb, a))
            })
        })
}

fn insert_realizing(kb: &mut KnowledgeBase, requester: FactId, provider: FactId, rule: Rule) -> Res<FactId> {
    let class = kb.require_class(vocab::REALIZING)?;
    let roles = [
        (kb.require_role(vocab::REQUESTER)?, requester),
        (kb.require_role(vocab::PROVIDER)?, provider),
    ];
    let mut premises = vec![requester, provider];
    premises.extend(schema::featurings_of(kb, requester));
    kb.infer_relation(class, &roles, rule, premises)
}

fn candidates(kb: &KnowledgeBase, category: &str) -> (Vec<FactId>, Vec<FactId>) {
    kb.instances_of_named(category)
        .into_iter()
        .partition(|c| schema::is_requested(kb, *c))
}

pub fn realize_data(kb: &mut KnowledgeBase) -> Res<usize> {
    let existing = realized_pairs(kb);
    let (requesters, providers) = candidates(kb, vocab::DATA);
    let mut added = 0;
    for &r in &requesters {
        for &p in &providers {
            if existing.contains_key(&(r, p)) || !data_realizes(kb, r, p) {
                continue;
            }
            let rel = insert_realizing(kb, r, p, Rule::RealizeData)?;
            added += 1;
            // The requester now also knows where to find the data.
            for loc in kb.has(p, vocab::LOCATION) {
                let owned = kb
                    .outgoing(r)
                    .any(|l| matches!(l.kind, LinkKind::Has(_)) && l.target == loc);
                if !owned {
                    let class = kb.class_of(loc).expect("attribute exists");
                    kb.infer_has(r, class, loc, Rule::RealizeData, vec![rel, loc])?;
                    added += 1;
                }
            }
        }
    }
    Ok(added)
}

fn realize_quantities(kb: &mut KnowledgeBase, category: &str, rule: Rule) -> Res<usize> {
    let existing = realized_pairs(kb);
    let (requesters, providers) = candidates(kb, category);
    let mut added = 0;
    for &r in &requesters {
        for &p in &providers {
            if !existing.contains_key(&(r, p)) && quantity_realizes(kb, r, p, category) {
                insert_realizing(kb, r, p, rule)?;
                added += 1;
            }
        }
    }
    Ok(added)
}

pub fn realize_resource(kb: &mut KnowledgeBase) -> Res<usize> {
    realize_quantities(kb, vocab::RESOURCE, Rule::RealizeResource)
}

pub fn realize_phenomena(kb: &mut KnowledgeBase) -> Res<usize> {
    realize_quantities(kb, vocab::PHENOMENA, Rule::RealizePhenomena)
}

/// Subjects of the NFR and ER calls a component petitions.
pub fn health_dependencies(kb: &KnowledgeBase, component: FactId) -> (Vec<FactId>, BTreeSet<FactId>) {
    let requires: Vec<FactId> = schema::requirements_of(kb, component)
        .into_iter()
        .filter(|r| kb.is_a(*r, vocab::NFR) || kb.is_a(*r, vocab::ER))
        .collect();
    let subjects = requires
        .iter()
        .flat_map(|r| schema::calls_of(kb, *r))
        .flat_map(|(_, f)| schema::featuring_subjects(kb, f))
        .collect();
    (requires, subjects)
}

pub fn infer_health(kb: &mut KnowledgeBase) -> Res<usize> {
    let realized = realized_requesters(kb);
    let mut changed = 0;
    for c in kb.instances_of_named(vocab::COMPONENT) {
        let attrs: Vec<FactId> = kb
            .has(c, vocab::HEALTH_STATE)
            .into_iter()
            .filter(|a| !kb.instance(*a).is_ok_and(|i| i.pin.is_pinned()))
            .collect();
        if attrs.is_empty() {
            continue;
        }
        let (requires, subjects) = health_dependencies(kb, c);
        let healthy = subjects.iter().all(|s| realized.contains_key(s));
        let mut premises = vec![c];
        premises.extend(&requires);
        if healthy {
            premises.extend(subjects.iter().map(|s| realized[s]));
        }
        for a in attrs {
            if kb.infer_value(a, Value::Bool(healthy), Rule::InferHealth, premises.clone())? {
                changed += 1;
            }
        }
    }
    Ok(changed)
}

/// True when some HealthState of the component is effectively `false`.
pub fn is_unhealthy(kb: &KnowledgeBase, component: FactId) -> bool {
    kb.has(component, vocab::HEALTH_STATE)
        .into_iter()
        .any(|a| kb.value(a) == Some(&Value::Bool(false)))
}

/// Requirements that gate the production of `product`: those listing it,
/// and those listing no product at all.
pub fn requirements_for(kb: &KnowledgeBase, component: FactId, product: FactId) -> Vec<FactId> {
    schema::requirements_of(kb, component)
        .into_iter()
        .filter(|r| {
            let ps = schema::products_of(kb, *r);
            ps.is_empty() || ps.contains(&product)
        })
        .collect()
}

pub fn can_process(kb: &KnowledgeBase, component: FactId) -> bool {
    [vocab::SENSOR, vocab::ACTUATOR, vocab::FUNCTIONAL]
        .iter()
        .any(|k| kb.is_a(component, k))
}

/// A processing relation as seen by the transitivity rule.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct ProcessingView {
    pub id: FactId,
    /// Base processings composing this one, in chain order.
    pub chain: Vec<FactId>,
    pub executors: Vec<FactId>,
    pub inputs: Vec<FactId>,
    pub output: Option<FactId>,
}

fn role_targets_in_order(kb: &KnowledgeBase, source: FactId, role: &str) -> Vec<FactId> {
    let Some(role) = kb.role_id(role) else {
        return Vec::new();
    };
    kb.outgoing(source)
        .filter(|l| matches!(l.kind, LinkKind::Role(r) if kb.role_refines(r, role)))
        .map(|l| l.target)
        .collect()
}

/// Every Processing relation with its chain of base processings. Composites
/// are recognized through their derivation.
pub fn processings(kb: &KnowledgeBase) -> Vec<ProcessingView> {
    let mut chains: HashMap<FactId, Vec<FactId>> = HashMap::new();
    let mut out = Vec::new();
    for id in kb.instances_of_named(vocab::PROCESSING) {
        let executors = role_targets_in_order(kb, id, vocab::EXECUTOR);
        let chain = match kb.derivation_of(id) {
            Some(d) if d.rule == Rule::ProcessingTransitive && d.premises.len() >= 2 => {
                let mut c = chains.get(&d.premises[0]).cloned().unwrap_or_default();
                c.push(d.premises[1]);
                c
            }
            _ if executors.len() == 1 => vec![id],
            _ => Vec::new(),
        };
        chains.insert(id, chain.clone());
        out.push(ProcessingView {
            id,
            chain,
            executors,
            inputs: role_targets_in_order(kb, id, vocab::INPUT),
            output: role_targets_in_order(kb, id, vocab::OUTPUT).first().copied(),
        });
    }
    out
}

pub fn infer_processing(kb: &mut KnowledgeBase) -> Res<usize> {
    let realized = realized_requesters(kb);
    let existing: HashSet<(FactId, Option<FactId>)> = processings(kb)
        .into_iter()
        .filter(|p| p.chain == [p.id])
        .map(|p| (p.executors[0], p.output))
        .collect();
    let class = kb.require_class(vocab::PROCESSING)?;
    let executor = kb.require_role(vocab::EXECUTOR)?;
    let input = kb.require_role(vocab::INPUT)?;
    let output = kb.require_role(vocab::OUTPUT)?;
    let mut added = 0;
    for c in kb.instances_of_named(vocab::COMPONENT) {
        if !can_process(kb, c) || is_unhealthy(kb, c) {
            continue;
        }
        let products: BTreeSet<FactId> = schema::requirements_of(kb, c)
            .into_iter()
            .flat_map(|r| schema::products_of(kb, r))
            .collect();
        for p in products {
            if existing.contains(&(c, Some(p))) {
                continue;
            }
            let requires = requirements_for(kb, c, p);
            let mut inputs = BTreeSet::new();
            let mut used = BTreeSet::new();
            let mut met = true;
            for r in &requires {
                for (role, f) in schema::calls_of(kb, *r) {
                    for s in schema::featuring_subjects(kb, f) {
                        match realized.get(&s) {
                            Some(rel) => {
                                used.insert(*rel);
                                if role == vocab::INPUT || role == vocab::STATE {
                                    inputs.insert(s);
                                }
                            }
                            None => met = false,
                        }
                    }
                }
            }
            if !met {
                continue;
            }
            let mut roles = vec![(executor, c)];
            roles.extend(inputs.iter().map(|i| (input, *i)));
            roles.push((output, p));
            let mut premises = vec![c];
            premises.extend(&requires);
            premises.extend(&used);
            kb.infer_relation(class, &roles, Rule::Processing, premises)?;
            added += 1;
        }
    }
    Ok(added)
}

pub fn infer_transitive(kb: &mut KnowledgeBase) -> Res<usize> {
    let all = processings(kb);
    let bases: Vec<&ProcessingView> = all.iter().filter(|p| p.chain == [p.id]).collect();
    let mut keys: HashSet<Vec<FactId>> = all.iter().filter(|p| !p.chain.is_empty()).map(|p| p.chain.clone()).collect();
    let mut by_provider: BTreeMap<FactId, Vec<(FactId, FactId)>> = BTreeMap::new();
    for ((req, prov), rel) in realized_pairs(kb) {
        by_provider.entry(prov).or_default().push((rel, req));
    }
    let class = kb.require_class(vocab::PROCESSING)?;
    let executor = kb.require_role(vocab::EXECUTOR)?;
    let input = kb.require_role(vocab::INPUT)?;
    let output = kb.require_role(vocab::OUTPUT)?;
    let mut added = 0;
    for p in all.iter().filter(|p| !p.chain.is_empty()) {
        let Some(p_out) = p.output else { continue };
        let Some(links) = by_provider.get(&p_out) else { continue };
        for q in &bases {
            if p.executors.contains(&q.executors[0]) {
                continue;
            }
            let mut key = p.chain.clone();
            key.push(q.id);
            if keys.contains(&key) {
                continue;
            }
            let Some(&(via, _)) = links
                .iter()
                .filter(|(_, req)| q.inputs.contains(req))
                .min()
            else {
                continue;
            };
            let Some(q_out) = q.output else { continue };
            let mut roles: Vec<_> = p.executors.iter().map(|e| (executor, *e)).collect();
            roles.push((executor, q.executors[0]));
            roles.extend(p.inputs.iter().map(|i| (input, *i)));
            roles.push((output, q_out));
            kb.infer_relation(class, &roles, Rule::ProcessingTransitive, vec![p.id, q.id, via])?;
            keys.insert(key);
            added += 1;
        }
    }
    Ok(added)
}
