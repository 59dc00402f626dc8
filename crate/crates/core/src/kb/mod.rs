//! Typed hypergraph store.
//!
//! The hypergraph is kept in its plain-graph form: entities, relations and
//! attributes are all [`Instance`]s, and hyper-edges are relation instances
//! joined to their participants through role-labelled [`Link`]s. Attributes
//! are owned through `Has` links. Role links are stored once and indexed from
//! both endpoints, so `a.role` and its inverse are both answered from the
//! index without a second link record.
//!
//! Mutation requires `&mut`; every query takes `&self` and never mutates, so
//! a store can be shared between reader threads between writes.

mod provenance;
mod snapshot;
mod types;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

pub use provenance::{Derivation, DerivationId, Rule};
pub use types::{
    ClassId, ClassParent, ConceptClass, FactId, Instance, Link, LinkKind, MetaKind, Origin, Pin,
    RoleDef, RoleId, Value,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KbError {
    #[error("class `{0}` is already defined")]
    DuplicateClass(String),
    #[error("unknown class `{0}`")]
    UnknownClass(String),
    #[error("class `{child}` cannot refine `{parent}`: {child_kind} vs {parent_kind}")]
    CrossMetaKind {
        child: String,
        parent: String,
        child_kind: MetaKind,
        parent_kind: MetaKind,
    },
    #[error("role `{0}` is already defined")]
    DuplicateRole(String),
    #[error("unknown role `{0}`")]
    UnknownRole(String),
    #[error("unknown fact {0}")]
    UnknownFact(FactId),
    #[error("fact {0} is a link, not an instance")]
    NotAnInstance(FactId),
    #[error("instances of `{0}` carry no value")]
    UnexpectedValue(String),
    #[error("attribute instances of `{0}` require a value")]
    MissingValue(String),
    #[error("number values must be finite; use the nan marker for unknown quantities")]
    NonFiniteNumber,
    #[error("instance {0} is not an attribute")]
    NotAnAttribute(FactId),
    #[error("has-link target {target} is a `{target_class}`, which does not refine `{expected}`")]
    HasClassMismatch {
        target: FactId,
        target_class: String,
        expected: String,
    },
    #[error("has-links must name an attribute class, `{0}` is not one")]
    HasNonAttributeClass(String),
    #[error("role link cannot connect {0} to itself")]
    SelfLink(FactId),
    #[error("asserted facts cannot reference inferred instance {0}")]
    InferredEndpoint(FactId),
    #[error("name `{0}` is already bound")]
    DuplicateName(String),
    #[error("snapshot is inconsistent: {0}")]
    CorruptSnapshot(String),
}

pub type Result<T, E = KbError> = std::result::Result<T, E>;

/// The knowledge base: class registry, role vocabulary, instance store and
/// link store with forward/backward indices.
#[derive(Debug, Clone)]
pub struct KnowledgeBase {
    classes: Vec<ConceptClass>,
    class_index: HashMap<String, ClassId>,
    roles: Vec<RoleDef>,
    role_index: HashMap<String, RoleId>,
    instances: BTreeMap<FactId, Instance>,
    links: BTreeMap<FactId, Link>,
    outgoing: HashMap<FactId, Vec<FactId>>,
    incoming: HashMap<FactId, Vec<FactId>>,
    by_class: HashMap<ClassId, BTreeSet<FactId>>,
    names: HashMap<String, FactId>,
    derivations: BTreeMap<DerivationId, Derivation>,
    next_fact: u64,
    next_derivation: u64,
    dirty: bool,
}

impl Default for KnowledgeBase {
    fn default() -> Self {
        Self::new()
    }
}

impl KnowledgeBase {
    /// An empty store holding only the three meta-kind root classes.
    pub fn new() -> Self {
        let mut kb = KnowledgeBase {
            classes: Vec::new(),
            class_index: HashMap::new(),
            roles: Vec::new(),
            role_index: HashMap::new(),
            instances: BTreeMap::new(),
            links: BTreeMap::new(),
            outgoing: HashMap::new(),
            incoming: HashMap::new(),
            by_class: HashMap::new(),
            names: HashMap::new(),
            derivations: BTreeMap::new(),
            next_fact: 1,
            next_derivation: 1,
            dirty: false,
        };
        for kind in MetaKind::ALL {
            kb.push_class(kind.root_name().to_string(), None, kind);
        }
        kb
    }

    fn push_class(&mut self, name: String, parent: Option<ClassId>, meta_kind: MetaKind) -> ClassId {
        let id = ClassId(self.classes.len() as u32);
        self.class_index.insert(name.clone(), id);
        self.classes.push(ConceptClass {
            name,
            parent,
            meta_kind,
        });
        id
    }

    // ----------------------------------------------------------------- classes

    pub fn define_class(&mut self, name: &str, parent: ClassParent<'_>) -> Result<ClassId> {
        if self.class_index.contains_key(name) {
            return Err(KbError::DuplicateClass(name.to_string()));
        }
        let (parent_id, kind) = match parent {
            ClassParent::Root(kind) => (self.root_class(kind), kind),
            ClassParent::Class(p) => {
                let pid = self.require_class(p)?;
                (pid, self.classes[pid.index()].meta_kind)
            }
        };
        self.dirty = true;
        Ok(self.push_class(name.to_string(), Some(parent_id), kind))
    }

    /// Defines `name` under `parent`, or returns the existing class when one
    /// with the same name and parent is already registered.
    pub fn ensure_class(&mut self, name: &str, parent: &str) -> Result<(ClassId, bool)> {
        if let Some(id) = self.class_id(name) {
            let pid = self.require_class(parent)?;
            return if self.classes[id.index()].parent == Some(pid) {
                Ok((id, false))
            } else {
                Err(KbError::DuplicateClass(name.to_string()))
            };
        }
        self.define_class(name, ClassParent::Class(parent))
            .map(|id| (id, true))
    }

    pub fn root_class(&self, kind: MetaKind) -> ClassId {
        ClassId(kind as u32)
    }

    pub fn class_id(&self, name: &str) -> Option<ClassId> {
        self.class_index.get(name).copied()
    }

    pub fn require_class(&self, name: &str) -> Result<ClassId> {
        self.class_id(name)
            .ok_or_else(|| KbError::UnknownClass(name.to_string()))
    }

    pub fn class(&self, id: ClassId) -> &ConceptClass {
        &self.classes[id.index()]
    }

    pub fn class_name(&self, id: ClassId) -> &str {
        &self.classes[id.index()].name
    }

    pub fn classes(&self) -> impl Iterator<Item = (ClassId, &ConceptClass)> {
        self.classes
            .iter()
            .enumerate()
            .map(|(i, c)| (ClassId(i as u32), c))
    }

    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    /// The class followed by its ancestors, ending at the meta-kind root.
    pub fn ancestors(&self, id: ClassId) -> Vec<ClassId> {
        let mut chain = vec![id];
        let mut cur = self.classes[id.index()].parent;
        while let Some(p) = cur {
            chain.push(p);
            cur = self.classes[p.index()].parent;
        }
        chain
    }

    /// True when `class` is `ancestor` or one of its descendants.
    pub fn descends(&self, class: ClassId, ancestor: ClassId) -> bool {
        let mut cur = Some(class);
        while let Some(c) = cur {
            if c == ancestor {
                return true;
            }
            cur = self.classes[c.index()].parent;
        }
        false
    }

    /// Name-based variant of [`descends`](Self::descends); unknown names never match.
    pub fn descends_from(&self, class: ClassId, ancestor: &str) -> bool {
        self.class_id(ancestor)
            .is_some_and(|a| self.descends(class, a))
    }

    pub fn subclasses(&self, id: ClassId) -> Vec<ClassId> {
        self.classes()
            .filter(|(_, c)| c.parent == Some(id))
            .map(|(cid, _)| cid)
            .collect()
    }

    pub fn meta_kind(&self, id: ClassId) -> MetaKind {
        self.classes[id.index()].meta_kind
    }

    // ------------------------------------------------------------------- roles

    pub fn define_role(&mut self, name: &str, parent: Option<&str>) -> Result<RoleId> {
        if self.role_index.contains_key(name) {
            return Err(KbError::DuplicateRole(name.to_string()));
        }
        let parent = parent.map(|p| self.require_role(p)).transpose()?;
        let id = RoleId(self.roles.len() as u32);
        self.roles.push(RoleDef {
            name: name.to_string(),
            parent,
        });
        self.role_index.insert(name.to_string(), id);
        Ok(id)
    }

    pub fn role_id(&self, name: &str) -> Option<RoleId> {
        self.role_index.get(name).copied()
    }

    pub fn require_role(&self, name: &str) -> Result<RoleId> {
        self.role_id(name)
            .ok_or_else(|| KbError::UnknownRole(name.to_string()))
    }

    pub fn role(&self, id: RoleId) -> &RoleDef {
        &self.roles[id.0 as usize]
    }

    pub fn roles(&self) -> impl Iterator<Item = &RoleDef> {
        self.roles.iter()
    }

    pub fn role_refines(&self, role: RoleId, ancestor: RoleId) -> bool {
        let mut cur = Some(role);
        while let Some(r) = cur {
            if r == ancestor {
                return true;
            }
            cur = self.roles[r.0 as usize].parent;
        }
        false
    }

    // --------------------------------------------------------------- instances

    fn alloc_fact(&mut self) -> FactId {
        let id = FactId(self.next_fact);
        self.next_fact += 1;
        id
    }

    fn check_value(&self, class: ClassId, value: Option<&Value>) -> Result<()> {
        let is_attr = self.meta_kind(class) == MetaKind::Attribute;
        match (is_attr, value) {
            (true, None) => Err(KbError::MissingValue(self.class_name(class).to_string())),
            (false, Some(_)) => Err(KbError::UnexpectedValue(self.class_name(class).to_string())),
            (_, Some(v)) if !v.is_well_formed() => Err(KbError::NonFiniteNumber),
            _ => Ok(()),
        }
    }

    pub fn assert_instance(&mut self, class: ClassId, value: Option<Value>) -> Result<FactId> {
        self.insert_instance(class, None, value, Origin::Asserted, None)
    }

    pub fn assert_named_instance(
        &mut self,
        name: &str,
        class: ClassId,
        value: Option<Value>,
    ) -> Result<FactId> {
        if self.names.contains_key(name) {
            return Err(KbError::DuplicateName(name.to_string()));
        }
        self.insert_instance(class, Some(name.to_string()), value, Origin::Asserted, None)
    }

    fn insert_instance(
        &mut self,
        class: ClassId,
        name: Option<String>,
        value: Option<Value>,
        origin: Origin,
        derivation: Option<DerivationId>,
    ) -> Result<FactId> {
        if class.index() >= self.classes.len() {
            return Err(KbError::UnknownClass(format!("{class:?}")));
        }
        self.check_value(class, value.as_ref())?;
        let id = self.alloc_fact();
        if let Some(n) = &name {
            self.names.insert(n.clone(), id);
        }
        self.instances.insert(
            id,
            Instance {
                id,
                class,
                name,
                value,
                inferred_value: None,
                pin: Pin::None,
                origin,
                derivation,
            },
        );
        self.by_class.entry(class).or_default().insert(id);
        if origin == Origin::Asserted {
            self.dirty = true;
        }
        Ok(id)
    }

    pub fn instance(&self, id: FactId) -> Result<&Instance> {
        self.instances.get(&id).ok_or_else(|| {
            if self.links.contains_key(&id) {
                KbError::NotAnInstance(id)
            } else {
                KbError::UnknownFact(id)
            }
        })
    }

    pub fn get_instance(&self, id: FactId) -> Option<&Instance> {
        self.instances.get(&id)
    }

    pub fn instances(&self) -> impl Iterator<Item = &Instance> {
        self.instances.values()
    }

    pub fn instance_count(&self) -> usize {
        self.instances.len()
    }

    pub fn lookup(&self, name: &str) -> Option<FactId> {
        self.names.get(name).copied()
    }

    pub fn class_of(&self, id: FactId) -> Option<ClassId> {
        self.instances.get(&id).map(|i| i.class)
    }

    pub fn is_instance_of(&self, id: FactId, ancestor: ClassId) -> bool {
        self.class_of(id).is_some_and(|c| self.descends(c, ancestor))
    }

    /// Name-based variant of [`is_instance_of`](Self::is_instance_of).
    pub fn is_a(&self, id: FactId, ancestor: &str) -> bool {
        self.class_id(ancestor)
            .is_some_and(|a| self.is_instance_of(id, a))
    }

    /// Instances whose class is `class` or one of its descendants, by id.
    pub fn instances_of(&self, class: ClassId) -> Vec<FactId> {
        let mut out: Vec<FactId> = self
            .by_class
            .iter()
            .filter(|(c, _)| self.descends(**c, class))
            .flat_map(|(_, ids)| ids.iter().copied())
            .collect();
        out.sort_unstable();
        out
    }

    /// Name-based variant of [`instances_of`](Self::instances_of); an unknown
    /// class yields nothing.
    pub fn instances_of_named(&self, class: &str) -> Vec<FactId> {
        self.class_id(class)
            .map(|c| self.instances_of(c))
            .unwrap_or_default()
    }

    /// Effective value of an attribute instance (inferred overlay first).
    pub fn value(&self, id: FactId) -> Option<&Value> {
        self.instances.get(&id).and_then(Instance::effective_value)
    }

    /// Replaces an attribute's asserted value and pins it against inference
    /// for the next recompute. Returns the previous asserted value.
    pub fn set_attribute_value(&mut self, id: FactId, value: Value) -> Result<Value> {
        let class = self.instance(id)?.class;
        if self.meta_kind(class) != MetaKind::Attribute {
            return Err(KbError::NotAnAttribute(id));
        }
        if !value.is_well_formed() {
            return Err(KbError::NonFiniteNumber);
        }
        let inst = self.instances.get_mut(&id).expect("checked above");
        let previous = inst.value.replace(value).expect("attributes always hold a value");
        inst.inferred_value = None;
        inst.pin = Pin::Pending;
        self.dirty = true;
        Ok(previous)
    }

    // ------------------------------------------------------------------- links

    pub fn assert_link(&mut self, kind: LinkKind, source: FactId, target: FactId) -> Result<FactId> {
        for endpoint in [source, target] {
            if self.instance(endpoint)?.origin == Origin::Inferred {
                return Err(KbError::InferredEndpoint(endpoint));
            }
        }
        self.insert_link(kind, source, target, Origin::Asserted, None)
    }

    /// Asserts `source.role = {target}` by role name.
    pub fn assert_role(&mut self, source: FactId, role: &str, target: FactId) -> Result<FactId> {
        let role = self.require_role(role)?;
        self.assert_link(LinkKind::Role(role), source, target)
    }

    /// Asserts `source.has<Class> = {target}` by attribute class name.
    pub fn assert_has(&mut self, source: FactId, class: &str, target: FactId) -> Result<FactId> {
        let class = self.require_class(class)?;
        self.assert_link(LinkKind::Has(class), source, target)
    }

    fn validate_link(&self, kind: LinkKind, source: FactId, target: FactId) -> Result<()> {
        self.instance(source)?;
        let target_inst = self.instance(target)?;
        match kind {
            LinkKind::Role(r) => {
                if r.0 as usize >= self.roles.len() {
                    return Err(KbError::UnknownRole(format!("{r:?}")));
                }
                if source == target {
                    return Err(KbError::SelfLink(source));
                }
            }
            LinkKind::Has(class) => {
                if class.index() >= self.classes.len() {
                    return Err(KbError::UnknownClass(format!("{class:?}")));
                }
                if self.meta_kind(class) != MetaKind::Attribute {
                    return Err(KbError::HasNonAttributeClass(self.class_name(class).to_string()));
                }
                if self.meta_kind(target_inst.class) != MetaKind::Attribute {
                    return Err(KbError::NotAnAttribute(target));
                }
                if !self.descends(target_inst.class, class) {
                    return Err(KbError::HasClassMismatch {
                        target,
                        target_class: self.class_name(target_inst.class).to_string(),
                        expected: self.class_name(class).to_string(),
                    });
                }
            }
        }
        Ok(())
    }

    fn insert_link(
        &mut self,
        kind: LinkKind,
        source: FactId,
        target: FactId,
        origin: Origin,
        derivation: Option<DerivationId>,
    ) -> Result<FactId> {
        self.validate_link(kind, source, target)?;
        let id = self.alloc_fact();
        self.links.insert(
            id,
            Link {
                id,
                kind,
                source,
                target,
                origin,
                derivation,
            },
        );
        self.outgoing.entry(source).or_default().push(id);
        self.incoming.entry(target).or_default().push(id);
        if origin == Origin::Asserted {
            self.dirty = true;
        }
        Ok(id)
    }

    pub fn link(&self, id: FactId) -> Option<&Link> {
        self.links.get(&id)
    }

    pub fn links(&self) -> impl Iterator<Item = &Link> {
        self.links.values()
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    /// Links leaving `id`, in creation order.
    pub fn outgoing(&self, id: FactId) -> impl Iterator<Item = &Link> {
        self.outgoing
            .get(&id)
            .into_iter()
            .flatten()
            .map(move |l| &self.links[l])
    }

    /// Links arriving at `id`, in creation order.
    pub fn incoming(&self, id: FactId) -> impl Iterator<Item = &Link> {
        self.incoming
            .get(&id)
            .into_iter()
            .flatten()
            .map(move |l| &self.links[l])
    }

    /// Id the next asserted or inferred fact will receive.
    pub fn next_fact_id(&self) -> FactId {
        FactId(self.next_fact)
    }

    pub fn contains_fact(&self, id: FactId) -> bool {
        self.instances.contains_key(&id) || self.links.contains_key(&id)
    }

    // ----------------------------------------------------------------- queries

    /// `instance.has<Class>`: owned attributes whose class refines `class`.
    pub fn query_has(&self, instance: FactId, class: ClassId) -> Result<BTreeSet<FactId>> {
        self.instance(instance)?;
        Ok(self
            .outgoing(instance)
            .filter(|l| matches!(l.kind, LinkKind::Has(_)))
            .filter(|l| self.is_instance_of(l.target, class))
            .map(|l| l.target)
            .collect())
    }

    /// Name-based [`query_has`](Self::query_has); an unknown class yields ∅.
    pub fn has(&self, instance: FactId, class: &str) -> BTreeSet<FactId> {
        match self.class_id(class) {
            Some(c) => self.query_has(instance, c).unwrap_or_default(),
            None => BTreeSet::new(),
        }
    }

    /// `instance.role`: targets of role links leaving `instance` whose role
    /// refines `role`.
    pub fn query_role(&self, instance: FactId, role: RoleId) -> Result<BTreeSet<FactId>> {
        self.instance(instance)?;
        Ok(self
            .outgoing(instance)
            .filter(|l| matches!(l.kind, LinkKind::Role(r) if self.role_refines(r, role)))
            .map(|l| l.target)
            .collect())
    }

    /// The autogenerated inverse of `role`: sources of role links arriving at
    /// `instance`.
    pub fn query_role_inverse(&self, instance: FactId, role: RoleId) -> Result<BTreeSet<FactId>> {
        self.instance(instance)?;
        Ok(self
            .incoming(instance)
            .filter(|l| matches!(l.kind, LinkKind::Role(r) if self.role_refines(r, role)))
            .map(|l| l.source)
            .collect())
    }

    /// Name-based [`query_role`](Self::query_role); unknown roles or instances yield ∅.
    pub fn role_targets(&self, instance: FactId, role: &str) -> BTreeSet<FactId> {
        match self.role_id(role) {
            Some(r) => self.query_role(instance, r).unwrap_or_default(),
            None => BTreeSet::new(),
        }
    }

    /// Name-based [`query_role_inverse`](Self::query_role_inverse).
    pub fn role_sources(&self, instance: FactId, role: &str) -> BTreeSet<FactId> {
        match self.role_id(role) {
            Some(r) => self.query_role_inverse(instance, r).unwrap_or_default(),
            None => BTreeSet::new(),
        }
    }

    /// Display label: the bound name, or `Class#id`.
    pub fn label(&self, id: FactId) -> String {
        match self.instances.get(&id) {
            Some(Instance {
                name: Some(n), ..
            }) => n.clone(),
            Some(inst) => format!("{}{}", self.class_name(inst.class), id),
            None => id.to_string(),
        }
    }

    // ------------------------------------------------------ truth maintenance

    pub fn is_dirty(&self) -> bool {
        self.dirty
    }

    pub(crate) fn mark_clean(&mut self) {
        self.dirty = false;
    }

    /// Removes every inferred instance and link, clears inferred attribute
    /// values and drops derivation records. Asserted facts are untouched.
    /// Returns the number of instances and links removed.
    pub fn retract_inferred(&mut self) -> usize {
        let doomed_links: Vec<FactId> = self
            .links
            .values()
            .filter(|l| l.origin == Origin::Inferred)
            .map(|l| l.id)
            .collect();
        let doomed_instances: Vec<FactId> = self
            .instances
            .values()
            .filter(|i| i.origin == Origin::Inferred)
            .map(|i| i.id)
            .collect();
        for id in &doomed_links {
            let link = self.links.remove(id).expect("collected above");
            if let Some(v) = self.outgoing.get_mut(&link.source) {
                v.retain(|l| l != id);
            }
            if let Some(v) = self.incoming.get_mut(&link.target) {
                v.retain(|l| l != id);
            }
        }
        for id in &doomed_instances {
            let inst = self.instances.remove(id).expect("collected above");
            if let Some(set) = self.by_class.get_mut(&inst.class) {
                set.remove(id);
            }
            if let Some(n) = inst.name {
                self.names.remove(&n);
            }
            self.outgoing.remove(id);
            self.incoming.remove(id);
        }
        for inst in self.instances.values_mut() {
            inst.inferred_value = None;
        }
        self.derivations.clear();
        doomed_links.len() + doomed_instances.len()
    }

    /// Called at the start of a recompute: pins already honoured by an
    /// earlier recompute are dropped, fresh pins become spent.
    pub(crate) fn advance_pins(&mut self) {
        for inst in self.instances.values_mut() {
            inst.pin = match inst.pin {
                Pin::Pending => Pin::Spent,
                Pin::Spent | Pin::None => Pin::None,
            };
        }
    }

    // ------------------------------------------------------ inferred facts

    fn record_derivation(&mut self, rule: Rule, premises: Vec<FactId>, conclusion: FactId) -> DerivationId {
        let id = DerivationId(self.next_derivation);
        self.next_derivation += 1;
        self.derivations.insert(
            id,
            Derivation {
                id,
                rule,
                premises,
                conclusion,
            },
        );
        id
    }

    /// Inserts an inferred relation instance together with its role links.
    /// All of them share one derivation record concluding the relation.
    pub(crate) fn infer_relation(
        &mut self,
        class: ClassId,
        roles: &[(RoleId, FactId)],
        rule: Rule,
        premises: Vec<FactId>,
    ) -> Result<FactId> {
        for (_, target) in roles {
            self.instance(*target)?;
        }
        let rel_id = FactId(self.next_fact);
        let derivation = self.record_derivation(rule, premises, rel_id);
        let rel = self.insert_instance(class, None, None, Origin::Inferred, Some(derivation))?;
        debug_assert_eq!(rel, rel_id);
        for (role, target) in roles {
            self.insert_link(LinkKind::Role(*role), rel, *target, Origin::Inferred, Some(derivation))?;
        }
        Ok(rel)
    }

    /// Inserts an inferred `Has` link.
    pub(crate) fn infer_has(
        &mut self,
        source: FactId,
        class: ClassId,
        target: FactId,
        rule: Rule,
        premises: Vec<FactId>,
    ) -> Result<FactId> {
        self.validate_link(LinkKind::Has(class), source, target)?;
        let link_id = FactId(self.next_fact);
        let derivation = self.record_derivation(rule, premises, link_id);
        self.insert_link(LinkKind::Has(class), source, target, Origin::Inferred, Some(derivation))
    }

    /// Overlays an inferred value on an attribute. Returns whether the
    /// effective value changed.
    pub(crate) fn infer_value(
        &mut self,
        attr: FactId,
        value: Value,
        rule: Rule,
        premises: Vec<FactId>,
    ) -> Result<bool> {
        let inst = self.instance(attr)?;
        if self.meta_kind(inst.class) != MetaKind::Attribute {
            return Err(KbError::NotAnAttribute(attr));
        }
        if inst.effective_value() == Some(&value) {
            return Ok(false);
        }
        let derivation = self.record_derivation(rule, premises, attr);
        let inst = self.instances.get_mut(&attr).expect("checked above");
        inst.inferred_value = Some((value, derivation));
        Ok(true)
    }

    pub fn derivation(&self, id: DerivationId) -> Option<&Derivation> {
        self.derivations.get(&id)
    }

    pub fn derivations(&self) -> impl Iterator<Item = &Derivation> {
        self.derivations.values()
    }

    /// Derivation explaining a fact: the creating rule for inferred instances
    /// and links, or the inferred-value record for overlaid attributes.
    pub fn derivation_of(&self, fact: FactId) -> Option<&Derivation> {
        let id = if let Some(inst) = self.instances.get(&fact) {
            inst.derivation
                .or_else(|| inst.inferred_value.as_ref().map(|(_, d)| *d))
        } else {
            self.links.get(&fact).and_then(|l| l.derivation)
        };
        id.and_then(|d| self.derivations.get(&d))
    }
}
