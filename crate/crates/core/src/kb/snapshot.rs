//! Serde form of the store. Indices are rebuilt and checked on load.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::{
    ConceptClass, Derivation, Instance, KbError, KnowledgeBase, Link, LinkKind, MetaKind,
    RoleDef,
};

const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Snapshot {
    version: u32,
    classes: Vec<ConceptClass>,
    roles: Vec<RoleDef>,
    instances: Vec<Instance>,
    links: Vec<Link>,
    derivations: Vec<Derivation>,
    next_fact: u64,
    next_derivation: u64,
    dirty: bool,
}

impl Serialize for KnowledgeBase {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        Snapshot {
            version: FORMAT_VERSION,
            classes: self.classes.clone(),
            roles: self.roles.clone(),
            instances: self.instances.values().cloned().collect(),
            links: self.links.values().cloned().collect(),
            derivations: self.derivations.values().cloned().collect(),
            next_fact: self.next_fact,
            next_derivation: self.next_derivation,
            dirty: self.dirty,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for KnowledgeBase {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let snap = Snapshot::deserialize(deserializer)?;
        KnowledgeBase::try_from(snap).map_err(serde::de::Error::custom)
    }
}

impl TryFrom<Snapshot> for KnowledgeBase {
    type Error = KbError;

    fn try_from(snap: Snapshot) -> Result<Self, KbError> {
        let bad = |m: String| KbError::CorruptSnapshot(m);
        if snap.version != FORMAT_VERSION {
            return Err(bad(format!("unsupported version {}", snap.version)));
        }
        for (i, kind) in MetaKind::ALL.iter().enumerate() {
            let c = snap.classes.get(i).ok_or_else(|| bad("missing root classes".into()))?;
            if c.name != kind.root_name() || c.parent.is_some() || c.meta_kind != *kind {
                return Err(bad(format!("class {i} is not the {kind} root")));
            }
        }
        let mut kb = KnowledgeBase {
            classes: snap.classes,
            class_index: HashMap::new(),
            roles: snap.roles,
            role_index: HashMap::new(),
            instances: BTreeMap::new(),
            links: BTreeMap::new(),
            outgoing: HashMap::new(),
            incoming: HashMap::new(),
            by_class: HashMap::new(),
            names: HashMap::new(),
            derivations: BTreeMap::new(),
            next_fact: snap.next_fact,
            next_derivation: snap.next_derivation,
            dirty: snap.dirty,
        };
        for (i, c) in kb.classes.iter().enumerate() {
            if let Some(p) = c.parent {
                // Parents precede children, which also rules out cycles.
                if p.index() >= i || kb.classes[p.index()].meta_kind != c.meta_kind {
                    return Err(bad(format!("class `{}` has an invalid parent", c.name)));
                }
            } else if i >= MetaKind::ALL.len() {
                return Err(bad(format!("class `{}` has no parent", c.name)));
            }
            if kb.class_index.insert(c.name.clone(), super::ClassId(i as u32)).is_some() {
                return Err(bad(format!("duplicate class `{}`", c.name)));
            }
        }
        for (i, r) in kb.roles.iter().enumerate() {
            if r.parent.is_some_and(|p| p.0 as usize >= i) {
                return Err(bad(format!("role `{}` has an invalid parent", r.name)));
            }
            if kb.role_index.insert(r.name.clone(), super::RoleId(i as u32)).is_some() {
                return Err(bad(format!("duplicate role `{}`", r.name)));
            }
        }
        for inst in snap.instances {
            if inst.id.0 >= kb.next_fact || inst.class.index() >= kb.classes.len() {
                return Err(bad(format!("instance {} out of range", inst.id)));
            }
            kb.check_value(inst.class, inst.value.as_ref())
                .map_err(|e| bad(format!("instance {}: {e}", inst.id)))?;
            if let Some(n) = &inst.name {
                if kb.names.insert(n.clone(), inst.id).is_some() {
                    return Err(bad(format!("duplicate name `{n}`")));
                }
            }
            kb.by_class.entry(inst.class).or_default().insert(inst.id);
            kb.instances.insert(inst.id, inst);
        }
        for link in snap.links {
            if link.id.0 >= kb.next_fact || kb.instances.contains_key(&link.id) {
                return Err(bad(format!("link {} out of range", link.id)));
            }
            kb.validate_link(link.kind, link.source, link.target)
                .map_err(|e| bad(format!("link {}: {e}", link.id)))?;
            if let LinkKind::Role(r) = link.kind {
                if r.0 as usize >= kb.roles.len() {
                    return Err(bad(format!("link {} has an unknown role", link.id)));
                }
            }
            kb.outgoing.entry(link.source).or_default().push(link.id);
            kb.incoming.entry(link.target).or_default().push(link.id);
            kb.links.insert(link.id, link);
        }
        for d in snap.derivations {
            if d.id.0 >= kb.next_derivation {
                return Err(bad(format!("derivation {} out of range", d.id.0)));
            }
            kb.derivations.insert(d.id, d);
        }
        Ok(kb)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kb::{ClassParent, FactId, Value};

    #[test]
    fn json_round_trip_preserves_store() {
        let mut kb = KnowledgeBase::new();
        kb.define_class("Thing", ClassParent::Root(MetaKind::Entity)).unwrap();
        kb.define_class("Size", ClassParent::Root(MetaKind::Attribute)).unwrap();
        kb.define_role("part", None).unwrap();
        let t = kb.assert_named_instance("t", kb.require_class("Thing").unwrap(), None).unwrap();
        let u = kb.assert_instance(kb.require_class("Thing").unwrap(), None).unwrap();
        let s = kb.assert_instance(kb.require_class("Size").unwrap(), Some(Value::Nan)).unwrap();
        kb.assert_has(t, "Size", s).unwrap();
        kb.assert_role(t, "part", u).unwrap();

        let text = serde_json::to_string(&kb).unwrap();
        let back: KnowledgeBase = serde_json::from_str(&text).unwrap();
        assert_eq!(back.lookup("t"), Some(t));
        assert_eq!(back.value(s), Some(&Value::Nan));
        assert_eq!(back.role_sources(u, "part").into_iter().collect::<Vec<FactId>>(), vec![t]);
        assert_eq!(serde_json::to_string(&back).unwrap(), text);
    }

    #[test]
    fn corrupt_snapshot_is_rejected() {
        let kb = KnowledgeBase::new();
        let mut json: serde_json::Value = serde_json::to_value(&kb).unwrap();
        json["classes"][0]["name"] = "Nope".into();
        assert!(serde_json::from_value::<KnowledgeBase>(json).is_err());
    }
}
