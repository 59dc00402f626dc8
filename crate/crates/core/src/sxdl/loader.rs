use std::collections::{BTreeMap, HashMap};

use serde::Serialize;
use thiserror::Error;

use super::ast::*;
use crate::kb::{FactId, KbError, KnowledgeBase, Value};
use crate::schema::vocab;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct LoadReport {
    pub classes_added: usize,
    pub instances_added: usize,
    pub links_added: usize,
    /// Global names bound by the document.
    pub bindings: BTreeMap<String, FactId>,
    /// Added instances per top-level category (components, creation kinds,
    /// requirement kinds, featurings, behaviors).
    pub categories: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LoadErrorKind {
    #[error(transparent)]
    Kb(#[from] KbError),
    #[error("unknown instance `{0}`")]
    UnknownInstance(String),
    #[error("effect class `{0}` is not a Creation")]
    EffectNotCreation(String),
    #[error("behavior `{0}` is already registered")]
    DuplicateBehavior(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{}:{}: {kind}", span.line, span.col)]
pub struct LoadError {
    pub span: Span,
    pub kind: LoadErrorKind,
}

const CATEGORIES: &[&str] = &[
    vocab::COMPONENT,
    vocab::DATA,
    vocab::RESOURCE,
    vocab::PHENOMENA,
    vocab::FR,
    vocab::NFR,
    vocab::ER,
    vocab::FEATURING,
    vocab::BEHAVIOR,
    vocab::PROCESSING_REQUIREMENT,
];

/// Asserts every declaration of `doc`. On error the KB is left unchanged.
pub fn load(doc: &Document, kb: &mut KnowledgeBase) -> Result<LoadReport, LoadError> {
    let mut work = kb.clone();
    let before = (work.class_count(), work.instance_count(), work.link_count(), work.next_fact_id().0);
    let mut loader = Loader {
        kb: &mut work,
        locals: HashMap::new(),
        bindings: BTreeMap::new(),
    };
    for st in &doc.statements {
        loader.statement(st)?;
    }
    let bindings = loader.bindings;
    let mut categories = BTreeMap::new();
    for inst in work.instances().filter(|i| i.id.0 >= before.3) {
        if let Some(cat) = CATEGORIES.iter().find(|c| work.descends_from(inst.class, c)) {
            *categories.entry(cat.to_string()).or_insert(0) += 1;
        }
    }
    let report = LoadReport {
        classes_added: work.class_count() - before.0,
        instances_added: work.instance_count() - before.1,
        links_added: work.link_count() - before.2,
        bindings,
        categories,
    };
    *kb = work;
    Ok(report)
}

struct Loader<'a> {
    kb: &'a mut KnowledgeBase,
    locals: HashMap<String, FactId>,
    bindings: BTreeMap<String, FactId>,
}

type Res<T> = Result<T, LoadError>;

fn at(span: Span) -> impl Fn(KbError) -> LoadError {
    move |e| LoadError {
        span,
        kind: LoadErrorKind::Kb(e),
    }
}

impl Loader<'_> {
    fn statement(&mut self, st: &Statement) -> Res<()> {
        match &st.kind {
            StatementKind::Class(c) => {
                self.kb
                    .ensure_class(&c.name.name, &c.parent.name)
                    .map_err(at(c.name.span))?;
            }
            StatementKind::Instance(i) => self.instance(i)?,
            StatementKind::Environment(decls) => {
                for i in decls {
                    self.instance(i)?;
                }
            }
            StatementKind::Link(l) => {
                let source = self.resolve(&l.source)?;
                let target = self.resolve(&l.target)?;
                match has_member_class(&l.member.name) {
                    Some(class) => self.kb.assert_has(source, class, target),
                    None => self.kb.assert_role(source, &l.member.name, target),
                }
                .map_err(at(l.member.span))?;
            }
            StatementKind::Behavior(b) => self.behavior(b)?,
        }
        Ok(())
    }

    fn resolve(&self, id: &Ident) -> Res<FactId> {
        let found = if is_local_name(&id.name) {
            self.locals.get(&id.name).copied()
        } else {
            self.kb.lookup(&id.name)
        };
        found.ok_or_else(|| LoadError {
            span: id.span,
            kind: LoadErrorKind::UnknownInstance(id.name.clone()),
        })
    }

    fn create(&mut self, name: Option<&Ident>, class: &Ident, value: Option<Value>) -> Res<FactId> {
        let cid = self.kb.require_class(&class.name).map_err(at(class.span))?;
        match name {
            Some(n) if is_local_name(&n.name) => {
                if self.locals.contains_key(&n.name) {
                    return Err(at(n.span)(KbError::DuplicateName(n.name.clone())));
                }
                let id = self.kb.assert_instance(cid, value).map_err(at(class.span))?;
                self.locals.insert(n.name.clone(), id);
                Ok(id)
            }
            Some(n) => {
                if self.kb.lookup(&n.name).is_some() {
                    return Err(at(n.span)(KbError::DuplicateName(n.name.clone())));
                }
                let id = self
                    .kb
                    .assert_named_instance(&n.name, cid, value)
                    .map_err(at(class.span))?;
                self.bindings.insert(n.name.clone(), id);
                Ok(id)
            }
            None => self.kb.assert_instance(cid, value).map_err(at(class.span)),
        }
    }

    fn instance(&mut self, decl: &InstanceDecl) -> Res<()> {
        let id = self.create(Some(&decl.name), &decl.class, decl.value.clone())?;
        self.members(id, &decl.members)
    }

    fn members(&mut self, owner: FactId, members: &[Member]) -> Res<()> {
        for m in members {
            match m {
                Member::Attr(a) => {
                    self.attribute(owner, a)?;
                }
                Member::Role(r) => {
                    let target = self.resolve(&r.target)?;
                    self.kb
                        .assert_role(owner, &r.role.name, target)
                        .map_err(at(r.role.span))?;
                }
            }
        }
        Ok(())
    }

    /// Creates the attribute and its nested members; links it to `owner`
    /// when one is given.
    fn attribute_node(&mut self, a: &AttrAssign) -> Res<FactId> {
        let id = self.create(a.name.as_ref(), &a.class, Some(a.value.clone()))?;
        self.members(id, &a.members)?;
        Ok(id)
    }

    fn attribute(&mut self, owner: FactId, a: &AttrAssign) -> Res<FactId> {
        let id = self.create(a.name.as_ref(), &a.class, Some(a.value.clone()))?;
        self.kb.assert_has(owner, &a.class.name, id).map_err(at(a.span))?;
        self.members(id, &a.members)?;
        Ok(id)
    }

    fn behavior(&mut self, b: &BehaviorDecl) -> Res<()> {
        let duplicate = self.kb.instances_of_named(vocab::BEHAVIOR).into_iter().any(|x| {
            self.kb
                .has(x, vocab::NAME)
                .into_iter()
                .any(|n| self.kb.value(n).and_then(Value::as_text) == Some(&b.name))
        });
        if duplicate {
            return Err(LoadError {
                span: b.span,
                kind: LoadErrorKind::DuplicateBehavior(b.name.clone()),
            });
        }
        let span_ident = |name: &str| Ident {
            name: name.to_string(),
            span: b.span,
        };
        let behavior = self.create(b.binding.as_ref(), &span_ident(vocab::BEHAVIOR), None)?;
        let name = self.create(None, &span_ident(vocab::NAME), Some(Value::text(&b.name)))?;
        self.kb.assert_has(behavior, vocab::NAME, name).map_err(at(b.span))?;
        for a in &b.attrs {
            self.attribute(behavior, a)?;
        }

        let effect_class = self.kb.require_class(&b.effect_class.name).map_err(at(b.effect_class.span))?;
        if !self.kb.descends_from(effect_class, vocab::CREATION) {
            return Err(LoadError {
                span: b.effect_class.span,
                kind: LoadErrorKind::EffectNotCreation(b.effect_class.name.clone()),
            });
        }
        let effect = self.create(None, &b.effect_class, None)?;
        let featuring = self.create(None, &span_ident(vocab::FEATURING), None)?;
        let e = at(b.span);
        self.kb.assert_role(effect, vocab::SUBJECT, featuring).map_err(&e)?;
        for a in &b.effect_attrs {
            let prop = self.attribute_node(a)?;
            self.kb.assert_role(prop, vocab::FEATURE, featuring).map_err(at(a.span))?;
        }
        let pc = self.create(None, &span_ident(vocab::PROCESSING_REQUIREMENT), None)?;
        self.kb.assert_role(pc, vocab::PETITIONER, behavior).map_err(&e)?;
        self.kb.assert_role(pc, vocab::EFFECT, effect).map_err(&e)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::new_kb;
    use crate::sxdl::{load_str, parse, SxdlError};

    #[test]
    fn counts_equal_kb_delta() {
        let mut kb = new_kb();
        let classes = kb.class_count();
        let report = load_str(
            r#"class CameraImage : Signal;
               instance d : CameraImage { hasFPS = 30; hasROStopic = "/image_raw"; }
               instance _f : Featuring {}
               link d.subject -> _f;"#,
            &mut kb,
        )
        .unwrap();
        assert_eq!(report.classes_added, 1);
        assert_eq!(kb.class_count(), classes + 1);
        assert_eq!(report.instances_added, 4);
        assert_eq!(report.links_added, 3);
        assert_eq!(report.bindings.keys().collect::<Vec<_>>(), ["d"]);
        assert_eq!(kb.instance_count(), 4);
        assert_eq!(kb.link_count(), 3);
        assert_eq!(report.categories.get("Data"), Some(&1));
    }

    #[test]
    fn unknown_class_leaves_kb_unchanged() {
        let mut kb = new_kb();
        load_str("instance a : Sensor {}", &mut kb).unwrap();
        let (i, l) = (kb.instance_count(), kb.link_count());
        let err = load_str("instance b : Sensor {} instance c : Camra {}", &mut kb).unwrap_err();
        match err {
            SxdlError::Load(LoadError {
                kind: LoadErrorKind::Kb(KbError::UnknownClass(c)),
                span,
            }) => {
                assert_eq!(c, "Camra");
                assert_eq!(span, Span { line: 1, col: 37 });
            }
            other => panic!("{other:?}"),
        }
        assert_eq!((kb.instance_count(), kb.link_count()), (i, l));
        assert!(kb.lookup("b").is_none());
    }

    #[test]
    fn arity_and_link_kind_violations() {
        let mut kb = new_kb();
        assert!(matches!(
            load_str("instance s : Sensor = 3 {}", &mut kb),
            Err(SxdlError::Load(LoadError { kind: LoadErrorKind::Kb(KbError::UnexpectedValue(_)), .. }))
        ));
        assert!(matches!(
            load_str("instance a : Sensor {} instance b : Sensor {} link a.hasFPS -> b;", &mut kb),
            Err(SxdlError::Load(LoadError { kind: LoadErrorKind::Kb(KbError::NotAnAttribute(_)), .. }))
        ));
        assert_eq!(kb.instance_count(), 0);
    }

    #[test]
    fn names_resolve_across_documents_but_locals_do_not() {
        let mut kb = new_kb();
        load_str("instance a : Sensor {} instance _x : Featuring {}", &mut kb).unwrap();
        load_str("instance b : Signal { role subject -> a; }", &mut kb).unwrap();
        let doc = parse("instance c : Signal { role subject -> _x; }").unwrap();
        assert!(matches!(
            load(&doc, &mut kb),
            Err(LoadError { kind: LoadErrorKind::UnknownInstance(_), .. })
        ));
    }

    #[test]
    fn behavior_expands_to_requirement() {
        let mut kb = new_kb();
        let text = r#"class DetectedVictim : Information;
            behavior "find people" { has Modality = "visual"; effect : DetectedVictim { has ROStopic = "/v"; } }"#;
        let report = load_str(text, &mut kb).unwrap();
        assert_eq!(report.categories.get("Behavior"), Some(&1));
        assert_eq!(report.categories.get("ProcessingRequirement"), Some(&1));
        let pc = kb.instances_of_named(vocab::PROCESSING_REQUIREMENT)[0];
        let effect = *kb.role_targets(pc, vocab::EFFECT).first().unwrap();
        assert!(kb.is_a(effect, "DetectedVictim"));
        assert!(matches!(
            load_str(r#"behavior "find people" { effect : DetectedVictim {} }"#, &mut kb),
            Err(SxdlError::Load(LoadError { kind: LoadErrorKind::DuplicateBehavior(_), .. }))
        ));
        assert!(matches!(
            load_str(r#"behavior other { effect : Sensor {} }"#, &mut kb),
            Err(SxdlError::Load(LoadError { kind: LoadErrorKind::EffectNotCreation(_), .. }))
        ));
    }
}
