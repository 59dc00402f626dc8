use std::collections::{HashMap, HashSet};
use std::fmt::Write;

use super::ast::is_local_name;
use crate::kb::{FactId, Instance, KnowledgeBase, LinkKind, Origin, Value};
use crate::schema::BUILTIN_CLASSES;

pub const HEADER: &str = "// selfx knowledge base\n";

/// Canonical text of the asserted part of `kb`.
///
/// Unnamed attributes owned through a single link are nested under their
/// owner; every other unnamed instance gets a document-local `_N` label.
/// Role definitions outside the built-in vocabulary have no surface syntax
/// and are not emitted.
pub fn dump(kb: &KnowledgeBase) -> String {
    let mut out = String::from(HEADER);

    let builtin: HashSet<(&str, &str)> = BUILTIN_CLASSES.iter().copied().collect();
    let mut wrote_class = false;
    for (_, class) in kb.classes() {
        let Some(parent) = class.parent else { continue };
        let parent = kb.class_name(parent);
        if !builtin.contains(&(class.name.as_str(), parent)) {
            let _ = writeln!(out, "class {} : {};", class.name, parent);
            wrote_class = true;
        }
    }
    if wrote_class {
        out.push('\n');
    }

    let asserted: Vec<&Instance> = kb.instances().filter(|i| i.origin == Origin::Asserted).collect();
    let nested = nested_attributes(kb, &asserted);
    let labels: HashMap<FactId, String> = asserted
        .iter()
        .map(|i| (i.id, label(i)))
        .collect();

    let mut emitted: HashSet<FactId> = HashSet::new();
    let mut declared: HashSet<FactId> = HashSet::new();
    for inst in asserted.iter().filter(|i| !nested.contains(&i.id)) {
        let _ = write!(out, "instance {} : {}", labels[&inst.id], kb.class_name(inst.class));
        if let Some(v) = &inst.value {
            let _ = write!(out, " = {}", literal(v));
        }
        let mut body = String::new();
        members(kb, inst.id, &nested, &labels, &declared, &mut emitted, 1, &mut body);
        if body.is_empty() {
            out.push_str(" {}\n");
        } else {
            let _ = write!(out, " {{\n{body}}}\n");
        }
        declared.insert(inst.id);
    }

    let rest: Vec<String> = kb
        .links()
        .filter(|l| l.origin == Origin::Asserted && !emitted.contains(&l.id))
        .map(|l| {
            let member = match l.kind {
                LinkKind::Role(r) => kb.role(r).name.clone(),
                LinkKind::Has(c) => format!("has{}", kb.class_name(c)),
            };
            format!("link {}.{} -> {};\n", labels[&l.source], member, labels[&l.target])
        })
        .collect();
    if !rest.is_empty() {
        out.push('\n');
        for line in rest {
            out.push_str(&line);
        }
    }
    out
}

/// Unnamed attributes reachable only through one ownership link from an
/// older instance, whose own links are all nestable ownerships.
fn nested_attributes(kb: &KnowledgeBase, asserted: &[&Instance]) -> HashSet<FactId> {
    let mut nested = HashSet::new();
    for inst in asserted.iter().rev() {
        if inst.name.is_some() || inst.value.is_none() {
            continue;
        }
        let incoming: Vec<_> = kb.incoming(inst.id).filter(|l| l.origin == Origin::Asserted).collect();
        let single_owner = matches!(
            incoming.as_slice(),
            [l] if l.kind == LinkKind::Has(inst.class) && l.source < inst.id
        );
        let children_nested = kb
            .outgoing(inst.id)
            .filter(|l| l.origin == Origin::Asserted)
            .all(|l| matches!(l.kind, LinkKind::Has(_)) && nested.contains(&l.target));
        if single_owner && children_nested {
            nested.insert(inst.id);
        }
    }
    nested
}

#[allow(clippy::too_many_arguments)]
fn members(
    kb: &KnowledgeBase,
    owner: FactId,
    nested: &HashSet<FactId>,
    labels: &HashMap<FactId, String>,
    declared: &HashSet<FactId>,
    emitted: &mut HashSet<FactId>,
    depth: usize,
    out: &mut String,
) {
    let indent = "  ".repeat(depth);
    for l in kb.outgoing(owner).filter(|l| l.origin == Origin::Asserted) {
        match l.kind {
            LinkKind::Has(c) if nested.contains(&l.target) => {
                let value = kb
                    .get_instance(l.target)
                    .and_then(|i| i.value.as_ref())
                    .map(literal)
                    .unwrap_or_default();
                let _ = write!(out, "{indent}has {} = {value}", kb.class_name(c));
                let mut body = String::new();
                members(kb, l.target, nested, labels, declared, emitted, depth + 1, &mut body);
                if body.is_empty() {
                    out.push_str(";\n");
                } else {
                    let _ = write!(out, " {{\n{body}{indent}}}\n");
                }
            }
            LinkKind::Role(r) if declared.contains(&l.target) => {
                let _ = writeln!(out, "{indent}role {} -> {};", kb.role(r).name, labels[&l.target]);
            }
            _ => continue,
        }
        emitted.insert(l.id);
    }
}

fn label(inst: &Instance) -> String {
    match &inst.name {
        Some(n) if is_identifier(n) && !is_local_name(n) => n.clone(),
        _ => format!("_{}", inst.id.0),
    }
}

fn is_identifier(s: &str) -> bool {
    const RESERVED: &[&str] = &[
        "class", "instance", "has", "role", "link", "environment", "behavior", "effect", "true",
        "false", "nan",
    ];
    let mut chars = s.chars();
    chars.next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !RESERVED.contains(&s)
        && super::ast::has_member_class(s).is_none()
}

pub(crate) fn literal(v: &Value) -> String {
    match v {
        Value::Text(s) => {
            let mut q = String::with_capacity(s.len() + 2);
            q.push('"');
            for c in s.chars() {
                match c {
                    '"' => q.push_str("\\\""),
                    '\\' => q.push_str("\\\\"),
                    '\n' => q.push_str("\\n"),
                    '\t' => q.push_str("\\t"),
                    c => q.push(c),
                }
            }
            q.push('"');
            q
        }
        Value::Number(n) => format!("{n}"),
        Value::Bool(b) => b.to_string(),
        Value::Nan => "nan".into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::new_kb;
    use crate::sxdl::load_str;

    #[test]
    fn empty_kb_is_header_only() {
        assert_eq!(dump(&new_kb()), HEADER);
    }

    #[test]
    fn nested_and_linked_output() {
        let mut kb = new_kb();
        load_str(
            r#"class CameraImage : Signal;
               instance f : Featuring {}
               instance d : CameraImage { has FPS = 30 { has Min = 5; } role subject -> f; }
               instance _p : Power = "Watt" { has Min = 5; }
               link _p.feature -> f;
               link f.subject -> _p;"#,
            &mut kb,
        )
        .unwrap();
        let text = dump(&kb);
        let expected = format!(
            "{HEADER}class CameraImage : Signal;\n\n\
             instance f : Featuring {{}}\n\
             instance d : CameraImage {{\n  has FPS = 30 {{\n    has Min = 5;\n  }}\n  role subject -> f;\n}}\n\
             instance _8 : Power = \"Watt\" {{\n  has Min = 5;\n  role feature -> f;\n}}\n\n\
             link f.subject -> _8;\n"
        );
        assert_eq!(text, expected);
    }

    #[test]
    fn literals_escape_and_round_trip() {
        assert_eq!(literal(&Value::text("a\"b\\c\n")), r#""a\"b\\c\n""#);
        assert_eq!(literal(&Value::Number(0.1)), "0.1");
        assert_eq!(literal(&Value::Number(-2.5)), "-2.5");
        assert_eq!(literal(&Value::Nan), "nan");
    }
}
