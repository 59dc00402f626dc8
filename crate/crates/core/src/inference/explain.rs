use std::io::{self, Write};

use serde::Serialize;
use thiserror::Error;

use crate::kb::{FactId, KnowledgeBase, Rule};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExplainNode {
    pub fact: FactId,
    pub label: String,
    /// `None` for asserted leaves.
    pub rule: Option<Rule>,
    pub premises: Vec<ExplainNode>,
}

impl ExplainNode {
    pub fn is_leaf(&self) -> bool {
        self.rule.is_none()
    }

    /// Indented text rendering, one fact per line.
    pub fn render(&self) -> String {
        let mut out = String::new();
        self.render_into(0, &mut out);
        out
    }

    fn render_into(&self, depth: usize, out: &mut String) {
        out.push_str(&"  ".repeat(depth));
        match self.rule {
            Some(r) => out.push_str(&format!("{} {} <= {}\n", self.fact, self.label, r)),
            None => out.push_str(&format!("{} {} (asserted)\n", self.fact, self.label)),
        }
        for p in &self.premises {
            p.render_into(depth + 1, out);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExplainError {
    #[error("unknown fact {0}")]
    UnknownFact(FactId),
}

/// Derivation tree of `fact` down to asserted facts.
pub fn explain(kb: &KnowledgeBase, fact: FactId) -> Result<ExplainNode, ExplainError> {
    if !kb.contains_fact(fact) {
        return Err(ExplainError::UnknownFact(fact));
    }
    Ok(node(kb, fact))
}

fn node(kb: &KnowledgeBase, fact: FactId) -> ExplainNode {
    let label = match kb.link(fact) {
        Some(l) => format!("link {} -> {}", kb.label(l.source), kb.label(l.target)),
        None => kb.label(fact),
    };
    match kb.derivation_of(fact) {
        // Premises always predate their conclusion, so recursion terminates.
        Some(d) => ExplainNode {
            fact,
            label,
            rule: Some(d.rule),
            premises: d.premises.iter().filter(|p| **p < fact).map(|p| node(kb, *p)).collect(),
        },
        None => ExplainNode {
            fact,
            label,
            rule: None,
            premises: Vec::new(),
        },
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TraceRecord {
    pub rule_name: Rule,
    pub premise_ids: Vec<u64>,
    pub conclusion_id: u64,
}

/// Writes one JSON record per derivation, in derivation order.
pub fn trace_jsonl(kb: &KnowledgeBase, mut out: impl Write) -> io::Result<usize> {
    let mut n = 0;
    for d in kb.derivations() {
        let rec = TraceRecord {
            rule_name: d.rule,
            premise_ids: d.premises.iter().map(|p| p.0).collect(),
            conclusion_id: d.conclusion.0,
        };
        serde_json::to_writer(&mut out, &rec)?;
        out.write_all(b"\n")?;
        n += 1;
    }
    Ok(n)
}
