//! Forward-chaining fixpoint over the realizing, health and processing
//! rules.
//!
//! A run on a KB with pending assertions first drops every inferred fact
//! and then applies the rules round by round, in [`Rule::ALL`] order, until
//! a round concludes nothing new. A run on a clean KB re-applies the rules
//! without retracting, so it adds nothing.

pub mod constraints;
mod explain;
pub mod rules;

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use serde::Serialize;

pub use explain::{explain, trace_jsonl, ExplainError, ExplainNode, TraceRecord};

use crate::kb::{FactId, KbError, KnowledgeBase, Rule};
use crate::schema::{self, vocab};
use constraints::{amounts_of, committed_amount, constraints_of};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixpointStats {
    pub rounds: usize,
    /// Conclusions recorded per rule over the whole run.
    pub facts_added: BTreeMap<Rule, usize>,
    /// Inferred facts dropped before the first round.
    pub retracted: usize,
    #[serde(serialize_with = "secs")]
    pub wall_time: Duration,
}

fn secs<S: serde::Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_secs_f64())
}

impl FixpointStats {
    pub fn total_added(&self) -> usize {
        self.facts_added.values().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LedgerEntry {
    pub provider: FactId,
    pub requesters: Vec<FactId>,
    pub committed_throughput: f64,
    pub throughput: Option<f64>,
    pub capacity: Option<f64>,
    pub remaining_time: Option<f64>,
}

impl LedgerEntry {
    pub fn over_committed(&self) -> bool {
        self.throughput.is_some_and(|t| self.committed_throughput > t)
    }
}

/// Throughput and capacity bookkeeping for realized resources.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ResourceLedger {
    pub entries: Vec<LedgerEntry>,
}

/// Capacity divided by throughput; `None` without a positive throughput.
pub fn remaining_time(capacity: f64, throughput: f64) -> Option<f64> {
    (throughput > 0.0).then(|| capacity / throughput)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: &'static str,
    pub subject: FactId,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InferenceReport {
    pub stats: FixpointStats,
    pub ledger: ResourceLedger,
    pub diagnostics: Vec<Diagnostic>,
}

pub fn apply_rule(kb: &mut KnowledgeBase, rule: Rule) -> Result<usize, KbError> {
    match rule {
        Rule::RealizeData => rules::realize_data(kb),
        Rule::RealizeResource => rules::realize_resource(kb),
        Rule::RealizePhenomena => rules::realize_phenomena(kb),
        Rule::InferHealth => rules::infer_health(kb),
        Rule::Processing => rules::infer_processing(kb),
        Rule::ProcessingTransitive => rules::infer_transitive(kb),
    }
}

/// Runs the rules to a fixpoint. Requires the built-in schema.
pub fn infer_to_fixpoint(kb: &mut KnowledgeBase) -> Result<InferenceReport, KbError> {
    let start = Instant::now();
    let mut retracted = 0;
    if kb.is_dirty() {
        kb.advance_pins();
        retracted = kb.retract_inferred();
    }
    let mut facts_added: BTreeMap<Rule, usize> = Rule::ALL.iter().map(|r| (*r, 0)).collect();
    let mut rounds = 0;
    loop {
        rounds += 1;
        let mut round_added = 0;
        for rule in Rule::ALL {
            let n = apply_rule(kb, rule)?;
            *facts_added.entry(rule).or_default() += n;
            round_added += n;
        }
        if round_added == 0 {
            break;
        }
    }
    kb.mark_clean();
    let ledger = resource_ledger(kb);
    let mut diagnostics = Vec::new();
    for e in ledger.entries.iter().filter(|e| e.over_committed()) {
        diagnostics.push(Diagnostic {
            severity: Severity::Warning,
            code: "ledger-overcommit",
            subject: e.provider,
            message: format!(
                "{} is committed {} but provides {}",
                kb.label(e.provider),
                e.committed_throughput,
                e.throughput.unwrap_or_default()
            ),
        });
    }
    for f in dangling_featurings(kb) {
        diagnostics.push(Diagnostic {
            severity: Severity::Warning,
            code: "dangling-featuring",
            subject: f,
            message: format!("{} is not called by any requirement or behavior", kb.label(f)),
        });
    }
    for d in &diagnostics {
        log::warn!("{}: {}", d.code, d.message);
    }
    let stats = FixpointStats {
        rounds,
        facts_added,
        retracted,
        wall_time: start.elapsed(),
    };
    log::debug!("fixpoint after {} rounds, {} facts", stats.rounds, stats.total_added());
    Ok(InferenceReport {
        stats,
        ledger,
        diagnostics,
    })
}

/// Featurings neither called by a Require nor featuring a behavior effect.
pub fn dangling_featurings(kb: &KnowledgeBase) -> Vec<FactId> {
    let called: BTreeSet<FactId> = kb
        .instances_of_named(vocab::REQUIRE)
        .into_iter()
        .flat_map(|r| schema::calls_of(kb, r).into_iter().map(|(_, f)| f))
        .collect();
    let effects: BTreeSet<FactId> = kb
        .instances_of_named(vocab::PROCESSING_REQUIREMENT)
        .into_iter()
        .flat_map(|pc| kb.role_targets(pc, vocab::EFFECT))
        .flat_map(|e| schema::featurings_of(kb, e))
        .collect();
    kb.instances_of_named(vocab::FEATURING)
        .into_iter()
        .filter(|f| !called.contains(f) && !effects.contains(f))
        .collect()
}

/// Ledger of every resource that provides for at least one requester.
pub fn resource_ledger(kb: &KnowledgeBase) -> ResourceLedger {
    let mut by_provider: BTreeMap<FactId, Vec<FactId>> = BTreeMap::new();
    for (req, prov) in rules::realized_pairs(kb).into_keys() {
        if kb.is_a(prov, vocab::RESOURCE) {
            by_provider.entry(prov).or_default().push(req);
        }
    }
    let first_amount = |p: FactId, class: &str| {
        kb.has(p, class).into_iter().flat_map(|a| amounts_of(kb, a)).next()
    };
    let entries = by_provider
        .into_iter()
        .map(|(provider, requesters)| {
            let committed_throughput = requesters
                .iter()
                .flat_map(|r| rules::requested_properties(kb, *r))
                .filter(|q| kb.is_a(*q, vocab::THROUGHPUT))
                .filter_map(|q| committed_amount(&constraints_of(kb, q)))
                .sum();
            let throughput = first_amount(provider, vocab::THROUGHPUT);
            let capacity = first_amount(provider, vocab::CAPACITY);
            LedgerEntry {
                provider,
                requesters,
                committed_throughput,
                throughput,
                capacity,
                remaining_time: capacity.zip(throughput).and_then(|(c, t)| remaining_time(c, t)),
            }
        })
        .collect();
    ResourceLedger { entries }
}

/// Inferred or asserted Processing relations, optionally restricted to
/// outputs of `output_class` (subclass-aware).
pub fn processings_with_output(kb: &KnowledgeBase, output_class: Option<&str>) -> Vec<rules::ProcessingView> {
    rules::processings(kb)
        .into_iter()
        .filter(|p| match output_class {
            None => true,
            Some(c) => p.output.is_some_and(|o| kb.is_a(o, c)),
        })
        .collect()
}
