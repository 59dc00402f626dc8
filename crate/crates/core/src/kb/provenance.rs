//! Derivation records for inferred facts.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::types::FactId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DerivationId(pub u64);

/// Name of the inference rule that produced a fact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Rule {
    #[serde(rename = "realize-data")]
    RealizeData,
    #[serde(rename = "realize-resource")]
    RealizeResource,
    #[serde(rename = "realize-phenomena")]
    RealizePhenomena,
    #[serde(rename = "infer-health")]
    InferHealth,
    #[serde(rename = "processing")]
    Processing,
    #[serde(rename = "processing-transitive")]
    ProcessingTransitive,
}

impl Rule {
    /// Evaluation order within one fixpoint round.
    pub const ALL: [Rule; 6] = [
        Rule::RealizeData,
        Rule::RealizeResource,
        Rule::RealizePhenomena,
        Rule::InferHealth,
        Rule::Processing,
        Rule::ProcessingTransitive,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Rule::RealizeData => "realize-data",
            Rule::RealizeResource => "realize-resource",
            Rule::RealizePhenomena => "realize-phenomena",
            Rule::InferHealth => "infer-health",
            Rule::Processing => "processing",
            Rule::ProcessingTransitive => "processing-transitive",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Derivation {
    pub id: DerivationId,
    pub rule: Rule,
    /// Facts the rule body matched, in the order the rule consumed them.
    pub premises: Vec<FactId>,
    pub conclusion: FactId,
}
