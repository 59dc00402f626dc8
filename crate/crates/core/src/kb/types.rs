//! Value and identity types of the hypergraph store.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::provenance::DerivationId;

/// The three meta-concepts every class ultimately refines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MetaKind {
    Entity,
    Relation,
    Attribute,
}

impl MetaKind {
    pub const ALL: [MetaKind; 3] = [MetaKind::Entity, MetaKind::Relation, MetaKind::Attribute];

    pub fn root_name(self) -> &'static str {
        match self {
            MetaKind::Entity => "Entity",
            MetaKind::Relation => "Relation",
            MetaKind::Attribute => "Attribute",
        }
    }
}

impl fmt::Display for MetaKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.root_name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ClassId(pub(crate) u32);

impl ClassId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RoleId(pub(crate) u32);

/// Identifier shared by instances and links; allocated from one counter so a
/// fact id names exactly one stored fact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FactId(pub u64);

impl fmt::Display for FactId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

impl std::str::FromStr for FactId {
    type Err = std::num::ParseIntError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.trim_start_matches('#').parse().map(FactId)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConceptClass {
    pub name: String,
    pub parent: Option<ClassId>,
    pub meta_kind: MetaKind,
}

/// Where a class definition attaches: directly under a meta-kind root, or
/// under a named parent class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassParent<'a> {
    Root(MetaKind),
    Class(&'a str),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoleDef {
    pub name: String,
    pub parent: Option<RoleId>,
}

/// Scalar carried by attribute instances.
///
/// `Nan` is the "unknown" marker (e.g. a quality that has not been measured
/// yet); it is never the result of arithmetic and `Number` is always finite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "value", rename_all = "lowercase")]
pub enum Value {
    Text(String),
    Number(f64),
    Bool(bool),
    Nan,
}

impl Value {
    pub fn text(s: impl Into<String>) -> Self {
        Value::Text(s.into())
    }

    pub fn as_number(&self) -> Option<f64> {
        match self {
            Value::Number(n) => Some(*n),
            _ => None,
        }
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            Value::Text(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn is_nan(&self) -> bool {
        matches!(self, Value::Nan)
    }

    pub(crate) fn is_well_formed(&self) -> bool {
        match self {
            Value::Number(n) => n.is_finite(),
            _ => true,
        }
    }
}

impl From<f64> for Value {
    /// Non-finite input maps to the `Nan` marker.
    fn from(n: f64) -> Self {
        if n.is_finite() {
            Value::Number(n)
        } else {
            Value::Nan
        }
    }
}

impl From<bool> for Value {
    fn from(b: bool) -> Self {
        Value::Bool(b)
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Text(s.to_string())
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Text(s) => write!(f, "{s:?}"),
            Value::Number(n) => write!(f, "{n}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Nan => f.write_str("nan"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    Asserted,
    Inferred,
}

/// Pin status of an attribute value set through
/// [`KnowledgeBase::set_attribute_value`](super::KnowledgeBase::set_attribute_value).
///
/// A pinned value overrides inference for the next recompute of the KB;
/// the following recompute drops the pin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pin {
    #[default]
    None,
    Pending,
    Spent,
}

impl Pin {
    pub fn is_pinned(self) -> bool {
        !matches!(self, Pin::None)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub id: FactId,
    pub class: ClassId,
    pub name: Option<String>,
    /// Asserted value; present iff the class is an attribute.
    pub value: Option<Value>,
    /// Value concluded by inference, shadowing `value` until retracted.
    pub inferred_value: Option<(Value, DerivationId)>,
    pub pin: Pin,
    pub origin: Origin,
    pub derivation: Option<DerivationId>,
}

impl Instance {
    /// The value seen by queries: an inferred overlay wins over the asserted one.
    pub fn effective_value(&self) -> Option<&Value> {
        self.inferred_value
            .as_ref()
            .map(|(v, _)| v)
            .or(self.value.as_ref())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LinkKind {
    Role(RoleId),
    /// Ownership of an attribute; the class is the attribute class named by
    /// the link (e.g. `hasFPS`), an ancestor-or-self of the target's class.
    Has(ClassId),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Link {
    pub id: FactId,
    pub kind: LinkKind,
    pub source: FactId,
    pub target: FactId,
    pub origin: Origin,
    pub derivation: Option<DerivationId>,
}
