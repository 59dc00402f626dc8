//! Capability knowledge base for self-aware robotic components.
//!
//! A typed hypergraph store ([`kb`]) holds a component ontology ([`schema`])
//! populated from a small declarative language ([`sxdl`]). Forward-chaining
//! rules ([`inference`]) derive which creations are realized, which
//! components are healthy and which processing chains exist. [`mission`]
//! turns that into answers about feasible behaviors, ranked by success
//! predictions from [`assess`].

pub mod kb;
pub mod schema;
pub mod sxdl;
pub mod inference;
pub mod assess;
pub mod mission;
pub mod bundled;
