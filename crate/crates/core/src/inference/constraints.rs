//! Numeric constraint semantics shared by the realizing rules and effect
//! matching: `Exact` within 1e-9, `Min`/`Max` inclusive.

use crate::kb::{FactId, KnowledgeBase, Value};
use crate::schema::vocab;

pub const EXACT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Constraint {
    Min(f64),
    Max(f64),
    Exact(f64),
}

impl Constraint {
    pub fn holds(self, amount: f64) -> bool {
        match self {
            Constraint::Min(b) => amount >= b,
            Constraint::Max(b) => amount <= b,
            Constraint::Exact(b) => (amount - b).abs() <= EXACT_TOLERANCE,
        }
    }
}

/// True when some amount satisfies every constraint. No constraints means
/// nothing to satisfy.
pub fn satisfied(constraints: &[Constraint], amounts: &[f64]) -> bool {
    constraints.is_empty() || amounts.iter().any(|a| constraints.iter().all(|c| c.holds(*a)))
}

/// Constraints a featured property imposes: its `Range` children, plus its
/// own numeric value as an exact bound. An own `nan` value leaves the amount
/// open; a `nan` range bound can never be met.
pub fn constraints_of(kb: &KnowledgeBase, prop: FactId) -> Vec<Constraint> {
    let mut out = Vec::new();
    if let Some(Value::Number(n)) = kb.value(prop) {
        out.push(Constraint::Exact(*n));
    }
    for r in kb.has(prop, vocab::RANGE) {
        let bound = match kb.value(r) {
            Some(Value::Number(n)) => *n,
            Some(Value::Nan) => f64::NAN,
            _ => continue,
        };
        if kb.is_a(r, vocab::MIN) {
            out.push(Constraint::Min(bound));
        } else if kb.is_a(r, vocab::MAX) {
            out.push(Constraint::Max(bound));
        } else if kb.is_a(r, vocab::EXACT) {
            out.push(Constraint::Exact(bound));
        }
    }
    out
}

/// Amounts a provided attribute offers: its own numeric value and its
/// `Exact` children.
pub fn amounts_of(kb: &KnowledgeBase, attr: FactId) -> Vec<f64> {
    let mut out: Vec<f64> = kb.value(attr).and_then(Value::as_number).into_iter().collect();
    out.extend(kb.has(attr, vocab::EXACT).into_iter().filter_map(|e| kb.value(e).and_then(Value::as_number)));
    out
}

/// The single figure a featured throughput commits: its exact amount, or
/// the largest minimum.
pub fn committed_amount(constraints: &[Constraint]) -> Option<f64> {
    constraints
        .iter()
        .find_map(|c| match c {
            Constraint::Exact(b) if b.is_finite() => Some(*b),
            _ => None,
        })
        .or_else(|| {
            constraints
                .iter()
                .filter_map(|c| match c {
                    Constraint::Min(b) if b.is_finite() => Some(*b),
                    _ => None,
                })
                .reduce(f64::max)
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inclusive_bounds_and_tolerance() {
        assert!(Constraint::Min(30.0).holds(30.0));
        assert!(!Constraint::Min(30.0).holds(20.0));
        assert!(Constraint::Max(700.0).holds(700.0));
        assert!(Constraint::Exact(5.0).holds(5.0 + 5e-10));
        assert!(!Constraint::Exact(5.0).holds(5.0 + 2e-9));
        assert!(!Constraint::Exact(f64::NAN).holds(1.0));
    }

    #[test]
    fn conjunction_needs_one_amount() {
        let window = [Constraint::Min(400.0), Constraint::Max(700.0)];
        assert!(satisfied(&window, &[100.0, 550.0]));
        assert!(!satisfied(&window, &[100.0, 800.0]));
        assert!(!satisfied(&window, &[]));
        assert!(satisfied(&[], &[]));
    }

    #[test]
    fn commitment_prefers_exact() {
        assert_eq!(committed_amount(&[Constraint::Min(3.0), Constraint::Exact(4.0)]), Some(4.0));
        assert_eq!(committed_amount(&[Constraint::Min(3.0), Constraint::Min(5.0)]), Some(5.0));
        assert_eq!(committed_amount(&[Constraint::Max(3.0)]), None);
    }
}
