//! Condition readings taken from an `.sxdl` environment snapshot.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::kb::Value;
use crate::schema::vocab;
use crate::sxdl::{self, Document, InstanceDecl, Member, ParseError, StatementKind};

pub const NOISE_DB: &str = "NoiseDb";
pub const VOICE_DB: &str = "VoiceDb";
pub const HUMAN_PROB: &str = "HumanProb";
pub const ROBOT_POS_ACCURACY: &str = "RobotPosAccuracy";
pub const TARGET_DISTANCE: &str = "TargetDistance";
pub const ROOM_WIDTH: &str = "RoomWidth";
pub const ROOM_LENGTH: &str = "RoomLength";
pub const BRIGHTNESS: &str = "Brightness";
pub const CONTRAST: &str = "Contrast";
pub const LIGHT_INTENSITY: &str = "LightIntensity";
pub const VISIBILITY: &str = "Visibility";

const PROBABILITIES: &[&str] = &[HUMAN_PROB, VISIBILITY];
const NON_NEGATIVE: &[&str] = &[
    ROBOT_POS_ACCURACY,
    TARGET_DISTANCE,
    ROOM_WIDTH,
    ROOM_LENGTH,
    LIGHT_INTENSITY,
];

/// Named condition readings, keyed by attribute class name.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Conditions {
    pub values: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConditionsError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("condition `{name}` = {value} is out of range")]
    OutOfRange { name: String, value: f64 },
    #[error("condition `{0}` is missing")]
    Missing(String),
}

impl Conditions {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, value: f64) -> Self {
        self.values.insert(name.to_string(), value);
        self
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.values.get(name).copied()
    }

    /// Numeric readings of every instance in the document: an attribute
    /// with a number, or with a nested `Exact` reading.
    pub fn from_document(doc: &Document) -> Result<Conditions, ConditionsError> {
        let mut c = Conditions::new();
        for st in &doc.statements {
            match &st.kind {
                StatementKind::Instance(i) => c.collect(i),
                StatementKind::Environment(decls) => decls.iter().for_each(|i| c.collect(i)),
                _ => {}
            }
        }
        c.validate()?;
        Ok(c)
    }

    pub fn parse_sxdl(text: &str) -> Result<Conditions, ConditionsError> {
        Self::from_document(&sxdl::parse(text)?)
    }

    fn collect(&mut self, decl: &InstanceDecl) {
        if let Some(Value::Number(n)) = decl.value {
            self.values.insert(decl.class.name.clone(), n);
        }
        for m in &decl.members {
            let Member::Attr(a) = m else { continue };
            let reading = match a.value {
                Value::Number(n) => Some(n),
                _ => a.members.iter().find_map(|m| match m {
                    Member::Attr(e) if e.class.name == vocab::EXACT => e.value.as_number(),
                    _ => None,
                }),
            };
            if let Some(n) = reading {
                self.values.insert(a.class.name.clone(), n);
            }
        }
    }

    pub fn validate(&self) -> Result<(), ConditionsError> {
        for (k, v) in &self.values {
            let bad = (PROBABILITIES.contains(&k.as_str()) && !(0.0..=1.0).contains(v))
                || (NON_NEGATIVE.contains(&k.as_str()) && *v < 0.0);
            if bad {
                return Err(ConditionsError::OutOfRange {
                    name: k.clone(),
                    value: *v,
                });
            }
        }
        Ok(())
    }

    /// Values in the order of `names`.
    pub fn vector(&self, names: &[String]) -> Result<Vec<f64>, ConditionsError> {
        names
            .iter()
            .map(|n| self.get(n).ok_or_else(|| ConditionsError::Missing(n.clone())))
            .collect()
    }
}
