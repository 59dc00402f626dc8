//! Line-delimited log of behavior executions under recorded conditions.

use std::collections::BTreeMap;
use std::fs::OpenOptions;
use std::io::{self, Write};
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use super::som::{train_som, SomConfig, SomError, SomMap};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperienceRecord {
    pub behavior: String,
    /// Sorted by name, which fixes the feature order.
    pub features: BTreeMap<String, f64>,
    #[serde(serialize_with = "outcome_out", deserialize_with = "outcome_in")]
    pub outcome: bool,
}

fn outcome_out<S: Serializer>(v: &bool, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_u8(u8::from(*v))
}

fn outcome_in<'de, D: Deserializer<'de>>(d: D) -> Result<bool, D::Error> {
    match u8::deserialize(d)? {
        0 => Ok(false),
        1 => Ok(true),
        n => Err(serde::de::Error::custom(format!("outcome must be 0 or 1, got {n}"))),
    }
}

impl ExperienceRecord {
    pub fn feature_names(&self) -> Vec<String> {
        self.features.keys().cloned().collect()
    }

    pub fn feature_vector(&self) -> Vec<f64> {
        self.features.values().copied().collect()
    }
}

#[derive(Debug, Error)]
pub enum ExperienceError {
    #[error("log line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("record for `{behavior}` has features {found:?}, the log uses {expected:?}")]
    SchemaMismatch {
        behavior: String,
        expected: Vec<String>,
        found: Vec<String>,
    },
    #[error("record is not well-formed: {0}")]
    InvalidRecord(String),
    #[error("no records for behavior `{0}`")]
    NoRecords(String),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Som(#[from] SomError),
}

pub fn parse_log(text: &str) -> Result<Vec<ExperienceRecord>, ExperienceError> {
    let mut out: Vec<ExperienceRecord> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: ExperienceRecord = serde_json::from_str(line).map_err(|e| ExperienceError::Malformed {
            line: i + 1,
            message: e.to_string(),
        })?;
        check_record(&rec).map_err(|e| ExperienceError::Malformed {
            line: i + 1,
            message: e.to_string(),
        })?;
        check_schema(&out, &rec)?;
        out.push(rec);
    }
    Ok(out)
}

pub fn read_log(path: &Path) -> Result<Vec<ExperienceRecord>, ExperienceError> {
    match std::fs::read_to_string(path) {
        Ok(text) => parse_log(&text),
        Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(Vec::new()),
        Err(e) => Err(e.into()),
    }
}

fn check_record(rec: &ExperienceRecord) -> Result<(), ExperienceError> {
    if rec.behavior.is_empty() {
        return Err(ExperienceError::InvalidRecord("empty behavior name".into()));
    }
    if let Some((k, _)) = rec.features.iter().find(|(_, v)| !v.is_finite()) {
        return Err(ExperienceError::InvalidRecord(format!("feature `{k}` is not finite")));
    }
    Ok(())
}

fn check_schema(existing: &[ExperienceRecord], rec: &ExperienceRecord) -> Result<(), ExperienceError> {
    if let Some(first) = existing.iter().find(|r| r.behavior == rec.behavior) {
        if !first.features.keys().eq(rec.features.keys()) {
            return Err(ExperienceError::SchemaMismatch {
                behavior: rec.behavior.clone(),
                expected: first.feature_names(),
                found: rec.feature_names(),
            });
        }
    }
    Ok(())
}

/// Appends `record` durably and returns the number of records in the log.
pub fn append_experience(path: &Path, record: &ExperienceRecord) -> Result<usize, ExperienceError> {
    check_record(record)?;
    let existing = read_log(path)?;
    check_schema(&existing, record)?;
    let mut line = serde_json::to_string(record).map_err(io::Error::other)?;
    line.push('\n');
    let mut file = OpenOptions::new().create(true).append(true).open(path)?;
    file.write_all(line.as_bytes())?;
    file.sync_all()?;
    Ok(existing.len() + 1)
}

/// Trains a map on the records of one behavior.
pub fn train_behavior(
    records: &[ExperienceRecord],
    behavior: &str,
    config: SomConfig,
) -> Result<SomMap, ExperienceError> {
    let mine: Vec<&ExperienceRecord> = records.iter().filter(|r| r.behavior == behavior).collect();
    let first = mine.first().ok_or_else(|| ExperienceError::NoRecords(behavior.to_string()))?;
    let names = first.feature_names();
    let samples: Vec<(Vec<f64>, bool)> = mine.iter().map(|r| (r.feature_vector(), r.outcome)).collect();
    Ok(train_som(names, &samples, config)?)
}
