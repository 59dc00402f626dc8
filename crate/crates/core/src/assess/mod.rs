//! Performance assessment: position-inaccuracy and quality metrics, and a
//! self-organizing map that predicts behavior success from recorded
//! conditions.

pub mod conditions;
pub mod experience;
pub mod metrics;
pub mod som;
mod words;

pub use conditions::{Conditions, ConditionsError};
pub use experience::{append_experience, parse_log, read_log, train_behavior, ExperienceError, ExperienceRecord};
pub use metrics::*;
pub use som::{train_som, Prediction, SomConfig, SomError, SomMap, SomNode};
pub use words::COMMON_WORDS;
