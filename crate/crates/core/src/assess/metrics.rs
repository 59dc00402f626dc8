//! Position-inaccuracy and quality metrics.

use thiserror::Error;

use super::words::COMMON_WORDS;

/// Localization accuracy of the robot itself, in meters.
pub const DEFAULT_ROBOT_POS_ACCURACY: f64 = 0.25;
/// Expected level of a human voice, in dB.
pub const DEFAULT_VOICE_DB: f64 = 70.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("{name} must be a non-negative finite number, got {value}")]
    OutOfDomain { name: &'static str, value: f64 },
    #[error("image has no pixels")]
    EmptyImage,
    #[error("image row {row} has {found} pixels, expected {expected}")]
    RaggedImage { row: usize, found: usize, expected: usize },
}

fn non_negative(name: &'static str, value: f64) -> Result<f64, MetricError> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(MetricError::OutOfDomain { name, value })
    }
}

/// `δ + √d` for a target seen at distance `d` by a robot localized to `δ`.
pub fn visual_position_inaccuracy(delta: f64, distance: f64) -> Result<f64, MetricError> {
    Ok(non_negative("delta", delta)? + non_negative("distance", distance)?.sqrt())
}

/// Half the room diagonal.
pub fn acoustic_position_inaccuracy(width: f64, length: f64) -> Result<f64, MetricError> {
    let (w, l) = (non_negative("width", width)?, non_negative("length", length)?);
    Ok(w.hypot(l) / 2.0)
}

/// Voice level over background noise, in dB; negative when noise dominates.
pub fn acoustic_quality_margin(noise_db: f64, voice_db: f64) -> f64 {
    voice_db - noise_db
}

fn normalize_token(token: &str) -> String {
    token
        .chars()
        .filter(|c| c.is_alphanumeric() || *c == '\'')
        .flat_map(char::to_lowercase)
        .collect()
}

/// Share of the transcript's words that are common English words. An empty
/// transcript scores 0.
pub fn human_reply_probability(transcript: &str) -> f64 {
    let tokens: Vec<String> = transcript
        .split_whitespace()
        .map(normalize_token)
        .filter(|t| !t.is_empty())
        .collect();
    if tokens.is_empty() {
        return 0.0;
    }
    let known = tokens
        .iter()
        .filter(|t| COMMON_WORDS.binary_search(&t.as_str()).is_ok())
        .count();
    (known as f64 / tokens.len() as f64).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImageQuality {
    pub brightness: f64,
    /// Population standard deviation of the pixel values.
    pub contrast: f64,
}

/// Brightness and contrast of a grayscale image given row by row.
pub fn image_quality<R: AsRef<[f64]>>(rows: &[R]) -> Result<ImageQuality, MetricError> {
    let width = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
    if width == 0 {
        return Err(MetricError::EmptyImage);
    }
    for (i, r) in rows.iter().enumerate() {
        if r.as_ref().len() != width {
            return Err(MetricError::RaggedImage {
                row: i,
                found: r.as_ref().len(),
                expected: width,
            });
        }
    }
    let n = (rows.len() * width) as f64;
    let pixels = || rows.iter().flat_map(|r| r.as_ref().iter().copied());
    let mean = pixels().sum::<f64>() / n;
    let var = pixels().map(|p| (p - mean) * (p - mean)).sum::<f64>() / n;
    Ok(ImageQuality {
        brightness: mean,
        contrast: var.sqrt(),
    })
}
