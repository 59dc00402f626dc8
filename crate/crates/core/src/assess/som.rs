//! Self-organizing map over z-scored condition vectors. Each node keeps the
//! mean outcome of the training records it is the best match for.

use std::fmt::Write;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

const FORMAT_HEADER: &str = "selfx-som 1";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SomConfig {
    pub seed: u64,
    pub rows: usize,
    pub cols: usize,
    pub epochs: usize,
    pub initial_learning_rate: f64,
    pub final_learning_rate: f64,
    /// Defaults to half the larger grid side.
    pub initial_radius: Option<f64>,
    pub final_radius: f64,
}

impl Default for SomConfig {
    fn default() -> Self {
        SomConfig {
            seed: 0,
            rows: 4,
            cols: 4,
            epochs: 200,
            initial_learning_rate: 0.5,
            final_learning_rate: 0.01,
            initial_radius: None,
            final_radius: 0.5,
        }
    }
}

impl SomConfig {
    fn radius0(&self) -> f64 {
        self.initial_radius
            .unwrap_or(self.rows.max(self.cols) as f64 / 2.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SomNode {
    pub prototype: Vec<f64>,
    pub member_count: usize,
    /// Present iff `member_count > 0`.
    pub outcome_mean: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SomMap {
    pub config: SomConfig,
    pub feature_names: Vec<String>,
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
    /// Row-major.
    pub nodes: Vec<SomNode>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Prediction {
    pub p_success: f64,
    pub bmu: (usize, usize),
    /// Node whose outcome mean was returned; differs from `bmu` when the
    /// best match has no members.
    pub node: (usize, usize),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SomError {
    #[error("no training records")]
    Empty,
    #[error("record {index} has {found} features, expected {expected}")]
    Ragged { index: usize, found: usize, expected: usize },
    #[error("query has {found} features, map expects {expected}")]
    DimensionMismatch { found: usize, expected: usize },
    #[error("feature values must be finite")]
    NonFinite,
    #[error("grid must have at least one node and training at least one epoch")]
    EmptyGrid,
    #[error("map has no node with members")]
    NoMembers,
    #[error("map file line {line}: {message}")]
    Format { line: usize, message: String },
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Index of the nearest prototype among `candidates`; ties go to the lowest
/// index.
fn nearest<'a>(nodes: impl Iterator<Item = (usize, &'a SomNode)>, x: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, n) in nodes {
        let d = sq_dist(&n.prototype, x);
        if best.is_none_or(|(_, bd)| d < bd) {
            best = Some((i, d));
        }
    }
    best.map(|(i, _)| i)
}

/// Trains a map on `samples` of `(features, outcome)`. Deterministic for a
/// given `config.seed`.
pub fn train_som(
    feature_names: Vec<String>,
    samples: &[(Vec<f64>, bool)],
    config: SomConfig,
) -> Result<SomMap, SomError> {
    if samples.is_empty() {
        return Err(SomError::Empty);
    }
    if config.rows == 0 || config.cols == 0 || config.epochs == 0 {
        return Err(SomError::EmptyGrid);
    }
    let dim = feature_names.len();
    for (index, (f, _)) in samples.iter().enumerate() {
        if f.len() != dim {
            return Err(SomError::Ragged {
                index,
                found: f.len(),
                expected: dim,
            });
        }
        if f.iter().any(|v| !v.is_finite()) {
            return Err(SomError::NonFinite);
        }
    }

    let n = samples.len() as f64;
    let means: Vec<f64> = (0..dim)
        .map(|j| samples.iter().map(|(f, _)| f[j]).sum::<f64>() / n)
        .collect();
    let stds: Vec<f64> = (0..dim)
        .map(|j| {
            let var = samples.iter().map(|(f, _)| (f[j] - means[j]).powi(2)).sum::<f64>() / n;
            if var > 0.0 {
                var.sqrt()
            } else {
                1.0
            }
        })
        .collect();
    let data: Vec<Vec<f64>> = samples
        .iter()
        .map(|(f, _)| (0..dim).map(|j| (f[j] - means[j]) / stds[j]).collect())
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut nodes: Vec<SomNode> = (0..config.rows * config.cols)
        .map(|_| SomNode {
            prototype: (0..dim).map(|_| rng.gen_range(-1.0..=1.0)).collect(),
            member_count: 0,
            outcome_mean: None,
        })
        .collect();

    let total = config.epochs * data.len();
    let (lr0, lr1) = (config.initial_learning_rate, config.final_learning_rate);
    let (r0, r1) = (config.radius0(), config.final_radius);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut step = 0usize;
    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            let frac = if total > 1 { step as f64 / (total - 1) as f64 } else { 0.0 };
            let lr = lr0 + (lr1 - lr0) * frac;
            let radius = r0 + (r1 - r0) * frac;
            let x = &data[i];
            let bmu = nearest(nodes.iter().enumerate(), x).expect("grid is non-empty");
            let (br, bc) = (bmu / config.cols, bmu % config.cols);
            for (k, node) in nodes.iter_mut().enumerate() {
                let (r, c) = (k / config.cols, k % config.cols);
                let g2 = (r as f64 - br as f64).powi(2) + (c as f64 - bc as f64).powi(2);
                let h = (-g2 / (2.0 * radius * radius)).exp();
                for (w, xv) in node.prototype.iter_mut().zip(x) {
                    *w += lr * h * (xv - *w);
                }
            }
            step += 1;
        }
    }

    let mut wins = vec![0usize; nodes.len()];
    for (x, (_, outcome)) in data.iter().zip(samples) {
        let bmu = nearest(nodes.iter().enumerate(), x).expect("grid is non-empty");
        nodes[bmu].member_count += 1;
        wins[bmu] += usize::from(*outcome);
    }
    for (node, w) in nodes.iter_mut().zip(wins) {
        node.outcome_mean = (node.member_count > 0).then(|| w as f64 / node.member_count as f64);
    }

    Ok(SomMap {
        config,
        feature_names,
        means,
        stds,
        nodes,
    })
}

impl SomMap {
    pub fn dimension(&self) -> usize {
        self.feature_names.len()
    }

    pub fn node(&self, row: usize, col: usize) -> &SomNode {
        &self.nodes[row * self.config.cols + col]
    }

    fn position(&self, index: usize) -> (usize, usize) {
        (index / self.config.cols, index % self.config.cols)
    }

    pub fn normalize(&self, features: &[f64]) -> Vec<f64> {
        features
            .iter()
            .zip(self.means.iter().zip(&self.stds))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }

    /// Index of the best-matching unit for an already normalized vector.
    pub fn bmu_index(&self, normalized: &[f64]) -> usize {
        nearest(self.nodes.iter().enumerate(), normalized).expect("grid is non-empty")
    }

    pub fn predict(&self, features: &[f64]) -> Result<Prediction, SomError> {
        if features.len() != self.dimension() {
            return Err(SomError::DimensionMismatch {
                found: features.len(),
                expected: self.dimension(),
            });
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(SomError::NonFinite);
        }
        let x = self.normalize(features);
        let bmu = self.bmu_index(&x);
        let used = if self.nodes[bmu].outcome_mean.is_some() {
            bmu
        } else {
            nearest(
                self.nodes.iter().enumerate().filter(|(_, n)| n.outcome_mean.is_some()),
                &x,
            )
            .ok_or(SomError::NoMembers)?
        };
        Ok(Prediction {
            p_success: self.nodes[used].outcome_mean.expect("chosen node has members"),
            bmu: self.position(bmu),
            node: self.position(used),
        })
    }

    /// Versioned text form; floats use shortest round-trip notation.
    pub fn to_text(&self) -> String {
        let c = &self.config;
        let mut out = String::new();
        let _ = writeln!(out, "{FORMAT_HEADER}");
        let _ = writeln!(out, "seed {}", c.seed);
        let _ = writeln!(out, "grid {} {}", c.rows, c.cols);
        let _ = writeln!(out, "epochs {}", c.epochs);
        let _ = writeln!(out, "learning_rate {} {}", c.initial_learning_rate, c.final_learning_rate);
        let _ = writeln!(out, "radius {} {}", c.radius0(), c.final_radius);
        let _ = writeln!(out, "features {}", self.dimension());
        for ((name, m), s) in self.feature_names.iter().zip(&self.means).zip(&self.stds) {
            let quoted = serde_json::to_string(name).expect("strings serialize");
            let _ = writeln!(out, "feature {m} {s} {quoted}");
        }
        for (i, n) in self.nodes.iter().enumerate() {
            let (r, col) = self.position(i);
            let mean = n.outcome_mean.map_or("-".to_string(), |m| m.to_string());
            let _ = write!(out, "node {r} {col} {} {mean}", n.member_count);
            for p in &n.prototype {
                let _ = write!(out, " {p}");
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<SomMap, SomError> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let bad = |line: usize, message: &str| SomError::Format {
            line,
            message: message.to_string(),
        };
        let mut next = |key: &str| -> Result<(usize, Vec<String>), SomError> {
            let (n, l) = lines.next().ok_or_else(|| bad(0, "unexpected end of file"))?;
            let mut parts = l.splitn(2, ' ');
            if parts.next() != Some(key) {
                return Err(bad(n, &format!("expected `{key}`")));
            }
            let rest = parts.next().unwrap_or_default();
            let fields = if key == "feature" {
                let mut f: Vec<String> = rest.splitn(3, ' ').map(str::to_string).collect();
                if f.len() != 3 {
                    return Err(bad(n, "malformed feature"));
                }
                f[2] = serde_json::from_str::<String>(&f[2]).map_err(|_| bad(n, "malformed feature name"))?;
                f
            } else {
                rest.split_whitespace().map(str::to_string).collect()
            };
            Ok((n, fields))
        };
        fn num<T: std::str::FromStr>(line: usize, s: &str) -> Result<T, SomError> {
            s.parse().map_err(|_| SomError::Format {
                line,
                message: format!("malformed number `{s}`"),
            })
        }

        let (n, version) = next("selfx-som")?;
        if version != ["1"] {
            return Err(bad(n, "unsupported version"));
        }
        let (n, f) = next("seed")?;
        let seed = num(n, f.first().map_or("", |s| s))?;
        let (n, f) = next("grid")?;
        if f.len() != 2 {
            return Err(bad(n, "expected rows and cols"));
        }
        let (rows, cols): (usize, usize) = (num(n, &f[0])?, num(n, &f[1])?);
        let (n, f) = next("epochs")?;
        let epochs = num(n, f.first().map_or("", |s| s))?;
        let (n, f) = next("learning_rate")?;
        if f.len() != 2 {
            return Err(bad(n, "expected two rates"));
        }
        let (lr0, lr1) = (num(n, &f[0])?, num(n, &f[1])?);
        let (n, f) = next("radius")?;
        if f.len() != 2 {
            return Err(bad(n, "expected two radii"));
        }
        let (r0, r1) = (num(n, &f[0])?, num(n, &f[1])?);
        let (n, f) = next("features")?;
        let dim: usize = num(n, f.first().map_or("", |s| s))?;
        let mut feature_names = Vec::with_capacity(dim);
        let mut means = Vec::with_capacity(dim);
        let mut stds = Vec::with_capacity(dim);
        for _ in 0..dim {
            let (n, f) = next("feature")?;
            means.push(num(n, &f[0])?);
            stds.push(num(n, &f[1])?);
            feature_names.push(f[2].clone());
        }
        let mut nodes = Vec::with_capacity(rows * cols);
        for i in 0..rows * cols {
            let (n, f) = next("node")?;
            if f.len() != 4 + dim {
                return Err(bad(n, "wrong number of node fields"));
            }
            let (r, c): (usize, usize) = (num(n, &f[0])?, num(n, &f[1])?);
            if (r, c) != (i / cols, i % cols) {
                return Err(bad(n, "nodes must be row-major"));
            }
            let member_count = num(n, &f[2])?;
            let outcome_mean = if f[3] == "-" { None } else { Some(num(n, &f[3])?) };
            if outcome_mean.is_some() != (member_count > 0) {
                return Err(bad(n, "outcome mean must be present iff the node has members"));
            }
            let prototype = f[4..].iter().map(|s| num(n, s)).collect::<Result<_, _>>()?;
            nodes.push(SomNode {
                prototype,
                member_count,
                outcome_mean,
            });
        }
        if let Some((n, _)) = lines.find(|(_, l)| !l.trim().is_empty()) {
            return Err(bad(n, "trailing content"));
        }
        if rows == 0 || cols == 0 {
            return Err(SomError::EmptyGrid);
        }
        Ok(SomMap {
            config: SomConfig {
                seed,
                rows,
                cols,
                epochs,
                initial_learning_rate: lr0,
                final_learning_rate: lr1,
                initial_radius: Some(r0),
                final_radius: r1,
            },
            feature_names,
            means,
            stds,
            nodes,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("f{i}")).collect()
    }

    #[test]
    fn all_successes_give_mean_one() {
        let samples: Vec<_> = (0..12).map(|i| (vec![i as f64, (i * i) as f64], true)).collect();
        let map = train_som(names(2), &samples, SomConfig::default()).unwrap();
        assert!(map.nodes.iter().filter_map(|n| n.outcome_mean).all(|m| m == 1.0));
    }

    #[test]
    fn single_record_predicts_its_outcome_everywhere() {
        let map = train_som(names(1), &[(vec![3.0], false)], SomConfig::default()).unwrap();
        for q in [-100.0, 0.0, 3.0, 1e6] {
            assert_eq!(map.predict(&[q]).unwrap().p_success, 0.0);
        }
    }

    #[test]
    fn errors() {
        assert_eq!(train_som(names(1), &[], SomConfig::default()), Err(SomError::Empty));
        assert!(matches!(
            train_som(names(2), &[(vec![1.0, 2.0], true), (vec![1.0], true)], SomConfig::default()),
            Err(SomError::Ragged { index: 1, .. })
        ));
        let map = train_som(names(2), &[(vec![1.0, 2.0], true)], SomConfig::default()).unwrap();
        assert!(matches!(map.predict(&[1.0]), Err(SomError::DimensionMismatch { .. })));
    }

    #[test]
    fn text_round_trip_is_exact() {
        let samples: Vec<_> = (0..25)
            .map(|i| (vec![(i as f64).sin() * 10.0, i as f64 / 7.0], i % 3 == 0))
            .collect();
        let cfg = SomConfig {
            seed: 9,
            epochs: 20,
            ..SomConfig::default()
        };
        let map = train_som(vec!["a b".into(), "\"q\"".into()], &samples, cfg).unwrap();
        let text = map.to_text();
        let back = SomMap::from_text(&text).unwrap();
        assert_eq!(back.nodes, map.nodes);
        assert_eq!(back.means, map.means);
        assert_eq!(back.feature_names, map.feature_names);
        assert_eq!(back.to_text(), text);
        assert!(SomMap::from_text(&text.replace("selfx-som 1", "selfx-som 2")).is_err());
        assert!(SomMap::from_text(&text[..text.len() / 2]).is_err());
    }
}
