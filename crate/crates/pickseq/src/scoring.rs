//! Scoring vectors: the rank-to-value mapping used as a proxy for item
//! utilities.

use serde::{Deserialize, Serialize};
use std::str::FromStr;

use crate::error::{Error, Result};

/// A non-increasing vector of nonnegative scores, one per rank.
///
/// `scores()[j]` is the value an agent derives from her `(j+1)`-th most
/// preferred item. The empty vector is the degenerate zero-item instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoringVector {
    scores: Vec<f64>,
}

/// Built-in scoring vector families.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScoringKind {
    /// `s_j = m - j + 1` (1-based rank `j`).
    Borda,
    /// `s_j = 2^(m-j)`; only supported up to `m = 1023`.
    Lexicographic,
    /// `s_j = (m + 1 - j) / (m + 1)`, the expected value of the `j`-th
    /// order statistic of `m` i.i.d. uniform draws on `[0, 1]`.
    OrderStatistic,
}

impl FromStr for ScoringKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "borda" => Ok(ScoringKind::Borda),
            "lex" | "lexicographic" => Ok(ScoringKind::Lexicographic),
            "orderstat" => Ok(ScoringKind::OrderStatistic),
            other => Err(Error::Input(format!(
                "unknown scoring kind {other:?} (expected borda | lex | orderstat)"
            ))),
        }
    }
}

/// Largest `m` for which lexicographic scores stay finite in an `f64`.
pub const LEXICOGRAPHIC_MAX_ITEMS: usize = 1023;

/// Builds one of the built-in scoring vectors for `m` items.
pub fn make_scoring(kind: ScoringKind, m: usize) -> Result<ScoringVector> {
    let scores = match kind {
        ScoringKind::Borda => (0..m).map(|i| (m - i) as f64).collect(),
        ScoringKind::Lexicographic => {
            if m > LEXICOGRAPHIC_MAX_ITEMS {
                return Err(Error::UnsupportedSize(format!(
                    "lexicographic scoring needs m <= {LEXICOGRAPHIC_MAX_ITEMS}, got {m}"
                )));
            }
            (0..m).map(|i| 2f64.powi((m - 1 - i) as i32)).collect()
        }
        ScoringKind::OrderStatistic => {
            let denom = (m + 1) as f64;
            (0..m).map(|i| (m - i) as f64 / denom).collect()
        }
    };
    ScoringVector::new(scores)
}

impl ScoringVector {
    /// Validates and wraps raw scores. Scores must be finite, nonnegative
    /// and non-increasing.
    pub fn new(scores: Vec<f64>) -> Result<Self> {
        for (i, &s) in scores.iter().enumerate() {
            if !s.is_finite() || s < 0.0 {
                return Err(Error::Input(format!(
                    "score at position {i} is {s}; scores must be finite and nonnegative"
                )));
            }
            if i > 0 && scores[i - 1] < s {
                return Err(Error::Input(format!(
                    "scores must be non-increasing, but position {} has {} < {}",
                    i - 1,
                    scores[i - 1],
                    s
                )));
            }
        }
        Ok(Self { scores })
    }

    /// Number of items `m`.
    pub fn m(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    /// Score of the 1-based rank `j` (so `score_at_rank(1)` is the top score).
    pub fn score_at_rank(&self, j: usize) -> f64 {
        self.scores[j - 1]
    }

    /// Total score mass `s_1 + ... + s_m`, accumulated left to right.
    pub fn total(&self) -> f64 {
        self.scores.iter().sum()
    }

    /// Prefix sums `p[i] = s_1 + ... + s_i` with `p[0] = 0`.
    pub fn prefix_sums(&self) -> Vec<f64> {
        let mut p = Vec::with_capacity(self.scores.len() + 1);
        p.push(0.0);
        let mut acc = 0.0;
        for &s in &self.scores {
            acc += s;
            p.push(acc);
        }
        p
    }

    /// Parses the one-line CSV form: `m` comma-separated non-increasing
    /// numbers. Anything beyond a single non-empty line is rejected.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let line = lines
            .next()
            .ok_or_else(|| Error::Format("empty scoring CSV".into()))?;
        if lines.next().is_some() {
            return Err(Error::Format(
                "scoring CSV must contain exactly one non-empty line".into(),
            ));
        }
        let scores = line
            .split(',')
            .map(|f| {
                f.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Format(format!("bad score {:?}: {e}", f.trim())))
            })
            .collect::<Result<Vec<f64>>>()?;
        Self::new(scores)
    }

    /// Renders the one-line CSV form with full round-trip precision.
    pub fn to_csv(&self) -> String {
        let fields: Vec<String> = self.scores.iter().map(|s| s.to_string()).collect();
        fields.join(",")
    }
}
