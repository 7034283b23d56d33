//! Ingestion of elicited utility data: averaged scoring vectors from score
//! matrices and the preference-concentration parameter from long-form
//! records.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scoring::ScoringVector;

/// The bundled 54-participant flavour survey (matrix form, one participant
/// per row, scores on a 0-100 scale).
pub const FLAVOUR_SURVEY_CSV: &str = include_str!("../data/flavour_survey.csv");

/// Matrix-form dataset: one row of scores per participant, equal lengths.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoreMatrix {
    rows: Vec<Vec<f64>>,
}

/// Long-form dataset: `(participant, item, score)` records.
#[derive(Clone, Debug, PartialEq)]
pub struct LongRecords {
    records: Vec<(String, String, f64)>,
}

/// Clamps a raw score into [0, 100], noting out-of-range input.
fn clamp_score(raw: f64, context: &str, warnings: &mut Vec<String>) -> f64 {
    if (0.0..=100.0).contains(&raw) {
        raw
    } else {
        let clamped = raw.clamp(0.0, 100.0);
        warnings.push(format!(
            "{context}: score {raw} outside [0, 100], clamped to {clamped}"
        ));
        clamped
    }
}

impl ScoreMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Input("the dataset has no participants".into()));
        }
        let width = rows[0].len();
        if width == 0 {
            return Err(Error::Input("participant rows are empty".into()));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != width {
                return Err(Error::Format(format!(
                    "row {i} has {} scores but row 0 has {width}",
                    row.len()
                )));
            }
        }
        Ok(Self { rows })
    }

    /// Parses headerless CSV, one participant per row. Returns the dataset
    /// and any clamping warnings.
    pub fn parse_csv(text: &str) -> Result<(Self, Vec<String>)> {
        let mut warnings = Vec::new();
        let mut rows = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let row = line
                .split(',')
                .enumerate()
                .map(|(col, field)| {
                    let raw: f64 = field.trim().parse().map_err(|e| {
                        Error::Format(format!(
                            "line {}, column {}: bad score {:?}: {e}",
                            lineno + 1,
                            col + 1,
                            field.trim()
                        ))
                    })?;
                    Ok(clamp_score(raw, &format!("line {}", lineno + 1), &mut warnings))
                })
                .collect::<Result<Vec<f64>>>()?;
            rows.push(row);
        }
        Ok((Self::new(rows)?, warnings))
    }

    pub fn participants(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }
}

/// Sorts every participant's scores non-increasingly and averages them
/// position by position. The mean of sorted rows is itself sorted, so the
/// result is always a valid scoring vector.
pub fn average_scoring_vector(dataset: &ScoreMatrix) -> Result<ScoringVector> {
    let width = dataset.rows[0].len();
    let count = dataset.rows.len() as f64;
    let mut sums = vec![0.0; width];
    for row in &dataset.rows {
        let mut sorted = row.clone();
        sorted.sort_by(|a, b| b.total_cmp(a));
        for (acc, v) in sums.iter_mut().zip(&sorted) {
            *acc += v;
        }
    }
    ScoringVector::new(sums.into_iter().map(|s| s / count).collect())
}

impl LongRecords {
    /// Builds a dataset from in-memory records; scores must already sit in
    /// [0, 100] and `(participant, item)` pairs must be unique.
    pub fn new(records: Vec<(String, String, f64)>) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::Input("the dataset has no records".into()));
        }
        let mut seen: BTreeMap<(&str, &str), ()> = BTreeMap::new();
        for (participant, item, score) in &records {
            if !(0.0..=100.0).contains(score) {
                return Err(Error::Input(format!(
                    "score {score} for participant {participant:?} and item {item:?} is outside [0, 100]"
                )));
            }
            if seen.insert((participant, item), ()).is_some() {
                return Err(Error::Format(format!(
                    "duplicate record for participant {participant:?} and item {item:?}"
                )));
            }
        }
        Ok(Self { records })
    }

    /// Parses CSV with the header `participant,item,score`.
    pub fn parse_csv(text: &str) -> Result<(Self, Vec<String>)> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::Format("empty long-form CSV".into()))?;
        let cols: Vec<String> = header.split(',').map(|c| c.trim().to_lowercase()).collect();
        if cols != ["participant", "item", "score"] {
            return Err(Error::Format(format!(
                "expected header participant,item,score but found {header:?}"
            )));
        }
        let mut warnings = Vec::new();
        let mut records = Vec::new();
        let mut seen: BTreeMap<(String, String), ()> = BTreeMap::new();
        for (lineno, line) in lines {
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 3 {
                return Err(Error::Format(format!(
                    "line {}: expected 3 fields, found {}",
                    lineno + 1,
                    fields.len()
                )));
            }
            let participant = fields[0].to_string();
            let item = fields[1].to_string();
            let raw: f64 = fields[2].parse().map_err(|e| {
                Error::Format(format!("line {}: bad score {:?}: {e}", lineno + 1, fields[2]))
            })?;
            let score = clamp_score(raw, &format!("line {}", lineno + 1), &mut warnings);
            if seen
                .insert((participant.clone(), item.clone()), ())
                .is_some()
            {
                return Err(Error::Format(format!(
                    "line {}: duplicate record for participant {participant:?} and item {item:?}",
                    lineno + 1
                )));
            }
            records.push((participant, item, score));
        }
        if records.is_empty() {
            return Err(Error::Input("the dataset has no records".into()));
        }
        Ok((Self { records }, warnings))
    }

    pub fn records(&self) -> &[(String, String, f64)] {
        &self.records
    }
}

/// How concentrated the elicited preferences are, and the matching mixture
/// weight `lambda = 1 - alpha`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConcentrationReport {
    pub alpha: f64,
    pub lambda: f64,
    /// Item pairs with at least one participant scoring both, strictly.
    pub pairs_used: usize,
    /// Item pairs excluded because nobody compared them strictly.
    pub pairs_skipped: usize,
}

/// For every unordered item pair, takes the participants who scored both
/// items differently and measures how lopsided the majority is; `alpha` is
/// the unweighted mean over pairs that have at least one such participant.
pub fn concentration(dataset: &LongRecords) -> Result<ConcentrationReport> {
    // participant -> item -> score; BTreeMaps keep iteration deterministic.
    let mut by_participant: BTreeMap<&str, BTreeMap<&str, f64>> = BTreeMap::new();
    let mut items: Vec<&str> = Vec::new();
    for (participant, item, score) in &dataset.records {
        by_participant
            .entry(participant)
            .or_default()
            .insert(item, *score);
        if !items.contains(&item.as_str()) {
            items.push(item);
        }
    }
    items.sort_unstable();

    let mut used = 0usize;
    let mut skipped = 0usize;
    let mut alpha_sum = 0.0;
    for (i, &x) in items.iter().enumerate() {
        for &y in &items[i + 1..] {
            let mut prefer_x = 0u64;
            let mut qualifying = 0u64;
            for scores in by_participant.values() {
                if let (Some(&sx), Some(&sy)) = (scores.get(x), scores.get(y)) {
                    if sx != sy {
                        qualifying += 1;
                        if sx > sy {
                            prefer_x += 1;
                        }
                    }
                }
            }
            if qualifying == 0 {
                skipped += 1;
            } else {
                let w = prefer_x as f64 / qualifying as f64;
                alpha_sum += (2.0 * w - 1.0).abs();
                used += 1;
            }
        }
    }
    if used == 0 {
        return Err(Error::AlphaUndefined);
    }
    let alpha = alpha_sum / used as f64;
    Ok(ConcentrationReport {
        alpha,
        lambda: 1.0 - alpha,
        pairs_used: used,
        pairs_skipped: skipped,
    })
}
