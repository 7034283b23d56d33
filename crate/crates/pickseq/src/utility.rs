//! Expected-utility tables `u(k, t)`: what an agent expects from picking `k`
//! items after `t` items are gone, for a given distribution over profiles.

use crate::error::Result;
use crate::numfmt::g6;
use crate::profile::ProbModel;
use crate::scoring::ScoringVector;

/// Triangular table of expected utilities for one probabilistic model and
/// one scoring vector. Cells exist for `k + t <= m` only.
#[derive(Clone, Debug, PartialEq)]
pub struct UtilityTable {
    model: ProbModel,
    m: usize,
    /// `rows[k][t]`, row `k` holding `m - k + 1` entries.
    rows: Vec<Vec<f64>>,
}

impl UtilityTable {
    pub fn model(&self) -> ProbModel {
        self.model
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Expected utility of picking `k` items after `t` are gone.
    ///
    /// # Panics
    /// Panics when `k + t > m`; those cells do not exist.
    pub fn value(&self, k: usize, t: usize) -> f64 {
        assert!(
            k <= self.m && t <= self.m - k,
            "u({k},{t}) does not exist for m = {}",
            self.m
        );
        self.rows[k][t]
    }

    /// Checked access; `None` for absent cells.
    pub fn get(&self, k: usize, t: usize) -> Option<f64> {
        self.rows.get(k).and_then(|row| row.get(t)).copied()
    }

    /// Renders the triangular layout as CSV: one row per `k`, one column per
    /// `t`, blank cells where `k + t > m`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str("k/t");
        for t in 0..=self.m {
            out.push(',');
            out.push_str(&t.to_string());
        }
        out.push('\n');
        for (k, row) in self.rows.iter().enumerate() {
            out.push_str(&k.to_string());
            for t in 0..=self.m {
                out.push(',');
                if let Some(&v) = row.get(t) {
                    out.push_str(&g6(v));
                }
            }
            out.push('\n');
        }
        out
    }

    /// Builds the table for any supported model.
    pub fn build(model: ProbModel, s: &ScoringVector) -> Result<UtilityTable> {
        model.validate()?;
        Ok(match model {
            ProbModel::FullCorrelation => build_fc(s),
            ProbModel::FullIndependence => build_fi(s),
            ProbModel::Mixture(lambda) => build_mixture(s, lambda)?,
        })
    }

    #[cfg(debug_assertions)]
    fn check_monotone(&self) {
        for k in 0..=self.m {
            for t in 0..=(self.m - k) {
                if k > 0 {
                    debug_assert!(
                        self.rows[k][t] >= self.rows[k - 1][t],
                        "u({k},{t}) < u({},{t})",
                        k - 1
                    );
                }
                if t > 0 {
                    debug_assert!(
                        self.rows[k][t] <= self.rows[k][t - 1],
                        "u({k},{t}) > u({k},{})",
                        t - 1
                    );
                }
            }
        }
    }

    #[cfg(not(debug_assertions))]
    fn check_monotone(&self) {}
}

/// Full-correlation table: the `t` best items are gone, so
/// `u(k, t) = s_{t+1} + ... + s_{t+k}`, filled with the incremental
/// recurrence `u(k, t) = u(k-1, t) + s_{k+t}` in O(m^2).
pub fn build_fc(s: &ScoringVector) -> UtilityTable {
    let m = s.m();
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
    rows.push(vec![0.0; m + 1]);
    for k in 1..=m {
        let row: Vec<f64> = (0..=(m - k))
            .map(|t| rows[k - 1][t] + s.score_at_rank(k + t))
            .collect();
        rows.push(row);
    }
    let table = UtilityTable {
        model: ProbModel::FullCorrelation,
        m,
        rows,
    };
    table.check_monotone();
    table
}

/// Full-independence table via the rank-scan recursion.
///
/// `layer[k][t]` at scan position `j` is the expected utility of picking `k`
/// items among those of rank `j..=m`, of which `t` are already gone. The
/// item of rank `j` is still free with probability `1 - t/(m-j+1)`; the scan
/// keeps only two `j`-layers alive, for O(m^3) time and O(m^2) memory.
pub fn build_fi(s: &ScoringVector) -> UtilityTable {
    let m = s.m();
    if m == 0 {
        return UtilityTable {
            model: ProbModel::FullIndependence,
            m,
            rows: vec![vec![0.0]],
        };
    }
    let stride = m + 1;
    let mut prev = vec![0.0_f64; stride * stride]; // layer j+1
    let mut cur = vec![0.0_f64; stride * stride]; // layer j
    for j in (1..=m).rev() {
        let avail = m - j + 1; // items of rank j..=m
        for k in 0..=avail {
            for t in 0..=(avail - k) {
                let cell = if k == 0 {
                    0.0
                } else if t == 0 {
                    // Everything from rank j downward is free: incremental
                    // prefix of s_j, s_{j+1}, ...
                    cur[(k - 1) * stride] + s.score_at_rank(j + k - 1)
                } else {
                    let p_gone = t as f64 / avail as f64;
                    (1.0 - p_gone) * (s.score_at_rank(j) + prev[(k - 1) * stride + t])
                        + p_gone * prev[k * stride + (t - 1)]
                };
                cur[k * stride + t] = cell;
            }
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    // After the swap, `prev` holds layer j = 1, i.e. u(k, t) itself.
    let rows: Vec<Vec<f64>> = (0..=m)
        .map(|k| (0..=(m - k)).map(|t| prev[k * stride + t]).collect())
        .collect();
    let table = UtilityTable {
        model: ProbModel::FullIndependence,
        m,
        rows,
    };
    table.check_monotone();
    table
}

/// Mixture table: `u = lambda * u_FI + (1 - lambda) * u_FC`, by linearity of
/// expectation.
pub fn build_mixture(s: &ScoringVector, lambda: f64) -> Result<UtilityTable> {
    ProbModel::Mixture(lambda).validate()?;
    let fc = build_fc(s);
    let fi = build_fi(s);
    let rows = fi
        .rows
        .iter()
        .zip(&fc.rows)
        .map(|(fi_row, fc_row)| {
            fi_row
                .iter()
                .zip(fc_row)
                .map(|(&a, &b)| lambda * a + (1.0 - lambda) * b)
                .collect()
        })
        .collect();
    let table = UtilityTable {
        model: ProbModel::Mixture(lambda),
        m: s.m(),
        rows,
    };
    table.check_monotone();
    Ok(table)
}
