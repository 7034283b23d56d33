//! Parameter sweeps: solve one optimization per swept value and tabulate
//! per-agent utilities and item counts, raw and cumulative.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec;
use crate::numfmt::g6;
use crate::optimizer::optimize;
use crate::profile::{ItemPolarity, ProbModel, WelfareKind};
use crate::scoring::{make_scoring, ScoringKind, ScoringVector};
use crate::utility::UtilityTable;

/// Which parameter the sweep varies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParam {
    /// Number of items `m`.
    Items,
    /// Mixture weight of the profile distribution.
    Lambda,
    /// Number of agents `n`.
    Agents,
}

impl std::str::FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "m" | "items" => Ok(SweepParam::Items),
            "lambda" => Ok(SweepParam::Lambda),
            "n" | "agents" => Ok(SweepParam::Agents),
            other => Err(Error::Input(format!(
                "unknown sweep parameter {other:?} (expected m | lambda | n)"
            ))),
        }
    }
}

/// How the scoring vector is obtained at each sweep point. Built-in kinds
/// rescale with `m`; a custom vector pins `m` instead.
#[derive(Clone, Debug, PartialEq)]
pub enum ScoringSpec {
    Kind(ScoringKind),
    Custom(ScoringVector),
}

impl ScoringSpec {
    pub fn materialize(&self, m: usize) -> Result<ScoringVector> {
        match self {
            ScoringSpec::Kind(kind) => make_scoring(*kind, m),
            ScoringSpec::Custom(s) => {
                if s.m() != m {
                    return Err(Error::Dimension(format!(
                        "custom scoring vector has {} entries but the sweep point needs {m}",
                        s.m()
                    )));
                }
                Ok(s.clone())
            }
        }
    }
}

/// Full description of one sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub param: SweepParam,
    pub start: f64,
    pub stop: f64,
    pub step: f64,
    /// Fixed number of agents; required unless `param` is `Agents`.
    pub agents: Option<usize>,
    /// Fixed number of items; required unless `param` is `Items`.
    pub items: Option<usize>,
    pub scoring: ScoringSpec,
    /// Fixed profile model; required unless `param` is `Lambda` (a lambda
    /// sweep builds its own mixtures).
    pub model: Option<ProbModel>,
    pub welfare: WelfareKind,
    pub polarity: ItemPolarity,
}

/// One output row: the swept value plus per-agent expected utilities and
/// item counts, as raw values, fractions, and cumulative fractions.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub agents: usize,
    pub items: usize,
    pub eu: Vec<f64>,
    pub eu_frac: Vec<f64>,
    pub eu_cumfrac: Vec<f64>,
    pub k: Vec<usize>,
    pub k_frac: Vec<f64>,
    pub k_cumfrac: Vec<f64>,
}

impl SweepSpec {
    fn swept_values(&self) -> Result<Vec<f64>> {
        if self.step.is_nan() || self.step <= 0.0 {
            return Err(Error::Input(format!(
                "sweep step must be positive, got {}",
                self.step
            )));
        }
        if self.stop < self.start {
            return Err(Error::Input(format!(
                "empty sweep range [{}, {}]",
                self.start, self.stop
            )));
        }
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        Ok((0..count).map(|i| self.start + i as f64 * self.step).collect())
    }

    fn validate(&self) -> Result<()> {
        let integral = |v: f64, what: &str| -> Result<usize> {
            if v < 0.0 || v.fract() != 0.0 {
                return Err(Error::Input(format!(
                    "{what} sweep values must be nonnegative integers, got {v}"
                )));
            }
            Ok(v as usize)
        };
        match self.param {
            SweepParam::Items => {
                integral(self.start, "item")?;
                integral(self.step, "item")?;
                if self.items.is_some() {
                    return Err(Error::Input(
                        "an item sweep cannot also fix the item count".into(),
                    ));
                }
                if self.agents.is_none() {
                    return Err(Error::Input("an item sweep needs a fixed agent count".into()));
                }
                if self.model.is_none() {
                    return Err(Error::Input("an item sweep needs a fixed model".into()));
                }
            }
            SweepParam::Agents => {
                let first = integral(self.start, "agent")?;
                integral(self.step, "agent")?;
                if first == 0 {
                    return Err(Error::Input("agent sweeps start at n >= 1".into()));
                }
                if self.agents.is_some() {
                    return Err(Error::Input(
                        "an agent sweep cannot also fix the agent count".into(),
                    ));
                }
                if self.items.is_none() {
                    return Err(Error::Input("an agent sweep needs a fixed item count".into()));
                }
                if self.model.is_none() {
                    return Err(Error::Input("an agent sweep needs a fixed model".into()));
                }
            }
            SweepParam::Lambda => {
                if !(0.0..=1.0).contains(&self.start) || !(0.0..=1.0).contains(&self.stop) {
                    return Err(Error::Input("lambda sweeps stay within [0, 1]".into()));
                }
                if self.model.is_some() {
                    return Err(Error::Input(
                        "a lambda sweep builds its own mixtures; drop the fixed model".into(),
                    ));
                }
                if self.agents.is_none() || self.items.is_none() {
                    return Err(Error::Input(
                        "a lambda sweep needs fixed agent and item counts".into(),
                    ));
                }
            }
        }
        if let Some(model) = &self.model {
            model.validate()?;
        }
        Ok(())
    }
}

fn cumulative(fracs: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    fracs
        .iter()
        .map(|f| {
            acc += f;
            acc
        })
        .collect()
}

fn sweep_point(spec: &SweepSpec, value: f64) -> Result<SweepRow> {
    let (n, m, model) = match spec.param {
        SweepParam::Items => (
            spec.agents.expect("validated"),
            value as usize,
            spec.model.expect("validated"),
        ),
        SweepParam::Agents => (
            value as usize,
            spec.items.expect("validated"),
            spec.model.expect("validated"),
        ),
        SweepParam::Lambda => (
            spec.agents.expect("validated"),
            spec.items.expect("validated"),
            // Accumulated grid values can overshoot 1 by a few ulps.
            ProbModel::Mixture(value.clamp(0.0, 1.0)),
        ),
    };
    let scoring = spec.scoring.materialize(m)?;
    let table = UtilityTable::build(model, &scoring)?;
    let result = optimize(n, &table, spec.welfare, spec.polarity)?;

    let eu = result.agent_eus;
    let eu_total: f64 = eu.iter().sum();
    let eu_frac: Vec<f64> = eu
        .iter()
        .map(|&u| if eu_total == 0.0 { 0.0 } else { u / eu_total })
        .collect();
    let k = result.k.counts().to_vec();
    let k_frac: Vec<f64> = k
        .iter()
        .map(|&ki| if m == 0 { 0.0 } else { ki as f64 / m as f64 })
        .collect();
    Ok(SweepRow {
        value,
        agents: n,
        items: m,
        eu_cumfrac: cumulative(&eu_frac),
        k_cumfrac: cumulative(&k_frac),
        eu,
        eu_frac,
        k,
        k_frac,
    })
}

/// Runs the sweep. Points are independent and computed in parallel; rows
/// come back in sweep order. The first failing point aborts the sweep with
/// its parameters named.
pub fn sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let values = spec.swept_values()?;
    let rows = exec::indexed_map(values.len(), |i| {
        sweep_point(spec, values[i]).map_err(|e| {
            Error::Input(format!(
                "sweep point {:?} = {} failed: {e}",
                spec.param, values[i]
            ))
        })
    });
    rows.into_iter().collect()
}

/// CSV rendering: one row per swept value, agent columns padded to the
/// widest row (ragged rows appear in agent sweeps).
pub fn sweep_to_csv(rows: &[SweepRow]) -> String {
    let width = rows.iter().map(|r| r.agents).max().unwrap_or(0);
    let mut out = String::new();
    out.push_str("value,agents,items");
    for section in ["eu", "eu_frac", "eu_cumfrac", "k", "k_frac", "k_cumfrac"] {
        for i in 1..=width {
            out.push(',');
            out.push_str(&format!("{section}_{i}"));
        }
    }
    out.push('\n');
    for row in rows {
        out.push_str(&g6(row.value));
        out.push_str(&format!(",{},{}", row.agents, row.items));
        let float_sections: [&[f64]; 3] = [&row.eu, &row.eu_frac, &row.eu_cumfrac];
        for section in float_sections {
            for i in 0..width {
                out.push(',');
                if let Some(v) = section.get(i) {
                    out.push_str(&g6(*v));
                }
            }
        }
        for i in 0..width {
            out.push(',');
            if let Some(v) = row.k.get(i) {
                out.push_str(&v.to_string());
            }
        }
        let tail_sections: [&[f64]; 2] = [&row.k_frac, &row.k_cumfrac];
        for section in tail_sections {
            for i in 0..width {
                out.push(',');
                if let Some(v) = section.get(i) {
                    out.push_str(&g6(*v));
                }
            }
        }
        out.push('\n');
    }
    out
}
