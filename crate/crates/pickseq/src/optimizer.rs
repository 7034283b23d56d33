//! Dynamic program over pick vectors: finds the composition of `m` into `n`
//! parts optimizing a welfare functional of the per-agent expected utilities.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::profile::{ex_post_welfare, ItemPolarity, PickVector, ProbModel, WelfareKind};
use crate::utility::UtilityTable;
use crate::{approx_eq, log_approx_eq};

/// Optimal pick vector together with its welfare value and the expected
/// utility of every agent.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OptResult {
    pub k: PickVector,
    /// Welfare of `agent_eus` under the requested kind. Nash values are
    /// selected in log domain but reported as the plain product.
    pub value: f64,
    pub agent_eus: Vec<f64>,
    pub model: ProbModel,
    pub welfare: WelfareKind,
}

/// DP state value for one welfare kind. Nash states live in log domain so
/// that lexicographic-scale products cannot overflow; `ln 0 = -inf` is
/// absorbing under addition and loses every max against finite values.
fn state_of(kind: WelfareKind, u: f64) -> f64 {
    match kind {
        WelfareKind::Nash => u.ln(),
        _ => u,
    }
}

fn combine(kind: WelfareKind, a: f64, b: f64) -> f64 {
    match kind {
        WelfareKind::Utilitarian | WelfareKind::Nash => a + b,
        WelfareKind::Egalitarian => a.min(b),
    }
}

fn ties(kind: WelfareKind, a: f64, b: f64) -> bool {
    match kind {
        WelfareKind::Nash => log_approx_eq(a, b),
        _ => approx_eq(a, b),
    }
}

fn beats(polarity: ItemPolarity, cand: f64, best: f64) -> bool {
    match polarity {
        ItemPolarity::Goods => cand > best,
        ItemPolarity::Bads => cand < best,
    }
}

/// Computes the optimal pick vector for `n` agents over the given table.
///
/// Goods are maximized, bads (costs) minimized. Among choices whose state
/// values tie within the library tolerance, the smallest `k` wins at every
/// state, which makes the reconstruction deterministic.
pub fn optimize(
    n: usize,
    table: &UtilityTable,
    kind: WelfareKind,
    polarity: ItemPolarity,
) -> Result<OptResult> {
    if n == 0 {
        return Err(Error::Input("need at least one agent".into()));
    }
    let m = table.m();
    // Last agent takes everything that is left.
    let mut next: Vec<f64> = (0..=m).map(|l| state_of(kind, table.value(m - l, l))).collect();
    // choices[i][l] = best k for agent i (0-based) when l items are gone.
    let mut choices: Vec<Vec<u32>> = Vec::new();
    for _agent in (0..n - 1).rev() {
        let mut layer = vec![0.0_f64; m + 1];
        let mut layer_choice = vec![0u32; m + 1];
        for l in 0..=m {
            let mut best_k = 0usize;
            let mut best_v = combine(kind, state_of(kind, table.value(0, l)), next[l]);
            for k in 1..=(m - l) {
                let v = combine(kind, state_of(kind, table.value(k, l)), next[l + k]);
                if beats(polarity, v, best_v) && !ties(kind, v, best_v) {
                    best_v = v;
                    best_k = k;
                }
            }
            layer[l] = best_v;
            layer_choice[l] = best_k as u32;
        }
        next = layer;
        choices.push(layer_choice);
    }
    choices.reverse();

    let mut counts = Vec::with_capacity(n);
    let mut gone = 0usize;
    for layer_choice in &choices {
        let k = layer_choice[gone] as usize;
        counts.push(k);
        gone += k;
    }
    counts.push(m - gone);
    let k = PickVector::new(counts).expect("n >= 1");
    let (value, agent_eus) = evaluate(&k, table, kind)?;
    Ok(OptResult {
        k,
        value,
        agent_eus,
        model: table.model(),
        welfare: kind,
    })
}

/// Welfare and per-agent expected utilities of a given pick vector:
/// agent `i` expects `u(k_i, c_i)` where `c_i` counts the items picked
/// before her turn.
pub fn evaluate(k: &PickVector, table: &UtilityTable, kind: WelfareKind) -> Result<(f64, Vec<f64>)> {
    if k.m() != table.m() {
        return Err(Error::Dimension(format!(
            "pick vector distributes {} items but the table covers {}",
            k.m(),
            table.m()
        )));
    }
    let offsets = k.offsets();
    let eus: Vec<f64> = k
        .counts()
        .iter()
        .zip(&offsets)
        .map(|(&ki, &ci)| table.value(ki, ci))
        .collect();
    Ok((ex_post_welfare(kind, &eus), eus))
}

/// Allocation-free welfare of a composition slice; used by the exhaustive
/// oracle where per-candidate `Vec`s would dominate the runtime.
pub(crate) fn composition_welfare(counts: &[usize], table: &UtilityTable, kind: WelfareKind) -> f64 {
    let mut gone = 0usize;
    let mut acc = match kind {
        WelfareKind::Utilitarian => 0.0,
        WelfareKind::Egalitarian => f64::INFINITY,
        WelfareKind::Nash => 1.0,
    };
    for &ki in counts {
        let u = table.value(ki, gone);
        acc = match kind {
            WelfareKind::Utilitarian => acc + u,
            WelfareKind::Egalitarian => acc.min(u),
            WelfareKind::Nash => acc * u,
        };
        gone += ki;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scoring::{make_scoring, ScoringKind, ScoringVector};
    use crate::utility::{build_fc, build_fi};

    fn fi_borda(m: usize) -> UtilityTable {
        build_fi(&make_scoring(ScoringKind::Borda, m).unwrap())
    }

    fn assert_close(a: f64, b: f64) {
        assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0), "{a} vs {b}");
    }

    #[test]
    fn usw_three_agents_seven_items() {
        let r = optimize(
            3,
            &fi_borda(7),
            WelfareKind::Utilitarian,
            ItemPolarity::Goods,
        )
        .unwrap();
        assert_eq!(r.k.counts(), &[3, 2, 2]);
        assert_close(r.value, 37.2);
    }

    #[test]
    fn esw_and_nsw_three_agents_seven_items() {
        let e = optimize(
            3,
            &fi_borda(7),
            WelfareKind::Egalitarian,
            ItemPolarity::Goods,
        )
        .unwrap();
        assert_close(e.value, 12.0);
        let n = optimize(3, &fi_borda(7), WelfareKind::Nash, ItemPolarity::Goods).unwrap();
        assert_close(n.value, 1872.0);
        assert_eq!(n.k.counts(), &[2, 2, 3]);
    }

    #[test]
    fn single_agent_takes_everything() {
        for kind in WelfareKind::ALL {
            let r = optimize(1, &fi_borda(5), kind, ItemPolarity::Goods).unwrap();
            assert_eq!(r.k.counts(), &[5]);
        }
    }

    #[test]
    fn fc_utilitarian_is_flat_and_tie_breaks_canonically() {
        let table = build_fc(&make_scoring(ScoringKind::Borda, 6).unwrap());
        let r = optimize(2, &table, WelfareKind::Utilitarian, ItemPolarity::Goods).unwrap();
        assert_close(r.value, 21.0);
        // Every choice ties, so the smallest-k rule pushes all items to the
        // last agent.
        assert_eq!(r.k.counts(), &[0, 6]);
    }

    #[test]
    fn fewer_items_than_agents_yields_zero_welfare() {
        // Some bundle is empty in every composition, so the optimum is 0.
        // The first picker's state ties everywhere and stays at k = 0; the
        // later states are not tied, so the rest of the vector follows the
        // subtree optima rather than collapsing to (0, ..., 0, m).
        let table = fi_borda(2);
        for kind in [WelfareKind::Egalitarian, WelfareKind::Nash] {
            let r = optimize(3, &table, kind, ItemPolarity::Goods).unwrap();
            assert_eq!(r.value, 0.0);
            assert_eq!(r.k.counts(), &[0, 1, 1]);
            assert_eq!(r.k.m(), 2);
        }
    }

    #[test]
    fn evaluate_decomposes_by_offsets() {
        let table = fi_borda(7);
        let k = PickVector::new(vec![3, 2, 2]).unwrap();
        let (v, eus) = evaluate(&k, &table, WelfareKind::Utilitarian).unwrap();
        assert_close(eus[0], 18.0);
        assert_close(eus[1], 11.2);
        assert_close(eus[2], 8.0);
        assert_close(v, 37.2);

        let nash = evaluate(
            &PickVector::new(vec![2, 2, 3]).unwrap(),
            &table,
            WelfareKind::Nash,
        )
        .unwrap();
        assert_close(nash.0, 1872.0);

        let egal = evaluate(
            &PickVector::new(vec![0, 0, 7]).unwrap(),
            &table,
            WelfareKind::Egalitarian,
        )
        .unwrap();
        assert_eq!(egal.0, 0.0);
    }

    #[test]
    fn evaluate_rejects_wrong_total() {
        let table = fi_borda(7);
        let k = PickVector::new(vec![3, 3]).unwrap();
        assert!(evaluate(&k, &table, WelfareKind::Utilitarian).is_err());
    }

    #[test]
    fn equal_scores_make_utilitarian_welfare_flat_across_polarities() {
        let s = ScoringVector::new(vec![1.0; 6]).unwrap();
        let table = build_fi(&s);
        let goods = optimize(3, &table, WelfareKind::Utilitarian, ItemPolarity::Goods).unwrap();
        let bads = optimize(3, &table, WelfareKind::Utilitarian, ItemPolarity::Bads).unwrap();
        assert_close(goods.value, 6.0);
        assert_close(bads.value, 6.0);
    }

    #[test]
    fn zero_items_is_degenerate_but_valid() {
        let table = build_fi(&ScoringVector::new(vec![]).unwrap());
        let r = optimize(3, &table, WelfareKind::Utilitarian, ItemPolarity::Goods).unwrap();
        assert_eq!(r.k.counts(), &[0, 0, 0]);
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn composition_welfare_matches_evaluate() {
        let table = fi_borda(7);
        for counts in [vec![3, 2, 2], vec![0, 7, 0], vec![1, 1, 5]] {
            let k = PickVector::new(counts.clone()).unwrap();
            for kind in WelfareKind::ALL {
                let (v, _) = evaluate(&k, &table, kind).unwrap();
                assert_eq!(composition_welfare(&counts, &table, kind), v);
            }
        }
    }
}
