//! Exhaustive enumeration over pick vectors: the independent correctness
//! oracle for the dynamic program.

use crate::error::{Error, Result};
use crate::exec;
use crate::optimizer::composition_welfare;
use crate::profile::{ItemPolarity, PickVector, WelfareKind};
use crate::utility::UtilityTable;
use crate::approx_eq;

/// Default ceiling on how many compositions the oracle will enumerate.
pub const DEFAULT_ORACLE_CAP: u64 = 10_000_000;

/// Compositions per parallel work unit.
const CHUNK: u128 = 8192;

/// Exact number of compositions of `m` into `n` nonnegative parts,
/// `C(n + m - 1, n - 1)`.
pub fn count_compositions(n: usize, m: usize) -> Result<u128> {
    if n == 0 {
        return Err(Error::Input("need at least one agent".into()));
    }
    binomial(n as u128 + m as u128 - 1, n as u128 - 1)
}

/// Overflow-checked binomial coefficient.
fn binomial(n: u128, k: u128) -> Result<u128> {
    if k > n {
        return Ok(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) stays exact because acc is always a binomial value.
        acc = acc
            .checked_mul(n - i)
            .ok_or(Error::Overflow("binomial coefficient"))?
            / (i + 1);
    }
    Ok(acc)
}

/// Advances `k` to the next composition in enumeration order.
/// Returns `false` once `k` is the last composition `(0, ..., 0, m)`.
fn next_composition(k: &mut [usize]) -> bool {
    let n = k.len();
    if k[n - 1] == k.iter().sum::<usize>() {
        return false;
    }
    if k[0] > 0 {
        k[0] -= 1;
        k[1] += 1;
    } else {
        let j = k.iter().position(|&v| v > 0).expect("sum is positive");
        k[0] = k[j] - 1;
        k[j] = 0;
        k[j + 1] += 1;
    }
    true
}

/// Composition at position `rank` in the enumeration order (colex: the
/// reversed tuples appear in ascending lexicographic order). Gives parallel
/// workers random access into the stream.
pub fn composition_at_rank(n: usize, m: usize, rank: u128) -> Result<Vec<usize>> {
    let total = count_compositions(n, m)?;
    if rank >= total {
        return Err(Error::Input(format!(
            "rank {rank} out of range for {total} compositions"
        )));
    }
    let mut rest = rank;
    let mut remaining = m as u128;
    let mut rev = Vec::with_capacity(n);
    // Build (k_n, ..., k_1) in lexicographic order.
    for pos in 0..n - 1 {
        let parts_left = (n - 1 - pos) as u128;
        let mut v: u128 = 0;
        loop {
            let block = binomial(remaining - v + parts_left - 1, parts_left - 1)?;
            if rest < block {
                break;
            }
            rest -= block;
            v += 1;
        }
        rev.push(v as usize);
        remaining -= v;
    }
    rev.push(remaining as usize);
    rev.reverse();
    Ok(rev)
}

/// Iterator over every composition of `m` into `n` nonnegative parts.
#[derive(Clone, Debug)]
pub struct CompositionStream {
    state: Option<Vec<usize>>,
}

impl CompositionStream {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Input("need at least one agent".into()));
        }
        let mut first = vec![0; n];
        first[0] = m;
        Ok(Self { state: Some(first) })
    }
}

impl Iterator for CompositionStream {
    type Item = PickVector;

    fn next(&mut self) -> Option<PickVector> {
        let state = self.state.as_mut()?;
        let out = PickVector::new(state.clone()).expect("n >= 1");
        if !next_composition(state) {
            self.state = None;
        }
        Some(out)
    }
}

/// Result of an exhaustive scan: the optimum and every composition whose
/// welfare ties with it within the library tolerance, in enumeration order.
#[derive(Clone, Debug, PartialEq)]
pub struct BruteForceOutcome {
    pub best_value: f64,
    pub optimal_set: Vec<PickVector>,
}

/// Per-chunk scan state: the chunk optimum and its near-optimal candidates.
type ChunkScan = (f64, Vec<(f64, Vec<usize>)>);

/// Evaluates every composition and returns the exact optimum (maximum for
/// goods, minimum for bads) plus all near-optimal vectors.
///
/// Refuses instances whose composition count exceeds `cap`. Chunks of the
/// stream are evaluated in parallel and merged in a fixed order, so the
/// outcome does not depend on the worker count.
pub fn brute_force_optimize(
    n: usize,
    table: &UtilityTable,
    kind: WelfareKind,
    polarity: ItemPolarity,
    cap: u64,
) -> Result<BruteForceOutcome> {
    let m = table.m();
    let total = count_compositions(n, m)?;
    if total > cap as u128 {
        return Err(Error::CapExceeded { count: total, cap });
    }
    let chunks = total.div_ceil(CHUNK) as usize;
    let better = |cand: f64, best: f64| match polarity {
        ItemPolarity::Goods => cand > best,
        ItemPolarity::Bads => cand < best,
    };

    let locals: Vec<Result<ChunkScan>> = exec::indexed_map(chunks, |c| {
        let start = c as u128 * CHUNK;
        let len = CHUNK.min(total - start);
        let mut k = composition_at_rank(n, m, start)?;
        let mut best = f64::NAN;
        let mut candidates: Vec<(f64, Vec<usize>)> = Vec::new();
        for i in 0..len {
            let v = composition_welfare(&k, table, kind);
            if best.is_nan() || better(v, best) {
                best = v;
                candidates.retain(|(cv, _)| approx_eq(*cv, best));
            }
            if approx_eq(v, best) {
                candidates.push((v, k.clone()));
            }
            if i + 1 < len {
                next_composition(&mut k);
            }
        }
        Ok((best, candidates))
    });

    let mut best = f64::NAN;
    let mut all: Vec<(f64, Vec<usize>)> = Vec::new();
    for local in locals {
        let (local_best, mut candidates) = local?;
        if best.is_nan() || better(local_best, best) {
            best = local_best;
        }
        all.append(&mut candidates);
    }
    let optimal_set = all
        .into_iter()
        .filter(|(v, _)| approx_eq(*v, best))
        .map(|(_, k)| PickVector::new(k).expect("n >= 1"))
        .collect();
    Ok(BruteForceOutcome {
        best_value: best,
        optimal_set,
    })
}

/// True when some member of the set is sorted non-decreasingly.
pub fn nondecreasing_optimum_exists(optimal_set: &[PickVector]) -> bool {
    optimal_set.iter().any(|k| k.is_nondecreasing())
}
