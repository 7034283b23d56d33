//! Independent oracles shared by the integration suites. Nothing here calls
//! the table builders under test.
#![allow(dead_code)] // each test binary uses its own subset

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use pickseq::ScoringVector;

/// Heap's algorithm over `0..m`.
pub fn for_each_permutation(m: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(k: usize, items: &mut [usize], f: &mut impl FnMut(&[usize])) {
        if k <= 1 {
            f(items);
            return;
        }
        for i in 0..k - 1 {
            rec(k - 1, items, f);
            if k.is_multiple_of(2) {
                items.swap(i, k - 1);
            } else {
                items.swap(0, k - 1);
            }
        }
        rec(k - 1, items, f);
    }
    let mut items: Vec<usize> = (0..m).collect();
    if m == 0 {
        f(&items);
        return;
    }
    rec(m, &mut items, f);
}

/// Full-independence expected utilities by exhaustive enumeration: average
/// the greedy top-`k` utility over every ranking of one agent and every
/// equiprobable removed set of size `t`. Returns `rows[k][t]`.
pub fn fi_table_by_enumeration(s: &ScoringVector) -> Vec<Vec<f64>> {
    let m = s.m();
    // sums[t][k] accumulates utility over (ranking, removed-set) pairs.
    let mut sums = vec![vec![0.0_f64; m + 1]; m + 1];
    let mut pairs = vec![0u64; m + 1];
    let masks: Vec<u32> = (0..1u32 << m).collect();
    let mut first = true;
    for_each_permutation(m, &mut |ranking| {
        for &mask in &masks {
            let t = mask.count_ones() as usize;
            if first {
                pairs[t] += 1;
            }
            let mut acc = 0.0;
            let mut picked = 0;
            for (pos, &item) in ranking.iter().enumerate() {
                if mask & (1 << item) == 0 {
                    acc += s.scores()[pos];
                    picked += 1;
                    sums[t][picked] += acc;
                }
            }
        }
        first = false;
    });
    let factorial: u64 = (1..=m as u64).product::<u64>().max(1);
    (0..=m)
        .map(|k| {
            (0..=(m - k))
                .map(|t| sums[t][k] / (factorial * pairs[t]) as f64)
                .collect()
        })
        .collect()
}

fn big(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// The full-independence recursion evaluated in exact rational arithmetic
/// for integer scoring vectors. Returns `rows[k][t]`.
pub fn fi_table_exact(scores: &[i64]) -> Vec<Vec<BigRational>> {
    let m = scores.len();
    let mut prev = vec![vec![BigRational::zero(); m + 1]; m + 1];
    let mut cur = prev.clone();
    for j in (1..=m).rev() {
        let avail = m - j + 1;
        for k in 0..=avail {
            for t in 0..=(avail - k) {
                cur[k][t] = if k == 0 {
                    BigRational::zero()
                } else if t == 0 {
                    cur[k - 1][0].clone() + big(scores[j + k - 2])
                } else {
                    let p_gone = big(t as i64) / big(avail as i64);
                    let free = BigRational::one() - p_gone.clone();
                    free * (big(scores[j - 1]) + prev[k - 1][t].clone())
                        + p_gone * prev[k][t - 1].clone()
                };
            }
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    (0..=m)
        .map(|k| (0..=(m - k)).map(|t| prev[k][t].clone()).collect())
        .collect()
}

#[allow(dead_code)]
pub fn rational_to_f64(r: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().expect("test-scale rationals fit in f64")
}
