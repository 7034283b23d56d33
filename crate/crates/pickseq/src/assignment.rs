//! Price of assigning agents to picking positions: how much ex-post welfare
//! can swing between the best and the worst ordering of a fixed profile,
//! with closed-form bounds and the adversarial instance attaining them.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec;
use crate::profile::{PickVector, PreferenceProfile, WelfareKind};
use crate::scoring::ScoringVector;

/// Default ceiling on the number of agents: beyond 9 the `n!` orderings are
/// no longer enumerable in reasonable time.
pub const DEFAULT_PERMUTATION_CAP: usize = 9;

/// Permutations per parallel work unit.
const CHUNK: u64 = 4096;

/// Outcome of an exact max/min scan over all agent-to-position assignments.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PriceReport {
    pub welfare: WelfareKind,
    #[serde(with = "crate::io::maybe_inf")]
    pub exact_max: f64,
    #[serde(with = "crate::io::maybe_inf")]
    pub exact_min: f64,
    /// `exact_max / exact_min`; positive infinity when the worst ordering
    /// has zero welfare.
    #[serde(with = "crate::io::maybe_inf")]
    pub ratio: f64,
    /// Set when the ratio is not finite.
    pub infinite: bool,
    #[serde(with = "crate::io::maybe_inf_opt")]
    pub lower_bound: Option<f64>,
    #[serde(with = "crate::io::maybe_inf_opt")]
    pub upper_bound: Option<f64>,
}

/// One bound value per welfare kind; entries may be positive infinity when
/// a denominator vanishes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WelfareBounds {
    #[serde(with = "crate::io::maybe_inf")]
    pub utilitarian: f64,
    #[serde(with = "crate::io::maybe_inf")]
    pub egalitarian: f64,
    #[serde(with = "crate::io::maybe_inf")]
    pub nash: f64,
}

impl WelfareBounds {
    pub fn get(&self, kind: WelfareKind) -> f64 {
        match kind {
            WelfareKind::Utilitarian => self.utilitarian,
            WelfareKind::Egalitarian => self.egalitarian,
            WelfareKind::Nash => self.nash,
        }
    }
}

fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

/// Permutation of `0..n` at position `rank` in lexicographic order.
fn permutation_at_rank(n: usize, rank: u64) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..n).collect();
    let mut out = Vec::with_capacity(n);
    let mut f = factorial(n);
    let mut r = rank;
    for i in 0..n {
        f /= (n - i) as u64;
        let idx = (r / f) as usize;
        r %= f;
        out.push(pool.remove(idx));
    }
    out
}

/// Ex-post welfare of running the sequence with positions occupied by
/// `order[pos]`. Walking an agent's ranking gives item ranks directly, so no
/// profile copies are made.
fn welfare_for_order(
    profile: &PreferenceProfile,
    order: &[usize],
    k: &PickVector,
    s: &ScoringVector,
    kind: WelfareKind,
    taken: &mut [bool],
) -> f64 {
    taken.iter_mut().for_each(|t| *t = false);
    let mut acc = match kind {
        WelfareKind::Utilitarian => 0.0,
        WelfareKind::Egalitarian => f64::INFINITY,
        WelfareKind::Nash => 1.0,
    };
    for (pos, &agent) in order.iter().enumerate() {
        let quota = k.counts()[pos];
        let mut picked = 0;
        let mut utility = 0.0;
        for (idx, &item) in profile.ranking(agent).iter().enumerate() {
            if picked == quota {
                break;
            }
            if !taken[item] {
                taken[item] = true;
                utility += s.scores()[idx];
                picked += 1;
            }
        }
        acc = match kind {
            WelfareKind::Utilitarian => acc + utility,
            WelfareKind::Egalitarian => acc.min(utility),
            WelfareKind::Nash => acc * utility,
        };
    }
    acc
}

fn check_dims(profile: &PreferenceProfile, k: &PickVector, s: &ScoringVector) -> Result<()> {
    if k.n() != profile.n() || k.m() != profile.m() || s.m() != profile.m() {
        return Err(Error::Dimension(format!(
            "profile ({} agents, {} items), pick vector ({} agents, {} items) and scoring ({} items) disagree",
            profile.n(),
            profile.m(),
            k.n(),
            k.m(),
            s.m()
        )));
    }
    Ok(())
}

/// Scans all `n!` assignments of agents to positions and reports the extreme
/// ex-post welfare values and their ratio.
///
/// When some agents share a ranking, orderings that induce the same sequence
/// of rankings are evaluated once via a memo; otherwise disjoint rank ranges
/// are scanned in parallel.
pub fn price_exact(
    profile: &PreferenceProfile,
    k: &PickVector,
    s: &ScoringVector,
    kind: WelfareKind,
    max_agents: usize,
) -> Result<PriceReport> {
    check_dims(profile, k, s)?;
    let n = profile.n();
    if n > max_agents.min(20) {
        // 21! no longer fits in u64, and 20! orderings are unenumerable
        // anyway, so 20 bounds any user-supplied cap.
        return Err(Error::Input(format!(
            "{n} agents means {n}! orderings; the cap is {} agents",
            max_agents.min(20)
        )));
    }

    // Identify duplicate rankings (first-seen class ids).
    let mut class_of: Vec<u32> = Vec::with_capacity(n);
    let mut classes: HashMap<&[usize], u32> = HashMap::new();
    for agent in 0..n {
        let next = classes.len() as u32;
        let id = *classes.entry(profile.ranking(agent)).or_insert(next);
        class_of.push(id);
    }
    let total = factorial(n);

    let (max, min) = if classes.len() < n {
        // Duplicates: memoize per sequence of ranking classes.
        let mut memo: HashMap<Vec<u32>, f64> = HashMap::new();
        let mut taken = vec![false; profile.m()];
        let mut max = f64::NEG_INFINITY;
        let mut min = f64::INFINITY;
        for rank in 0..total {
            let order = permutation_at_rank(n, rank);
            let key: Vec<u32> = order.iter().map(|&a| class_of[a]).collect();
            let value = *memo
                .entry(key)
                .or_insert_with(|| welfare_for_order(profile, &order, k, s, kind, &mut taken));
            max = max.max(value);
            min = min.min(value);
        }
        (max, min)
    } else {
        let chunks = total.div_ceil(CHUNK) as usize;
        let extremes: Vec<(f64, f64)> = exec::indexed_map(chunks, |c| {
            let start = c as u64 * CHUNK;
            let end = (start + CHUNK).min(total);
            let mut taken = vec![false; profile.m()];
            let mut max = f64::NEG_INFINITY;
            let mut min = f64::INFINITY;
            for rank in start..end {
                let order = permutation_at_rank(n, rank);
                let value = welfare_for_order(profile, &order, k, s, kind, &mut taken);
                max = max.max(value);
                min = min.min(value);
            }
            (max, min)
        });
        extremes
            .into_iter()
            .fold((f64::NEG_INFINITY, f64::INFINITY), |(ma, mi), (a, b)| {
                (ma.max(a), mi.min(b))
            })
    };

    let ratio = if min == 0.0 { f64::INFINITY } else { max / min };
    Ok(PriceReport {
        welfare: kind,
        exact_max: max,
        exact_min: min,
        ratio,
        infinite: !ratio.is_finite(),
        lower_bound: None,
        upper_bound: None,
    })
}

fn guarded_ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        f64::INFINITY
    } else {
        num / den
    }
}

/// Log-domain product ratio `prod(nums) / prod(dens)`; infinite as soon as
/// any denominator factor vanishes.
fn product_ratio(nums: impl Iterator<Item = f64>, dens: impl Iterator<Item = f64>) -> f64 {
    let mut log_num = 0.0;
    for v in nums {
        log_num += v.ln();
    }
    let mut log_den = 0.0;
    for v in dens {
        if v == 0.0 {
            return f64::INFINITY;
        }
        log_den += v.ln();
    }
    (log_num - log_den).exp()
}

/// Closed-form upper bounds on the three prices for a given pick vector:
/// best case over the worst case of each agent's block of ranks.
pub fn upper_bounds(k: &PickVector, s: &ScoringVector) -> Result<WelfareBounds> {
    if k.m() != s.m() {
        return Err(Error::Dimension(format!(
            "pick vector distributes {} items but the scoring vector has {}",
            k.m(),
            s.m()
        )));
    }
    let pref = s.prefix_sums();
    let offsets = k.offsets();
    let total = pref[s.m()];

    let best_total: f64 = k.counts().iter().map(|&ki| pref[ki]).sum();
    let utilitarian = guarded_ratio(best_total, total);

    let k_min = *k.counts().iter().min().expect("n >= 1");
    let worst_block = k
        .counts()
        .iter()
        .zip(&offsets)
        .map(|(&ki, &ci)| pref[ci + ki] - pref[ci])
        .fold(f64::INFINITY, f64::min);
    let egalitarian = guarded_ratio(pref[k_min], worst_block);

    let nash = product_ratio(
        k.counts().iter().map(|&ki| pref[ki]),
        k.counts()
            .iter()
            .zip(&offsets)
            .map(|(&ki, &ci)| pref[ci + ki] - pref[ci]),
    );

    Ok(WelfareBounds {
        utilitarian,
        egalitarian,
        nash,
    })
}

/// The guaranteed price levels attained by [`adversarial_instance`] with the
/// uniform pick vector `(d, ..., d)`.
pub fn proposition_lower_bounds(n: usize, d: usize, s: &ScoringVector) -> Result<WelfareBounds> {
    let m = s.m();
    if n < 2 || d == 0 || m != n * d {
        return Err(Error::Input(format!(
            "lower bounds need m = n*d with n >= 2 and d >= 1 (got n = {n}, d = {d}, m = {m})"
        )));
    }
    let pref = s.prefix_sums();
    let top = pref[d];
    let second = pref[2 * d] - pref[d];
    let total = pref[m];

    let utilitarian = guarded_ratio((n - 1) as f64 * top + second, total);
    let egalitarian = guarded_ratio(second, pref[m] - pref[(n - 1) * d]);
    let nash = product_ratio(
        std::iter::repeat_n(top, n - 1).chain([second]),
        (1..=n).map(|i| pref[i * d] - pref[(i - 1) * d]),
    );

    Ok(WelfareBounds {
        utilitarian,
        egalitarian,
        nash,
    })
}

/// Builds the adversarial profile showing the price bounds are nearly tight.
///
/// Items split into blocks of size `d`: agents 2..n own pairwise disjoint
/// blocks, agent 1 shares agent 2's block, and one leftover block remains.
/// Every agent ranks her own block first and the other blocks by ascending
/// index; the leftover block goes last, except for agent 1 who ranks it
/// right after her own block. Returns the profile and the uniform pick
/// vector `(d, ..., d)`.
pub fn adversarial_instance(
    n: usize,
    d: usize,
    s: &ScoringVector,
) -> Result<(PreferenceProfile, PickVector)> {
    let m = s.m();
    if n < 2 {
        return Err(Error::Input(format!(
            "the adversarial instance needs at least two agents, got {n}"
        )));
    }
    if d == 0 || m != n * d {
        return Err(Error::Input(format!(
            "the adversarial instance needs m = n*d (got n = {n}, d = {d}, m = {m})"
        )));
    }
    // Block b for b in 2..=n holds items (b-2)*d .. (b-1)*d; block 1 aliases
    // block 2; the leftover block n+1 holds the last d items.
    let block_items = |b: usize| -> std::ops::Range<usize> {
        if b == 1 {
            0..d
        } else if b <= n {
            (b - 2) * d..(b - 1) * d
        } else {
            (n - 1) * d..n * d
        }
    };
    let mut rankings = Vec::with_capacity(n);
    for agent in 1..=n {
        let mut blocks: Vec<usize> = vec![agent];
        if agent == 1 {
            blocks.push(n + 1);
        }
        blocks.extend((1..=n).filter(|&b| b != agent));
        if agent != 1 {
            blocks.push(n + 1);
        }
        let mut ranking = Vec::with_capacity(m);
        let mut placed = vec![false; m];
        for b in blocks {
            for item in block_items(b) {
                if !placed[item] {
                    placed[item] = true;
                    ranking.push(item);
                }
            }
        }
        rankings.push(ranking);
    }
    let profile = PreferenceProfile::new(rankings)?;
    let k = PickVector::new(vec![d; n])?;
    Ok((profile, k))
}
