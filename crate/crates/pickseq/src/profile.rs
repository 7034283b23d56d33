//! Preference profiles, pick vectors, greedy allocation and ex-post welfare.

use serde::{Deserialize, Serialize};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scoring::ScoringVector;

/// Social welfare functional applied to a vector of (expected or realized)
/// agent utilities.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WelfareKind {
    /// Sum of utilities.
    Utilitarian,
    /// Minimum utility.
    Egalitarian,
    /// Product of utilities.
    Nash,
}

impl WelfareKind {
    pub const ALL: [WelfareKind; 3] = [
        WelfareKind::Utilitarian,
        WelfareKind::Egalitarian,
        WelfareKind::Nash,
    ];
}

impl std::fmt::Display for WelfareKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            WelfareKind::Utilitarian => "utilitarian",
            WelfareKind::Egalitarian => "egalitarian",
            WelfareKind::Nash => "nash",
        };
        f.write_str(name)
    }
}

impl FromStr for WelfareKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "u" | "utilitarian" => Ok(WelfareKind::Utilitarian),
            "e" | "egalitarian" => Ok(WelfareKind::Egalitarian),
            "n" | "nash" => Ok(WelfareKind::Nash),
            other => Err(Error::Input(format!(
                "unknown welfare kind {other:?} (expected u | e | n)"
            ))),
        }
    }
}

/// Distribution over preference profiles.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ProbModel {
    /// All agents share one uniformly drawn ranking.
    FullCorrelation,
    /// Each agent's ranking is drawn uniformly and independently
    /// (impartial culture).
    FullIndependence,
    /// With probability `lambda` the profile is drawn under full
    /// independence, otherwise under full correlation.
    Mixture(f64),
}

impl ProbModel {
    /// Checks the mixture weight is a probability.
    pub fn validate(&self) -> Result<()> {
        if let ProbModel::Mixture(l) = self {
            if !l.is_finite() || !(0.0..=1.0).contains(l) {
                return Err(Error::Input(format!(
                    "mixture weight must lie in [0, 1], got {l}"
                )));
            }
        }
        Ok(())
    }
}

impl std::fmt::Display for ProbModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ProbModel::FullCorrelation => f.write_str("fc"),
            ProbModel::FullIndependence => f.write_str("fi"),
            ProbModel::Mixture(l) => write!(f, "mix:{l}"),
        }
    }
}

impl FromStr for ProbModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let model = match s {
            "fc" => ProbModel::FullCorrelation,
            "fi" => ProbModel::FullIndependence,
            other => match other.strip_prefix("mix:") {
                Some(weight) => {
                    let l: f64 = weight.parse().map_err(|e| {
                        Error::Input(format!("bad mixture weight {weight:?}: {e}"))
                    })?;
                    ProbModel::Mixture(l)
                }
                None => {
                    return Err(Error::Input(format!(
                        "unknown model {other:?} (expected fi | fc | mix:<lambda>)"
                    )))
                }
            },
        };
        model.validate()?;
        Ok(model)
    }
}

impl Serialize for ProbModel {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        ser.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ProbModel {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(de)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// Whether item values are utilities to maximize or costs to minimize.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ItemPolarity {
    Goods,
    Bads,
}

/// One strict ranking per agent over items `0..m`, most preferred first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PreferenceProfile {
    rankings: Vec<Vec<usize>>,
}

impl PreferenceProfile {
    /// Validates that every ranking is a permutation of `0..m` (with `m`
    /// taken from the first ranking) and that there is at least one agent.
    pub fn new(rankings: Vec<Vec<usize>>) -> Result<Self> {
        if rankings.is_empty() {
            return Err(Error::Input("a profile needs at least one agent".into()));
        }
        let m = rankings[0].len();
        let mut seen = vec![false; m];
        for (a, ranking) in rankings.iter().enumerate() {
            if ranking.len() != m {
                return Err(Error::Dimension(format!(
                    "agent {a} ranks {} items but agent 0 ranks {m}",
                    ranking.len()
                )));
            }
            seen.iter_mut().for_each(|s| *s = false);
            for &item in ranking {
                if item >= m {
                    return Err(Error::Input(format!(
                        "agent {a} ranks unknown item {item} (m = {m})"
                    )));
                }
                if seen[item] {
                    return Err(Error::Input(format!(
                        "agent {a} ranks item {item} twice"
                    )));
                }
                seen[item] = true;
            }
        }
        Ok(Self { rankings })
    }

    /// Profile where all `n` agents share `ranking`.
    pub fn identical(ranking: Vec<usize>, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Input("a profile needs at least one agent".into()));
        }
        Self::new(vec![ranking; n])
    }

    pub fn n(&self) -> usize {
        self.rankings.len()
    }

    pub fn m(&self) -> usize {
        self.rankings[0].len()
    }

    pub fn rankings(&self) -> &[Vec<usize>] {
        &self.rankings
    }

    pub fn ranking(&self, agent: usize) -> &[usize] {
        &self.rankings[agent]
    }

    /// 1-based rank of each item in `agent`'s ranking: `out[item] = rank`.
    pub fn ranks_of(&self, agent: usize) -> Vec<usize> {
        let mut out = vec![0; self.m()];
        for (pos, &item) in self.rankings[agent].iter().enumerate() {
            out[item] = pos + 1;
        }
        out
    }

    /// Profile with agent positions permuted: position `i` is occupied by
    /// original agent `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n() {
            return Err(Error::Dimension(format!(
                "permutation over {} agents applied to a {}-agent profile",
                perm.len(),
                self.n()
            )));
        }
        let rankings = perm
            .iter()
            .map(|&a| {
                self.rankings
                    .get(a)
                    .cloned()
                    .ok_or_else(|| Error::Input(format!("permutation names unknown agent {a}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(rankings)
    }
}

/// Per-agent pick counts `(k_1, ..., k_n)`; a composition of `m` into `n`
/// nonnegative parts once validated against an instance. Serializes as the
/// bare count array.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PickVector {
    counts: Vec<usize>,
}

impl PickVector {
    pub fn new(counts: Vec<usize>) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::Input("a pick vector needs at least one agent".into()));
        }
        Ok(Self { counts })
    }

    pub fn n(&self) -> usize {
        self.counts.len()
    }

    /// Total number of items `m = sum(k_i)`.
    pub fn m(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    /// Prefix sums `c_i = k_1 + ... + k_{i-1}`: how many items are gone when
    /// agent `i` starts picking.
    pub fn offsets(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.counts.len());
        let mut acc = 0;
        for &k in &self.counts {
            out.push(acc);
            acc += k;
        }
        out
    }

    pub fn is_nondecreasing(&self) -> bool {
        self.counts.windows(2).all(|w| w[0] <= w[1])
    }
}

/// Outcome of running a picking sequence on a concrete profile.
#[derive(Clone, Debug, PartialEq)]
pub struct Allocation {
    /// `bundles[a]` holds agent `a`'s items in the order she picked them
    /// (i.e. by increasing rank in her own ranking).
    bundles: Vec<Vec<usize>>,
    /// Every pick event `(agent, item)` in chronological order.
    pick_order: Vec<(usize, usize)>,
}

impl Allocation {
    pub fn bundles(&self) -> &[Vec<usize>] {
        &self.bundles
    }

    pub fn bundle(&self, agent: usize) -> &[usize] {
        &self.bundles[agent]
    }

    pub fn pick_order(&self) -> &[(usize, usize)] {
        &self.pick_order
    }
}

fn check_instance(profile: &PreferenceProfile, k: &PickVector, s: &ScoringVector) -> Result<()> {
    if k.n() != profile.n() {
        return Err(Error::Dimension(format!(
            "pick vector has {} entries for {} agents",
            k.n(),
            profile.n()
        )));
    }
    if k.m() != profile.m() {
        return Err(Error::Dimension(format!(
            "pick vector distributes {} items but the profile has {}",
            k.m(),
            profile.m()
        )));
    }
    if s.m() != profile.m() {
        return Err(Error::Dimension(format!(
            "scoring vector has {} entries for {} items",
            s.m(),
            profile.m()
        )));
    }
    Ok(())
}

/// Runs the non-interleaving picking sequence `k` on `profile`: agent 0
/// greedily removes its `k_0` most preferred items, then agent 1, and so on.
pub fn greedy_allocate(
    profile: &PreferenceProfile,
    k: &PickVector,
    s: &ScoringVector,
) -> Result<Allocation> {
    check_instance(profile, k, s)?;
    let m = profile.m();
    let mut taken = vec![false; m];
    let mut bundles = Vec::with_capacity(profile.n());
    let mut pick_order = Vec::with_capacity(m);
    for (agent, &quota) in k.counts().iter().enumerate() {
        let mut bundle = Vec::with_capacity(quota);
        let mut cursor = profile.ranking(agent).iter();
        while bundle.len() < quota {
            // Safe: sum(k) = m guarantees enough free items remain.
            let &item = cursor.next().expect("quota exceeds available items");
            if !taken[item] {
                taken[item] = true;
                bundle.push(item);
                pick_order.push((agent, item));
            }
        }
        bundles.push(bundle);
    }
    Ok(Allocation {
        bundles,
        pick_order,
    })
}

/// Realized utility of each agent: the sum of the scores of the ranks (in
/// her own ranking) of the items she received.
pub fn ex_post_utilities(
    alloc: &Allocation,
    profile: &PreferenceProfile,
    s: &ScoringVector,
) -> Result<Vec<f64>> {
    if alloc.bundles.len() != profile.n() {
        return Err(Error::Dimension(format!(
            "allocation covers {} agents but the profile has {}",
            alloc.bundles.len(),
            profile.n()
        )));
    }
    if s.m() != profile.m() {
        return Err(Error::Dimension(format!(
            "scoring vector has {} entries for {} items",
            s.m(),
            profile.m()
        )));
    }
    let mut utilities = Vec::with_capacity(profile.n());
    for (agent, bundle) in alloc.bundles.iter().enumerate() {
        let ranks = profile.ranks_of(agent);
        let mut total = 0.0;
        for &item in bundle {
            total += s.score_at_rank(ranks[item]);
        }
        utilities.push(total);
    }
    Ok(utilities)
}

/// Applies a welfare functional to realized (or expected) utilities.
/// Nash welfare is the plain product.
pub fn ex_post_welfare(kind: WelfareKind, utilities: &[f64]) -> f64 {
    match kind {
        WelfareKind::Utilitarian => utilities.iter().sum(),
        WelfareKind::Egalitarian => utilities.iter().copied().fold(f64::INFINITY, f64::min),
        WelfareKind::Nash => utilities.iter().product(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scoring::{make_scoring, ScoringKind};

    fn borda(m: usize) -> ScoringVector {
        make_scoring(ScoringKind::Borda, m).unwrap()
    }

    #[test]
    fn greedy_two_agents_hand_trace() {
        // Ann: i0 > i1 > i2, Bob: i1 > i0 > i2, k = (1, 2).
        let profile = PreferenceProfile::new(vec![vec![0, 1, 2], vec![1, 0, 2]]).unwrap();
        let k = PickVector::new(vec![1, 2]).unwrap();
        let alloc = greedy_allocate(&profile, &k, &borda(3)).unwrap();
        assert_eq!(alloc.bundle(0), &[0]);
        assert_eq!(alloc.bundle(1), &[1, 2]);
        assert_eq!(alloc.pick_order(), &[(0, 0), (1, 1), (1, 2)]);
    }

    #[test]
    fn greedy_first_agent_takes_all() {
        let profile = PreferenceProfile::new(vec![vec![2, 0, 1], vec![1, 0, 2]]).unwrap();
        let k = PickVector::new(vec![3, 0]).unwrap();
        let alloc = greedy_allocate(&profile, &k, &borda(3)).unwrap();
        assert_eq!(alloc.bundle(0), &[2, 0, 1]);
        assert!(alloc.bundle(1).is_empty());
    }

    #[test]
    fn greedy_identical_rankings_split_by_rank_blocks() {
        let ranking: Vec<usize> = vec![6, 5, 4, 3, 2, 1, 0];
        let profile = PreferenceProfile::identical(ranking, 3).unwrap();
        let k = PickVector::new(vec![2, 2, 3]).unwrap();
        let alloc = greedy_allocate(&profile, &k, &borda(7)).unwrap();
        assert_eq!(alloc.bundle(0), &[6, 5]);
        assert_eq!(alloc.bundle(1), &[4, 3]);
        assert_eq!(alloc.bundle(2), &[2, 1, 0]);
    }

    #[test]
    fn ex_post_utsingle_and_sum() {
        let profile = PreferenceProfile::new(vec![vec![0, 1, 2], vec![1, 0, 2]]).unwrap();
        let s = borda(3);
        // Ann receives her top item.
        let alloc = greedy_allocate(&profile, &PickVector::new(vec![1, 2]).unwrap(), &s).unwrap();
        let u = ex_post_utilities(&alloc, &profile, &s).unwrap();
        assert_eq!(u[0], 3.0);
        // Bob got ranks 1 and 3 in his own order: 3 + 1.
        assert_eq!(u[1], 4.0);
    }

    #[test]
    fn ex_post_empty_bundle_scores_zero() {
        let profile = PreferenceProfile::new(vec![vec![0, 1], vec![0, 1]]).unwrap();
        let s = borda(2);
        let alloc = greedy_allocate(&profile, &PickVector::new(vec![2, 0]).unwrap(), &s).unwrap();
        let u = ex_post_utilities(&alloc, &profile, &s).unwrap();
        assert_eq!(u, vec![3.0, 0.0]);
    }

    #[test]
    fn welfare_kinds() {
        assert_eq!(ex_post_welfare(WelfareKind::Utilitarian, &[3.0, 4.0]), 7.0);
        assert_eq!(
            ex_post_welfare(WelfareKind::Egalitarian, &[13.0, 12.0, 12.0]),
            12.0
        );
        assert_eq!(
            ex_post_welfare(WelfareKind::Nash, &[13.0, 12.0, 12.0]),
            1872.0
        );
    }

    #[test]
    fn profile_rejects_non_permutations() {
        assert!(PreferenceProfile::new(vec![vec![0, 0]]).is_err());
        assert!(PreferenceProfile::new(vec![vec![0, 2]]).is_err());
        assert!(PreferenceProfile::new(vec![vec![0, 1], vec![0]]).is_err());
        assert!(PreferenceProfile::new(vec![]).is_err());
    }

    #[test]
    fn dimension_mismatches_are_input_errors() {
        let profile = PreferenceProfile::new(vec![vec![0, 1, 2]]).unwrap();
        let bad_k = PickVector::new(vec![1, 2]).unwrap();
        assert!(greedy_allocate(&profile, &bad_k, &borda(3)).is_err());
        let short_k = PickVector::new(vec![2]).unwrap();
        assert!(greedy_allocate(&profile, &short_k, &borda(3)).is_err());
        let ok_k = PickVector::new(vec![3]).unwrap();
        assert!(greedy_allocate(&profile, &ok_k, &borda(2)).is_err());
    }

    #[test]
    fn model_parse_and_display_round_trip() {
        for text in ["fc", "fi", "mix:0.25"] {
            let model: ProbModel = text.parse().unwrap();
            assert_eq!(model.to_string(), text);
        }
        assert!("mix:1.5".parse::<ProbModel>().is_err());
        assert!("mallows".parse::<ProbModel>().is_err());
    }

    #[test]
    fn welfare_parse_accepts_short_and_long() {
        assert_eq!(
            "u".parse::<WelfareKind>().unwrap(),
            WelfareKind::Utilitarian
        );
        assert_eq!("nash".parse::<WelfareKind>().unwrap(), WelfareKind::Nash);
        assert!("x".parse::<WelfareKind>().is_err());
    }

    #[test]
    fn offsets_are_prefix_sums() {
        let k = PickVector::new(vec![3, 0, 2]).unwrap();
        assert_eq!(k.offsets(), vec![0, 3, 3]);
        assert_eq!(k.m(), 5);
        assert!(!k.is_nondecreasing());
        assert!(PickVector::new(vec![2, 2, 3]).unwrap().is_nondecreasing());
    }
}
