//! Cross-module properties: enumeration oracles against the closed-form
//! builders, structural invariants under random inputs, and Monte Carlo
//! consistency.

// Index pairs (k, t) are the domain language of the tables.
#![allow(clippy::needless_range_loop)]

mod common;

use proptest::prelude::*;

use pickseq::elicitation::{concentration, LongRecords};
use pickseq::oracle::{brute_force_optimize, DEFAULT_ORACLE_CAP};
use pickseq::simulator::{run_simulation, sample_profile, SimConfig};
use pickseq::utility::UtilityTable;
use pickseq::{
    approx_eq, build_fc, build_fi, build_mixture, evaluate, ex_post_utilities, ex_post_welfare,
    greedy_allocate, make_scoring, optimize, ItemPolarity, PickVector, ProbModel, ScoringKind,
    ScoringVector, WelfareKind,
};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn builtin(kind: ScoringKind, m: usize) -> ScoringVector {
    make_scoring(kind, m).unwrap()
}

#[test]
fn fi_recursion_matches_exhaustive_enumeration_small() {
    for kind in [
        ScoringKind::Borda,
        ScoringKind::Lexicographic,
        ScoringKind::OrderStatistic,
    ] {
        for m in 1..=5usize {
            let s = builtin(kind, m);
            let table = build_fi(&s);
            let oracle = common::fi_table_by_enumeration(&s);
            for k in 0..=m {
                for t in 0..=(m - k) {
                    let got = table.value(k, t);
                    let want = oracle[k][t];
                    assert!(
                        (got - want).abs() <= 1e-9 * want.abs().max(1.0),
                        "{kind:?} m={m} u({k},{t}): recursion {got} vs enumeration {want}"
                    );
                }
            }
        }
    }
}

#[test]
fn fi_recursion_matches_exhaustive_enumeration_m7_borda() {
    let s = builtin(ScoringKind::Borda, 7);
    let table = build_fi(&s);
    let oracle = common::fi_table_by_enumeration(&s);
    for k in 0..=7usize {
        for t in 0..=(7 - k) {
            let got = table.value(k, t);
            let want = oracle[k][t];
            assert!(
                (got - want).abs() <= 1e-9 * want.abs().max(1.0),
                "u({k},{t}): recursion {got} vs enumeration {want}"
            );
        }
    }
}

#[test]
fn mixture_is_the_exact_linear_combination() {
    let s = builtin(ScoringKind::Borda, 9);
    let fc = build_fc(&s);
    let fi = build_fi(&s);
    for lambda in [0.0, 0.25, 0.5, 0.9, 1.0] {
        let mix = build_mixture(&s, lambda).unwrap();
        for k in 0..=9usize {
            for t in 0..=(9 - k) {
                let expect = lambda * fi.value(k, t) + (1.0 - lambda) * fc.value(k, t);
                assert_eq!(mix.value(k, t), expect);
            }
        }
    }
}

/// Deterministic battery of simulator configs: at least 95% of the agent
/// cells must land within three standard errors of the table value.
#[test]
fn monte_carlo_means_are_consistent_with_tables() {
    struct Case {
        model: ProbModel,
        kind: ScoringKind,
        k: Vec<usize>,
        samples: u64,
        seed: u64,
    }
    let cases = [
        Case {
            model: ProbModel::FullCorrelation,
            kind: ScoringKind::Borda,
            k: vec![2, 2, 3],
            samples: 20_000,
            seed: 11,
        },
        Case {
            model: ProbModel::FullIndependence,
            kind: ScoringKind::Borda,
            k: vec![2, 2, 3],
            samples: 30_000,
            seed: 12,
        },
        Case {
            model: ProbModel::FullIndependence,
            kind: ScoringKind::OrderStatistic,
            k: vec![1, 2, 3],
            samples: 30_000,
            seed: 13,
        },
        Case {
            model: ProbModel::Mixture(0.5),
            kind: ScoringKind::Borda,
            k: vec![2, 2, 2],
            samples: 30_000,
            seed: 14,
        },
        Case {
            model: ProbModel::Mixture(0.25),
            kind: ScoringKind::Lexicographic,
            k: vec![1, 1, 3],
            samples: 30_000,
            seed: 15,
        },
        Case {
            model: ProbModel::FullIndependence,
            kind: ScoringKind::Lexicographic,
            k: vec![0, 4],
            samples: 20_000,
            seed: 16,
        },
        Case {
            model: ProbModel::FullCorrelation,
            kind: ScoringKind::OrderStatistic,
            k: vec![1, 1, 3],
            samples: 20_000,
            seed: 17,
        },
    ];
    let mut cells = 0usize;
    let mut misses = Vec::new();
    for case in &cases {
        let m: usize = case.k.iter().sum();
        let s = builtin(case.kind, m);
        let table = UtilityTable::build(case.model, &s).unwrap();
        let k = PickVector::new(case.k.clone()).unwrap();
        let cfg = SimConfig::new(case.model, k.clone(), s, case.samples, case.seed).unwrap();
        let report = run_simulation(&cfg);
        for ((&ki, &ci), (mean, stderr)) in k
            .counts()
            .iter()
            .zip(&k.offsets())
            .zip(report.agent_mean.iter().zip(&report.agent_stderr))
        {
            cells += 1;
            let expect = table.value(ki, ci);
            if (mean - expect).abs() > 3.0 * stderr {
                misses.push(format!(
                    "{:?} {:?} k={:?} cell ({ki},{ci}): mean {mean}, expect {expect}, stderr {stderr}",
                    case.model, case.kind, case.k
                ));
            }
        }
    }
    assert!(
        misses.len() * 20 <= cells,
        "{} of {cells} cells beyond 3 standard errors:\n{}",
        misses.len(),
        misses.join("\n")
    );
}

#[test]
fn concentration_is_invariant_under_monotone_rescaling() {
    let base = [
        ("a", "x", 90.0),
        ("a", "y", 40.0),
        ("a", "z", 10.0),
        ("b", "x", 20.0),
        ("b", "y", 80.0),
        ("b", "z", 80.0),
        ("c", "x", 55.0),
        ("c", "y", 54.0),
    ];
    let build = |f: &dyn Fn(f64) -> f64| {
        LongRecords::new(
            base.iter()
                .map(|(p, i, s)| (p.to_string(), i.to_string(), f(*s)))
                .collect(),
        )
        .unwrap()
    };
    let original = concentration(&build(&|x| x)).unwrap();
    let squared = concentration(&build(&|x| x * x / 100.0)).unwrap();
    let affine = concentration(&build(&|x| 0.5 * x + 25.0)).unwrap();
    assert_eq!(original, squared);
    assert_eq!(original, affine);
    assert!(original.alpha >= 0.0 && original.alpha <= 1.0);
    assert_eq!(original.lambda, 1.0 - original.alpha);
}

prop_compose! {
    /// Random non-increasing nonnegative scoring vector.
    fn scoring_strategy(max_len: usize)
        (raw in prop::collection::vec(0.0f64..100.0, 0..=max_len)) -> ScoringVector {
        let mut v = raw;
        v.sort_by(|a, b| b.total_cmp(a));
        ScoringVector::new(v).unwrap()
    }
}

prop_compose! {
    fn instance_strategy()
        (n in 1usize..=4, s in scoring_strategy(8), seed in any::<u64>()) -> (usize, ScoringVector, u64) {
        (n, s, seed)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// The DP agrees with exhaustive enumeration on arbitrary scoring
    /// vectors, all models, welfare kinds, and polarities.
    #[test]
    fn dp_matches_brute_force((n, s, seed) in instance_strategy(),
                              lambda in 0.0f64..=1.0,
                              kind_ix in 0usize..3,
                              model_ix in 0usize..3,
                              polarity_ix in 0usize..2) {
        let _ = seed;
        let model = match model_ix {
            0 => ProbModel::FullCorrelation,
            1 => ProbModel::FullIndependence,
            _ => ProbModel::Mixture(lambda),
        };
        let kind = WelfareKind::ALL[kind_ix];
        let polarity = if polarity_ix == 0 { ItemPolarity::Goods } else { ItemPolarity::Bads };
        let table = UtilityTable::build(model, &s).unwrap();
        let dp = optimize(n, &table, kind, polarity).unwrap();
        let brute = brute_force_optimize(n, &table, kind, polarity, DEFAULT_ORACLE_CAP).unwrap();
        prop_assert!(
            approx_eq(dp.value, brute.best_value),
            "dp {} vs brute {} (n={n}, m={}, {model:?}, {kind:?}, {polarity:?})",
            dp.value, brute.best_value, s.m()
        );
        // The DP's reconstruction must itself be near-optimal under evaluate.
        let (direct, _) = evaluate(&dp.k, &table, kind).unwrap();
        prop_assert!(approx_eq(direct, brute.best_value));
    }

    /// Greedy execution always partitions the items, respects the quotas,
    /// and lands between the block bounds.
    #[test]
    fn greedy_partition_and_utility_bounds((n, s, seed) in instance_strategy(),
                                           mix in 0.0f64..=1.0,
                                           split_seed in any::<u64>()) {
        let m = s.m();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let profile = sample_profile(ProbModel::Mixture(mix), n, m, &mut rng);
        // Random composition of m into n parts via a seeded bar placement.
        let mut bars_rng = ChaCha8Rng::seed_from_u64(split_seed);
        let mut counts = vec![0usize; n];
        for _ in 0..m {
            let a = rand::Rng::random_range(&mut bars_rng, 0..n);
            counts[a] += 1;
        }
        let k = PickVector::new(counts).unwrap();
        let alloc = greedy_allocate(&profile, &k, &s).unwrap();

        let mut seen = vec![false; m];
        for (agent, bundle) in alloc.bundles().iter().enumerate() {
            prop_assert_eq!(bundle.len(), k.counts()[agent]);
            for &item in bundle {
                prop_assert!(!seen[item], "item {} allocated twice", item);
                seen[item] = true;
            }
        }
        prop_assert!(seen.iter().all(|&s| s));

        let utilities = ex_post_utilities(&alloc, &profile, &s).unwrap();
        let pref = s.prefix_sums();
        for ((&ki, &ci), &u) in k.counts().iter().zip(&k.offsets()).zip(&utilities) {
            let best = pref[ki];
            let worst = pref[ci + ki] - pref[ci];
            prop_assert!(u <= best + 1e-9, "utility {} beats the best case {}", u, best);
            prop_assert!(u >= worst - 1e-9, "utility {} below the worst case {}", u, worst);
        }

        // The ex-post utilitarian welfare never drops below the scoring
        // total: the j-th pick is always worth at least s_j.
        let usw = ex_post_welfare(WelfareKind::Utilitarian, &utilities);
        prop_assert!(usw >= s.total() - 1e-9);
    }

    /// Under one shared ranking the utilities are exactly the rank blocks.
    #[test]
    fn identical_rankings_realize_block_sums((n, s, seed) in instance_strategy()) {
        let m = s.m();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let profile = sample_profile(ProbModel::FullCorrelation, n, m, &mut rng);
        let base = m / n;
        let mut counts = vec![base; n];
        counts[n - 1] += m - base * n;
        let k = PickVector::new(counts).unwrap();
        let alloc = greedy_allocate(&profile, &k, &s).unwrap();
        let utilities = ex_post_utilities(&alloc, &profile, &s).unwrap();
        let pref = s.prefix_sums();
        for ((&ki, &ci), &u) in k.counts().iter().zip(&k.offsets()).zip(&utilities) {
            let want = pref[ci + ki] - pref[ci];
            prop_assert!(
                (u - want).abs() <= 1e-9 * want.abs().max(1.0),
                "utility {} vs block sum {}",
                u,
                want
            );
        }
    }

    /// Tables from arbitrary scoring vectors are monotone: non-decreasing
    /// in k, non-increasing in t.
    #[test]
    fn tables_are_monotone(s in scoring_strategy(9), lambda in 0.0f64..=1.0) {
        let m = s.m();
        for table in [build_fc(&s), build_fi(&s), build_mixture(&s, lambda).unwrap()] {
            for k in 1..=m {
                for t in 0..=(m - k) {
                    prop_assert!(table.value(k, t) >= table.value(k - 1, t) - 1e-12);
                    if t > 0 {
                        prop_assert!(table.value(k, t) <= table.value(k, t - 1) + 1e-12);
                    }
                }
            }
        }
    }

    /// The instance JSON schema round-trips.
    #[test]
    fn instance_json_round_trips((n, s, seed) in instance_strategy()) {
        let m = s.m();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let profile = sample_profile(ProbModel::FullIndependence, n, m, &mut rng);
        let file = pickseq::io::InstanceFile {
            n: Some(n),
            m: Some(m),
            rankings: Some(profile.rankings().to_vec()),
            k: None,
            scores: Some(s.scores().to_vec()),
        };
        let parsed = pickseq::io::InstanceFile::from_json(&file.to_json()).unwrap();
        prop_assert_eq!(parsed.profile().unwrap(), profile);
        prop_assert_eq!(parsed.scoring().unwrap().unwrap(), s);
    }
}

/// The exact optimum over compositions never admits a better vector than the
/// DP's reconstruction on the published example sizes (regression guard for
/// the tie-break path).
#[test]
fn dp_reconstruction_is_in_the_brute_force_optimal_set_for_examples() {
    let table = build_fi(&builtin(ScoringKind::Borda, 7));
    for kind in WelfareKind::ALL {
        let dp = optimize(3, &table, kind, ItemPolarity::Goods).unwrap();
        let brute =
            brute_force_optimize(3, &table, kind, ItemPolarity::Goods, DEFAULT_ORACLE_CAP).unwrap();
        assert!(
            brute.optimal_set.iter().any(|k| k == &dp.k),
            "{kind:?}: DP vector {:?} missing from the optimal set",
            dp.k.counts()
        );
    }
}
