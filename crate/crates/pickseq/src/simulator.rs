//! Monte Carlo estimation of expected utilities and ex-post welfare by
//! sampling profiles, replaying the greedy picking sequence and aggregating.
//!
//! Reproducibility scheme (identified by [`RNG_ID`]): the sample budget is
//! cut into fixed batches of [`BATCH_SIZE`]; batch `b` draws from a ChaCha8
//! generator seeded with the master seed on stream `b`, and batch results
//! are merged in batch order. Reports are therefore bit-identical for a
//! given config, on every platform and for any worker count.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec;
use crate::profile::{
    ex_post_utilities, ex_post_welfare, greedy_allocate, PickVector, PreferenceProfile, ProbModel,
    WelfareKind,
};
use crate::scoring::ScoringVector;

/// Identity of the sampling scheme recorded in every report.
pub const RNG_ID: &str = "chacha8-b4096-v1";

/// Samples per RNG stream.
pub const BATCH_SIZE: u64 = 4096;

/// Full description of one simulation run.
#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub model: ProbModel,
    pub k: PickVector,
    pub scoring: ScoringVector,
    pub samples: u64,
    pub seed: u64,
}

impl SimConfig {
    pub fn new(
        model: ProbModel,
        k: PickVector,
        scoring: ScoringVector,
        samples: u64,
        seed: u64,
    ) -> Result<Self> {
        model.validate()?;
        if samples == 0 {
            return Err(Error::Input("need at least one sample".into()));
        }
        if k.m() != scoring.m() {
            return Err(Error::Dimension(format!(
                "pick vector distributes {} items but the scoring vector has {}",
                k.m(),
                scoring.m()
            )));
        }
        Ok(Self {
            model,
            k,
            scoring,
            samples,
            seed,
        })
    }

    pub fn n(&self) -> usize {
        self.k.n()
    }

    pub fn m(&self) -> usize {
        self.k.m()
    }
}

/// Five-number-ish summary of one welfare kind's sample distribution.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WelfareSummary {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
}

/// Aggregated simulation output.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimReport {
    /// Sampling-scheme identity; see [`RNG_ID`].
    pub rng: String,
    pub model: ProbModel,
    pub k: Vec<usize>,
    pub samples: u64,
    pub seed: u64,
    pub agent_mean: Vec<f64>,
    /// Sample standard deviation divided by sqrt(samples); 0 for a single
    /// sample or a constant series.
    pub agent_stderr: Vec<f64>,
    pub utilitarian: WelfareSummary,
    pub egalitarian: WelfareSummary,
    pub nash: WelfareSummary,
}

/// Draws one profile from the model. A mixture draws a single Bernoulli per
/// profile: the whole profile is FI with probability `lambda`, else FC.
pub fn sample_profile<R: Rng>(
    model: ProbModel,
    n: usize,
    m: usize,
    rng: &mut R,
) -> PreferenceProfile {
    let fully_independent = match model {
        ProbModel::FullIndependence => true,
        ProbModel::FullCorrelation => false,
        ProbModel::Mixture(lambda) => rng.random::<f64>() < lambda,
    };
    let rankings = if fully_independent {
        (0..n).map(|_| random_permutation(m, rng)).collect()
    } else {
        vec![random_permutation(m, rng); n]
    };
    PreferenceProfile::new(rankings).expect("sampled rankings are permutations")
}

/// Unbiased Fisher-Yates shuffle of `0..m`.
fn random_permutation<R: Rng>(m: usize, rng: &mut R) -> Vec<usize> {
    let mut items: Vec<usize> = (0..m).collect();
    for i in (1..m).rev() {
        let j = rng.random_range(0..=i);
        items.swap(i, j);
    }
    items
}

/// Running mean/variance accumulator (Welford). Merging uses Chan's update,
/// which keeps a constant series at exactly zero variance.
#[derive(Clone, Copy, Debug, Default)]
struct Welford {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(&mut self, other: &Welford) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let total = self.count + other.count;
        let delta = other.mean - self.mean;
        self.mean += delta * other.count as f64 / total as f64;
        self.m2 += other.m2 + delta * delta * (self.count as f64 * other.count as f64 / total as f64);
        self.count = total;
    }

    fn stderr(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        (self.m2 / (self.count - 1) as f64 / self.count as f64).sqrt()
    }
}

struct Batch {
    agents: Vec<Welford>,
    welfares: [Vec<f64>; 3],
}

/// Runs the full simulation described by `cfg`.
pub fn run_simulation(cfg: &SimConfig) -> SimReport {
    let n = cfg.n();
    let m = cfg.m();
    let batches = cfg.samples.div_ceil(BATCH_SIZE) as usize;
    let results: Vec<Batch> = exec::indexed_map(batches, |b| {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(b as u64);
        let count = BATCH_SIZE.min(cfg.samples - b as u64 * BATCH_SIZE);
        let mut agents = vec![Welford::default(); n];
        let mut welfares = [
            Vec::with_capacity(count as usize),
            Vec::with_capacity(count as usize),
            Vec::with_capacity(count as usize),
        ];
        for _ in 0..count {
            let profile = sample_profile(cfg.model, n, m, &mut rng);
            let alloc = greedy_allocate(&profile, &cfg.k, &cfg.scoring)
                .expect("config dimensions are validated");
            let utilities = ex_post_utilities(&alloc, &profile, &cfg.scoring)
                .expect("allocation matches profile");
            for (acc, &u) in agents.iter_mut().zip(&utilities) {
                acc.push(u);
            }
            for (slot, kind) in welfares.iter_mut().zip(WelfareKind::ALL) {
                slot.push(ex_post_welfare(kind, &utilities));
            }
        }
        Batch { agents, welfares }
    });

    let mut agents = vec![Welford::default(); n];
    let mut welfares: [Vec<f64>; 3] = [
        Vec::with_capacity(cfg.samples as usize),
        Vec::with_capacity(cfg.samples as usize),
        Vec::with_capacity(cfg.samples as usize),
    ];
    for batch in results {
        for (acc, other) in agents.iter_mut().zip(&batch.agents) {
            acc.merge(other);
        }
        for (all, mut part) in welfares.iter_mut().zip(batch.welfares) {
            all.append(&mut part);
        }
    }

    let [u, e, nash] = welfares;
    SimReport {
        rng: RNG_ID.to_string(),
        model: cfg.model,
        k: cfg.k.counts().to_vec(),
        samples: cfg.samples,
        seed: cfg.seed,
        agent_mean: agents.iter().map(|a| a.mean).collect(),
        agent_stderr: agents.iter().map(|a| a.stderr()).collect(),
        utilitarian: summarize(u),
        egalitarian: summarize(e),
        nash: summarize(nash),
    }
}

fn summarize(mut samples: Vec<f64>) -> WelfareSummary {
    let count = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / count;
    samples.sort_by(f64::total_cmp);
    WelfareSummary {
        mean,
        min: samples[0],
        max: samples[samples.len() - 1],
        q25: quantile(&samples, 0.25),
        median: quantile(&samples, 0.5),
        q75: quantile(&samples, 0.75),
    }
}

/// Linearly interpolated quantile of a sorted slice.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let h = q * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}
