//! Optimal non-interleaving picking sequences for allocating indivisible
//! items.
//!
//! A picking sequence hands out `m` items to `n` agents by quota: agent 1
//! greedily takes her `k_1` favourite items, agent 2 the next `k_2`, and so
//! on. This crate computes the quota vector `k` maximizing expected
//! utilitarian, egalitarian or Nash social welfare when profiles are drawn
//! from full-correlation, full-independence, or any mixture of the two:
//!
//! - [`scoring`]: rank-to-value vectors (Borda, lexicographic, order
//!   statistic, custom).
//! - [`profile`]: concrete profiles, greedy execution, ex-post welfare.
//! - [`utility`]: the expected-utility tables `u(k, t)` per model.
//! - [`optimizer`]: the dynamic program over quota vectors.
//! - [`oracle`]: exhaustive enumeration, used to cross-check the DP.
//! - [`simulator`]: seeded Monte Carlo estimation.
//! - [`assignment`]: price of assigning agents to picking positions.
//! - [`elicitation`]: ingestion of elicited utility data.
//! - [`sweep`]: parameter sweeps over `m`, `n`, or the mixture weight.
//!
//! Heavy scans (simulation batches, enumeration chunks, permutation ranges,
//! sweep points) run on rayon when the default `parallel` feature is on and
//! fall back to plain loops without it; outputs are identical either way.

pub mod assignment;
pub mod elicitation;
pub mod error;
pub mod exec;
pub mod io;
pub mod numfmt;
pub mod optimizer;
pub mod oracle;
pub mod profile;
pub mod scoring;
pub mod simulator;
pub mod sweep;
pub mod utility;

pub use error::{Error, Result};
pub use optimizer::{evaluate, optimize, OptResult};
pub use profile::{
    ex_post_utilities, ex_post_welfare, greedy_allocate, Allocation, ItemPolarity, PickVector,
    PreferenceProfile, ProbModel, WelfareKind,
};
pub use scoring::{make_scoring, ScoringKind, ScoringVector};
pub use utility::{build_fc, build_fi, build_mixture, UtilityTable};

/// Relative tolerance for welfare-value comparisons throughout the crate.
pub const REL_TOL: f64 = 1e-9;

/// Relative equality at [`REL_TOL`]; exact equality short-circuits so that
/// infinities and zeros compare sanely.
pub fn approx_eq(a: f64, b: f64) -> bool {
    if a == b {
        return true;
    }
    if !a.is_finite() || !b.is_finite() {
        return false;
    }
    (a - b).abs() <= REL_TOL * a.abs().max(b.abs())
}

/// Equality for log-domain values: absolute tolerance [`REL_TOL`] on logs is
/// relative tolerance on the underlying products, and two `-inf` values
/// (both products zero) are equal.
pub fn log_approx_eq(a: f64, b: f64) -> bool {
    if a == b {
        return true;
    }
    if !a.is_finite() || !b.is_finite() {
        return false;
    }
    (a - b).abs() <= REL_TOL
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn approx_eq_edges() {
        assert!(approx_eq(0.0, 0.0));
        assert!(approx_eq(1.0, 1.0 + 1e-12));
        assert!(!approx_eq(1.0, 1.001));
        assert!(approx_eq(f64::INFINITY, f64::INFINITY));
        assert!(!approx_eq(f64::INFINITY, 1.0));
    }

    #[test]
    fn log_approx_eq_edges() {
        assert!(log_approx_eq(f64::NEG_INFINITY, f64::NEG_INFINITY));
        assert!(!log_approx_eq(f64::NEG_INFINITY, 0.0));
        assert!(log_approx_eq(5.0, 5.0 + 1e-10));
    }
}
