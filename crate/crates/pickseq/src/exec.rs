//! Index-ordered map helpers: the single seam between the rayon path and
//! the sequential fallback. Results are collected in index order, so both
//! paths produce identical output for the same input.

/// Maps `f` over `0..count`, in parallel when the `parallel` feature is
/// enabled.
pub fn indexed_map<T, F>(count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..count).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        indexed_map_seq(count, f)
    }
}

/// Always-sequential twin of [`indexed_map`]; kept public so benchmarks and
/// tests can compare the two paths directly.
pub fn indexed_map_seq<T, F>(count: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..count).map(f).collect()
}
