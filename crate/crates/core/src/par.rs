//! Index-parallel map with a sequential fallback.
//!
//! Every helper returns results in index order, so reductions done by the
//! caller over the returned vector are deterministic regardless of how the
//! work was scheduled.

/// `true` when compiled with the `parallel` feature.
pub const PARALLEL: bool = cfg!(feature = "parallel");

/// Maps `f` over `0..n`, returning results in index order.
#[cfg(feature = "parallel")]
pub fn map_range<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_range<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}

/// Maps `f` over a slice, returning results in slice order.
#[cfg(feature = "parallel")]
pub fn map_slice<'a, S, T, F>(items: &'a [S], f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&'a S) -> T + Sync + Send,
{
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_slice<'a, S, T, F>(items: &'a [S], f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&'a S) -> T + Sync + Send,
{
    items.iter().map(f).collect()
}

/// Splits `0..n` into fixed-size chunks and maps `f` over each chunk range.
///
/// Chunk boundaries depend only on `n` and `chunk`, never on the thread
/// count, so floating-point partial sums combine identically on every run.
pub fn map_chunks<T, F>(n: usize, chunk: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(std::ops::Range<usize>) -> T + Sync + Send,
{
    let chunk = chunk.max(1);
    let count = n.div_ceil(chunk);
    map_range(count, |c| {
        let start = c * chunk;
        f(start..(start + chunk).min(n))
    })
}
