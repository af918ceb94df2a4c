//! Fixed-partition parallel map.
//!
//! Work is split into chunks whose boundaries depend only on the problem, never
//! on the worker count; results come back in chunk order. Reductions performed
//! on the returned vector are therefore identical for any number of workers.

use rayon::prelude::*;

/// Applies `f` to every item on a pool of `workers` threads, preserving order.
pub fn map_ordered<T, R, F>(workers: usize, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    let workers = workers.max(1);
    if workers == 1 || items.len() <= 1 {
        return items.iter().map(f).collect();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(|| items.par_iter().map(&f).collect()),
        Err(_) => items.iter().map(f).collect(),
    }
}

/// Splits the integer interval `(lo, hi]` into consecutive half-open chunks
/// `(a, b]` of at most `len` integers.
pub fn chunk_interval(lo: u64, hi: u64, len: u64) -> Vec<(u64, u64)> {
    let len = len.max(1);
    let mut out = Vec::new();
    let mut a = lo;
    while a < hi {
        let b = a.saturating_add(len).min(hi);
        out.push((a, b));
        a = b;
    }
    out
}
