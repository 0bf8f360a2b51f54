//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature these dispatch to rayon; without it they run
//! the same closures on the calling thread. Reductions are always performed
//! over fixed-size chunks combined in index order, so a result does not depend
//! on the thread count or on whether the feature is enabled.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Chunk length used by [`chunked_sum`] and friends. Fixed so that the
/// reduction tree is independent of the scheduler.
pub const CHUNK: usize = 1024;

/// `true` when compiled with rayon support.
pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}

/// Evaluate `f(i)` for `i in 0..n` and collect in index order.
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Map over a slice, preserving order.
pub fn map_slice<S, T, F>(items: &[S], f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&S) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Deterministic sum of `f(i)` over `0..n`: partial sums over chunks of
/// [`CHUNK`] indices, then a sequential pass over the partials.
pub fn chunked_sum<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let chunks = n.div_ceil(CHUNK);
    let partials = map_indexed(chunks, |c| {
        let lo = c * CHUNK;
        let hi = (lo + CHUNK).min(n);
        (lo..hi).map(&f).sum::<f64>()
    });
    partials.iter().sum()
}

/// Chunked fold producing one accumulator per chunk, merged in order.
pub fn chunked_fold<A, Init, Step, Merge>(
    n: usize,
    chunk: usize,
    init: Init,
    step: Step,
    merge: Merge,
) -> A
where
    A: Send,
    Init: Fn() -> A + Sync + Send,
    Step: Fn(&mut A, usize) + Sync + Send,
    Merge: Fn(&mut A, A),
{
    let chunk = chunk.max(1);
    let chunks = n.div_ceil(chunk);
    let partials = map_indexed(chunks, |c| {
        let mut acc = init();
        let lo = c * chunk;
        let hi = (lo + chunk).min(n);
        for i in lo..hi {
            step(&mut acc, i);
        }
        acc
    });
    let mut out = init();
    for p in partials {
        merge(&mut out, p);
    }
    out
}

pub fn sort_unstable<T: Ord + Send>(v: &mut [T]) {
    #[cfg(feature = "parallel")]
    {
        v.par_sort_unstable();
    }
    #[cfg(not(feature = "parallel"))]
    {
        v.sort_unstable();
    }
}

pub fn sort_by_f64<T: Send>(v: &mut [T], key: impl Fn(&T) -> f64 + Sync) {
    #[cfg(feature = "parallel")]
    {
        v.par_sort_by(|a, b| key(a).total_cmp(&key(b)));
    }
    #[cfg(not(feature = "parallel"))]
    {
        v.sort_by(|a, b| key(a).total_cmp(&key(b)));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chunked_sum_matches_sequential_order() {
        let n = 10 * CHUNK + 17;
        let f = |i: usize| 1.0 / (1.0 + i as f64);
        let expected: f64 = (0..n.div_ceil(CHUNK))
            .map(|c| (c * CHUNK..((c + 1) * CHUNK).min(n)).map(f).sum::<f64>())
            .sum();
        assert_eq!(chunked_sum(n, f), expected);
    }

    #[test]
    fn map_preserves_order() {
        let v = map_indexed(5000, |i| i * 2);
        assert!(v.iter().enumerate().all(|(i, &x)| x == 2 * i));
    }

    #[test]
    fn fold_counts() {
        let hist = chunked_fold(
            1000,
            64,
            || vec![0usize; 10],
            |h, i| h[i % 10] += 1,
            |a, b| a.iter_mut().zip(b).for_each(|(x, y)| *x += y),
        );
        assert_eq!(hist, vec![100; 10]);
    }
}
