//! Ordered map over an index range, on rayon when the `parallel` feature is on.

#[cfg(feature = "parallel")]
pub(crate) fn map_range<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_range<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

/// Parallel only for at least `min_len` items; short loops stay on the
/// calling thread. Both paths produce identical results.
pub(crate) fn map_range_min<T, F>(n: usize, min_len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    if n < min_len {
        (0..n).map(f).collect()
    } else {
        map_range(n, f)
    }
}

/// Fallible variant; the first error in index order wins.
pub(crate) fn try_map_range<T, E, F>(n: usize, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(usize) -> Result<T, E> + Sync + Send,
{
    map_range(n, f).into_iter().collect()
}

/// Calls `f(i, chunk)` on consecutive `len`-sized chunks of `data`.
#[cfg(feature = "parallel")]
pub(crate) fn for_each_chunk<F>(data: &mut [f64], len: usize, f: F)
where
    F: Fn(usize, &mut [f64]) + Sync + Send,
{
    use rayon::prelude::*;
    data.par_chunks_exact_mut(len).enumerate().for_each(|(i, c)| f(i, c));
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn for_each_chunk<F>(data: &mut [f64], len: usize, f: F)
where
    F: Fn(usize, &mut [f64]),
{
    data.chunks_exact_mut(len).enumerate().for_each(|(i, c)| f(i, c));
}
