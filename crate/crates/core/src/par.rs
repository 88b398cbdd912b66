//! Execution policy for the data-parallel inner loops.
//!
//! Every parallel path here is a pure map or an order-independent min/max
//! reduction, so `Exec::Sequential` and `Exec::Parallel` produce bitwise
//! identical results. Without the `parallel` feature both policies run
//! sequentially.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    Sequential,
    #[default]
    Parallel,
}

impl Exec {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }
}

/// `(0..n).map(f).collect()`, possibly in parallel.
pub(crate) fn map_range<T, F>(exec: Exec, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..n).map(f).collect()
}

/// Applies `f(i, &mut slice[i])` to every element.
pub(crate) fn for_each_mut<T, F>(exec: Exec, slice: &mut [T], f: F)
where
    T: Send,
    F: Fn(usize, &mut T) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        slice.par_iter_mut().enumerate().for_each(|(i, x)| f(i, x));
        return;
    }
    let _ = exec;
    slice.iter_mut().enumerate().for_each(|(i, x)| f(i, x));
}

/// Applies `f(k, chunk)` to mutable disjoint chunks.
pub(crate) fn for_each_chunk_mut<T, F>(exec: Exec, chunks: Vec<&mut [T]>, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        chunks
            .into_par_iter()
            .enumerate()
            .for_each(|(k, c)| f(k, c));
        return;
    }
    let _ = exec;
    chunks.into_iter().enumerate().for_each(|(k, c)| f(k, c));
}

/// Reduces `f(i)` over `0..n` with an associative, commutative `combine`.
pub(crate) fn reduce_range<T, F, R>(exec: Exec, n: usize, identity: T, f: F, combine: R) -> T
where
    T: Send + Sync + Copy,
    F: Fn(usize) -> T + Sync + Send,
    R: Fn(T, T) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return (0..n).into_par_iter().map(f).reduce(|| identity, &combine);
    }
    let _ = exec;
    (0..n).map(f).fold(identity, combine)
}

/// Picks the larger `(value, index)` pair; equal values resolve to the smaller index.
#[inline]
pub(crate) fn argmax_pair(a: (f64, usize), b: (f64, usize)) -> (f64, usize) {
    match a.0.total_cmp(&b.0) {
        std::cmp::Ordering::Greater => a,
        std::cmp::Ordering::Less => b,
        std::cmp::Ordering::Equal => {
            if a.1 <= b.1 {
                a
            } else {
                b
            }
        }
    }
}
