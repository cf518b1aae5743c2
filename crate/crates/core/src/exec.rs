//! Data-parallel helpers.
//!
//! With the `parallel` feature (on by default) the maps below run on the rayon
//! thread pool; without it they fall back to plain iterators. Both variants
//! return results in index order, so any reduction performed afterwards is
//! deterministic.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Evaluates `f(i)` for `i in 0..n` and collects the results in order.
#[cfg(feature = "parallel")]
pub fn map_range<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

/// Evaluates `f(i)` for `i in 0..n` and collects the results in order.
#[cfg(not(feature = "parallel"))]
pub fn map_range<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}

/// Maps `f` over a slice, preserving order.
#[cfg(feature = "parallel")]
pub fn map_slice<S, T, F>(xs: &[S], f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&S) -> T + Sync + Send,
{
    xs.par_iter().map(f).collect()
}

/// Maps `f` over a slice, preserving order.
#[cfg(not(feature = "parallel"))]
pub fn map_slice<S, T, F>(xs: &[S], f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&S) -> T + Sync + Send,
{
    xs.iter().map(f).collect()
}

/// Returns true when `pred` holds for every index in `0..n`.
#[cfg(feature = "parallel")]
pub fn all_range<F>(n: usize, pred: F) -> bool
where
    F: Fn(usize) -> bool + Sync + Send,
{
    (0..n).into_par_iter().all(pred)
}

/// Returns true when `pred` holds for every index in `0..n`.
#[cfg(not(feature = "parallel"))]
pub fn all_range<F>(n: usize, pred: F) -> bool
where
    F: Fn(usize) -> bool + Sync + Send,
{
    (0..n).all(pred)
}

/// Whether this build evaluates maps on the rayon pool.
pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_range_keeps_order() {
        let v = map_range(1000, |i| i * 2);
        assert!(v.iter().enumerate().all(|(i, &x)| x == 2 * i));
    }

    #[test]
    fn all_range_short_circuits_to_false() {
        assert!(!all_range(100, |i| i < 50));
        assert!(all_range(100, |i| i < 100));
    }
}
