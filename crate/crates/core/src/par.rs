//! Data-parallel map with a sequential fallback.
//!
//! With the `parallel` feature (default) work items are spread over the
//! current rayon pool; without it they run in order on the calling thread.
//! Output order always matches input order.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map `f` over `0..n`, collecting results in index order.
pub fn map_range<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Send + Sync,
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

/// Map `f` over a slice, collecting results in order.
pub fn map_slice<S, T, F>(items: &[S], f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&S) -> T + Send + Sync,
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

/// Fallible variant of [`map_slice`]; returns the first error in input order.
pub fn try_map_slice<S, T, E, F>(items: &[S], f: F) -> Result<Vec<T>, E>
where
    S: Sync,
    T: Send,
    E: Send,
    F: Fn(&S) -> Result<T, E> + Send + Sync,
{
    map_slice(items, f).into_iter().collect()
}

/// Fallible variant of [`map_range`]; returns the first error in index order.
pub fn try_map_range<T, E, F>(n: usize, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(usize) -> Result<T, E> + Send + Sync,
{
    map_range(n, f).into_iter().collect()
}

/// Number of worker threads the current pool would use.
pub fn current_threads() -> usize {
    #[cfg(feature = "parallel")]
    {
        rayon::current_num_threads()
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preserves_order() {
        let v = map_range(100, |i| i * 2);
        assert_eq!(v, (0..100).map(|i| i * 2).collect::<Vec<_>>());
    }

    #[test]
    fn try_map_reports_first_error() {
        let items: Vec<i32> = (0..10).collect();
        let r: Result<Vec<i32>, i32> =
            try_map_slice(&items, |&x| if x % 4 == 3 { Err(x) } else { Ok(x) });
        assert_eq!(r, Err(3));
    }
}
