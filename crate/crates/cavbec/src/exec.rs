//! Data-parallel evaluation of per-point work (grid points, sweep samples).
//!
//! With the `parallel` feature (default) the indexed maps run on the rayon
//! global pool; without it they fall back to plain sequential loops. Output
//! ordering is by index in both modes, so results are deterministic.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map `f` over `0..n`, preserving index order.
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
        map_indexed_seq(n, f)
    }
}

/// Sequential variant, always available (used by the benchmarks as the
/// baseline regardless of feature flags).
pub fn map_indexed_seq<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

/// Fallible map over `0..n`; the first error wins.
pub fn try_map_indexed<T, E, F>(n: usize, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(usize) -> Result<T, E> + Sync + Send,
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

/// Configure the rayon thread pool size once, before any parallel work.
/// A no-op without the `parallel` feature or if the pool already started.
pub fn configure_threads(n: Option<usize>) {
    #[cfg(feature = "parallel")]
    if let Some(n) = n {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    #[cfg(not(feature = "parallel"))]
    let _ = n;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_is_by_index() {
        let v = map_indexed(1000, |i| i * i);
        let s = map_indexed_seq(1000, |i| i * i);
        assert_eq!(v, s);
    }

    #[test]
    fn try_map_propagates_error() {
        let r: Result<Vec<usize>, &str> =
            try_map_indexed(10, |i| if i == 7 { Err("boom") } else { Ok(i) });
        assert_eq!(r.unwrap_err(), "boom");
    }
}
