//! Data-parallel helpers. With the `parallel` feature (on by default) the
//! batch runners fan out over rayon; without it, or when callers ask for
//! sequential evaluation, the same closures run in order. Results are
//! collected in input order either way, so output never depends on
//! scheduling.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `items`, in parallel when both the feature and the flag
/// allow it. Output order matches input order.
pub fn map_ordered<T, U, F>(items: Vec<T>, parallel: bool, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if parallel {
            return items.into_par_iter().map(f).collect();
        }
    }
    let _ = parallel;
    items.into_iter().map(f).collect()
}

/// True when the crate was built with parallel support.
pub fn parallel_available() -> bool {
    cfg!(feature = "parallel")
}
