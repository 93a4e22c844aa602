//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (the default) these dispatch to rayon; without
//! it they are plain iterator loops. Every helper returns results in input
//! order, so callers see identical output in either build.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Minimum slice length worth splitting across workers.
#[cfg(feature = "parallel")]
const PAR_THRESHOLD: usize = 256;

/// Maps `f` over `items`, preserving order.
pub fn map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if items.len() >= PAR_THRESHOLD {
            return items.par_iter().map(f).collect();
        }
    }
    items.iter().map(f).collect()
}

/// Maps `f` over the index range `0..len`, preserving order.
pub fn map_range<U, F>(len: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if len >= PAR_THRESHOLD {
            return (0..len).into_par_iter().map(f).collect();
        }
    }
    (0..len).map(f).collect()
}

/// Returns the first item (in slice order) for which `f` yields `Some`.
pub fn find_map_first<T, U, F>(items: &[T], f: F) -> Option<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> Option<U> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if items.len() >= PAR_THRESHOLD {
            return items.par_iter().find_map_first(f);
        }
    }
    items.iter().find_map(f)
}

/// Returns true when `f` holds for every item.
pub fn all<T, F>(items: &[T], f: F) -> bool
where
    T: Sync,
    F: Fn(&T) -> bool + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if items.len() >= PAR_THRESHOLD {
            return items.par_iter().all(f);
        }
    }
    items.iter().all(f)
}

/// Name of the execution backend compiled in.
pub fn backend() -> &'static str {
    if cfg!(feature = "parallel") {
        "rayon"
    } else {
        "sequential"
    }
}

/// Caps the global worker count. A no-op in sequential builds, and when the
/// global pool has already been initialised.
pub fn configure_threads(threads: usize) {
    #[cfg(feature = "parallel")]
    {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads.max(1))
            .build_global();
    }
    #[cfg(not(feature = "parallel"))]
    let _ = threads;
}

/// Runs `f` with the helpers restricted to a private pool of `threads`
/// workers. Sequential builds just call `f`.
pub fn with_threads<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> R {
    #[cfg(feature = "parallel")]
    {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads.max(1))
            .build()
            .expect("thread pool");
        pool.install(f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        f()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let v: Vec<u32> = (0..10_000).collect();
        let out = map(&v, |x| x * 2);
        assert!(out.iter().enumerate().all(|(i, &y)| y == 2 * i as u32));
        let r = map_range(1000, |i| i + 1);
        assert_eq!(r[999], 1000);
    }

    #[test]
    fn find_first_is_leftmost() {
        let v: Vec<u32> = (0..10_000).collect();
        let hit = find_map_first(&v, |&x| (x % 997 == 996).then_some(x));
        assert_eq!(hit, Some(996));
        assert!(all(&v, |&x| x < 10_000));
    }
}
