//! Order-preserving data-parallel maps.
//!
//! With the `parallel` feature (default) work is spread over the rayon pool; without
//! it everything runs on the calling thread. Results always come back in index order,
//! so any fold over them is identical either way.

/// `f(0), f(1), …, f(len-1)` in order.
pub fn map_indices<T, F>(len: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..len).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..len).map(f).collect()
    }
}

/// First index in `0..len` (in index order) for which `f` returns `Some`.
pub fn find_first<T, F>(len: u64, f: F) -> Option<T>
where
    T: Send,
    F: Fn(u64) -> Option<T> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..len).into_par_iter().find_map_first(f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..len).find_map(f)
    }
}

/// Runs `f` with at most `workers` threads (`None`: the default pool).
///
/// Without the `parallel` feature this just calls `f`.
pub fn with_workers<R, F>(workers: Option<usize>, f: F) -> R
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    #[cfg(feature = "parallel")]
    {
        match workers {
            Some(n) if n > 0 => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
                Ok(pool) => pool.install(f),
                Err(_) => f(),
            },
            _ => f(),
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = workers;
        f()
    }
}

pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_kept() {
        let v = map_indices(1000, |i| i * i);
        assert!(v.iter().enumerate().all(|(i, &x)| x == (i * i) as u64));
        let single = with_workers(Some(1), || map_indices(1000, |i| i * i));
        assert_eq!(v, single);
    }

    #[test]
    fn first_match_is_lowest_index() {
        assert_eq!(find_first(10_000, |i| (i % 97 == 96).then_some(i)), Some(96));
        assert_eq!(find_first(10, |_| None::<u64>), None);
    }
}
