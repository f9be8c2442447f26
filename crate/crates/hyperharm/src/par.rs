//! Data-parallel helpers. With the `parallel` feature the work runs on a
//! rayon pool capped by `HYPERHARM_THREADS`; otherwise everything is
//! sequential. `set_sequential` forces the sequential path at runtime.

use std::sync::atomic::{AtomicBool, Ordering};

static FORCE_SEQ: AtomicBool = AtomicBool::new(false);

pub fn set_sequential(on: bool) {
    FORCE_SEQ.store(on, Ordering::Relaxed);
}

pub fn is_parallel() -> bool {
    cfg!(feature = "parallel") && !FORCE_SEQ.load(Ordering::Relaxed)
}

/// Thread cap read from `HYPERHARM_THREADS`, if set to a positive integer.
pub fn thread_cap() -> Option<usize> {
    std::env::var("HYPERHARM_THREADS")
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}

#[cfg(feature = "parallel")]
fn init_pool() {
    use std::sync::Once;
    static INIT: Once = Once::new();
    INIT.call_once(|| {
        if let Some(n) = thread_cap() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    });
}

pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if is_parallel() {
        use rayon::prelude::*;
        init_pool();
        return items.par_iter().map(f).collect();
    }
    items.iter().map(f).collect()
}

pub fn map_range<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if is_parallel() {
        use rayon::prelude::*;
        init_pool();
        return (0..n).into_par_iter().map(f).collect();
    }
    (0..n).map(f).collect()
}

/// Sum of `f` over `items`, reduced in fixed-size chunks so the result does
/// not depend on the thread count.
pub fn sum_chunked<T, R, F>(items: &[T], chunk: usize, f: F) -> R
where
    T: Sync,
    R: Send + Copy + std::ops::Add<Output = R> + Default,
    F: Fn(&T) -> R + Sync + Send,
{
    let chunk = chunk.max(1);
    let partial = |c: &[T]| c.iter().fold(R::default(), |acc, x| acc + f(x));
    #[cfg(feature = "parallel")]
    if is_parallel() && items.len() > chunk {
        use rayon::prelude::*;
        init_pool();
        let parts: Vec<R> = items.par_chunks(chunk).map(partial).collect();
        return parts.into_iter().fold(R::default(), |a, b| a + b);
    }
    items
        .chunks(chunk)
        .map(partial)
        .fold(R::default(), |a, b| a + b)
}
