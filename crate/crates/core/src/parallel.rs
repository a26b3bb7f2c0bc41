//! Thread control for the internally parallel routines.
//!
//! `QWALK_THREADS` caps the worker count; `0` (or `1`) runs everything on the
//! calling thread. When unset, rayon's global pool is used.

use std::sync::OnceLock;

use rayon::ThreadPool;

pub const THREADS_ENV: &str = "QWALK_THREADS";

fn configured_pool() -> Option<&'static ThreadPool> {
    static POOL: OnceLock<Option<ThreadPool>> = OnceLock::new();
    POOL.get_or_init(|| {
        let threads = std::env::var(THREADS_ENV).ok()?.trim().parse::<usize>().ok()?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads.max(1))
            .build()
            .ok()
    })
    .as_ref()
}

/// Runs `f` inside the configured pool, so its `par_iter`s respect the cap.
pub fn install<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    match configured_pool() {
        Some(pool) => pool.install(f),
        None => f(),
    }
}
