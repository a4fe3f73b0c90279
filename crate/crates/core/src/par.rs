//! Execution policy for the data-parallel loops (backtest days, rolling
//! origins, Monte-Carlo replications).
//!
//! With the `parallel` feature enabled, [`Exec::Parallel`] runs on rayon.
//! Without it every policy degrades to a plain sequential loop. Output order
//! always follows input order, so results do not depend on the thread count.

/// How an indexed batch of independent jobs is executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    Sequential,
    /// `threads = None` uses the global pool (all available cores).
    #[default]
    Parallel,
    Threads(usize),
}

impl Exec {
    pub fn from_threads(threads: Option<usize>) -> Self {
        match threads {
            Some(1) => Exec::Sequential,
            Some(n) if n > 1 => Exec::Threads(n),
            _ => Exec::Parallel,
        }
    }

    /// Evaluate `f(i)` for `i in 0..n`, returning results in index order.
    pub fn map<R, F>(self, n: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        match self {
            Exec::Sequential => (0..n).map(f).collect(),
            Exec::Parallel => par_map(n, f),
            Exec::Threads(t) => with_pool(t, || par_map(n, &f)),
        }
    }
}

#[cfg(feature = "parallel")]
fn par_map<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn par_map<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    (0..n).map(f).collect()
}

#[cfg(feature = "parallel")]
fn with_pool<R: Send>(threads: usize, op: impl FnOnce() -> R + Send) -> R {
    match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool.install(op),
        Err(e) => {
            log::warn!("could not build a {threads}-thread pool ({e}); using the global pool");
            op()
        }
    }
}

#[cfg(not(feature = "parallel"))]
fn with_pool<R: Send>(_threads: usize, op: impl FnOnce() -> R + Send) -> R {
    op()
}
