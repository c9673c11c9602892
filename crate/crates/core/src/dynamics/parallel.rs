use rayon::prelude::*;

/// Worker count for parallel sweeps. `Serial` is the reference path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Jobs {
    Serial,
    Threads(usize),
    /// Rayon's global pool (hardware parallelism).
    #[default]
    Auto,
}

impl Jobs {
    pub fn from_count(count: usize) -> Self {
        match count {
            0 => Jobs::Auto,
            1 => Jobs::Serial,
            n => Jobs::Threads(n),
        }
    }
}

/// `(0..n).map(f)` with results in index order regardless of scheduling.
pub fn map_indexed<T, F>(jobs: Jobs, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match jobs {
        Jobs::Serial => (0..n).map(f).collect(),
        Jobs::Auto => (0..n).into_par_iter().map(f).collect(),
        Jobs::Threads(k) => match rayon::ThreadPoolBuilder::new().num_threads(k).build() {
            Ok(pool) => pool.install(|| (0..n).into_par_iter().map(&f).collect()),
            Err(err) => {
                log::warn!("could not build a {k}-thread pool ({err}); running serially");
                (0..n).map(f).collect()
            }
        },
    }
}
