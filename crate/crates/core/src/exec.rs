//! Execution backends for the data-parallel loops.
//!
//! Work is always split into a fixed list of indexed jobs whose results are
//! returned in index order, so the output is identical for every backend and
//! every worker count.

/// Where indexed jobs run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Backend {
    Sequential,
    /// rayon's global pool; same as `Sequential` without the `parallel` feature.
    #[default]
    Parallel,
}

impl Backend {
    /// True when this backend actually runs on more than one thread.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Backend::Parallel
    }
}

/// Evaluates `f(0), …, f(jobs - 1)` and returns the results in index order.
pub fn map_indexed<T, F>(backend: Backend, jobs: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match backend {
        #[cfg(feature = "parallel")]
        Backend::Parallel => {
            use rayon::prelude::*;
            (0..jobs).into_par_iter().map(f).collect()
        }
        _ => (0..jobs).map(f).collect(),
    }
}

/// Sizes the global worker pool. Only the first call has an effect; later
/// calls and calls without the `parallel` feature are ignored.
pub fn configure_workers(workers: usize) -> bool {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
            .is_ok()
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = workers;
        false
    }
}

/// Number of threads the parallel backend uses.
pub fn worker_count() -> usize {
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
    fn backends_agree_and_keep_order() {
        let seq = map_indexed(Backend::Sequential, 1000, |i| i * i);
        let par = map_indexed(Backend::Parallel, 1000, |i| i * i);
        assert_eq!(seq, par);
        assert_eq!(seq[31], 961);
    }
}
