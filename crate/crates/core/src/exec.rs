//! Data-parallel map over independent work items.
//!
//! Work items (grid cells, seeds, random trial instances, enumerated
//! minibatches) are mapped in parallel when the `parallel` feature is on and
//! [`Execution::Parallel`] is requested. Results always come back in input
//! order, and any reduction over them is done sequentially by the caller, so
//! both modes produce bit-identical numbers.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// Falls back to sequential when built without the `parallel` feature.
    #[default]
    Parallel,
}

impl Execution {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }

    pub fn map<T, R, F>(self, items: Vec<T>, f: F) -> Vec<R>
    where
        T: Send,
        R: Send,
        F: Fn(T) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == Execution::Parallel {
            use rayon::prelude::*;
            return items.into_par_iter().map(f).collect();
        }
        items.into_iter().map(f).collect()
    }

    pub fn map_range<R, F>(self, n: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        self.map((0..n).collect(), f)
    }
}

/// Runs `f` with at most `jobs` worker threads. `None` uses the global pool.
pub fn with_jobs<R: Send>(jobs: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    #[cfg(feature = "parallel")]
    if let Some(jobs) = jobs {
        match rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build() {
            Ok(pool) => return pool.install(f),
            Err(e) => log::warn!("could not build a {jobs}-thread pool: {e}"),
        }
    }
    #[cfg(not(feature = "parallel"))]
    let _ = jobs;
    f()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree_and_keep_order() {
        let work = |i: usize| (0..=i).map(|k| (k as f64).sqrt()).sum::<f64>();
        let seq = Execution::Sequential.map_range(200, work);
        let par = Execution::Parallel.map_range(200, work);
        assert_eq!(seq, par);
        assert_eq!(with_jobs(Some(2), || Execution::Parallel.map_range(200, work)), seq);
    }
}
