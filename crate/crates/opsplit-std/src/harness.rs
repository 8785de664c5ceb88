//! Thread-pool harness for the analysis studies.

use std::time::Instant;

use opsplit::analysis::Harness;
use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuildError, ThreadPoolBuilder};

/// Runs study cells on a dedicated rayon pool.
///
/// Results keep index order, so output does not depend on the thread count.
pub struct ParallelHarness {
    pool: ThreadPool,
    timing: bool,
}

impl ParallelHarness {
    pub fn new(threads: usize, timing: bool) -> Result<Self, ThreadPoolBuildError> {
        let pool = ThreadPoolBuilder::new().num_threads(threads).build()?;
        Ok(Self { pool, timing })
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl Harness for ParallelHarness {
    fn map<T, F>(&self, count: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        self.pool.install(|| (0..count).into_par_iter().map(f).collect())
    }

    fn timed<T>(&self, f: impl FnOnce() -> T) -> (T, f64) {
        if !self.timing {
            return (f(), 0.0);
        }
        let start = Instant::now();
        let out = f();
        (out, start.elapsed().as_secs_f64())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keeps_order() {
        let h = ParallelHarness::new(4, false).unwrap();
        let out = h.map(1000, |i| i * i);
        assert!(out.iter().enumerate().all(|(i, v)| *v == i * i));
        assert_eq!(h.timed(|| 3).1, 0.0);
    }
}
