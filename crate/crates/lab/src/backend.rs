//! rustfft-backed transforms and a rayon work pool implementing the core
//! runtime trait.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::FftPlanner;
use tunnelsim_core::{Fft, Runtime};

pub struct RustFft {
    n: usize,
    forward: Arc<dyn rustfft::Fft<f64>>,
    inverse: Arc<dyn rustfft::Fft<f64>>,
    scratch: usize,
}

impl RustFft {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let scratch = forward.get_inplace_scratch_len().max(inverse.get_inplace_scratch_len());
        Self { n, forward, inverse, scratch }
    }
}

impl std::fmt::Debug for RustFft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RustFft").field("n", &self.n).finish()
    }
}

impl Fft for RustFft {
    fn len(&self) -> usize {
        self.n
    }

    fn scratch_len(&self) -> usize {
        self.scratch
    }

    fn forward(&self, data: &mut [Complex64], scratch: &mut [Complex64]) {
        self.forward.process_with_scratch(data, scratch);
    }

    fn inverse(&self, data: &mut [Complex64], scratch: &mut [Complex64]) {
        self.inverse.process_with_scratch(data, scratch);
    }
}

/// Runs jobs on a dedicated rayon pool. Results come back in index order,
/// so output does not depend on the worker count.
#[derive(Debug)]
pub struct RayonRuntime {
    pool: rayon::ThreadPool,
}

impl RayonRuntime {
    /// `jobs = 0` uses one worker per available core.
    pub fn new(jobs: usize) -> Result<Self, rayon::ThreadPoolBuildError> {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?;
        Ok(Self { pool })
    }

    pub fn workers(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl Runtime for RayonRuntime {
    fn plan_fft(&self, n: usize) -> Arc<dyn Fft> {
        Arc::new(RustFft::new(n))
    }

    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        use rayon::prelude::*;
        self.pool.install(|| (0..n).into_par_iter().map(f).collect())
    }
}
