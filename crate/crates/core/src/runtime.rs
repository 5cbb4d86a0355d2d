//! Execution backend: FFT planning and the order-preserving parallel map used
//! by energy scans, ensemble runs and parameter sweeps.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::fft::{Fft, Radix2Fft};

pub trait Runtime: Sync {
    fn plan_fft(&self, n: usize) -> Arc<dyn Fft>;

    /// Evaluates `f(0..n)`. Implementations may run jobs concurrently but must
    /// return results in index order so reductions stay deterministic.
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

/// Single-threaded runtime with the built-in radix-2 FFT.
#[derive(Debug, Default, Clone, Copy)]
pub struct SerialRuntime;

impl Runtime for SerialRuntime {
    fn plan_fft(&self, n: usize) -> Arc<dyn Fft> {
        Arc::new(Radix2Fft::new(n))
    }

    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..n).map(f).collect()
    }
}
