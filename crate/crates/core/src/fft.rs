//! Complex FFT abstraction used by the spectral propagator.
//!
//! Both directions are unnormalized; callers scale the inverse by `1/n`.
//! [`Radix2Fft`] is the built-in implementation (power-of-two lengths only);
//! the std companion crate plugs in a SIMD backend through the same trait.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)] // only needed when std is absent from the build
use num_traits::Float;

pub trait Fft: Send + Sync {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Scratch buffer length required by [`Fft::forward`] / [`Fft::inverse`].
    fn scratch_len(&self) -> usize {
        0
    }

    /// `X_k = Σ_j x_j e^{-2πi jk/n}`, in place.
    fn forward(&self, data: &mut [Complex64], scratch: &mut [Complex64]);

    /// `x_j = Σ_k X_k e^{+2πi jk/n}`, in place, without the `1/n` factor.
    fn inverse(&self, data: &mut [Complex64], scratch: &mut [Complex64]);
}

impl core::fmt::Debug for dyn Fft {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "Fft(len = {})", self.len())
    }
}

/// Iterative radix-2 Cooley–Tukey transform with precomputed twiddles.
#[derive(Debug, Clone)]
pub struct Radix2Fft {
    n: usize,
    // e^{-2πi k/n} for k < n/2
    twiddles: Vec<Complex64>,
    bitrev: Vec<u32>,
}

impl Radix2Fft {
    /// Panics unless `n` is a power of two.
    pub fn new(n: usize) -> Self {
        assert!(n.is_power_of_two(), "radix-2 FFT needs a power-of-two length, got {n}");
        let bits = n.trailing_zeros();
        let twiddles = (0..n / 2)
            .map(|k| {
                let theta = -2.0 * PI * k as f64 / n as f64;
                Complex64::new(theta.cos(), theta.sin())
            })
            .collect();
        let bitrev = (0..n as u32)
            .map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (32 - bits) })
            .collect();
        Self { n, twiddles, bitrev }
    }

    fn transform(&self, data: &mut [Complex64], inverse: bool) {
        assert_eq!(data.len(), self.n);
        for (i, &j) in self.bitrev.iter().enumerate() {
            let j = j as usize;
            if i < j {
                data.swap(i, j);
            }
        }
        let mut half = 1;
        while half < self.n {
            let stride = self.n / (2 * half);
            for block in data.chunks_exact_mut(2 * half) {
                let (lo, hi) = block.split_at_mut(half);
                for (k, (a, b)) in lo.iter_mut().zip(hi.iter_mut()).enumerate() {
                    let mut w = self.twiddles[k * stride];
                    if inverse {
                        w = w.conj();
                    }
                    let t = w * *b;
                    *b = *a - t;
                    *a += t;
                }
            }
            half *= 2;
        }
    }
}

impl Fft for Radix2Fft {
    fn len(&self) -> usize {
        self.n
    }

    fn forward(&self, data: &mut [Complex64], _scratch: &mut [Complex64]) {
        self.transform(data, false);
    }

    fn inverse(&self, data: &mut [Complex64], _scratch: &mut [Complex64]) {
        self.transform(data, true);
    }
}
