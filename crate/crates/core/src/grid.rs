//! Uniform spatial grids, scalar and two-component wavefunctions.
//!
//! Grid points are cell centred: `x_j = x_min + (j + ½)·dx` for
//! `j = 0..n`, so a grid symmetric about the origin has no point at `x = 0`
//! and half-line region probabilities of symmetric states are exactly ½.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)] // only needed when std is absent from the build
use num_traits::Float;
use thiserror::Error;

use crate::fft::{Fft, Radix2Fft};

pub const MIN_POINTS: usize = 256;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("grid needs a power-of-two point count >= {MIN_POINTS}, got {0}")]
    PointCount(usize),
    #[error("grid extent must satisfy x_min < x_max (got {0} .. {1})")]
    Extent(f64, f64),
    #[error("packet centre {0} lies outside the grid")]
    CentreOutside(f64),
    #[error("packet width {sigma} is below 4·dx = {min}")]
    TooNarrow { sigma: f64, min: f64 },
    #[error("packet bandwidth |k0| + 3/σ = {needed} exceeds the Nyquist limit {k_max}")]
    Bandwidth { needed: f64, k_max: f64 },
    #[error("amplitude array has {got} entries, grid has {expected}")]
    Length { got: usize, expected: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    x_min: f64,
    x_max: f64,
    n: usize,
}

impl Grid {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self, GridError> {
        if !n.is_power_of_two() || n < MIN_POINTS {
            return Err(GridError::PointCount(n));
        }
        if !(x_min.is_finite() && x_max.is_finite() && x_min < x_max) {
            return Err(GridError::Extent(x_min, x_max));
        }
        Ok(Self { x_min, x_max, n })
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.n as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        self.x_min + (j as f64 + 0.5) * self.dx()
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.x(j)).collect()
    }

    pub fn dk(&self) -> f64 {
        2.0 * PI / (self.n as f64 * self.dx())
    }

    pub fn k_max(&self) -> f64 {
        PI / self.dx()
    }

    /// Wavenumber of FFT bin `j` (standard unshifted ordering).
    pub fn k(&self, j: usize) -> f64 {
        let signed = if j < self.n / 2 { j as f64 } else { j as f64 - self.n as f64 };
        signed * self.dk()
    }

    /// Index of the grid point nearest to `x`, clamped to the grid.
    pub fn index_of(&self, x: f64) -> usize {
        let f = ((x - self.x_min) / self.dx() - 0.5).round();
        if f <= 0.0 {
            0
        } else {
            (f as usize).min(self.n - 1)
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.x_min && x < self.x_max
    }
}

/// Summary moments of a wavefunction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observables {
    pub norm2: f64,
    pub mean_x: f64,
    pub var_x: f64,
    pub mean_p: f64,
    pub kinetic_energy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction {
    grid: Grid,
    psi: Vec<Complex64>,
}

impl WaveFunction {
    pub fn new(grid: Grid, psi: Vec<Complex64>) -> Result<Self, GridError> {
        if psi.len() != grid.len() {
            return Err(GridError::Length { got: psi.len(), expected: grid.len() });
        }
        Ok(Self { grid, psi })
    }

    pub fn from_fn<F: FnMut(f64) -> Complex64>(grid: Grid, mut f: F) -> Self {
        let psi = (0..grid.len()).map(|j| f(grid.x(j))).collect();
        Self { grid, psi }
    }

    pub fn zeros(grid: Grid) -> Self {
        Self { grid, psi: alloc::vec![Complex64::new(0.0, 0.0); grid.len()] }
    }

    /// Normalized `exp(−(x−x0)²/4σ²)·exp(i k0 x)`; `sigma` is the position
    /// standard deviation of `|ψ|²`.
    pub fn gaussian_packet(grid: Grid, x0: f64, sigma: f64, k0: f64) -> Result<Self, GridError> {
        if !grid.contains(x0) {
            return Err(GridError::CentreOutside(x0));
        }
        let min = 4.0 * grid.dx();
        if !(sigma >= min) {
            return Err(GridError::TooNarrow { sigma, min });
        }
        let needed = k0.abs() + 3.0 / sigma;
        if needed >= grid.k_max() {
            return Err(GridError::Bandwidth { needed, k_max: grid.k_max() });
        }
        let mut wf = Self::from_fn(grid, |x| {
            let env = (-(x - x0) * (x - x0) / (4.0 * sigma * sigma)).exp();
            Complex64::from_polar(env, k0 * (x - x0))
        });
        wf.normalize();
        Ok(wf)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.psi
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.psi
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.psi
    }

    pub fn norm2(&self) -> f64 {
        self.psi.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.grid.dx()
    }

    pub fn normalize(&mut self) {
        let n = self.norm2().sqrt();
        if n > 0.0 {
            for c in &mut self.psi {
                *c /= n;
            }
        }
    }

    /// `⟨self|other⟩ = Σ conj(ψ_j)·φ_j·dx`.
    pub fn inner(&self, other: &WaveFunction) -> Complex64 {
        self.psi.iter().zip(&other.psi).map(|(a, b)| a.conj() * b).sum::<Complex64>() * self.grid.dx()
    }

    pub fn density(&self) -> Vec<f64> {
        self.psi.iter().map(|c| c.norm_sqr()).collect()
    }

    /// Fraction of the norm on grid points with `a ≤ x_j < b`.
    pub fn region_probability(&self, a: f64, b: f64) -> f64 {
        region_weight(&self.grid, a, b, |j| self.psi[j].norm_sqr()) / self.norm2()
    }

    /// Unnormalized probability `Σ_{a≤x_j<b} |ψ_j|² dx`.
    pub fn region_norm(&self, a: f64, b: f64) -> f64 {
        region_weight(&self.grid, a, b, |j| self.psi[j].norm_sqr())
    }

    pub fn max_abs(&self) -> f64 {
        self.psi.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Largest amplitude within `cells` points of either edge, relative to
    /// the global maximum.
    pub fn edge_ratio(&self, cells: usize) -> f64 {
        let n = self.psi.len();
        let c = cells.min(n / 2).max(1);
        let edge = self.psi[..c].iter().chain(&self.psi[n - c..]).map(|v| v.norm()).fold(0.0, f64::max);
        let m = self.max_abs();
        if m == 0.0 {
            0.0
        } else {
            edge / m
        }
    }

    /// Momentum amplitudes `ψ̃(k_j) = dx/√(2π) Σ ψ_m e^{−i k_j x_m}` in FFT
    /// bin order, so that `Σ |ψ̃|²·dk = Σ |ψ|²·dx`.
    pub fn momentum_amplitudes(&self, fft: &dyn Fft) -> Vec<Complex64> {
        let mut buf = self.psi.clone();
        let mut scratch = alloc::vec![Complex64::new(0.0, 0.0); fft.scratch_len()];
        fft.forward(&mut buf, &mut scratch);
        let dx = self.grid.dx();
        let scale = dx / (2.0 * PI).sqrt();
        let x0 = self.grid.x(0);
        for (j, c) in buf.iter_mut().enumerate() {
            *c *= Complex64::from_polar(scale, -self.grid.k(j) * x0);
        }
        buf
    }

    /// `(k, |ψ̃(k)|²)` sorted by increasing `k`.
    pub fn momentum_density(&self, fft: &dyn Fft) -> (Vec<f64>, Vec<f64>) {
        let amps = self.momentum_amplitudes(fft);
        let n = amps.len();
        let mut k = Vec::with_capacity(n);
        let mut d = Vec::with_capacity(n);
        for i in 0..n {
            let j = (i + n / 2) % n;
            k.push(self.grid.k(j));
            d.push(amps[j].norm_sqr());
        }
        (k, d)
    }

    pub fn observables(&self) -> Observables {
        self.observables_with(&Radix2Fft::new(self.grid.len()))
    }

    pub fn observables_with(&self, fft: &dyn Fft) -> Observables {
        let g = &self.grid;
        let dx = g.dx();
        let (mut n2, mut sx, mut sxx) = (0.0, 0.0, 0.0);
        for (j, c) in self.psi.iter().enumerate() {
            let w = c.norm_sqr();
            let x = g.x(j);
            n2 += w;
            sx += w * x;
            sxx += w * x * x;
        }
        let norm2 = n2 * dx;
        if n2 == 0.0 {
            return Observables { norm2: 0.0, mean_x: 0.0, var_x: 0.0, mean_p: 0.0, kinetic_energy: 0.0 };
        }
        let mean_x = sx / n2;
        let var_x = (sxx / n2 - mean_x * mean_x).max(0.0);
        let mut buf = self.psi.clone();
        let mut scratch = alloc::vec![Complex64::new(0.0, 0.0); fft.scratch_len()];
        fft.forward(&mut buf, &mut scratch);
        let (mut s0, mut s1, mut s2) = (0.0, 0.0, 0.0);
        for (j, c) in buf.iter().enumerate() {
            let w = c.norm_sqr();
            let k = g.k(j);
            s0 += w;
            s1 += w * k;
            s2 += w * k * k;
        }
        Observables { norm2, mean_x, var_x, mean_p: s1 / s0, kinetic_energy: 0.5 * s2 / s0 }
    }
}

fn region_weight<F: Fn(usize) -> f64>(grid: &Grid, a: f64, b: f64, w: F) -> f64 {
    let mut s = 0.0;
    for j in 0..grid.len() {
        let x = grid.x(j);
        if x >= a && x < b {
            s += w(j);
        }
    }
    s * grid.dx()
}

/// Spin-½ wavefunction with components along ±z.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinorWaveFunction {
    grid: Grid,
    up: Vec<Complex64>,
    down: Vec<Complex64>,
}

/// Spin expectation values `(⟨σx⟩, ⟨σy⟩, ⟨σz⟩)` of the unnormalized state.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SpinMoments {
    pub weight: f64,
    pub sx: f64,
    pub sy: f64,
    pub sz: f64,
}

impl SpinMoments {
    /// Moments divided by the weight (zero if the weight vanishes).
    pub fn normalized(&self) -> SpinMoments {
        if self.weight <= 0.0 {
            return SpinMoments::default();
        }
        SpinMoments { weight: 1.0, sx: self.sx / self.weight, sy: self.sy / self.weight, sz: self.sz / self.weight }
    }

    /// In-plane precession angle `atan2(⟨σy⟩, ⟨σx⟩)`.
    pub fn angle(&self) -> f64 {
        self.sy.atan2(self.sx)
    }

    pub fn add(&self, o: &SpinMoments) -> SpinMoments {
        SpinMoments { weight: self.weight + o.weight, sx: self.sx + o.sx, sy: self.sy + o.sy, sz: self.sz + o.sz }
    }
}

impl SpinorWaveFunction {
    pub fn new(grid: Grid, up: Vec<Complex64>, down: Vec<Complex64>) -> Result<Self, GridError> {
        for v in [&up, &down] {
            if v.len() != grid.len() {
                return Err(GridError::Length { got: v.len(), expected: grid.len() });
            }
        }
        Ok(Self { grid, up, down })
    }

    /// Spatial state `psi` times the spinor `(a, b)`.
    pub fn from_spatial(psi: &WaveFunction, a: Complex64, b: Complex64) -> Self {
        Self {
            grid: *psi.grid(),
            up: psi.amplitudes().iter().map(|&c| c * a).collect(),
            down: psi.amplitudes().iter().map(|&c| c * b).collect(),
        }
    }

    /// Spin polarized along +x: `(1, 1)/√2`.
    pub fn polarized_x(psi: &WaveFunction) -> Self {
        let s = Complex64::new(core::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self::from_spatial(psi, s, s)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn up(&self) -> &[Complex64] {
        &self.up
    }

    pub fn down(&self) -> &[Complex64] {
        &self.down
    }

    pub fn components_mut(&mut self) -> (&mut [Complex64], &mut [Complex64]) {
        (&mut self.up, &mut self.down)
    }

    pub fn up_wave(&self) -> WaveFunction {
        WaveFunction { grid: self.grid, psi: self.up.clone() }
    }

    pub fn down_wave(&self) -> WaveFunction {
        WaveFunction { grid: self.grid, psi: self.down.clone() }
    }

    pub fn norm2(&self) -> f64 {
        self.up.iter().chain(&self.down).map(|c| c.norm_sqr()).sum::<f64>() * self.grid.dx()
    }

    /// Spin moments restricted to `a ≤ x_j < b` (unnormalized).
    pub fn spin_in(&self, a: f64, b: f64) -> SpinMoments {
        let mut m = SpinMoments::default();
        let dx = self.grid.dx();
        for j in 0..self.grid.len() {
            let x = self.grid.x(j);
            if x >= a && x < b {
                let (u, d) = (self.up[j], self.down[j]);
                let z = u.conj() * d;
                m.weight += (u.norm_sqr() + d.norm_sqr()) * dx;
                m.sx += 2.0 * z.re * dx;
                m.sy += 2.0 * z.im * dx;
                m.sz += (u.norm_sqr() - d.norm_sqr()) * dx;
            }
        }
        m
    }

    pub fn spin(&self) -> SpinMoments {
        self.spin_in(f64::NEG_INFINITY, f64::INFINITY)
    }

    pub fn region_probability(&self, a: f64, b: f64) -> f64 {
        self.spin_in(a, b).weight / self.norm2()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid {
        Grid::new(-64.0, 64.0, 1024).unwrap()
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(matches!(Grid::new(0.0, 1.0, 300), Err(GridError::PointCount(300))));
        assert!(matches!(Grid::new(0.0, 1.0, 128), Err(GridError::PointCount(128))));
        assert!(matches!(Grid::new(1.0, 1.0, 256), Err(GridError::Extent(..))));
    }

    #[test]
    fn gaussian_moments() {
        let wf = WaveFunction::gaussian_packet(grid(), 0.0, 5.0, 2.0).unwrap();
        let o = wf.observables();
        assert!((o.norm2 - 1.0).abs() < 1e-12);
        assert!((o.kinetic_energy - (2.0 + 1.0 / 200.0)).abs() < 1e-10, "{}", o.kinetic_energy);
        assert!((o.mean_p - 2.0).abs() < 1e-10);
        assert!(o.mean_x.abs() < grid().dx());
        assert!((o.var_x.sqrt() - 5.0).abs() < 0.05);
    }

    #[test]
    fn rest_packet_has_zero_momentum() {
        let wf = WaveFunction::gaussian_packet(grid(), 3.0, 4.0, 0.0).unwrap();
        let o = wf.observables();
        assert!(o.mean_p.abs() < 1e-10);
        assert!((o.kinetic_energy - 1.0 / (8.0 * 16.0)).abs() < 1e-10);
    }

    #[test]
    fn bandwidth_and_width_rejections() {
        let g = grid();
        assert!(matches!(WaveFunction::gaussian_packet(g, 0.0, 5.0, 30.0), Err(GridError::Bandwidth { .. })));
        assert!(matches!(WaveFunction::gaussian_packet(g, 0.0, 0.1, 0.0), Err(GridError::TooNarrow { .. })));
        assert!(matches!(WaveFunction::gaussian_packet(g, 100.0, 5.0, 0.0), Err(GridError::CentreOutside(_))));
    }

    #[test]
    fn region_probabilities() {
        let wf = WaveFunction::gaussian_packet(grid(), 0.0, 5.0, 1.0).unwrap();
        assert!((wf.region_probability(f64::NEG_INFINITY, f64::INFINITY) - 1.0).abs() < 1e-12);
        assert!((wf.region_probability(0.0, f64::INFINITY) - 0.5).abs() < 1e-6);
        let parts = [-64.0, -10.0, -1.0, 2.5, 64.0];
        let s: f64 = parts.windows(2).map(|w| wf.region_probability(w[0], w[1])).sum();
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn momentum_density_matches_norm() {
        let wf = WaveFunction::gaussian_packet(grid(), -7.0, 3.0, 1.5).unwrap();
        let fft = Radix2Fft::new(1024);
        let (k, d) = wf.momentum_density(&fft);
        let dk = k[1] - k[0];
        let total: f64 = d.iter().sum::<f64>() * dk;
        assert!((total - 1.0).abs() < 1e-12);
        // analytic |ψ̃(k)|² = √(2σ²/π)·exp(−2σ²(k−k0)²)
        let j = k.iter().position(|&v| (v - 1.5).abs() < dk / 2.0).unwrap();
        let oracle = (2.0 * 9.0 / PI).sqrt() * (-18.0 * (k[j] - 1.5).powi(2)).exp();
        assert!((d[j] - oracle).abs() < 1e-9);
    }

    #[test]
    fn spinor_x_polarized_moments() {
        let wf = WaveFunction::gaussian_packet(grid(), 0.0, 5.0, 0.0).unwrap();
        let s = SpinorWaveFunction::polarized_x(&wf);
        let m = s.spin();
        assert!((m.weight - 1.0).abs() < 1e-12);
        assert!((m.sx - 1.0).abs() < 1e-12 && m.sy.abs() < 1e-15 && m.sz.abs() < 1e-15);
        assert!((s.norm2() - 1.0).abs() < 1e-12);
    }
}
