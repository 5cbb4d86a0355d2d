//! Stationary scattering by transfer matrices and bound-state counting.
//!
//! Amplitudes use reference planes at the ends of the scattering interval:
//! for incidence from the left the solution is `e^{ik(x−x_L)} + r·e^{−ik(x−x_L)}`
//! for `x < x_L` and `t·e^{ik(x−x_R)}` for `x > x_R`. With this convention
//! `V ≡ 0` gives `t = e^{ik(x_R−x_L)}` and `dφ/dE` is the phase time between
//! the two planes.

use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // only needed when std is absent from the build
use num_traits::Float;
use thiserror::Error;

use crate::math::unwrap_phase;
use crate::potential::{local_minimum_of, Well};
use crate::runtime::Runtime;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScatterError {
    #[error("scattering energy must be positive, got {0}")]
    NonPositiveEnergy(f64),
    #[error("potential does not vanish outside the scattering interval (|V| = {0:.3e} at the edge)")]
    OpenAsymptote(f64),
    #[error("invalid interval [{0}, {1}]")]
    Interval(f64, f64),
    #[error("transmission phase jumps by {0:.3} rad between neighbouring energies")]
    PhaseUnwrap(f64),
    #[error("energy {0} is not interior to the solution grid")]
    NotInterior(f64),
}

/// Asymptotic tolerance on `|V|` outside the interval.
pub const ASYMPTOTIC_TOL: f64 = 1e-9;
const MIN_SLABS: usize = 64;
const MAX_SLABS: usize = 1 << 22;
const CONVERGENCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Amplitudes {
    pub t: Complex64,
    pub r: Complex64,
    /// Slab count used after refinement.
    pub slabs: usize,
}

impl Amplitudes {
    pub fn transmission(&self) -> f64 {
        self.t.norm_sqr()
    }

    pub fn reflection(&self) -> f64 {
        self.r.norm_sqr()
    }
}

/// Real 2×2 propagator of `(ψ, ψ')` across a slab of constant `v` and width `h`.
fn slab_matrix(e: f64, v: f64, h: f64) -> [f64; 4] {
    let q2 = 2.0 * (e - v);
    if q2 > 0.0 {
        let q = q2.sqrt();
        let (s, c) = (q * h).sin_cos();
        [c, s / q, -q * s, c]
    } else if q2 < 0.0 {
        let k = (-q2).sqrt();
        let (s, c) = ((k * h).sinh(), (k * h).cosh());
        [c, s / k, k * s, c]
    } else {
        [1.0, h, 0.0, 1.0]
    }
}

fn mat_mul(a: [f64; 4], b: [f64; 4]) -> [f64; 4] {
    [
        a[0] * b[0] + a[1] * b[2],
        a[0] * b[1] + a[1] * b[3],
        a[2] * b[0] + a[3] * b[2],
        a[2] * b[1] + a[3] * b[3],
    ]
}

fn amplitudes_from(m: [f64; 4], e: f64, slabs: usize) -> Amplitudes {
    let k = (2.0 * e).sqrt();
    let [a, b, c, d] = m;
    let i = Complex64::i();
    let big_a = i * k * a - c;
    let big_b = i * k * d + b * k * k;
    let sum = big_a + big_b;
    Amplitudes { t: 2.0 * i * k / sum, r: (big_b - big_a) / sum, slabs }
}

/// Transfer matrix of `f` sampled at slab midpoints.
fn transfer<F: Fn(f64) -> f64>(f: &F, x_l: f64, x_r: f64, e: f64, n: usize) -> [f64; 4] {
    let h = (x_r - x_l) / n as f64;
    let mut m = [1.0, 0.0, 0.0, 1.0];
    for j in 0..n {
        let x = x_l + (j as f64 + 0.5) * h;
        m = mat_mul(slab_matrix(e, f(x), h), m);
    }
    m
}

fn check_asymptote<F: Fn(f64) -> f64>(f: &F, x_l: f64, x_r: f64) -> Result<(), ScatterError> {
    if !(x_l < x_r && x_l.is_finite() && x_r.is_finite()) {
        return Err(ScatterError::Interval(x_l, x_r));
    }
    let d = x_r - x_l;
    for x in [x_l - 1e-7 * d, x_l - 0.5 * d, x_r + 1e-7 * d, x_r + 0.5 * d] {
        let v = f(x).abs();
        if v > ASYMPTOTIC_TOL {
            return Err(ScatterError::OpenAsymptote(v));
        }
    }
    Ok(())
}

/// Transmission and reflection amplitudes for incidence from the left. The
/// slab count doubles from 64 until `|t|²` changes by less than 1e-8.
pub fn scatter<F: Fn(f64) -> f64>(f: F, x_l: f64, x_r: f64, e: f64) -> Result<Amplitudes, ScatterError> {
    if !(e > 0.0) {
        return Err(ScatterError::NonPositiveEnergy(e));
    }
    check_asymptote(&f, x_l, x_r)?;
    let mut n = MIN_SLABS;
    let mut prev = amplitudes_from(transfer(&f, x_l, x_r, e, n), e, n);
    while n < MAX_SLABS {
        n *= 2;
        let next = amplitudes_from(transfer(&f, x_l, x_r, e, n), e, n);
        let change = (next.transmission() - prev.transmission()).abs();
        prev = next;
        if change < CONVERGENCE {
            break;
        }
    }
    Ok(prev)
}

/// Amplitudes for incidence from the right (mirror image of the potential).
pub fn scatter_from_right<F: Fn(f64) -> f64>(f: F, x_l: f64, x_r: f64, e: f64) -> Result<Amplitudes, ScatterError> {
    scatter(|x| f(x_l + x_r - x), x_l, x_r, e)
}

/// Energy scan with unwrapped transmission phase and group delays.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringSolution {
    pub x_l: f64,
    pub x_r: f64,
    pub energies: Vec<f64>,
    pub t: Vec<Complex64>,
    pub r: Vec<Complex64>,
    /// Unwrapped `arg t`.
    pub phase: Vec<f64>,
}

impl ScatteringSolution {
    /// Scans `energies` (strictly increasing) through `runtime.map`.
    pub fn scan<F, R>(f: F, x_l: f64, x_r: f64, energies: &[f64], runtime: &R) -> Result<Self, ScatterError>
    where
        F: Fn(f64) -> f64 + Sync,
        R: Runtime,
    {
        let results = runtime.map(energies.len(), |i| scatter(&f, x_l, x_r, energies[i]));
        let mut t = Vec::with_capacity(energies.len());
        let mut r = Vec::with_capacity(energies.len());
        for a in results {
            let a = a?;
            t.push(a.t);
            r.push(a.r);
        }
        let raw: Vec<f64> = t.iter().map(|c| c.arg()).collect();
        let phase = unwrap_phase(&raw);
        Ok(Self { x_l, x_r, energies: energies.to_vec(), t, r, phase })
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn transmission(&self) -> Vec<f64> {
        self.t.iter().map(|c| c.norm_sqr()).collect()
    }

    /// `max | |t|² + |r|² − 1 |` over the scan.
    pub fn flux_residual(&self) -> f64 {
        self.t.iter().zip(&self.r).map(|(t, r)| (t.norm_sqr() + r.norm_sqr() - 1.0).abs()).fold(0.0, f64::max)
    }

    /// Largest phase step between neighbouring energies after unwrapping.
    pub fn max_phase_step(&self) -> f64 {
        self.phase.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max)
    }

    /// `dφ/dE` at every scan energy: central differences inside, one-sided
    /// at the ends. Fails if the unwrapped phase still jumps by ≥ π.
    pub fn group_delays(&self) -> Result<Vec<f64>, ScatterError> {
        let step = self.max_phase_step();
        if step >= core::f64::consts::PI {
            return Err(ScatterError::PhaseUnwrap(step));
        }
        let n = self.len();
        let (e, p) = (&self.energies, &self.phase);
        Ok((0..n)
            .map(|i| match i {
                _ if n < 2 => 0.0,
                0 => (p[1] - p[0]) / (e[1] - e[0]),
                _ if i == n - 1 => (p[i] - p[i - 1]) / (e[i] - e[i - 1]),
                _ => (p[i + 1] - p[i - 1]) / (e[i + 1] - e[i - 1]),
            })
            .collect())
    }

    /// Group delay at an interior energy by central difference on the
    /// unwrapped phase, interpolated between scan points.
    pub fn group_delay(&self, e: f64) -> Result<f64, ScatterError> {
        let n = self.len();
        if n < 3 || !(e > self.energies[0] && e < self.energies[n - 1]) {
            return Err(ScatterError::NotInterior(e));
        }
        let delays = self.group_delays()?;
        Ok(crate::math::interp_linear(&self.energies, &delays, e))
    }

    /// Free-traversal reference `(x_R − x_L)/v` at each energy.
    pub fn free_reference(&self) -> Vec<f64> {
        let d = self.x_r - self.x_l;
        self.energies.iter().map(|&e| d / (2.0 * e).sqrt()).collect()
    }
}

/// Group delay `dφ/dE` at `e` by a symmetric difference with step `1e-5·e`.
pub fn group_delay_at<F: Fn(f64) -> f64>(f: F, x_l: f64, x_r: f64, e: f64) -> Result<f64, ScatterError> {
    let de = 1e-5 * e;
    let lo = scatter(&f, x_l, x_r, e - de)?;
    let hi = scatter(&f, x_l, x_r, e + de)?;
    let mut dphi = hi.t.arg() - lo.t.arg();
    let tau = 2.0 * core::f64::consts::PI;
    dphi -= tau * (dphi / tau).round();
    Ok(dphi / (2.0 * de))
}

/// Rectangular-barrier transmission probability (`ħ = m = 1`), valid on
/// both sides of the threshold `E = V0`.
pub fn rectangular_transmission(v0: f64, d: f64, e: f64) -> f64 {
    let q2 = 2.0 * (v0 - e);
    if q2 > 0.0 {
        let s = (q2.sqrt() * d).sinh();
        1.0 / (1.0 + v0 * v0 * s * s / (4.0 * e * (v0 - e)))
    } else if q2 < 0.0 {
        let s = ((-q2).sqrt() * d).sin();
        1.0 / (1.0 + v0 * v0 * s * s / (4.0 * e * (e - v0)))
    } else {
        1.0 / (1.0 + v0 * d * d / 2.0)
    }
}

/// Bound states of a well below its rim.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundSpectrum {
    /// Strictly increasing eigenvalues below the rim.
    pub energies: Vec<f64>,
    pub count: usize,
    pub well: Option<Well>,
}

/// Numerov integration from the left edge with `ψ(a) = 0`; returns the
/// number of sign changes, which equals the number of Dirichlet eigenvalues
/// below `e`.
pub fn node_count(v: &[f64], h: f64, e: f64) -> usize {
    let n = v.len();
    if n < 3 {
        return 0;
    }
    let c = h * h / 12.0;
    let g = |j: usize| 2.0 * (e - v[j]);
    let (mut p0, mut p1) = (0.0f64, 1e-30f64);
    let mut nodes = 0;
    for j in 1..n - 1 {
        let p2 = (2.0 * (1.0 - 5.0 * c * g(j)) * p1 - (1.0 + c * g(j - 1)) * p0) / (1.0 + c * g(j + 1));
        if (p2 < 0.0 && p1 > 0.0) || (p2 > 0.0 && p1 < 0.0) || (p2 == 0.0 && p1 != 0.0) {
            nodes += 1;
        }
        p0 = p1;
        p1 = p2;
        let m = p1.abs().max(p0.abs());
        if m > 1e200 {
            p0 /= m;
            p1 /= m;
        }
    }
    nodes
}

/// Dirichlet eigenvalues of `−½ψ'' + vψ` on the samples `v` (spacing `h`,
/// zero boundary values just outside both ends) within `[e_lo, e_hi)`,
/// located by bisection on the node count to `tol`.
pub fn dirichlet_spectrum(v: &[f64], h: f64, e_lo: f64, e_hi: f64, tol: f64) -> Vec<f64> {
    let padded = pad(v);
    let n_lo = node_count(&padded, h, e_lo);
    let n_hi = node_count(&padded, h, e_hi);
    (n_lo..n_hi)
        .map(|level| {
            let (mut lo, mut hi) = (e_lo, e_hi);
            while hi - lo > tol {
                let mid = 0.5 * (lo + hi);
                if node_count(&padded, h, mid) > level {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            0.5 * (lo + hi)
        })
        .collect()
}

fn pad(v: &[f64]) -> Vec<f64> {
    let mut p = Vec::with_capacity(v.len() + 2);
    p.push(v[0]);
    p.extend_from_slice(v);
    p.push(v[v.len() - 1]);
    p
}

fn numerov_run(v: &[f64], h: f64, e: f64, reverse: bool, stop: usize) -> Vec<f64> {
    let n = v.len();
    let c = h * h / 12.0;
    let idx = |j: usize| if reverse { n - 1 - j } else { j };
    let g = |j: usize| 2.0 * (e - v[idx(j)]);
    let mut out = alloc::vec![0.0; n];
    out[idx(1)] = 1e-30;
    for j in 1..stop {
        let p = (2.0 * (1.0 - 5.0 * c * g(j)) * out[idx(j)] - (1.0 + c * g(j - 1)) * out[idx(j - 1)]) / (1.0 + c * g(j + 1));
        out[idx(j + 1)] = p;
        if p.abs() > 1e200 {
            for k in 0..=j + 1 {
                out[idx(k)] *= 1e-200;
            }
        }
    }
    out
}

/// Eigenfunction at eigenvalue `e` (from [`dirichlet_spectrum`]), built by
/// matching inward Numerov solutions from both ends at the outermost
/// classical turning point. Normalized to `Σ ψ² h = 1`.
pub fn dirichlet_eigenfunction(v: &[f64], h: f64, e: f64) -> Vec<f64> {
    let padded = pad(v);
    let n = padded.len();
    let allowed: Vec<usize> = (1..n - 1).filter(|&j| padded[j] < e).collect();
    let m = match allowed.last() {
        Some(&j) => j.clamp(2, n - 3),
        None => n / 2,
    };
    let left = numerov_run(&padded, h, e, false, m + 1);
    let right = numerov_run(&padded, h, e, true, n - 1 - m);
    let scale = if right[m].abs() > 0.0 { left[m] / right[m] } else { 0.0 };
    let mut psi: Vec<f64> = (1..n - 1).map(|j| if j <= m { left[j] } else { right[j] * scale }).collect();
    let peak = psi.iter().fold(0.0f64, |a, p| a.max(p.abs()));
    if peak > 0.0 && peak.is_finite() {
        psi.iter_mut().for_each(|p| *p /= peak);
    }
    let norm = (psi.iter().map(|p| p * p).sum::<f64>() * h).sqrt();
    if norm > 0.0 {
        for p in &mut psi {
            *p /= norm;
        }
    }
    psi
}

/// Closes an open well at its rim: outside the two enclosing maxima the
/// potential is raised to at least the rim energy.
pub fn close_well<F: Fn(f64) -> f64>(f: &F, well: &Well, x: f64) -> f64 {
    let v = f(x);
    let lo = well.left_top.map_or(f64::NEG_INFINITY, |t| t.0);
    let hi = well.right_top.map_or(f64::INFINITY, |t| t.0);
    if x < lo || x > hi {
        v.max(well.barrier_top)
    } else {
        v
    }
}

/// Counts states below the rim of the deepest well of `f` on `[a, b]` by
/// Numerov node counting. The open side(s) are closed at the rim energy and
/// `[a, b]` carries Dirichlet walls. Returns count 0 when there is no well.
pub fn count_bound_states<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, floor: Option<f64>) -> BoundSpectrum {
    let well = match local_minimum_of(&f, a, b) {
        Ok(w) => w,
        Err(_) => return BoundSpectrum { energies: Vec::new(), count: 0, well: None },
    };
    let depth = well.depth.max(1e-12);
    let k_max = (2.0 * depth).sqrt().max(1e-3);
    let mut n = 4096usize;
    while (b - a) / n as f64 > 0.05 / k_max && n < (1 << 18) {
        n *= 2;
    }
    let h = (b - a) / n as f64;
    let v: Vec<f64> = (0..n).map(|j| close_well(&f, &well, a + (j as f64 + 0.5) * h)).collect();
    let lo = floor.unwrap_or(well.v_min).min(well.v_min);
    let energies = dirichlet_spectrum(&v, h, lo, well.barrier_top, 1e-10 * depth.max(1.0));
    BoundSpectrum { count: energies.len(), energies, well: Some(well) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::runtime::SerialRuntime;

    fn rect(v0: f64, a: f64, b: f64) -> impl Fn(f64) -> f64 {
        move |x| if x >= a && x < b { v0 } else { 0.0 }
    }

    #[test]
    fn free_space_transmits_with_phase_kd() {
        let a = scatter(|_| 0.0, -2.0, 3.0, 0.7).unwrap();
        let k = (1.4f64).sqrt();
        assert!((a.t - Complex64::from_polar(1.0, 5.0 * k)).norm() < 1e-12);
        assert!(a.r.norm() < 1e-12);
    }

    #[test]
    fn rectangular_barrier_matches_formula() {
        let a = scatter(rect(2.0, 0.0, 1.0), 0.0, 1.0, 1.0).unwrap();
        let exact = rectangular_transmission(2.0, 1.0, 1.0);
        assert!((a.transmission() - exact).abs() < 1e-10);
        assert!((exact - 0.211).abs() < 1e-3);
        assert!((a.transmission() + a.reflection() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn opaque_group_delay_limit() {
        // κ = √2 at E = V0/2 = 1, κd = 10
        let d = 10.0 / 2f64.sqrt();
        let tau = group_delay_at(rect(2.0, 0.0, d), 0.0, d, 1.0).unwrap();
        assert!((tau - 1.0).abs() < 1e-3, "{tau}");
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(scatter(|_| 0.0, 0.0, 1.0, 0.0), Err(ScatterError::NonPositiveEnergy(_))));
        assert!(matches!(scatter(|x| 0.1 * x, 0.0, 1.0, 1.0), Err(ScatterError::OpenAsymptote(_))));
    }

    #[test]
    fn scan_is_unitary_and_unwrapped() {
        let es: Vec<f64> = (1..200).map(|i| 0.02 * i as f64).collect();
        let s = ScatteringSolution::scan(rect(2.0, 0.0, 2.0), 0.0, 2.0, &es, &SerialRuntime).unwrap();
        assert!(s.flux_residual() < 1e-9);
        assert!(s.max_phase_step() < 1.0);
        assert!(s.group_delays().is_ok());
    }

    #[test]
    fn harmonic_levels_from_nodes() {
        let h = 0.01;
        let v: Vec<f64> = (0..2000).map(|j| 0.5 * (-10.0 + (j as f64 + 0.5) * h).powi(2)).collect();
        let e = dirichlet_spectrum(&v, h, 0.0, 4.0, 1e-12);
        assert_eq!(e.len(), 4);
        for (n, en) in e.iter().enumerate() {
            assert!((en - (n as f64 + 0.5)).abs() < 1e-6, "{n}: {en}");
        }
        let psi = dirichlet_eigenfunction(&v, h, e[0]);
        let peak = psi.iter().map(|p| p.abs()).fold(0.0, f64::max);
        assert!((peak - core::f64::consts::PI.powf(-0.25)).abs() < 1e-4);
    }
}
