//! Causal response of a barrier: the transmitted wave is a retarded
//! convolution `ψ(d, t) = ∫₀^∞ f(τ) ψ(0, t − d/c − τ) dτ`.
//!
//! Time dependence is `e^{−iωt}`, so a pure delay `Δ` has `t(ω) = e^{iωΔ}`
//! and causal transfer functions are analytic in the upper half plane. The
//! reference medium is a Klein–Gordon line `u_tt = c²u_xx − Ω²u` inside the
//! barrier and `Ω = 0` outside, which has an exact front speed `c`; below
//! `Ω` the barrier is evanescent.

use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // only needed when std is absent from the build
use num_traits::Float;
use thiserror::Error;

use crate::fft::Fft;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CausalError {
    #[error("kernel is acausal at this resolution (residual {residual:.3e})")]
    Acausal { residual: f64 },
    #[error("invalid grid: {0}")]
    Grid(&'static str),
    #[error("waveform step {waveform} does not match kernel step {kernel}")]
    StepMismatch { waveform: f64, kernel: f64 },
}

/// Acausal residual above which [`kernel_from_transfer`] rejects.
pub const MAX_ACAUSAL_RESIDUAL: f64 = 1e-3;

/// Transmission `t(ω)` sampled on the FFT frequency grid of `n` points with
/// time step `dt`: `ω_k = 2πk/(n·dt)` with negative frequencies in the upper
/// half.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferFunction {
    pub dt: f64,
    pub front_speed: f64,
    pub distance: f64,
    pub omega: Vec<f64>,
    pub t: Vec<Complex64>,
}

impl TransferFunction {
    pub fn sample<F: Fn(f64) -> Complex64>(n: usize, dt: f64, front_speed: f64, distance: f64, f: F) -> Result<Self, CausalError> {
        if !n.is_power_of_two() || n < 16 {
            return Err(CausalError::Grid("point count must be a power of two ≥ 16"));
        }
        if !(dt > 0.0) || !(front_speed > 0.0) || !(distance >= 0.0) {
            return Err(CausalError::Grid("dt and front speed must be positive, distance non-negative"));
        }
        let omega: Vec<f64> = (0..n).map(|k| omega_k(k, n, dt)).collect();
        let t = omega.iter().map(|&w| f(w)).collect();
        Ok(Self { dt, front_speed, distance, omega, t })
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// Whole samples of the front delay `d/c`, rounded down so the
    /// fractional remainder stays inside a causal kernel.
    pub fn delay_samples(&self) -> usize {
        (self.distance / (self.front_speed * self.dt) + 1e-9).floor() as usize
    }

    /// `max(|t| − 1)`, positive for active media.
    pub fn passivity_excess(&self) -> f64 {
        self.t.iter().map(|z| z.norm() - 1.0).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_passive(&self) -> bool {
        self.passivity_excess() <= 1e-12
    }

    /// `max |t(−ω) − t*(ω)|`, zero for real kernels.
    pub fn hermitian_error(&self) -> f64 {
        let n = self.len();
        (1..n / 2).map(|k| (self.t[n - k] - self.t[k].conj()).norm()).fold(0.0, f64::max)
    }
}

fn omega_k(k: usize, n: usize, dt: f64) -> f64 {
    let kk = if k < n / 2 { k as f64 } else { k as f64 - n as f64 };
    2.0 * core::f64::consts::PI * kk / (n as f64 * dt)
}

/// Retarded kernel `f(τ)`, `τ = m·dt ≥ 0`, together with the whole-sample
/// front delay.
#[derive(Debug, Clone, PartialEq)]
pub struct CausalKernel {
    pub dt: f64,
    pub f: Vec<f64>,
    pub delay_samples: usize,
    /// `max|f(τ<0)| / max|f|` before truncation.
    pub acausal_residual: f64,
    /// `max|Im f| / max|f|` before taking the real part.
    pub imaginary_residual: f64,
}

impl CausalKernel {
    pub fn front_delay(&self) -> f64 {
        self.delay_samples as f64 * self.dt
    }

    pub fn taus(&self) -> Vec<f64> {
        (0..self.f.len()).map(|m| m as f64 * self.dt).collect()
    }

    /// Kernel of a pure whole-sample delay.
    pub fn delta(dt: f64, delay_samples: usize) -> Self {
        Self { dt, f: alloc::vec![1.0 / dt], delay_samples, acausal_residual: 0.0, imaginary_residual: 0.0 }
    }
}

/// Inverse transform of `t(ω)·e^{−iωD·dt}`. The second half of the periodic
/// result is `τ < 0`; its peak relative to the overall peak is the acausal
/// residual. The causal half is kept up to the last sample above
/// `tail_tol·max|f|`.
pub fn kernel_from_transfer(tf: &TransferFunction, fft: &dyn Fft, tail_tol: f64) -> Result<CausalKernel, CausalError> {
    let n = tf.len();
    if fft.len() != n {
        return Err(CausalError::Grid("FFT length differs from the transfer-function grid"));
    }
    let d = tf.delay_samples() as f64 * tf.dt;
    let mut buf: Vec<Complex64> = tf.omega.iter().zip(&tf.t).map(|(&w, &t)| t * Complex64::from_polar(1.0, -w * d)).collect();
    let mut scratch = alloc::vec![Complex64::new(0.0, 0.0); fft.scratch_len()];
    fft.forward(&mut buf, &mut scratch);
    let scale = 1.0 / (n as f64 * tf.dt);
    let peak = buf.iter().map(|z| z.norm()).fold(0.0, f64::max) * scale;
    if !(peak > 0.0) {
        return Err(CausalError::Grid("transfer function is identically zero"));
    }
    let acausal = buf[n / 2..].iter().map(|z| z.norm()).fold(0.0, f64::max) * scale / peak;
    let imag = buf.iter().map(|z| z.im.abs()).fold(0.0, f64::max) * scale / peak;
    if acausal > MAX_ACAUSAL_RESIDUAL {
        return Err(CausalError::Acausal { residual: acausal });
    }
    let mut f: Vec<f64> = buf[..n / 2].iter().map(|z| z.re * scale).collect();
    let keep = f.iter().rposition(|v| v.abs() > tail_tol * peak).map_or(1, |j| j + 1);
    f.truncate(keep);
    Ok(CausalKernel { dt: tf.dt, f, delay_samples: tf.delay_samples(), acausal_residual: acausal, imaginary_residual: imag })
}

/// Transmission of a Klein–Gordon slab of length `d` and cutoff `Ω`,
/// referenced to the incident amplitude at the slab entrance and evaluated
/// at the slab exit.
pub fn klein_gordon_slab(omega: f64, c: f64, cutoff: f64, d: f64) -> Complex64 {
    if omega == 0.0 {
        return if cutoff == 0.0 { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
    }
    let k0 = omega / c;
    let q2 = (omega * omega - cutoff * cutoff) / (c * c);
    // cos(qd) and sin(qd)/q are entire in q², so no branch choice is needed.
    let (cos_qd, sinc) = if q2 >= 0.0 {
        let q = q2.sqrt();
        if q == 0.0 {
            (1.0, d)
        } else {
            ((q * d).cos(), (q * d).sin() / q)
        }
    } else {
        let kappa = (-q2).sqrt();
        ((kappa * d).cosh(), (kappa * d).sinh() / kappa)
    };
    let denom = Complex64::new(cos_qd, -(k0 * k0 + q2) / (2.0 * k0) * sinc);
    denom.inv()
}

/// Causal `poles`-pole low-pass `(1 − iω/ω_c)^{−poles}`.
pub fn low_pass(omega: f64, omega_c: f64, poles: u32) -> Complex64 {
    Complex64::new(1.0, -omega / omega_c).powi(-(poles as i32))
}

/// `d arg t/dω` by a central difference of step `h`.
pub fn group_delay_of<F: Fn(f64) -> Complex64>(f: F, omega: f64, h: f64) -> f64 {
    (f(omega + h) / f(omega - h)).arg() / (2.0 * h)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WaveKind {
    BandLimited,
    /// Exactly zero before `t_f`.
    Front { t_f: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    pub t0: f64,
    pub dt: f64,
    pub samples: Vec<Complex64>,
    pub kind: WaveKind,
}

impl Waveform {
    pub fn from_fn<F: FnMut(f64) -> Complex64>(t0: f64, dt: f64, n: usize, kind: WaveKind, mut f: F) -> Self {
        let samples = (0..n).map(|j| f(t0 + j as f64 * dt)).collect();
        Self { t0, dt, samples, kind }
    }

    /// Gaussian envelope of rms width `sigma` on a carrier `e^{−iω₀t}`.
    pub fn gaussian(t0: f64, dt: f64, n: usize, center: f64, sigma: f64, omega0: f64) -> Self {
        Self::from_fn(t0, dt, n, WaveKind::BandLimited, |t| {
            let s = (t - center) / sigma;
            Complex64::from_polar((-0.5 * s * s).exp(), -omega0 * t)
        })
    }

    /// Carrier `e^{−iω₀t}` switched on abruptly at `t_f`.
    pub fn step(t0: f64, dt: f64, n: usize, t_f: f64, omega0: f64) -> Self {
        Self::from_fn(t0, dt, n, WaveKind::Front { t_f }, |t| {
            if t < t_f {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::from_polar(1.0, -omega0 * t)
            }
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn time(&self, j: usize) -> f64 {
        self.t0 + j as f64 * self.dt
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|j| self.time(j)).collect()
    }

    pub fn peak(&self) -> f64 {
        self.samples.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Time of the envelope maximum, refined by a parabola through the
    /// three samples of `|ψ|²` around the largest one.
    pub fn peak_time(&self) -> f64 {
        let p: Vec<f64> = self.samples.iter().map(|z| z.norm_sqr()).collect();
        let j = (0..p.len()).fold(0, |b, i| if p[i] > p[b] { i } else { b });
        if j == 0 || j + 1 >= p.len() {
            return self.time(j);
        }
        let den = p[j - 1] - 2.0 * p[j] + p[j + 1];
        let shift = if den != 0.0 { 0.5 * (p[j - 1] - p[j + 1]) / den } else { 0.0 };
        self.time(j) + shift * self.dt
    }

    /// First time with `|ψ| > rel_tol·peak`.
    pub fn front_time(&self, rel_tol: f64) -> Option<f64> {
        let thr = rel_tol * self.peak();
        self.samples.iter().position(|z| z.norm() > thr).map(|j| self.time(j))
    }

    /// `∫|ψ|² dt`.
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.dt
    }

    /// For front waveforms, the largest `|ψ|` before `t_f` (zero when the
    /// invariant holds).
    pub fn pre_front_max(&self) -> f64 {
        match self.kind {
            WaveKind::BandLimited => 0.0,
            WaveKind::Front { t_f } => (0..self.len()).filter(|&j| self.time(j) < t_f).map(|j| self.samples[j].norm()).fold(0.0, f64::max),
        }
    }
}

/// Discrete retarded convolution. Output sample `j` uses input samples up to
/// `j − D` only.
pub fn transmit(kernel: &CausalKernel, input: &Waveform) -> Result<Waveform, CausalError> {
    if (input.dt - kernel.dt).abs() > 1e-12 * kernel.dt {
        return Err(CausalError::StepMismatch { waveform: input.dt, kernel: kernel.dt });
    }
    let n = input.len();
    let d = kernel.delay_samples;
    let mut out = alloc::vec![Complex64::new(0.0, 0.0); n];
    for (j, o) in out.iter_mut().enumerate().skip(d) {
        let last = j - d;
        let mut acc = Complex64::new(0.0, 0.0);
        for (m, &fm) in kernel.f.iter().enumerate().take(last + 1) {
            acc += input.samples[last - m] * fm;
        }
        *o = acc * kernel.dt;
    }
    let kind = match input.kind {
        WaveKind::BandLimited => WaveKind::BandLimited,
        WaveKind::Front { t_f } => WaveKind::Front { t_f: t_f + kernel.front_delay() },
    };
    Ok(Waveform { t0: input.t0, dt: input.dt, samples: out, kind })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationReport {
    pub t_cut: f64,
    /// `t_cut + D·dt`; the output may not change before this time.
    pub bound: f64,
    /// First output time where the two outputs differ by more than
    /// `1e-10` of the unperturbed output peak.
    pub first_divergence: Option<f64>,
    /// Largest difference before `bound`, relative to the output peak.
    pub max_pre_bound: f64,
    pub causal: bool,
}

/// Relative divergence threshold used by [`perturbation_test`].
pub const DIVERGENCE_TOL: f64 = 1e-10;

/// Adds `delta(t)` to the input at every `t > t_cut` and compares outputs.
pub fn perturbation_test<F: FnMut(f64) -> Complex64>(kernel: &CausalKernel, input: &Waveform, t_cut: f64, mut delta: F) -> Result<PerturbationReport, CausalError> {
    let mut perturbed = input.clone();
    for j in 0..perturbed.len() {
        let t = perturbed.time(j);
        if t > t_cut {
            perturbed.samples[j] += delta(t);
        }
    }
    let a = transmit(kernel, input)?;
    let b = transmit(kernel, &perturbed)?;
    let peak = a.peak().max(f64::MIN_POSITIVE);
    let bound = t_cut + kernel.front_delay();
    let mut first = None;
    let mut max_pre = 0.0f64;
    for j in 0..a.len() {
        let diff = (a.samples[j] - b.samples[j]).norm() / peak;
        let t = a.time(j);
        if t <= bound {
            max_pre = max_pre.max(diff);
        }
        if first.is_none() && diff > DIVERGENCE_TOL {
            first = Some(t);
        }
    }
    let causal = first.is_none_or(|t| t > bound - 1e-9 * input.dt) && max_pre <= DIVERGENCE_TOL;
    Ok(PerturbationReport { t_cut, bound, first_divergence: first, max_pre_bound: max_pre, causal })
}

/// `∫|out|² / ∫|in|²`; at most one for passive kernels.
pub fn energy_ratio(input: &Waveform, output: &Waveform) -> f64 {
    output.energy() / input.energy()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fft::Radix2Fft;

    #[test]
    fn identity_channel_is_a_first_bin_spike() {
        let n = 256;
        let tf = TransferFunction::sample(n, 0.1, 1.0, 0.0, |_| Complex64::new(1.0, 0.0)).unwrap();
        let k = kernel_from_transfer(&tf, &Radix2Fft::new(n), 1e-12).unwrap();
        assert_eq!(k.f.len(), 1);
        assert!((k.f[0] - 10.0).abs() < 1e-12);
    }

    #[test]
    fn pure_delay_lands_on_its_sample() {
        let n = 256;
        let dt = 0.1;
        let tf = TransferFunction::sample(n, dt, 1.0, 0.0, |w| Complex64::from_polar(1.0, w * 1.7)).unwrap();
        let k = kernel_from_transfer(&tf, &Radix2Fft::new(n), 1e-12).unwrap();
        let j = (0..k.f.len()).fold(0, |b, i| if k.f[i].abs() > k.f[b].abs() { i } else { b });
        assert_eq!(j, 17);
        assert!(k.acausal_residual < 1e-12);
    }

    #[test]
    fn slab_is_passive_and_hermitian() {
        let tf = TransferFunction::sample(1024, 0.05, 1.0, 3.0, |w| klein_gordon_slab(w, 1.0, 1.0, 3.0)).unwrap();
        assert!(tf.is_passive());
        assert!(tf.hermitian_error() < 1e-14);
    }

    #[test]
    fn slab_without_cutoff_is_a_pure_delay() {
        for w in [-2.0, 0.3, 5.0] {
            let t = klein_gordon_slab(w, 2.0, 0.0, 3.0);
            assert!((t - Complex64::from_polar(1.0, w * 1.5)).norm() < 1e-12);
        }
    }

    #[test]
    fn delta_kernel_delays_the_input() {
        let input = Waveform::gaussian(0.0, 0.1, 200, 5.0, 1.0, 0.0);
        let out = transmit(&CausalKernel::delta(0.1, 7), &input).unwrap();
        for j in 7..200 {
            assert!((out.samples[j] - input.samples[j - 7]).norm() < 1e-14);
        }
        assert!(out.samples[..7].iter().all(|z| z.norm() == 0.0));
    }
}
