//! Split-operator time evolution.
//!
//! Each real-time step is the Strang product
//! `exp(−iV dt/2)·exp(−iT dt)·exp(−iV dt/2)` with `V` sampled at the step
//! midpoint, followed by the optional edge absorber. Imaginary-time
//! relaxation uses the same splitting with real exponentials.

use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // only needed when std is absent from the build
use num_traits::Float;
use thiserror::Error;

use crate::fft::Fft;
use crate::grid::{Grid, SpinMoments, SpinorWaveFunction, WaveFunction};
use crate::math::fit_line;
use crate::potential::{LarmorField, PotentialSchedule};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PropagateError {
    #[error("phase-wrap guard: dt·max|V| = {phase:.3} ≥ 0.5 at t = {t:.4}; use dt ≤ {suggested_dt:.3e}")]
    PhaseWrap { phase: f64, t: f64, suggested_dt: f64 },
    #[error("invalid propagator configuration: {0}")]
    Config(&'static str),
    #[error("no convergence after {iterations} iterations (last |ΔE| = {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("FFT length {fft} does not match grid size {grid}")]
    FftLength { fft: usize, grid: usize },
}

/// Edge absorber. The per-step amplitude mask is
/// `exp(−strength·dt·sin²(π s/2))`, with `s` running from 0 at the inner
/// edge of the layer to 1 at the grid boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Absorber {
    None,
    Mask { width: f64, strength: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagatorConfig {
    /// Upper bound on the step; the interval is divided into equal steps.
    pub dt: f64,
    pub absorber: Absorber,
    /// Record every `record_stride` steps; 0 records only the endpoints.
    pub record_stride: usize,
    /// Region whose probability is reported as `p_well`.
    pub well_region: Option<(f64, f64)>,
}

impl PropagatorConfig {
    pub fn new(dt: f64) -> Self {
        Self { dt, absorber: Absorber::None, record_stride: 0, well_region: None }
    }

    pub fn with_absorber(mut self, width: f64, strength: f64) -> Self {
        self.absorber = Absorber::Mask { width, strength };
        self
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.record_stride = stride;
        self
    }

    pub fn with_well(mut self, a: f64, b: f64) -> Self {
        self.well_region = Some((a, b));
        self
    }

    pub fn validate(&self, grid: &Grid) -> Result<(), PropagateError> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(PropagateError::Config("dt must be positive"));
        }
        if let Absorber::Mask { width, strength } = self.absorber {
            if !(width >= 8.0 * grid.dx()) {
                return Err(PropagateError::Config("absorber width must be at least 8 grid cells"));
            }
            if !(strength > 0.0) {
                return Err(PropagateError::Config("absorber strength must be positive"));
            }
            if 2.0 * width >= grid.x_max() - grid.x_min() {
                return Err(PropagateError::Config("absorber layers cover the whole grid"));
            }
        }
        Ok(())
    }
}

/// One recorded time slice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Record {
    pub t: f64,
    pub norm2: f64,
    pub mean_x: f64,
    pub var_x: f64,
    pub p_well: f64,
    pub absorbed_left: f64,
    pub absorbed_right: f64,
    pub spin: Option<SpinMoments>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub records: Vec<Record>,
    pub absorbed_left: f64,
    pub absorbed_right: f64,
    pub steps: usize,
    pub dt: f64,
}

impl Trajectory {
    /// `surviving + absorbed_left + absorbed_right` at the last record.
    pub fn total_probability(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.norm2 + r.absorbed_left + r.absorbed_right)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evolved {
    pub state: WaveFunction,
    pub trajectory: Trajectory,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolvedSpinor {
    pub state: SpinorWaveFunction,
    pub trajectory: Trajectory,
    /// Spin moments carried by probability absorbed at the right edge.
    pub absorbed_spin_right: SpinMoments,
    pub absorbed_spin_left: SpinMoments,
}

impl EvolvedSpinor {
    /// Spin of the transmitted subensemble: absorbed at the right plus what
    /// is still on the grid to the right of `x_split`.
    pub fn transmitted(&self, x_split: f64) -> SpinMoments {
        self.absorbed_spin_right.add(&self.state.spin_in(x_split, f64::INFINITY))
    }

    pub fn reflected(&self, x_split: f64) -> SpinMoments {
        self.absorbed_spin_left.add(&self.state.spin_in(f64::NEG_INFINITY, x_split))
    }
}

struct Stepper<'a> {
    grid: Grid,
    fft: &'a dyn Fft,
    kin: Vec<Complex64>,
    mask: Option<Vec<f64>>,
    scratch: Vec<Complex64>,
    v: Vec<f64>,
    dt: f64,
    steps: usize,
}

impl<'a> Stepper<'a> {
    fn new(grid: &Grid, config: &PropagatorConfig, fft: &'a dyn Fft, t0: f64, t1: f64) -> Result<Self, PropagateError> {
        config.validate(grid)?;
        if fft.len() != grid.len() {
            return Err(PropagateError::FftLength { fft: fft.len(), grid: grid.len() });
        }
        if !(t1 > t0) {
            return Err(PropagateError::Config("t1 must exceed t0"));
        }
        let steps = ((t1 - t0) / config.dt).ceil().max(1.0) as usize;
        let dt = (t1 - t0) / steps as f64;
        let inv_n = 1.0 / grid.len() as f64;
        let kin = (0..grid.len())
            .map(|j| {
                let k = grid.k(j);
                Complex64::from_polar(inv_n, -0.5 * k * k * dt)
            })
            .collect();
        let mask = match config.absorber {
            Absorber::None => None,
            Absorber::Mask { width, strength } => Some(mask_profile(grid, width, strength * dt)),
        };
        Ok(Self {
            grid: *grid,
            fft,
            kin,
            mask,
            scratch: alloc::vec![Complex64::new(0.0, 0.0); fft.scratch_len()],
            v: alloc::vec![0.0; grid.len()],
            dt,
            steps,
        })
    }

    /// Samples `V(·, t)` and applies the phase-wrap guard to its spread
    /// (a constant offset only changes the global phase).
    fn sample(&mut self, schedule: &PotentialSchedule, t: f64) -> Result<(), PropagateError> {
        schedule.sample_into(&self.grid, t, &mut self.v);
        guard(&self.v, self.dt, t)
    }

    fn kinetic(&mut self, psi: &mut [Complex64]) {
        self.fft.forward(psi, &mut self.scratch);
        for (c, k) in psi.iter_mut().zip(&self.kin) {
            *c *= k;
        }
        self.fft.inverse(psi, &mut self.scratch);
    }
}

fn guard(v: &[f64], dt: f64, t: f64) -> Result<(), PropagateError> {
    let (lo, hi) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    let spread = 0.5 * (hi - lo);
    let phase = spread * dt;
    if phase >= 0.5 || !phase.is_finite() {
        return Err(PropagateError::PhaseWrap { phase, t, suggested_dt: 0.45 / spread });
    }
    Ok(())
}

fn mask_profile(grid: &Grid, width: f64, rate: f64) -> Vec<f64> {
    (0..grid.len())
        .map(|j| {
            let x = grid.x(j);
            let s = if x < grid.x_min() + width {
                (grid.x_min() + width - x) / width
            } else if x > grid.x_max() - width {
                (x - (grid.x_max() - width)) / width
            } else {
                return 1.0;
            };
            let sn = (0.5 * core::f64::consts::PI * s.min(1.0)).sin();
            (-rate * sn * sn).exp()
        })
        .collect()
}

fn position_moments(grid: &Grid, dens: impl Iterator<Item = f64>, well: Option<(f64, f64)>) -> (f64, f64, f64, f64) {
    let dx = grid.dx();
    let (mut s0, mut s1, mut s2, mut sw) = (0.0, 0.0, 0.0, 0.0);
    for (j, w) in dens.enumerate() {
        let x = grid.x(j);
        s0 += w;
        s1 += w * x;
        s2 += w * x * x;
        if let Some((a, b)) = well {
            if x >= a && x < b {
                sw += w;
            }
        }
    }
    if s0 == 0.0 {
        return (0.0, 0.0, 0.0, 0.0);
    }
    let m = s1 / s0;
    (s0 * dx, m, (s2 / s0 - m * m).max(0.0), sw * dx)
}

fn should_record(stride: usize, step: usize, steps: usize) -> bool {
    step == steps || (stride > 0 && step % stride == 0)
}

/// Real-time evolution of a scalar wavefunction from `t0` to `t1`.
pub fn evolve(
    psi: &WaveFunction,
    schedule: &PotentialSchedule,
    config: &PropagatorConfig,
    t0: f64,
    t1: f64,
    fft: &dyn Fft,
) -> Result<Evolved, PropagateError> {
    let grid = *psi.grid();
    let mut st = Stepper::new(&grid, config, fft, t0, t1)?;
    let mut amp = psi.amplitudes().to_vec();
    let dx = grid.dx();
    let half_dt = 0.5 * st.dt;
    let static_v = schedule.is_static();
    let mut half = alloc::vec![Complex64::new(1.0, 0.0); grid.len()];
    let mut traj = Trajectory { dt: st.dt, steps: st.steps, ..Trajectory::default() };
    let (mut abs_l, mut abs_r) = (0.0, 0.0);
    let mid = grid.len() / 2;

    let record = |amp: &[Complex64], t: f64, abs_l: f64, abs_r: f64| {
        let (norm2, mean_x, var_x, p_well) = position_moments(&grid, amp.iter().map(|c| c.norm_sqr()), config.well_region);
        Record { t, norm2, mean_x, var_x, p_well, absorbed_left: abs_l, absorbed_right: abs_r, spin: None }
    };
    traj.records.push(record(&amp, t0, 0.0, 0.0));

    for step in 1..=st.steps {
        let t_mid = t0 + (step as f64 - 0.5) * st.dt;
        if step == 1 || !static_v {
            st.sample(schedule, t_mid)?;
            for (h, &v) in half.iter_mut().zip(&st.v) {
                *h = Complex64::from_polar(1.0, -v * half_dt);
            }
        }
        for (c, h) in amp.iter_mut().zip(&half) {
            *c *= h;
        }
        st.kinetic(&mut amp);
        for (c, h) in amp.iter_mut().zip(&half) {
            *c *= h;
        }
        if let Some(mask) = &st.mask {
            for (j, (c, &m)) in amp.iter_mut().zip(mask).enumerate() {
                if m < 1.0 {
                    let removed = c.norm_sqr() * (1.0 - m * m) * dx;
                    if j < mid {
                        abs_l += removed;
                    } else {
                        abs_r += removed;
                    }
                    *c *= m;
                }
            }
        }
        if should_record(config.record_stride, step, st.steps) {
            traj.records.push(record(&amp, t0 + step as f64 * st.dt, abs_l, abs_r));
        }
    }
    traj.absorbed_left = abs_l;
    traj.absorbed_right = abs_r;
    Ok(Evolved { state: WaveFunction::new(grid, amp).expect("length preserved"), trajectory: traj })
}

/// Real-time evolution of a spinor. Spin couplings from `fields` enter the
/// position half-steps as exact diagonal rotations `exp(∓i Ω dt/4)` on the
/// up/down components, `Ω(x,t) = Σ sign·ω_L·profile`.
pub fn evolve_spinor(
    spsi: &SpinorWaveFunction,
    schedule: &PotentialSchedule,
    fields: &[LarmorField],
    config: &PropagatorConfig,
    t0: f64,
    t1: f64,
    fft: &dyn Fft,
) -> Result<EvolvedSpinor, PropagateError> {
    let grid = *spsi.grid();
    let mut st = Stepper::new(&grid, config, fft, t0, t1)?;
    let mut up = spsi.up().to_vec();
    let mut down = spsi.down().to_vec();
    let dx = grid.dx();
    let half_dt = 0.5 * st.dt;
    let static_all = schedule.is_static() && fields.iter().all(|f| f.window == crate::potential::Window::Always);
    let n = grid.len();
    let mut half_up = alloc::vec![Complex64::new(1.0, 0.0); n];
    let mut half_down = alloc::vec![Complex64::new(1.0, 0.0); n];
    let mut omega = alloc::vec![0.0; n];
    let mut traj = Trajectory { dt: st.dt, steps: st.steps, ..Trajectory::default() };
    let (mut sl, mut sr) = (SpinMoments::default(), SpinMoments::default());
    let mid = n / 2;

    let record = |up: &[Complex64], down: &[Complex64], t: f64, sl: &SpinMoments, sr: &SpinMoments| {
        let dens = up.iter().zip(down).map(|(u, d)| u.norm_sqr() + d.norm_sqr());
        let (norm2, mean_x, var_x, p_well) = position_moments(&grid, dens, config.well_region);
        let mut s = SpinMoments::default();
        for (u, d) in up.iter().zip(down) {
            let z = u.conj() * d;
            s.sx += 2.0 * z.re;
            s.sy += 2.0 * z.im;
            s.sz += u.norm_sqr() - d.norm_sqr();
        }
        s.weight = norm2;
        s.sx *= dx;
        s.sy *= dx;
        s.sz *= dx;
        Record { t, norm2, mean_x, var_x, p_well, absorbed_left: sl.weight, absorbed_right: sr.weight, spin: Some(s) }
    };
    traj.records.push(record(&up, &down, t0, &sl, &sr));

    for step in 1..=st.steps {
        let t_mid = t0 + (step as f64 - 0.5) * st.dt;
        if step == 1 || !static_all {
            st.sample(schedule, t_mid)?;
            for (j, o) in omega.iter_mut().enumerate() {
                let x = grid.x(j);
                *o = fields.iter().map(|f| f.frequency(x, t_mid)).sum();
            }
            for j in 0..n {
                let v = st.v[j];
                let w = 0.5 * omega[j];
                half_up[j] = Complex64::from_polar(1.0, -(v + w) * half_dt);
                half_down[j] = Complex64::from_polar(1.0, -(v - w) * half_dt);
            }
        }
        for j in 0..n {
            up[j] *= half_up[j];
            down[j] *= half_down[j];
        }
        st.kinetic(&mut up);
        st.kinetic(&mut down);
        for j in 0..n {
            up[j] *= half_up[j];
            down[j] *= half_down[j];
        }
        if let Some(mask) = &st.mask {
            for j in 0..n {
                let m = mask[j];
                if m < 1.0 {
                    let f = (1.0 - m * m) * dx;
                    let (u, d) = (up[j], down[j]);
                    let z = u.conj() * d;
                    let tally = if j < mid { &mut sl } else { &mut sr };
                    tally.weight += (u.norm_sqr() + d.norm_sqr()) * f;
                    tally.sx += 2.0 * z.re * f;
                    tally.sy += 2.0 * z.im * f;
                    tally.sz += (u.norm_sqr() - d.norm_sqr()) * f;
                    up[j] *= m;
                    down[j] *= m;
                }
            }
        }
        if should_record(config.record_stride, step, st.steps) {
            traj.records.push(record(&up, &down, t0 + step as f64 * st.dt, &sl, &sr));
        }
    }
    traj.absorbed_left = sl.weight;
    traj.absorbed_right = sr.weight;
    Ok(EvolvedSpinor {
        state: SpinorWaveFunction::new(grid, up, down).expect("length preserved"),
        trajectory: traj,
        absorbed_spin_right: sr,
        absorbed_spin_left: sl,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelaxConfig {
    /// Final imaginary time step.
    pub dtau: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for RelaxConfig {
    fn default() -> Self {
        Self { dtau: 2e-3, tol: 1e-10, max_iter: 400_000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundState {
    pub psi: WaveFunction,
    /// `⟨H⟩`.
    pub energy: f64,
    pub kinetic: f64,
    pub potential: f64,
    pub iterations: usize,
}

/// Imaginary-time relaxation on a sampled potential `v` (one value per grid
/// point). Runs coarse stages at 16·dτ and 4·dτ before the final dτ; each
/// stage stops once successive energies differ by less than `tol`.
pub fn relax_ground_state(
    grid: &Grid,
    v: &[f64],
    config: &RelaxConfig,
    initial: Option<&WaveFunction>,
    fft: &dyn Fft,
) -> Result<GroundState, PropagateError> {
    if v.len() != grid.len() {
        return Err(PropagateError::Config("potential sample length differs from grid"));
    }
    if fft.len() != grid.len() {
        return Err(PropagateError::FftLength { fft: fft.len(), grid: grid.len() });
    }
    if !(config.dtau > 0.0) {
        return Err(PropagateError::Config("dtau must be positive"));
    }
    let n = grid.len();
    let dx = grid.dx();
    let (jmin, vmin) = v.iter().copied().enumerate().fold((0, f64::INFINITY), |a, (j, x)| if x < a.1 { (j, x) } else { a });
    let mut amp: Vec<Complex64> = match initial {
        Some(w) => w.amplitudes().to_vec(),
        None => {
            let x0 = grid.x(jmin);
            let jl = jmin.saturating_sub(1);
            let jr = (jmin + 1).min(n - 1);
            let curv = ((v[jl] + v[jr] - 2.0 * vmin) / (dx * dx)).max(1e-6);
            let sigma = (0.5 / curv.sqrt()).sqrt().max(4.0 * dx);
            (0..n)
                .map(|j| {
                    let d = grid.x(j) - x0;
                    Complex64::new((-d * d / (4.0 * sigma * sigma)).exp(), 0.0)
                })
                .collect()
        }
    };
    let mut scratch = alloc::vec![Complex64::new(0.0, 0.0); fft.scratch_len()];
    let mut buf = alloc::vec![Complex64::new(0.0, 0.0); n];
    let ks: Vec<f64> = (0..n).map(|j| grid.k(j)).collect();

    let energy_of = |amp: &[Complex64], buf: &mut Vec<Complex64>, scratch: &mut Vec<Complex64>| {
        buf.copy_from_slice(amp);
        fft.forward(buf, scratch);
        let (mut s0, mut s2) = (0.0, 0.0);
        for (c, k) in buf.iter().zip(&ks) {
            let w = c.norm_sqr();
            s0 += w;
            s2 += w * k * k;
        }
        let (mut p0, mut pv) = (0.0, 0.0);
        for (c, &vv) in amp.iter().zip(v) {
            let w = c.norm_sqr();
            p0 += w;
            pv += w * vv;
        }
        (0.5 * s2 / s0, pv / p0)
    };

    let mut iterations = 0;
    let mut last_e = f64::INFINITY;
    let mut residual = f64::INFINITY;
    for (stage, scale) in [16.0, 4.0, 1.0].into_iter().enumerate() {
        let dtau = config.dtau * scale;
        let half: Vec<f64> = v.iter().map(|&x| (-(x - vmin) * 0.5 * dtau).exp()).collect();
        let inv_n = 1.0 / n as f64;
        let kin: Vec<f64> = ks.iter().map(|k| inv_n * (-0.5 * k * k * dtau).exp()).collect();
        let tol = if stage == 2 { config.tol } else { config.tol * 10.0 };
        loop {
            if iterations >= config.max_iter {
                return Err(PropagateError::NonConvergence { iterations, residual });
            }
            iterations += 1;
            for (c, h) in amp.iter_mut().zip(&half) {
                *c *= h;
            }
            fft.forward(&mut amp, &mut scratch);
            for (c, k) in amp.iter_mut().zip(&kin) {
                *c *= k;
            }
            fft.inverse(&mut amp, &mut scratch);
            for (c, h) in amp.iter_mut().zip(&half) {
                *c *= h;
            }
            let norm = (amp.iter().map(|c| c.norm_sqr()).sum::<f64>() * dx).sqrt();
            if !(norm > 0.0 && norm.is_finite()) {
                return Err(PropagateError::NonConvergence { iterations, residual });
            }
            for c in amp.iter_mut() {
                *c /= norm;
            }
            let (ke, pe) = energy_of(&amp, &mut buf, &mut scratch);
            let e = ke + pe;
            residual = (e - last_e).abs();
            last_e = e;
            if residual < tol {
                break;
            }
        }
    }
    let (kinetic, potential) = energy_of(&amp, &mut buf, &mut scratch);
    Ok(GroundState {
        psi: WaveFunction::new(*grid, amp).expect("length preserved"),
        energy: kinetic + potential,
        kinetic,
        potential,
        iterations,
    })
}

/// Exponential fit of the probability remaining in a well region.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayFit {
    /// Decay rate per internal time unit (`−d ln P/dt`).
    pub rate: f64,
    pub rms_residual: f64,
    pub non_exponential: bool,
    pub times: Vec<f64>,
    pub survival: Vec<f64>,
    /// Number of samples used by the fit.
    pub fitted: usize,
}

impl DecayFit {
    /// Fraction lost per period `period`, `1 − exp(−rate·period)`.
    pub fn loss_per(&self, period: f64) -> f64 {
        1.0 - (-self.rate * period).exp()
    }
}

/// Residual (in `ln P`) above which a decay is flagged non-exponential.
pub const NON_EXPONENTIAL_RESIDUAL: f64 = 0.02;

/// Evolves `psi0` for `t_obs` (absorber required) and fits `ln P_well(t)`
/// to a line over the samples with `0.5 ≤ P ≤ 0.9`. When fewer than five
/// samples fall in that window (slow decay), all samples with `P ≥ 0.5` are
/// used.
pub fn decay_rate(
    psi0: &WaveFunction,
    schedule: &PotentialSchedule,
    config: &PropagatorConfig,
    t_obs: f64,
    well: (f64, f64),
    fft: &dyn Fft,
) -> Result<DecayFit, PropagateError> {
    if matches!(config.absorber, Absorber::None) {
        return Err(PropagateError::Config("decay fits need an absorber"));
    }
    let mut cfg = *config;
    cfg.well_region = Some(well);
    if cfg.record_stride == 0 {
        cfg.record_stride = (((t_obs / cfg.dt).ceil() as usize) / 200).max(1);
    }
    let out = evolve(psi0, schedule, &cfg, 0.0, t_obs, fft)?;
    let times: Vec<f64> = out.trajectory.records.iter().map(|r| r.t).collect();
    let survival: Vec<f64> = out.trajectory.records.iter().map(|r| r.p_well).collect();
    let p0 = survival[0].max(f64::MIN_POSITIVE);
    let pick = |lo: f64, hi: f64| -> (Vec<f64>, Vec<f64>) {
        times
            .iter()
            .zip(&survival)
            .filter(|(_, &p)| p / p0 >= lo && p / p0 <= hi && p > 0.0)
            .map(|(&t, &p)| (t, (p / p0).ln()))
            .unzip()
    };
    let (mut x, mut y) = pick(0.5, 0.9);
    if x.len() < 5 {
        (x, y) = pick(0.5, 1.0 + 1e-9);
    }
    let fit = fit_line(&x, &y).ok_or(PropagateError::Config("too few samples for a decay fit"))?;
    Ok(DecayFit {
        rate: -fit.slope,
        rms_residual: fit.rms_residual,
        non_exponential: fit.rms_residual > NON_EXPONENTIAL_RESIDUAL,
        times,
        survival,
        fitted: x.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fft::Radix2Fft;
    use crate::potential::Shape;

    #[test]
    fn free_packet_conserves_norm_and_momentum() {
        let g = Grid::new(-80.0, 80.0, 1024).unwrap();
        let fft = Radix2Fft::new(1024);
        let psi = WaveFunction::gaussian_packet(g, -10.0, 3.0, 1.0).unwrap();
        let out = evolve(&psi, &PotentialSchedule::empty(), &PropagatorConfig::new(0.01), 0.0, 10.0, &fft).unwrap();
        assert!((out.state.norm2() - 1.0).abs() < 1e-11);
        let (_, d0) = psi.momentum_density(&fft);
        let (_, d1) = out.state.momentum_density(&fft);
        let err = d0.iter().zip(&d1).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-12, "{err}");
        let o = out.state.observables();
        assert!((o.mean_x - 0.0).abs() < 1e-6);
    }

    #[test]
    fn phase_guard_trips() {
        let g = Grid::new(-10.0, 10.0, 256).unwrap();
        let fft = Radix2Fft::new(256);
        let psi = WaveFunction::gaussian_packet(g, 0.0, 1.0, 0.0).unwrap();
        let s = PotentialSchedule::single(Shape::Harmonic { omega2: 100.0, center: 0.0 });
        let e = evolve(&psi, &s, &PropagatorConfig::new(0.1), 0.0, 1.0, &fft).unwrap_err();
        match e {
            PropagateError::PhaseWrap { suggested_dt, .. } => assert!(suggested_dt < 0.1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn absorber_accounts_for_probability() {
        let g = Grid::new(-40.0, 40.0, 512).unwrap();
        let fft = Radix2Fft::new(512);
        let psi = WaveFunction::gaussian_packet(g, 0.0, 2.0, 2.0).unwrap();
        let cfg = PropagatorConfig::new(0.01).with_absorber(10.0, 20.0).with_stride(100);
        let out = evolve(&psi, &PotentialSchedule::empty(), &cfg, 0.0, 30.0, &fft).unwrap();
        for r in &out.trajectory.records {
            assert!((r.norm2 + r.absorbed_left + r.absorbed_right - 1.0).abs() < 1e-8);
        }
        assert!(out.trajectory.absorbed_right > 0.95);
        assert!(out.trajectory.absorbed_left < 0.01);
    }

    #[test]
    fn harmonic_ground_state() {
        let g = Grid::new(-20.0, 20.0, 512).unwrap();
        let fft = Radix2Fft::new(512);
        let v = PotentialSchedule::single(Shape::Harmonic { omega2: 1.0, center: 0.0 }).sample(&g, 0.0);
        let gs = relax_ground_state(&g, &v, &RelaxConfig { dtau: 1e-3, ..Default::default() }, None, &fft).unwrap();
        assert!((gs.energy - 0.5).abs() < 1e-6, "{}", gs.energy);
        assert!((gs.kinetic - 0.25).abs() < 1e-4);
    }
}
