//! Delta-kick cooling of classical ensembles and the swept-barrier capture
//! of a trapped thermal cloud into a moving auxiliary well.

use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // only needed when std is absent from the build
use num_traits::Float;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::grid::{Grid, WaveFunction};
use crate::math::{golden_min, interp_linear, linspace, trapezoid};
use crate::potential::{local_minimum_of, PotentialSchedule, PotentialTerm, Shape, Well};
use crate::fft::Fft;
use crate::propagate::{decay_rate, evolve, relax_ground_state, DecayFit, PropagateError, PropagatorConfig, RelaxConfig};
use crate::runtime::Runtime;
use crate::scattering::{close_well, dirichlet_eigenfunction, dirichlet_spectrum};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoolingError {
    #[error("temperature must be positive")]
    Temperature,
    #[error("free-expansion time must be positive")]
    FreeTime,
    #[error("ensemble is empty")]
    Empty,
    #[error(transparent)]
    Propagate(#[from] PropagateError),
    #[error("invalid sweep: {0}")]
    Sweep(&'static str),
}

/// Classical phase-space samples with normalized weights. Velocities are in
/// internal units, so with `m = 1` the kinetic temperature is `Var(v)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    pub weight: Vec<f64>,
    pub seed: u64,
}

impl Ensemble {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    fn moments(&self, a: &[f64], b: &[f64]) -> f64 {
        let ma = self.mean(a);
        let mb = self.mean(b);
        a.iter().zip(b).zip(&self.weight).map(|((x, y), w)| w * (x - ma) * (y - mb)).sum()
    }

    fn mean(&self, a: &[f64]) -> f64 {
        a.iter().zip(&self.weight).map(|(x, w)| w * x).sum()
    }

    pub fn mean_x(&self) -> f64 {
        self.mean(&self.x)
    }

    pub fn mean_v(&self) -> f64 {
        self.mean(&self.v)
    }

    pub fn sigma_x(&self) -> f64 {
        self.moments(&self.x, &self.x).sqrt()
    }

    pub fn sigma_v(&self) -> f64 {
        self.moments(&self.v, &self.v).sqrt()
    }

    /// `m·Var(v)` as an internal energy (`k_B T`).
    pub fn kinetic_temperature(&self) -> f64 {
        self.moments(&self.v, &self.v)
    }

    /// Weighted covariance `⟨δx δv⟩`.
    pub fn cov_xv(&self) -> f64 {
        self.moments(&self.x, &self.v)
    }

    /// Regression coefficient `⟨δx δv⟩ / ⟨δx²⟩`.
    pub fn regression(&self) -> f64 {
        let vx = self.moments(&self.x, &self.x);
        if vx == 0.0 {
            0.0
        } else {
            self.cov_xv() / vx
        }
    }
}

/// Gaussian positions (std `sigma_x0`) and Maxwell velocities (std `√kT`).
/// Member `i` draws from its own ChaCha8 stream `i` under `seed`, so the
/// ensemble does not depend on evaluation order.
pub fn sample_thermal(kt: f64, sigma_x0: f64, n: usize, seed: u64) -> Result<Ensemble, CoolingError> {
    if !(kt > 0.0) {
        return Err(CoolingError::Temperature);
    }
    if n == 0 {
        return Err(CoolingError::Empty);
    }
    let sv = kt.sqrt();
    let mut x = Vec::with_capacity(n);
    let mut v = Vec::with_capacity(n);
    for i in 0..n {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let gx: f64 = StandardNormal.sample(&mut rng);
        let gv: f64 = StandardNormal.sample(&mut rng);
        x.push(sigma_x0 * gx);
        v.push(sv * gv);
    }
    Ok(Ensemble { x, v, weight: alloc::vec![1.0 / n as f64; n], seed })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KickKind {
    /// `U = ½·omega2·x²`.
    Harmonic { omega2: f64 },
    /// `U = slope·|x|`.
    Quadrupole { slope: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KickSpec {
    pub kind: KickKind,
    /// Pulse duration `τ_k`.
    pub duration: f64,
    /// Cancels gravity during the expansion.
    pub gravity_compensation: bool,
}

impl KickSpec {
    /// Impulse per unit mass delivered at position `x`.
    pub fn impulse(&self, x: f64) -> f64 {
        match self.kind {
            KickKind::Harmonic { omega2 } => -omega2 * x * self.duration,
            KickKind::Quadrupole { slope } => -slope * sign(x) * self.duration,
        }
    }

    /// Kick strength: `ω²τ_k` or `a·τ_k`.
    pub fn strength(&self) -> f64 {
        match self.kind {
            KickKind::Harmonic { omega2 } => omega2 * self.duration,
            KickKind::Quadrupole { slope } => slope * self.duration,
        }
    }
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KickOutcome {
    pub ensemble: Ensemble,
    /// Set when `τ_k > t_free/10`, outside the impulse approximation.
    pub impulse_warning: bool,
}

/// Free flight for `t_free` under acceleration `−gravity` (zero with
/// compensation), then an instantaneous kick.
pub fn delta_kick(ens: &Ensemble, t_free: f64, kick: &KickSpec, gravity: f64) -> Result<KickOutcome, CoolingError> {
    if !(t_free > 0.0) {
        return Err(CoolingError::FreeTime);
    }
    let g = if kick.gravity_compensation { 0.0 } else { gravity };
    let mut out = ens.clone();
    for (x, v) in out.x.iter_mut().zip(out.v.iter_mut()) {
        *x += *v * t_free - 0.5 * g * t_free * t_free;
        *v -= g * t_free;
        *v += kick.impulse(*x);
    }
    Ok(KickOutcome { ensemble: out, impulse_warning: kick.duration > t_free / 10.0 })
}

/// Final/initial temperature for an optimal harmonic kick on a Gaussian
/// ensemble: `σx²/(σx² + σv² t²)`.
pub fn harmonic_cooling_ratio(sigma_x0: f64, sigma_v: f64, t_free: f64) -> f64 {
    let a = sigma_x0 * sigma_x0;
    a / (a + sigma_v * sigma_v * t_free * t_free)
}

/// Minimizes post-kick `Var(v)` over the kick strength at fixed pulse
/// duration `duration` by golden-section search.
pub fn optimize_kick(ens: &Ensemble, t_free: f64, kind: KickKind, duration: f64, gravity_compensation: bool, gravity: f64) -> Result<KickSpec, CoolingError> {
    if !(t_free > 0.0) {
        return Err(CoolingError::FreeTime);
    }
    if ens.is_empty() {
        return Err(CoolingError::Empty);
    }
    let make = |s: f64| KickSpec {
        kind: match kind {
            KickKind::Harmonic { .. } => KickKind::Harmonic { omega2: s / duration },
            KickKind::Quadrupole { .. } => KickKind::Quadrupole { slope: s / duration },
        },
        duration,
        gravity_compensation,
    };
    let drifted = delta_kick(ens, t_free, &make(0.0), gravity)?.ensemble;
    let hi = match kind {
        KickKind::Harmonic { .. } => 2.0 / t_free,
        KickKind::Quadrupole { .. } => 4.0 * drifted.sigma_v().max(f64::MIN_POSITIVE),
    };
    let cost = |s: f64| {
        let k = make(s);
        let vs: Vec<f64> = drifted.v.iter().zip(&drifted.x).map(|(v, x)| v + k.impulse(*x)).collect();
        let e = Ensemble { x: Vec::new(), v: vs, weight: drifted.weight.clone(), seed: 0 };
        e.kinetic_temperature()
    };
    let (s, _) = golden_min(cost, 0.0, hi, 1e-12 * hi);
    Ok(make(s))
}

/// Geometry and numerics of the swept-barrier capture.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub slope: f64,
    pub vertex: f64,
    pub barrier_height: f64,
    pub waist: f64,
    /// Barrier centre at the start and end of the sweep.
    pub start: f64,
    pub end: f64,
    pub speed: f64,
    pub grid: Grid,
    pub dt: f64,
    /// Absorber `(width, strength)`.
    pub absorber: Option<(f64, f64)>,
    /// Thermal energy `k_B T`.
    pub kt: f64,
    /// Channels are run in fixed-size batches; the scan stops once every
    /// channel beyond the final bound-state count has `P < cutoff` for
    /// `stop_after` consecutive channels.
    pub batch: usize,
    pub cutoff: f64,
    pub stop_after: usize,
    pub max_channels: usize,
    /// Points in the uniform energy grid for the Boltzmann average.
    pub energy_points: usize,
    /// Grid extent in units of `kT`; at least 5.
    pub energy_span_kt: f64,
}

impl SweepSpec {
    pub fn duration(&self) -> f64 {
        (self.end - self.start).abs() / self.speed
    }

    fn drift(&self) -> f64 {
        if self.end < self.start {
            -self.speed
        } else {
            self.speed
        }
    }

    /// Trap plus barrier moving from `start` towards `end`.
    pub fn schedule(&self) -> PotentialSchedule {
        self.schedule_with_height(self.barrier_height)
    }

    fn schedule_with_height(&self, v0: f64) -> PotentialSchedule {
        PotentialSchedule {
            terms: alloc::vec![
                PotentialTerm::new(Shape::LinearVee { slope: self.slope, vertex: self.vertex }),
                PotentialTerm::new(Shape::Gaussian { v0, center: self.start, waist: self.waist }).with_drift(self.drift()),
            ],
        }
    }

    /// Static potential with the barrier parked at `center`.
    pub fn static_potential(&self, center: f64) -> impl Fn(f64) -> f64 + '_ {
        let (s, v, w, v0) = (self.slope, self.vertex, self.waist, self.barrier_height);
        move |x| s * (x - v).abs() + v0 * (-2.0 * (x - center) * (x - center) / (w * w)).exp()
    }

    /// Search interval for the auxiliary well on the outer side of a
    /// barrier at `center`.
    pub fn outer_interval(&self, center: f64) -> (f64, f64) {
        if center < self.vertex {
            (self.grid.x_min(), center + self.waist)
        } else {
            (center - self.waist, self.grid.x_max())
        }
    }

    pub fn validate(&self) -> Result<(), CoolingError> {
        if !(self.speed > 0.0) {
            return Err(CoolingError::Sweep("sweep speed must be positive"));
        }
        if self.start == self.end {
            return Err(CoolingError::Sweep("sweep start and end coincide"));
        }
        if !(self.kt > 0.0) {
            return Err(CoolingError::Temperature);
        }
        if !(self.energy_span_kt >= 5.0) {
            return Err(CoolingError::Sweep("energy grid must span at least 5 kT"));
        }
        if self.batch == 0 || self.energy_points < 2 || self.stop_after == 0 {
            return Err(CoolingError::Sweep("batch, stop_after and energy_points must be positive"));
        }
        Ok(())
    }
}

/// Transfer probability of one pre-sweep trap eigenstate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Channel {
    pub index: usize,
    /// Energy above the trap minimum.
    pub energy: f64,
    pub p_transfer: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaptureResult {
    /// Final auxiliary well (None when the sweep leaves no well).
    pub well: Option<Well>,
    pub depth: f64,
    pub n_bound: usize,
    pub bound_energies: Vec<f64>,
    pub channels: Vec<Channel>,
    /// Uniform energy grid (above the trap minimum) and the interpolated
    /// transfer probability used for the Boltzmann average.
    pub energy_grid: Vec<f64>,
    pub p_of_e: Vec<f64>,
    /// `∫P(E)e^{−E/kT}dE / ∫e^{−E/kT}dE` over the energy grid.
    pub capture_fraction: f64,
    /// `Σ_n e^{−E_n/kT} P_n / Z` with the semiclassical partition function.
    pub thermal_capture: f64,
    /// Kinetic and total energy of the ground state of the final well.
    pub captured_kinetic: f64,
    pub captured_energy: f64,
    pub well_destroyed: bool,
}

struct FineStates {
    x0: f64,
    h: f64,
    v: Vec<f64>,
}

impl FineStates {
    fn new<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> Self {
        let h = (b - a) / n as f64;
        let v = (0..n).map(|j| f(a + (j as f64 + 0.5) * h)).collect();
        Self { x0: a + 0.5 * h, h, v }
    }

    /// Eigenfunction at `e`, resampled on `grid` and normalized there.
    fn on_grid(&self, grid: &Grid, e: f64) -> WaveFunction {
        let psi = dirichlet_eigenfunction(&self.v, self.h, e);
        let xs: Vec<f64> = (0..psi.len()).map(|j| self.x0 + j as f64 * self.h).collect();
        let mut w = WaveFunction::from_fn(*grid, |x| {
            if x < xs[0] || x > xs[xs.len() - 1] {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(interp_linear(&xs, &psi, x), 0.0)
            }
        });
        w.normalize();
        w
    }
}

fn gram_schmidt(states: &mut [WaveFunction]) {
    for i in 0..states.len() {
        for j in 0..i {
            let (head, tail) = states.split_at_mut(i);
            let c = head[j].inner(&tail[0]);
            for (a, b) in tail[0].amplitudes_mut().iter_mut().zip(head[j].amplitudes()) {
                *a -= c * b;
            }
        }
        states[i].normalize();
    }
}

/// Runs the sweep for every trap eigenstate until the transfer probability
/// has died out, then averages over a thermal distribution.
pub fn sweep_capture<R: Runtime>(spec: &SweepSpec, runtime: &R) -> Result<CaptureResult, CoolingError> {
    spec.validate()?;
    let grid = spec.grid;
    let fine_n = 4 * grid.len();
    let t_end = spec.duration();

    // Final auxiliary well, closed at its rim.
    let v_final = spec.static_potential(spec.end);
    let (wa, wb) = spec.outer_interval(spec.end);
    let well = local_minimum_of(&v_final, wa, wb).ok();
    let Some(well) = well.filter(|w| w.depth > 0.0 && spec.barrier_height > 0.0) else {
        return Ok(empty_capture(spec));
    };
    let closed = |x: f64| close_well(&v_final, &well, x);
    let fine_final = FineStates::new(closed, grid.x_min(), grid.x_max(), fine_n);
    let bound_energies = dirichlet_spectrum(&fine_final.v, fine_final.h, well.v_min, well.barrier_top, 1e-11 * (1.0 + well.depth));
    let mut bound: Vec<WaveFunction> = bound_energies.iter().map(|&e| fine_final.on_grid(&grid, e)).collect();
    gram_schmidt(&mut bound);
    let n_bound = bound.len();

    // Pre-sweep trap eigenstates.
    let v_start = spec.static_potential(spec.start);
    let fine_start = FineStates::new(&v_start, grid.x_min(), grid.x_max(), fine_n);
    let trap_min = fine_start.v.iter().copied().fold(f64::INFINITY, f64::min);
    let e_cap = trap_min + spec.energy_span_kt * spec.kt;
    let tol = 1e-11 * (1.0 + spec.kt);

    let mut cfg = PropagatorConfig::new(spec.dt);
    if let Some((w, s)) = spec.absorber {
        cfg = cfg.with_absorber(w, s);
    }
    let schedule = spec.schedule();
    let fft = runtime.plan_fft(grid.len());

    let all = dirichlet_spectrum(&fine_start.v, fine_start.h, trap_min, e_cap, tol);
    let mut channels: Vec<Channel> = Vec::new();
    let mut quiet = 0usize;
    let mut next = 0usize;
    'scan: while next < spec.max_channels {
        let count = spec.batch.min(spec.max_channels - next);
        if next >= all.len() {
            break;
        }
        let energies: Vec<f64> = all.iter().copied().skip(next).take(count).collect();
        let results = runtime.map(energies.len(), |i| {
            let psi0 = fine_start.on_grid(&grid, energies[i]);
            evolve(&psi0, &schedule, &cfg, 0.0, t_end, fft.as_ref()).map(|out| {
                bound.iter().map(|b| b.inner(&out.state).norm_sqr()).sum::<f64>().min(1.0)
            })
        });
        for (i, r) in results.into_iter().enumerate() {
            let p = r?;
            let index = next + i;
            channels.push(Channel { index, energy: energies[i] - trap_min, p_transfer: p });
            if index >= n_bound && p < spec.cutoff {
                quiet += 1;
            } else {
                quiet = 0;
            }
            if quiet >= spec.stop_after {
                break 'scan;
            }
        }
        next += energies.len();
    }

    let energy_grid = linspace(0.0, spec.energy_span_kt * spec.kt, spec.energy_points);
    let ce: Vec<f64> = channels.iter().map(|c| c.energy).collect();
    let cp: Vec<f64> = channels.iter().map(|c| c.p_transfer).collect();
    let last = ce.last().copied().unwrap_or(0.0);
    let p_of_e: Vec<f64> = energy_grid.iter().map(|&e| if e > last { 0.0 } else { interp_linear(&ce, &cp, e) }).collect();
    let boltz: Vec<f64> = energy_grid.iter().map(|&e| (-e / spec.kt).exp()).collect();
    let weighted: Vec<f64> = boltz.iter().zip(&p_of_e).map(|(b, p)| b * p).collect();
    let capture_fraction = trapezoid(&energy_grid, &weighted) / trapezoid(&energy_grid, &boltz);

    // Semiclassical Z = √(kT/2π)·∫e^{−(V−V_min)/kT}dx (ħ = m = 1).
    let z = (spec.kt / (2.0 * core::f64::consts::PI)).sqrt()
        * fine_start.v.iter().map(|&v| (-(v - trap_min) / spec.kt).exp()).sum::<f64>()
        * fine_start.h;
    let thermal_capture = channels.iter().map(|c| (-c.energy / spec.kt).exp() * c.p_transfer).sum::<f64>() / z;

    let closed_on_grid: Vec<f64> = (0..grid.len()).map(|j| closed(grid.x(j))).collect();
    let gs = relax_ground_state(&grid, &closed_on_grid, &RelaxConfig::default(), bound.first(), fft.as_ref())?;

    Ok(CaptureResult {
        well: Some(well),
        depth: well.depth,
        n_bound,
        bound_energies,
        channels,
        energy_grid,
        p_of_e,
        capture_fraction,
        thermal_capture,
        captured_kinetic: gs.kinetic,
        captured_energy: gs.energy,
        well_destroyed: false,
    })
}

fn empty_capture(spec: &SweepSpec) -> CaptureResult {
    let energy_grid = linspace(0.0, spec.energy_span_kt * spec.kt, spec.energy_points);
    CaptureResult {
        well: None,
        depth: 0.0,
        n_bound: 0,
        bound_energies: Vec::new(),
        channels: Vec::new(),
        p_of_e: alloc::vec![0.0; energy_grid.len()],
        energy_grid,
        capture_fraction: 0.0,
        thermal_capture: 0.0,
        captured_kinetic: 0.0,
        captured_energy: 0.0,
        well_destroyed: true,
    }
}

/// Largest step allowed by the phase-wrap guard anywhere along the sweep,
/// with a 10% margin.
pub fn stable_dt(spec: &SweepSpec) -> f64 {
    let g = &spec.grid;
    let vee = |x: f64| spec.slope * (x - spec.vertex).abs();
    let hi = vee(g.x_min()).max(vee(g.x_max())) + spec.barrier_height.max(0.0);
    let lo = spec.barrier_height.min(0.0);
    0.45 / (0.5 * (hi - lo)).max(f64::MIN_POSITIVE)
}

/// Barrier height giving an auxiliary well of the requested depth with the
/// barrier parked at the sweep end, by bisection on `[0, v_max]`.
pub fn barrier_for_depth(spec: &SweepSpec, depth: f64, v_max: f64) -> Option<f64> {
    if depth <= 0.0 {
        return Some(0.0);
    }
    let depth_at = |v0: f64| {
        let s = SweepSpec { barrier_height: v0, ..spec.clone() };
        let (a, b) = s.outer_interval(s.end);
        local_minimum_of(s.static_potential(s.end), a, b).map(|w| w.depth).unwrap_or(0.0)
    };
    if depth_at(v_max) < depth {
        return None;
    }
    let (mut lo, mut hi) = (0.0, v_max);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if depth_at(mid) < depth {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Tunnelling loss of the final auxiliary well.
#[derive(Debug, Clone, PartialEq)]
pub struct WellDecay {
    pub well: Well,
    pub secular_period: f64,
    pub fit: DecayFit,
    /// `1 − exp(−rate·T_sec)`.
    pub loss_per_period: f64,
    pub initial_energy: f64,
}

/// Relaxes the ground state of the closed final well, then evolves it in the
/// open static potential for `periods` secular periods and fits the decay of
/// the probability inside the well.
pub fn well_decay(spec: &SweepSpec, periods: f64, fft: &dyn Fft) -> Result<WellDecay, CoolingError> {
    spec.validate()?;
    let grid = spec.grid;
    let v_final = spec.static_potential(spec.end);
    let (wa, wb) = spec.outer_interval(spec.end);
    let well = local_minimum_of(&v_final, wa, wb).map_err(|_| CoolingError::Sweep("no auxiliary well at the sweep end"))?;
    let closed: Vec<f64> = (0..grid.len()).map(|j| close_well(&v_final, &well, grid.x(j))).collect();
    let gs = relax_ground_state(&grid, &closed, &RelaxConfig::default(), None, fft)?;
    let region = (
        well.left_top.map_or(grid.x_min(), |t| t.0),
        well.right_top.map_or(grid.x_max(), |t| t.0),
    );
    let (w, st) = spec.absorber.unwrap_or((8.0 * grid.dx(), 5.0));
    let cfg = PropagatorConfig::new(spec.dt.min(stable_dt(spec))).with_absorber(w, st);
    let schedule = PotentialSchedule {
        terms: alloc::vec![
            PotentialTerm::new(Shape::LinearVee { slope: spec.slope, vertex: spec.vertex }),
            PotentialTerm::new(Shape::Gaussian { v0: spec.barrier_height, center: spec.end, waist: spec.waist }),
        ],
    };
    let period = well.secular_period();
    let fit = decay_rate(&gs.psi, &schedule, &cfg, periods * period, region, fft)?;
    Ok(WellDecay { loss_per_period: fit.loss_per(period), secular_period: period, initial_energy: gs.energy, well, fit })
}

/// One point of the capture-versus-depth staircase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepthPoint {
    pub barrier_height: f64,
    pub depth: f64,
    pub n_bound: usize,
    pub capture_fraction: f64,
    pub thermal_capture: f64,
}

/// Repeats [`sweep_capture`] for each barrier height, reducing `dt` where
/// the phase-wrap guard requires it.
pub fn depth_staircase<R: Runtime>(spec: &SweepSpec, heights: &[f64], runtime: &R) -> Result<Vec<DepthPoint>, CoolingError> {
    heights
        .iter()
        .map(|&v0| {
            let mut s = SweepSpec { barrier_height: v0, ..spec.clone() };
            s.dt = s.dt.min(stable_dt(&s));
            let r = sweep_capture(&s, runtime)?;
            Ok(DepthPoint { barrier_height: v0, depth: r.depth, n_bound: r.n_bound, capture_fraction: r.capture_fraction, thermal_capture: r.thermal_capture })
        })
        .collect()
}

/// Counts increments of at least `threshold` between consecutive points.
pub fn count_steps(values: &[f64], threshold: f64) -> usize {
    values.windows(2).filter(|w| w[1] - w[0] >= threshold).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampling_is_deterministic_and_order_free() {
        let a = sample_thermal(2.0, 1.0, 100, 7).unwrap();
        let b = sample_thermal(2.0, 1.0, 100, 7).unwrap();
        assert_eq!(a, b);
        let c = sample_thermal(2.0, 1.0, 50, 7).unwrap();
        assert_eq!(&a.x[..50], &c.x[..]);
        assert_ne!(sample_thermal(2.0, 1.0, 100, 8).unwrap().x, a.x);
    }

    #[test]
    fn point_cloud_cools_to_zero() {
        let mut e = sample_thermal(4.0, 1.0, 1000, 3).unwrap();
        e.x.iter_mut().for_each(|x| *x = 0.0);
        let t = 2.5;
        let kick = KickSpec { kind: KickKind::Harmonic { omega2: 1.0 / (t * 0.01) }, duration: 0.01, gravity_compensation: true };
        let out = delta_kick(&e, t, &kick, 0.0).unwrap();
        assert!(out.ensemble.kinetic_temperature() < 1e-24);
        assert!(!out.impulse_warning);
    }

    #[test]
    fn zero_temperature_needs_no_kick() {
        let mut e = sample_thermal(1.0, 2.0, 500, 1).unwrap();
        e.v.iter_mut().for_each(|v| *v = 0.0);
        let k = optimize_kick(&e, 3.0, KickKind::Harmonic { omega2: 0.0 }, 0.01, true, 0.0).unwrap();
        assert!(k.strength().abs() < 1e-9);
    }

    #[test]
    fn step_counting() {
        assert_eq!(count_steps(&[0.0, 0.05, 0.051, 0.09, 0.2], 0.03), 3);
    }
}
