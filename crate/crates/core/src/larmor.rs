//! Larmor-clock weak measurements of interaction times.
//!
//! A spin polarized along `+x` crosses a weak field along `z` confined to a
//! region. The in-plane component `⟨σy⟩` of a post-selected subensemble,
//! divided by `ω_L`, is the conditional time spent in the region; `⟨σz⟩/ω_L`
//! is the out-of-plane (back-action) component. Transmitted and reflected
//! subensembles are read from the spin carried into the right and left
//! absorbers, plus whatever remains on the grid on either side of a split
//! point at the end of the run.
//!
//! Flipping the sign of every field swaps the two spin components, so the
//! precession angle is an odd function of the field strength.

use alloc::sync::Arc;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // only needed when std is absent from the build
use num_traits::Float;
use thiserror::Error;

use crate::fft::Fft;
use crate::grid::{SpinMoments, SpinorWaveFunction, WaveFunction};
use crate::math::{fit_line, fit_quadratic};
use crate::potential::{LarmorField, PotentialSchedule};
use crate::propagate::{evolve_spinor, EvolvedSpinor, PropagateError, PropagatorConfig};
use crate::runtime::Runtime;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LarmorError {
    #[error(transparent)]
    Propagate(#[from] PropagateError),
    #[error("transmitted probability {0:.3e} is too small for post-selection")]
    NoTransmission(f64),
    #[error("need at least {0} field strengths")]
    TooFewStrengths(usize),
    #[error("field strengths must be positive and finite")]
    BadStrength,
}

/// Smallest transmitted probability accepted for post-selection.
pub const MIN_TRANSMISSION: f64 = 1e-10;

/// A scattering run: initial packet, potential, propagation settings and
/// the point separating reflected from transmitted probability.
#[derive(Debug, Clone, PartialEq)]
pub struct LarmorSetup {
    pub psi0: WaveFunction,
    pub schedule: PotentialSchedule,
    pub config: PropagatorConfig,
    pub t_final: f64,
    pub x_split: f64,
}

impl LarmorSetup {
    /// Runs the spinor evolution from `+x` polarization under `fields`.
    pub fn run(&self, fields: &[LarmorField], fft: &dyn Fft) -> Result<EvolvedSpinor, PropagateError> {
        let s = SpinorWaveFunction::polarized_x(&self.psi0);
        evolve_spinor(&s, &self.schedule, fields, &self.config, 0.0, self.t_final, fft)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Subensemble {
    Transmitted,
    Reflected,
    All,
}

impl Subensemble {
    pub fn label(&self) -> &'static str {
        match self {
            Subensemble::Transmitted => "transmitted",
            Subensemble::Reflected => "reflected",
            Subensemble::All => "all",
        }
    }
}

/// Spin moments of the three subensembles after one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubensembleSpins {
    pub transmitted: SpinMoments,
    pub reflected: SpinMoments,
}

impl SubensembleSpins {
    pub fn from_run(run: &EvolvedSpinor, x_split: f64) -> Self {
        Self { transmitted: run.transmitted(x_split), reflected: run.reflected(x_split) }
    }

    pub fn get(&self, sub: Subensemble) -> SpinMoments {
        match sub {
            Subensemble::Transmitted => self.transmitted,
            Subensemble::Reflected => self.reflected,
            Subensemble::All => self.transmitted.add(&self.reflected),
        }
    }
}

/// Conditional times of one subensemble for one region.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalTimes {
    pub region: (f64, f64),
    pub subensemble: Subensemble,
    /// Subensemble probability (T, R or 1).
    pub weight: f64,
    pub omegas: Vec<f64>,
    pub tau_y: Vec<f64>,
    pub tau_z: Vec<f64>,
    /// Linear extrapolation of `tau_y`, `tau_z` to `ω_L → 0`.
    pub tau_y0: f64,
    pub tau_z0: f64,
    pub fit_residual: f64,
    /// `|c2|·ω_max / |c1|` of a quadratic fit of `⟨σy⟩` against `ω_L`.
    pub curvature: f64,
}

impl ConditionalTimes {
    fn build(region: (f64, f64), sub: Subensemble, omegas: &[f64], spins: &[SubensembleSpins]) -> Self {
        let moments: Vec<SpinMoments> = spins.iter().map(|s| s.get(sub)).collect();
        let weight = moments.iter().map(|m| m.weight).sum::<f64>() / moments.len() as f64;
        let sy: Vec<f64> = moments.iter().map(|m| m.normalized().sy).collect();
        let sz: Vec<f64> = moments.iter().map(|m| m.normalized().sz).collect();
        let tau_y: Vec<f64> = sy.iter().zip(omegas).map(|(s, w)| s / w).collect();
        let tau_z: Vec<f64> = sz.iter().zip(omegas).map(|(s, w)| s / w).collect();
        let fy = fit_line(omegas, &tau_y);
        let fz = fit_line(omegas, &tau_z);
        let (tau_y0, fit_residual) = fy.map_or((tau_y[0], 0.0), |f| (f.intercept, f.rms_residual));
        let tau_z0 = fz.map_or(tau_z[0], |f| f.intercept);
        let w_max = omegas.iter().copied().fold(0.0, f64::max);
        let curvature = match fit_quadratic(omegas, &sy) {
            Some(c) if c[1] != 0.0 => (c[2] * w_max / c[1]).abs(),
            _ => 0.0,
        };
        Self { region, subensemble: sub, weight, omegas: omegas.to_vec(), tau_y, tau_z, tau_y0, tau_z0, fit_residual, curvature }
    }
}

/// Conditional times of all three subensembles for one region.
#[derive(Debug, Clone, PartialEq)]
pub struct LarmorTimes {
    pub transmitted: ConditionalTimes,
    pub reflected: ConditionalTimes,
    pub all: ConditionalTimes,
    pub transmission: f64,
    pub reflection: f64,
}

impl LarmorTimes {
    pub fn get(&self, sub: Subensemble) -> &ConditionalTimes {
        match sub {
            Subensemble::Transmitted => &self.transmitted,
            Subensemble::Reflected => &self.reflected,
            Subensemble::All => &self.all,
        }
    }

    /// `|τ(all) − (T·τ(T) + R·τ(R))|` for the extrapolated in-plane times.
    pub fn decomposition_error(&self) -> f64 {
        let (t, r) = (self.transmission, self.reflection);
        (self.all.tau_y0 * (t + r) - (t * self.transmitted.tau_y0 + r * self.reflected.tau_y0)).abs()
    }
}

fn check_omegas(omegas: &[f64], min: usize) -> Result<(), LarmorError> {
    if omegas.len() < min {
        return Err(LarmorError::TooFewStrengths(min));
    }
    if omegas.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
        return Err(LarmorError::BadStrength);
    }
    Ok(())
}

fn times_from(region: (f64, f64), omegas: &[f64], spins: &[SubensembleSpins]) -> Result<LarmorTimes, LarmorError> {
    let transmission = spins[0].transmitted.weight;
    let reflection = spins[0].reflected.weight;
    if transmission < MIN_TRANSMISSION {
        return Err(LarmorError::NoTransmission(transmission));
    }
    Ok(LarmorTimes {
        transmitted: ConditionalTimes::build(region, Subensemble::Transmitted, omegas, spins),
        reflected: ConditionalTimes::build(region, Subensemble::Reflected, omegas, spins),
        all: ConditionalTimes::build(region, Subensemble::All, omegas, spins),
        transmission,
        reflection,
    })
}

/// Runs one always-on field over `region` per strength in `omegas` (at
/// least three) and extracts the conditional times.
pub fn larmor_times<R: Runtime>(setup: &LarmorSetup, region: (f64, f64), omegas: &[f64], runtime: &R) -> Result<LarmorTimes, LarmorError> {
    let map = dwell_map(setup, &[region.0, region.1], omegas, runtime)?;
    Ok(map.bins.into_iter().next().expect("one bin"))
}

/// Per-bin conditional times for the partition given by `edges`.
#[derive(Debug, Clone, PartialEq)]
pub struct DwellMap {
    pub edges: Vec<f64>,
    pub bins: Vec<LarmorTimes>,
}

impl DwellMap {
    /// Sum of the extrapolated in-plane times of bins `range`.
    pub fn sum_tau_y(&self, sub: Subensemble, range: core::ops::Range<usize>) -> f64 {
        self.bins[range].iter().map(|b| b.get(sub).tau_y0).sum()
    }

    /// Bins merged pairwise (an odd trailing bin is kept on its own) by
    /// adding their times; used to check additivity against a rerun on the
    /// coarser partition.
    pub fn merged_pairs(&self, sub: Subensemble) -> Vec<f64> {
        self.bins.chunks(2).map(|c| c.iter().map(|b| b.get(sub).tau_y0).sum()).collect()
    }

    pub fn max_abs_tau(&self) -> f64 {
        self.bins
            .iter()
            .flat_map(|b| [b.transmitted.tau_y0, b.reflected.tau_y0, b.all.tau_y0])
            .map(f64::abs)
            .fold(0.0, f64::max)
    }
}

/// Runs every `(bin, ω)` pair concurrently through `runtime`.
pub fn dwell_map<R: Runtime>(setup: &LarmorSetup, edges: &[f64], omegas: &[f64], runtime: &R) -> Result<DwellMap, LarmorError> {
    check_omegas(omegas, 3)?;
    if edges.len() < 2 || edges.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(LarmorError::BadStrength);
    }
    let nb = edges.len() - 1;
    let nw = omegas.len();
    let fft: Arc<dyn Fft> = runtime.plan_fft(setup.psi0.grid().len());
    let runs = runtime.map(nb * nw, |i| {
        let (b, w) = (i / nw, i % nw);
        let field = LarmorField::interval(edges[b], edges[b + 1], omegas[w]);
        setup.run(&[field], fft.as_ref()).map(|r| SubensembleSpins::from_run(&r, setup.x_split))
    });
    let mut spins = Vec::with_capacity(runs.len());
    for r in runs {
        spins.push(r?);
    }
    let bins = (0..nb)
        .map(|b| times_from((edges[b], edges[b + 1]), omegas, &spins[b * nw..(b + 1) * nw]))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(DwellMap { edges: edges.to_vec(), bins })
}

/// One strength of the two-field experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoFieldPoint {
    pub omega: f64,
    pub theta_both: f64,
    pub theta_left: f64,
    pub theta_right: f64,
    pub transmission: f64,
}

impl TwoFieldPoint {
    pub fn ratio(&self) -> f64 {
        let single = self.theta_left.abs().min(self.theta_right.abs());
        if single == 0.0 {
            0.0
        } else {
            self.theta_both.abs() / single
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoFieldResult {
    pub points: Vec<TwoFieldPoint>,
    /// Strength factor applied to the right field (1 unless calibrated).
    pub right_scale: f64,
    /// Log-log slope of `|θ_both|` against `ω`.
    pub slope_both: f64,
    /// Log-log slope of `|θ_both| / min(|θ_left|, |θ_right|)` against `ω`.
    pub slope_ratio: f64,
}

/// Transmitted precession angles with the left field only, the right field
/// only and both. `left` and `right` are templates whose `omega_l` is
/// replaced by each strength (the right field additionally multiplied by
/// `right_scale`).
pub fn two_field_experiment<R: Runtime>(
    setup: &LarmorSetup,
    left: LarmorField,
    right: LarmorField,
    right_scale: f64,
    omegas: &[f64],
    runtime: &R,
) -> Result<TwoFieldResult, LarmorError> {
    check_omegas(omegas, 2)?;
    let fft: Arc<dyn Fft> = runtime.plan_fft(setup.psi0.grid().len());
    let nw = omegas.len();
    let runs = runtime.map(3 * nw, |i| {
        let (cfg, w) = (i / nw, omegas[i % nw]);
        let l = LarmorField { omega_l: w, ..left };
        let r = LarmorField { omega_l: w * right_scale, ..right };
        let fields: Vec<LarmorField> = match cfg {
            0 => alloc::vec![l, r],
            1 => alloc::vec![l],
            _ => alloc::vec![r],
        };
        setup.run(&fields, fft.as_ref()).map(|run| SubensembleSpins::from_run(&run, setup.x_split).transmitted)
    });
    let mut t = Vec::with_capacity(runs.len());
    for r in runs {
        t.push(r?);
    }
    let transmission = t[0].weight;
    if transmission < MIN_TRANSMISSION {
        return Err(LarmorError::NoTransmission(transmission));
    }
    let points: Vec<TwoFieldPoint> = (0..nw)
        .map(|i| TwoFieldPoint {
            omega: omegas[i],
            theta_both: t[i].angle(),
            theta_left: t[nw + i].angle(),
            theta_right: t[2 * nw + i].angle(),
            transmission: t[i].weight,
        })
        .collect();
    let lw: Vec<f64> = points.iter().map(|p| p.omega.ln()).collect();
    let lb: Vec<f64> = points.iter().map(|p| p.theta_both.abs().max(f64::MIN_POSITIVE).ln()).collect();
    let lr: Vec<f64> = points.iter().map(|p| p.ratio().max(f64::MIN_POSITIVE).ln()).collect();
    let slope_both = fit_line(&lw, &lb).map_or(f64::NAN, |f| f.slope);
    let slope_ratio = fit_line(&lw, &lr).map_or(f64::NAN, |f| f.slope);
    Ok(TwoFieldResult { points, right_scale, slope_both, slope_ratio })
}

/// First-order response `dθ/dω` of the transmitted angle at `ω → 0`,
/// from the odd-in-ω Richardson combination `(8θ(h) − θ(2h)) / 6h`.
pub fn first_order_response(setup: &LarmorSetup, field: LarmorField, h: f64, fft: &dyn Fft) -> Result<f64, LarmorError> {
    let angle = |w: f64| -> Result<f64, LarmorError> {
        let run = setup.run(&[LarmorField { omega_l: w, ..field }], fft)?;
        Ok(SubensembleSpins::from_run(&run, setup.x_split).transmitted.angle())
    };
    Ok((8.0 * angle(h)? - angle(2.0 * h)?) / (6.0 * h))
}

/// Stationary dwell time `∫_a^b |ψ_E|² dx / k` for unit incident amplitude,
/// with `ψ_E` reconstructed from the transfer matrix.
pub fn stationary_dwell_time<F: Fn(f64) -> f64>(f: F, x_l: f64, x_r: f64, e: f64, a: f64, b: f64) -> Result<f64, crate::scattering::ScatterError> {
    let amp = crate::scattering::scatter(&f, x_l, x_r, e)?;
    let k = (2.0 * e).sqrt();
    let n = amp.slabs.max(4096);
    let h = (x_r - x_l) / n as f64;
    let mut psi = Complex64::new(1.0, 0.0) + amp.r;
    let mut dpsi = Complex64::i() * k * (Complex64::new(1.0, 0.0) - amp.r);
    let mut integral = 0.0;
    let mut x = x_l;
    let mut prev = psi.norm_sqr();
    for j in 0..n {
        let v = f(x_l + (j as f64 + 0.5) * h);
        let q2 = 2.0 * (e - v);
        let (c, s_over_q, q_s) = if q2 > 0.0 {
            let q = q2.sqrt();
            let (s, c) = (q * h).sin_cos();
            (c, s / q, -q * s)
        } else if q2 < 0.0 {
            let q = (-q2).sqrt();
            ((q * h).cosh(), (q * h).sinh() / q, q * (q * h).sinh())
        } else {
            (1.0, h, 0.0)
        };
        let np = psi * c + dpsi * s_over_q;
        let nd = psi * q_s + dpsi * c;
        psi = np;
        dpsi = nd;
        let x1 = x + h;
        let cur = psi.norm_sqr();
        let lo = x.max(a);
        let hi = x1.min(b);
        if hi > lo {
            integral += 0.5 * (prev + cur) * (hi - lo);
        }
        prev = cur;
        x = x1;
    }
    Ok(integral / k)
}
