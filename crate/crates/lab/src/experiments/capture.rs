use tunnelsim_core::cooling::{barrier_for_depth, count_steps, depth_staircase, sweep_capture, well_decay, SweepSpec};
use tunnelsim_core::{Dimension, Runtime};

use super::{parse_grid, parse_propagator, Conv};
use crate::error::{numerical, RunError};
use crate::output::{Report, Table};
use crate::scenario::{Document, ScenarioError};

/// Vee trap, swept Gaussian barrier and numerics shared by the capture and
/// decay scenarios. Capture-only keys fall back to inert values when
/// `capture` is false.
fn parse_sweep(doc: &Document, capture: bool) -> Result<SweepSpec, ScenarioError> {
    let grid = parse_grid(doc)?;
    let cfg = parse_propagator(doc, &grid)?;
    let absorber = match cfg.absorber {
        tunnelsim_core::Absorber::Mask { width, strength } => Some((width, strength)),
        tunnelsim_core::Absorber::None => None,
    };
    let len = |k: &str| doc.req_quantity(k, Dimension::Length);
    let slope = doc.req_quantity("trap.slope", Dimension::Gradient)?;
    let vertex = doc.quantity("trap.vertex", Dimension::Length)?.unwrap_or(0.0);
    let barrier_height = doc.req_quantity("barrier.height", Dimension::Energy)?;
    let waist = len("barrier.waist")?;
    let end = len("barrier.end")?;
    let (start, speed) = if capture {
        (len("barrier.start")?, doc.req_quantity("barrier.speed", Dimension::Velocity)?)
    } else {
        (end + 1.0, 1.0)
    };
    let kt = if capture { doc.req_quantity("cloud.temperature", Dimension::Temperature)? } else { 1.0 };
    let int = |k: &str, d: u64| -> Result<usize, ScenarioError> { Ok(doc.integer(k)?.unwrap_or(d) as usize) };
    let spec = SweepSpec {
        slope,
        vertex,
        barrier_height,
        waist,
        start,
        end,
        speed,
        grid,
        dt: cfg.dt,
        absorber,
        kt,
        batch: int("capture.batch", 4)?,
        cutoff: doc.number("capture.cutoff")?.unwrap_or(1e-3),
        stop_after: int("capture.stop_after", 3)?,
        max_channels: int("capture.max_channels", 80)?,
        energy_points: int("capture.energy_points", 2001)?,
        energy_span_kt: doc.number("capture.energy_span_kt")?.unwrap_or(6.0),
    };
    spec.validate().map_err(|e| ScenarioError::invalid(e.to_string()))?;
    if !(slope > 0.0 && waist > 0.0) {
        return Err(doc.reject("trap.slope", "trap slope and barrier waist must be positive"));
    }
    Ok(spec)
}

#[derive(Debug, Clone)]
pub struct CapturePlan {
    spec: SweepSpec,
    depths: Option<Vec<f64>>,
    max_height: f64,
    step_threshold: f64,
}

impl CapturePlan {
    pub fn parse(doc: &Document) -> Result<Self, ScenarioError> {
        let spec = parse_sweep(doc, true)?;
        let depths = doc.quantities("staircase.depths", Dimension::Energy)?;
        if let Some(d) = &depths {
            if d.iter().any(|x| *x < 0.0) || d.windows(2).any(|w| w[1] <= w[0]) {
                return Err(doc.reject("staircase.depths", "depths must be non-negative and increasing"));
            }
        }
        let max_height = doc.quantity("staircase.max_height", Dimension::Energy)?.unwrap_or(20.0 * spec.barrier_height);
        let step_threshold = doc.number("staircase.step_threshold")?.unwrap_or(0.03);
        Ok(Self { spec, depths, max_height, step_threshold })
    }

    pub fn run<R: Runtime>(&self, u: &Conv, rt: &R) -> Result<Report, RunError> {
        let res = sweep_capture(&self.spec, rt).map_err(numerical)?;
        let mut r = Report::default();
        let mut t = Table::new("transfer_vs_E.csv", &["E [nK]", "P_transfer"])
            .meta("energy", "above the pre-sweep trap minimum")
            .meta("temperature [nK]", u.nk(self.spec.kt));
        for (e, p) in res.energy_grid.iter().zip(&res.p_of_e) {
            t.push(vec![u.nk(*e).into(), (*p).into()]);
        }
        r.tables.push(t);
        let mut c = Table::new("channels.csv", &["n", "E [nK]", "P_transfer"]);
        for ch in &res.channels {
            c.push(vec![ch.index.into(), u.nk(ch.energy).into(), ch.p_transfer.into()]);
        }
        r.tables.push(c);
        let v_min = res.well.map_or(0.0, |w| w.v_min);
        let mut b = Table::new("bound_states.csv", &["n", "E_above_well_minimum [nK]"]);
        for (n, e) in res.bound_energies.iter().enumerate() {
            b.push(vec![n.into(), u.nk(e - v_min).into()]);
        }
        r.tables.push(b);
        r.add("well_depth", u.nk(res.depth), "nK");
        if let Some(w) = res.well {
            r.add("well_minimum_x", u.um(w.x_min), "um");
            r.add("omega_eff", u.rad_s(w.omega_eff()), "rad/s");
        }
        r.add("bound_states", res.n_bound as f64, "");
        r.add("capture_fraction", res.capture_fraction, "");
        r.add("thermal_capture", res.thermal_capture, "");
        r.add("captured_kinetic_energy", u.nk(res.captured_kinetic), "nK");
        r.add("well_destroyed", if res.well_destroyed { 1.0 } else { 0.0 }, "");
        if res.well_destroyed {
            r.warnings.push("no auxiliary well at the end of the sweep".into());
        }
        if let Some(depths) = &self.depths {
            let heights = depths
                .iter()
                .map(|&d| barrier_for_depth(&self.spec, d, self.max_height).ok_or_else(|| RunError::Numerical(format!("no barrier below {} nK gives a {} nK well", u.nk(self.max_height), u.nk(d)))))
                .collect::<Result<Vec<_>, _>>()?;
            let pts = depth_staircase(&self.spec, &heights, rt).map_err(numerical)?;
            let mut t = Table::new("depth_capture.csv", &["depth [nK]", "barrier_height [nK]", "n_bound", "capture_fraction", "thermal_capture"]);
            for p in &pts {
                t.push(vec![u.nk(p.depth).into(), u.nk(p.barrier_height).into(), p.n_bound.into(), p.capture_fraction.into(), p.thermal_capture.into()]);
            }
            r.tables.push(t);
            let caps: Vec<f64> = pts.iter().map(|p| p.capture_fraction).collect();
            let monotone = caps.windows(2).all(|w| w[1] >= w[0] - 1e-9);
            let first = pts.first().map_or(0, |p| p.n_bound);
            let last = pts.last().map_or(0, |p| p.n_bound);
            r.add("staircase_steps", count_steps(&caps, self.step_threshold) as f64, "");
            r.add("staircase_bound_state_change", last.saturating_sub(first) as f64, "");
            r.add("staircase_monotone", if monotone { 1.0 } else { 0.0 }, "");
        }
        Ok(r)
    }
}

#[derive(Debug, Clone)]
pub struct DecayPlan {
    spec: SweepSpec,
    periods: f64,
}

impl DecayPlan {
    pub fn parse(doc: &Document) -> Result<Self, ScenarioError> {
        let spec = parse_sweep(doc, false)?;
        if spec.absorber.is_none() {
            return Err(ScenarioError::invalid("well decay needs propagator.absorber_width and propagator.absorber_strength"));
        }
        let periods = doc.req_number("decay.periods")?;
        if !(periods > 0.0) {
            return Err(doc.reject("decay.periods", "must be positive"));
        }
        Ok(Self { spec, periods })
    }

    pub fn run<R: Runtime>(&self, u: &Conv, rt: &R) -> Result<Report, RunError> {
        let fft = rt.plan_fft(self.spec.grid.len());
        let d = well_decay(&self.spec, self.periods, fft.as_ref()).map_err(numerical)?;
        let mut t = Table::new("survival.csv", &["t [ms]", "P_well"]).meta("secular_period [ms]", u.ms(d.secular_period));
        for (time, p) in d.fit.times.iter().zip(&d.fit.survival) {
            t.push(vec![u.ms(*time).into(), (*p).into()]);
        }
        let mut r = Report::default();
        r.tables.push(t);
        r.add("well_depth", u.nk(d.well.depth), "nK");
        r.add("secular_period", u.ms(d.secular_period), "ms");
        r.add("decay_rate", u.per_ms(d.fit.rate), "1/ms");
        r.add("loss_per_period", d.loss_per_period, "");
        r.add("fit_rms_residual", d.fit.rms_residual, "");
        r.add("fit_samples", d.fit.fitted as f64, "");
        r.add("non_exponential", if d.fit.non_exponential { 1.0 } else { 0.0 }, "");
        r.add("ground_state_energy_above_minimum", u.nk(d.initial_energy - d.well.v_min), "nK");
        if d.fit.non_exponential {
            r.warnings.push("survival is not a single exponential".into());
        }
        Ok(r)
    }
}
