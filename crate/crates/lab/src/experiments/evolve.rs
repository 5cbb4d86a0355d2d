use tunnelsim_core::potential::{PotentialSchedule, PotentialTerm, Shape, Window};
use tunnelsim_core::propagate::{evolve, PropagatorConfig};
use tunnelsim_core::{Dimension, Runtime, WaveFunction};

use super::{missing, parse_grid, parse_packet, parse_propagator, Conv};
use crate::error::{numerical, RunError};
use crate::output::{Cell, Report, Table};
use crate::scenario::{Document, ScenarioError};

#[derive(Debug, Clone)]
pub struct EvolvePlan {
    psi0: WaveFunction,
    schedule: PotentialSchedule,
    config: PropagatorConfig,
    t_final: f64,
    wavefunction: bool,
}

const SHAPES: &[&str] = &["rectangular", "gaussian", "vee", "harmonic", "gradient"];

/// Reads every `[potential.NAME]` block.
pub(crate) fn parse_schedule(doc: &Document) -> Result<PotentialSchedule, ScenarioError> {
    let mut terms = Vec::new();
    for name in doc.subsections("potential") {
        let p = format!("potential.{name}");
        let key = |k: &str| format!("{p}.{k}");
        let len = |k: &str| doc.req_quantity(&key(k), Dimension::Length);
        let shape = match doc.choice(&key("shape"), SHAPES)?.ok_or_else(|| missing(&key("shape")))?.as_str() {
            "rectangular" => Shape::Rectangular { v0: doc.req_quantity(&key("height"), Dimension::Energy)?, center: len("center")?, width: len("width")? },
            "gaussian" => Shape::Gaussian { v0: doc.req_quantity(&key("height"), Dimension::Energy)?, center: len("center")?, waist: len("waist")? },
            "vee" => Shape::LinearVee { slope: doc.req_quantity(&key("slope"), Dimension::Gradient)?, vertex: len("vertex")? },
            "harmonic" => {
                let w = doc.req_quantity(&key("frequency"), Dimension::Frequency)?;
                Shape::Harmonic { omega2: w * w, center: len("center")? }
            }
            _ => Shape::UniformGradient { g: doc.req_quantity(&key("slope"), Dimension::Gradient)? },
        };
        let on = doc.quantity(&key("on"), Dimension::Time)?;
        let off = doc.quantity(&key("off"), Dimension::Time)?;
        let window = match (on, off) {
            (None, None) => Window::Always,
            (a, b) => Window::Interval { t_on: a.unwrap_or(0.0), t_off: b.unwrap_or(f64::INFINITY) },
        };
        let drift = doc.quantity(&key("drift"), Dimension::Velocity)?.unwrap_or(0.0);
        let term = PotentialTerm::new(shape).with_window(window).with_drift(drift);
        term.validate().map_err(|e| doc.reject(&key("shape"), e.to_string()))?;
        terms.push(term);
    }
    PotentialSchedule::new(terms).map_err(|e| ScenarioError::invalid(e.to_string()))
}

impl EvolvePlan {
    pub fn parse(doc: &Document) -> Result<Self, ScenarioError> {
        let grid = parse_grid(doc)?;
        let (psi0, _) = parse_packet(doc, &grid)?;
        let schedule = parse_schedule(doc)?;
        let mut config = parse_propagator(doc, &grid)?;
        let well_a = doc.quantity("well.from", Dimension::Length)?;
        let well_b = doc.quantity("well.to", Dimension::Length)?;
        if let (Some(a), Some(b)) = (well_a, well_b) {
            config = config.with_well(a, b);
        }
        let t_final = doc.req_quantity("propagator.t_final", Dimension::Time)?;
        if !(t_final > 0.0) {
            return Err(doc.reject("propagator.t_final", "must be positive"));
        }
        let wavefunction = doc.boolean("output.wavefunction")?.unwrap_or(true);
        Ok(Self { psi0, schedule, config, t_final, wavefunction })
    }

    pub fn run<R: Runtime>(&self, u: &Conv, rt: &R) -> Result<Report, RunError> {
        let grid = *self.psi0.grid();
        let fft = rt.plan_fft(grid.len());
        let out = evolve(&self.psi0, &self.schedule, &self.config, 0.0, self.t_final, fft.as_ref()).map_err(numerical)?;
        let mut report = Report::default();
        let mut traj = Table::new(
            "trajectory.csv",
            &["t [ms]", "norm2", "mean_x [um]", "var_x [um^2]", "P_well", "absorbed_left", "absorbed_right"],
        )
        .meta("dt [ms]", u.ms(self.config.dt))
        .meta("steps", out.trajectory.steps);
        for r in &out.trajectory.records {
            let um2 = u.um(1.0) * u.um(1.0);
            traj.push(vec![u.ms(r.t).into(), r.norm2.into(), u.um(r.mean_x).into(), (r.var_x * um2).into(), r.p_well.into(), r.absorbed_left.into(), r.absorbed_right.into()]);
        }
        report.tables.push(traj);
        if self.wavefunction {
            report.tables.push(wavefunction_table("wavefunction.csv", &out.state, u));
        }
        let obs = out.state.observables_with(fft.as_ref());
        report.add("final_norm", out.state.norm2(), "");
        report.add("absorbed_left", out.trajectory.absorbed_left, "");
        report.add("absorbed_right", out.trajectory.absorbed_right, "");
        report.add("probability_balance_error", (out.trajectory.total_probability() - self.psi0.norm2()).abs(), "");
        report.add("final_mean_x", u.um(obs.mean_x), "um");
        report.add("final_kinetic_energy", u.nk(obs.kinetic_energy / obs.norm2.max(f64::MIN_POSITIVE)), "nK");
        Ok(report)
    }
}

/// `x, re_psi, im_psi` with grid metadata.
pub(crate) fn wavefunction_table(name: &str, psi: &WaveFunction, u: &Conv) -> Table {
    let g = psi.grid();
    let mut t = Table::new(name, &["x [um]", "re_psi [um^-1/2]", "im_psi [um^-1/2]"])
        .meta("x_min [um]", u.um(g.x_min()))
        .meta("x_max [um]", u.um(g.x_max()))
        .meta("points", g.len());
    let s = 1.0 / u.um(1.0).sqrt();
    for (j, a) in psi.amplitudes().iter().enumerate() {
        t.push(vec![Cell::Num(u.um(g.x(j))), Cell::Num(a.re * s), Cell::Num(a.im * s)]);
    }
    t
}
