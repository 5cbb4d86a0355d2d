use tunnelsim_core::larmor::{dwell_map, first_order_response, stationary_dwell_time, two_field_experiment, LarmorSetup, Subensemble};
use tunnelsim_core::math::linspace;
use tunnelsim_core::potential::{FieldRegion, LarmorField, PotentialSchedule, Shape, Window};
use tunnelsim_core::{Dimension, Runtime};

use super::{missing, parse_barrier, parse_grid, parse_packet, parse_propagator, Conv};
use crate::error::{numerical, RunError};
use crate::output::{Cell, Report, Table};
use crate::scenario::{Document, ScenarioError};

fn parse_setup(doc: &Document, section: &str) -> Result<(LarmorSetup, f64, f64, f64), ScenarioError> {
    let grid = parse_grid(doc)?;
    let (psi0, energy) = parse_packet(doc, &grid)?;
    let (v0, d) = parse_barrier(doc, energy)?;
    let config = parse_propagator(doc, &grid)?;
    let key = |k: &str| format!("{section}.{k}");
    let t_final = doc.req_quantity(&key("t_final"), Dimension::Time)?;
    let x_split = doc.quantity(&key("split"), Dimension::Length)?.unwrap_or(0.5 * d);
    let schedule = PotentialSchedule::single(Shape::Rectangular { v0, center: 0.5 * d, width: d });
    Ok((LarmorSetup { psi0, schedule, config, t_final, x_split }, v0, d, energy))
}

fn parse_omegas(doc: &Document, key: &str, min: usize) -> Result<Vec<f64>, ScenarioError> {
    let w = doc.req_quantities(key, Dimension::Frequency)?;
    if w.len() < min || w.iter().any(|w| !(*w > 0.0)) {
        return Err(doc.reject(key, format!("need at least {min} positive field strengths")));
    }
    Ok(w)
}

/// Conditional dwell times in equal bins across the barrier.
#[derive(Debug, Clone)]
pub struct DwellPlan {
    setup: LarmorSetup,
    height: f64,
    width: f64,
    energy: f64,
    bins: usize,
    omegas: Vec<f64>,
}

impl DwellPlan {
    pub fn parse(doc: &Document) -> Result<Self, ScenarioError> {
        let (setup, height, width, energy) = parse_setup(doc, "larmor")?;
        let bins = doc.integer("larmor.bins")?.ok_or_else(|| missing("larmor.bins"))? as usize;
        if bins < 3 || bins % 3 != 0 {
            return Err(doc.reject("larmor.bins", "bin count must be a positive multiple of 3"));
        }
        let omegas = parse_omegas(doc, "larmor.omegas", 3)?;
        Ok(Self { setup, height, width, energy, bins, omegas })
    }

    pub fn run<R: Runtime>(&self, u: &Conv, rt: &R) -> Result<Report, RunError> {
        let edges = linspace(0.0, self.width, self.bins + 1);
        let map = dwell_map(&self.setup, &edges, &self.omegas, rt).map_err(numerical)?;
        let mut t = Table::new("dwell_map.csv", &["bin_a [um]", "bin_b [um]", "subensemble", "omega_L [rad/s]", "tau_y [ms]", "tau_z [ms]"])
            .meta("barrier_height [nK]", u.nk(self.height))
            .meta("barrier_width [um]", u.um(self.width))
            .meta("packet_energy [nK]", u.nk(self.energy))
            .meta("omega_L=0 rows", "linear extrapolation");
        let subs = [Subensemble::Transmitted, Subensemble::Reflected, Subensemble::All];
        for b in &map.bins {
            for s in subs {
                let c = b.get(s);
                let (a, z) = (u.um(c.region.0), u.um(c.region.1));
                for i in 0..c.omegas.len() {
                    t.push(vec![a.into(), z.into(), s.label().into(), u.rad_s(c.omegas[i]).into(), u.ms(c.tau_y[i]).into(), u.ms(c.tau_z[i]).into()]);
                }
                t.push(vec![a.into(), z.into(), s.label().into(), Cell::Num(0.0), u.ms(c.tau_y0).into(), u.ms(c.tau_z0).into()]);
            }
        }
        let mut r = Report::default();
        r.tables.push(t);
        let third = self.bins / 3;
        let tr = |s, k: usize| map.sum_tau_y(s, k * third..(k + 1) * third);
        let (te, tm, tx) = (tr(Subensemble::Transmitted, 0), tr(Subensemble::Transmitted, 1), tr(Subensemble::Transmitted, 2));
        let (re, rx) = (tr(Subensemble::Reflected, 0), tr(Subensemble::Reflected, 2));
        let first = &map.bins[0];
        r.add("transmission", first.transmission, "");
        r.add("reflection", first.reflection, "");
        r.add("transmitted_entrance", u.ms(te), "ms");
        r.add("transmitted_middle", u.ms(tm), "ms");
        r.add("transmitted_exit", u.ms(tx), "ms");
        r.add("transmitted_middle_over_entrance", tm / te, "");
        r.add("transmitted_exit_over_entrance", tx / te, "");
        r.add("reflected_entrance", u.ms(re), "ms");
        r.add("reflected_exit", u.ms(rx), "ms");
        r.add("reflected_exit_over_entrance", rx / re, "");
        let scale = map.max_abs_tau().max(f64::MIN_POSITIVE);
        let decomposition = map.bins.iter().map(|b| b.decomposition_error()).fold(0.0, f64::max);
        r.add("decomposition_error_relative", decomposition / scale, "");
        let curvature = map.bins.iter().flat_map(|b| subs.map(|s| b.get(s).curvature)).fold(0.0, f64::max);
        r.add("max_curvature", curvature, "");
        let total = map.sum_tau_y(Subensemble::All, 0..self.bins);
        r.add("dwell_all", u.ms(total), "ms");
        let (v0, d) = (self.height, self.width);
        let f = move |x: f64| if (0.0..d).contains(&x) { v0 } else { 0.0 };
        let stationary = stationary_dwell_time(f, 0.0, d, self.energy, 0.0, d).map_err(numerical)?;
        r.add("dwell_stationary", u.ms(stationary), "ms");
        Ok(r)
    }
}

/// Two pulsed fields of opposite sign on either side of the barrier.
#[derive(Debug, Clone)]
pub struct TwoFieldPlan {
    setup: LarmorSetup,
    left: LarmorField,
    right: LarmorField,
    right_scale: f64,
    omegas: Vec<f64>,
    first_order_step: f64,
}

fn parse_field(doc: &Document, name: &str) -> Result<LarmorField, ScenarioError> {
    let key = |k: &str| format!("field.{name}.{k}");
    let a = doc.req_quantity(&key("from"), Dimension::Length)?;
    let b = doc.req_quantity(&key("to"), Dimension::Length)?;
    if !(a < b) {
        return Err(doc.reject(&key("to"), "field region needs from < to"));
    }
    let sign = doc.number(&key("sign"))?.unwrap_or(1.0);
    if sign != 1.0 && sign != -1.0 {
        return Err(doc.reject(&key("sign"), "sign must be 1 or -1"));
    }
    let on = doc.quantity(&key("on"), Dimension::Time)?;
    let off = doc.quantity(&key("off"), Dimension::Time)?;
    let window = match (on, off) {
        (None, None) => Window::Always,
        (x, y) => Window::Interval { t_on: x.unwrap_or(0.0), t_off: y.unwrap_or(f64::INFINITY) },
    };
    if let Window::Interval { t_on, t_off } = window {
        if !(t_on < t_off) {
            return Err(doc.reject(&key("off"), "field window needs on < off"));
        }
    }
    Ok(LarmorField { region: FieldRegion::Interval { a, b }, omega_l: 0.0, sign, window })
}

impl TwoFieldPlan {
    pub fn parse(doc: &Document) -> Result<Self, ScenarioError> {
        let (setup, _, _, _) = parse_setup(doc, "two_field")?;
        let left = parse_field(doc, "left")?;
        let right = parse_field(doc, "right")?;
        let right_scale = doc.number("two_field.right_scale")?.unwrap_or(1.0);
        let omegas = parse_omegas(doc, "two_field.omegas", 2)?;
        let first_order_step = doc.quantity("two_field.first_order_step", Dimension::Frequency)?.unwrap_or(0.1 * omegas[0]);
        Ok(Self { setup, left, right, right_scale, omegas, first_order_step })
    }

    pub fn run<R: Runtime>(&self, u: &Conv, rt: &R) -> Result<Report, RunError> {
        let res = two_field_experiment(&self.setup, self.left, self.right, self.right_scale, &self.omegas, rt).map_err(numerical)?;
        let mut t = Table::new("two_field.csv", &["omega_L [rad/s]", "theta_both [rad]", "theta_left [rad]", "theta_right [rad]", "ratio", "T"])
            .meta("right_scale", self.right_scale);
        for p in &res.points {
            t.push(vec![u.rad_s(p.omega).into(), p.theta_both.into(), p.theta_left.into(), p.theta_right.into(), p.ratio().into(), p.transmission.into()]);
        }
        let mut r = Report::default();
        r.tables.push(t);
        r.add("slope_both", res.slope_both, "");
        r.add("slope_ratio", res.slope_ratio, "");
        r.add("max_ratio", res.points.iter().map(|p| p.ratio()).fold(0.0, f64::max), "");
        r.add("transmission", res.points[0].transmission, "");
        let fft = rt.plan_fft(self.setup.psi0.grid().len());
        let h = self.first_order_step;
        let right = LarmorField { sign: self.right.sign * self.right_scale, ..self.right };
        let a_l = first_order_response(&self.setup, self.left, h, fft.as_ref()).map_err(numerical)?;
        let a_r = first_order_response(&self.setup, right, h, fft.as_ref()).map_err(numerical)?;
        r.add("first_order_left", u.ms(a_l), "ms");
        r.add("first_order_right", u.ms(a_r), "ms");
        r.add("first_order_cancellation", (a_l + a_r).abs() / a_l.abs().max(f64::MIN_POSITIVE), "");
        Ok(r)
    }
}
