//! Scenario kinds: each parses its sections into a plan up front (so
//! `--validate-only` catches every configuration error) and runs it later.

mod capture;
mod causal;
mod evolve;
mod kick;
mod larmor;
mod scatter;

use tunnelsim_core::propagate::PropagatorConfig;
use tunnelsim_core::{Dimension, Grid, Runtime, UnitSystem, WaveFunction};

use crate::error::RunError;
use crate::output::{sha256_hex, Report};
use crate::scenario::{Document, ScenarioError};

pub const KINDS: &[&str] = &["evolve", "scatter_scan", "larmor", "two_field", "delta_kick", "sweep_capture", "well_decay", "causal"];

#[derive(Debug, Clone)]
enum Plan {
    Evolve(evolve::EvolvePlan),
    Scatter(scatter::ScatterPlan),
    Larmor(larmor::DwellPlan),
    TwoField(larmor::TwoFieldPlan),
    Kick(kick::KickPlan),
    Capture(capture::CapturePlan),
    Decay(capture::DecayPlan),
    Causal(causal::CausalPlan),
}

/// A parsed and validated scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub kind: String,
    pub seed: u64,
    pub units: UnitSystem,
    pub sha256: String,
    plan: Plan,
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self, ScenarioError> {
        let mut doc = Document::parse(text)?;
        let units = parse_units(&doc)?;
        doc.set_units(units);
        let name = doc.req_string("scenario.name")?;
        let kind = doc.choice("scenario.kind", KINDS)?.ok_or_else(|| ScenarioError::Missing { key: "scenario.kind".into() })?;
        let seed = doc.integer("scenario.seed")?.unwrap_or(0);
        let _ = doc.string("scenario.description");
        let plan = match kind.as_str() {
            "evolve" => Plan::Evolve(evolve::EvolvePlan::parse(&doc)?),
            "scatter_scan" => Plan::Scatter(scatter::ScatterPlan::parse(&doc)?),
            "larmor" => Plan::Larmor(larmor::DwellPlan::parse(&doc)?),
            "two_field" => Plan::TwoField(larmor::TwoFieldPlan::parse(&doc)?),
            "delta_kick" => Plan::Kick(kick::KickPlan::parse(&doc)?),
            "sweep_capture" => Plan::Capture(capture::CapturePlan::parse(&doc)?),
            "well_decay" => Plan::Decay(capture::DecayPlan::parse(&doc)?),
            _ => Plan::Causal(causal::CausalPlan::parse(&doc)?),
        };
        doc.finish()?;
        Ok(Self { name, kind, seed, units, sha256: sha256_hex(text.as_bytes()), plan })
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn run<R: Runtime>(&self, rt: &R) -> Result<Report, RunError> {
        let u = Conv(self.units);
        match &self.plan {
            Plan::Evolve(p) => p.run(&u, rt),
            Plan::Scatter(p) => p.run(&u, rt),
            Plan::Larmor(p) => p.run(&u, rt),
            Plan::TwoField(p) => p.run(&u, rt),
            Plan::Kick(p) => p.run(&u, self.seed),
            Plan::Capture(p) => p.run(&u, rt),
            Plan::Decay(p) => p.run(&u, rt),
            Plan::Causal(p) => p.run(rt, self.seed),
        }
    }
}

fn parse_units(doc: &Document) -> Result<UnitSystem, ScenarioError> {
    let d = UnitSystem::default();
    let mass = doc.number("units.mass_kg")?.unwrap_or(d.mass);
    let length = doc.number("units.length_unit_m")?.unwrap_or(d.length_unit);
    UnitSystem::new(length, mass).map_err(|e| doc.reject("units.mass_kg", e.to_string()))
}

/// Internal → lab unit conversions for output columns.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Conv(pub UnitSystem);

impl Conv {
    fn si(&self, v: f64, dim: Dimension) -> f64 {
        self.0.from_internal(v, dim).value
    }

    pub fn um(&self, x: f64) -> f64 {
        self.si(x, Dimension::Length) * 1e6
    }

    pub fn ms(&self, t: f64) -> f64 {
        self.si(t, Dimension::Time) * 1e3
    }

    pub fn nk(&self, e: f64) -> f64 {
        self.si(e, Dimension::Temperature) * 1e9
    }

    pub fn mm_s(&self, v: f64) -> f64 {
        self.si(v, Dimension::Velocity) * 1e3
    }

    pub fn rad_s(&self, w: f64) -> f64 {
        self.si(w, Dimension::Frequency)
    }

    pub fn per_ms(&self, r: f64) -> f64 {
        self.si(r, Dimension::Frequency) * 1e-3
    }
}

pub(crate) fn missing(key: &str) -> ScenarioError {
    ScenarioError::Missing { key: key.into() }
}

pub(crate) fn parse_grid(doc: &Document) -> Result<Grid, ScenarioError> {
    let a = doc.req_quantity("grid.x_min", Dimension::Length)?;
    let b = doc.req_quantity("grid.x_max", Dimension::Length)?;
    let n = doc.integer("grid.points")?.ok_or_else(|| missing("grid.points"))?;
    Grid::new(a, b, n as usize).map_err(|e| doc.reject("grid.points", e.to_string()))
}

pub(crate) fn parse_propagator(doc: &Document, grid: &Grid) -> Result<PropagatorConfig, ScenarioError> {
    let dt = doc.req_quantity("propagator.dt", Dimension::Time)?;
    let mut cfg = PropagatorConfig::new(dt);
    let w = doc.quantity("propagator.absorber_width", Dimension::Length)?;
    let s = doc.quantity("propagator.absorber_strength", Dimension::Frequency)?;
    match (w, s) {
        (Some(w), Some(s)) => cfg = cfg.with_absorber(w, s),
        (None, None) => {}
        _ => return Err(ScenarioError::invalid("propagator.absorber_width and propagator.absorber_strength must be given together")),
    }
    if let Some(k) = doc.integer("propagator.record_stride")? {
        cfg = cfg.with_stride(k as usize);
    }
    cfg.validate(grid).map_err(|e| doc.reject("propagator.dt", e.to_string()))?;
    Ok(cfg)
}

/// Gaussian packet moving to the right; returns the packet and its mean
/// kinetic energy `k0²/2`.
pub(crate) fn parse_packet(doc: &Document, grid: &Grid) -> Result<(WaveFunction, f64), ScenarioError> {
    let x0 = doc.req_quantity("packet.center", Dimension::Length)?;
    let sigma = doc.req_quantity("packet.sigma", Dimension::Length)?;
    let e = doc.quantity("packet.energy", Dimension::Energy)?;
    let v = doc.quantity("packet.velocity", Dimension::Velocity)?;
    let k0 = match (e, v) {
        (Some(e), None) if e > 0.0 => (2.0 * e).sqrt(),
        (Some(_), None) => return Err(doc.reject("packet.energy", "must be positive")),
        (None, Some(v)) => v,
        _ => return Err(ScenarioError::invalid("give exactly one of packet.energy and packet.velocity")),
    };
    let psi = WaveFunction::gaussian_packet(*grid, x0, sigma, k0).map_err(|e| doc.reject("packet.sigma", e.to_string()))?;
    Ok((psi, 0.5 * k0 * k0))
}

/// Rectangular barrier on `[0, d)`: `(height, d)`. The width is given
/// either directly or as `κd` at the packet energy.
pub(crate) fn parse_barrier(doc: &Document, energy: f64) -> Result<(f64, f64), ScenarioError> {
    let v0 = doc.req_quantity("barrier.height", Dimension::Energy)?;
    let w = doc.quantity("barrier.width", Dimension::Length)?;
    let kd = doc.number("barrier.kappa_d")?;
    let d = match (w, kd) {
        (Some(w), None) => w,
        (None, Some(kd)) => {
            if !(v0 > energy) {
                return Err(doc.reject("barrier.kappa_d", "κd needs a barrier above the packet energy"));
            }
            kd / (2.0 * (v0 - energy)).sqrt()
        }
        _ => return Err(ScenarioError::invalid("give exactly one of barrier.width and barrier.kappa_d")),
    };
    if !(d > 0.0) {
        return Err(ScenarioError::invalid("barrier width must be positive"));
    }
    Ok((v0, d))
}
