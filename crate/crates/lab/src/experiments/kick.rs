use tunnelsim_core::cooling::{delta_kick, harmonic_cooling_ratio, optimize_kick, sample_thermal, Ensemble, KickKind, KickSpec};
use tunnelsim_core::Dimension;

use super::{missing, Conv};
use crate::error::{numerical, RunError};
use crate::output::{Report, Table};
use crate::scenario::{Document, ScenarioError};

/// Free expansion followed by a harmonic or quadrupole impulse.
#[derive(Debug, Clone)]
pub struct KickPlan {
    kt: f64,
    sigma_x: f64,
    samples: usize,
    harmonic: bool,
    duration: f64,
    t_free: f64,
    gravity: f64,
    compensation: bool,
    /// Fixed strength (`ω²` or slope); `None` optimizes.
    fixed: Option<f64>,
    compare: bool,
    dump: bool,
}

impl KickPlan {
    pub fn parse(doc: &Document) -> Result<Self, ScenarioError> {
        let kt = doc.req_quantity("cloud.temperature", Dimension::Temperature)?;
        if !(kt > 0.0) {
            return Err(doc.reject("cloud.temperature", "must be positive"));
        }
        let sigma_x = doc.req_quantity("cloud.sigma_x", Dimension::Length)?;
        let samples = doc.integer("cloud.samples")?.ok_or_else(|| missing("cloud.samples"))? as usize;
        if samples < 2 {
            return Err(doc.reject("cloud.samples", "need at least 2 samples"));
        }
        let harmonic = doc.choice("kick.kind", &["harmonic", "quadrupole"])?.ok_or_else(|| missing("kick.kind"))? == "harmonic";
        let duration = doc.req_quantity("kick.duration", Dimension::Time)?;
        let t_free = doc.req_quantity("kick.t_free", Dimension::Time)?;
        if !(duration > 0.0 && t_free > 0.0) {
            return Err(doc.reject("kick.t_free", "durations must be positive"));
        }
        let gravity = doc.quantity("kick.gravity", Dimension::Acceleration)?.unwrap_or_else(|| doc.units().to_internal(tunnelsim_core::Quantity::new(9.80665, Dimension::Acceleration)));
        let compensation = doc.boolean("kick.gravity_compensation")?.unwrap_or(true);
        let optimize = doc.boolean("kick.optimize")?.unwrap_or(true);
        let fixed = if optimize {
            None
        } else if harmonic {
            let w = doc.req_quantity("kick.frequency", Dimension::Frequency)?;
            Some(w * w)
        } else {
            Some(doc.req_quantity("kick.slope", Dimension::Gradient)?)
        };
        let compare = doc.boolean("compare.quadrupole")?.unwrap_or(false);
        let dump = doc.boolean("output.ensemble")?.unwrap_or(false);
        Ok(Self { kt, sigma_x, samples, harmonic, duration, t_free, gravity, compensation, fixed, compare, dump })
    }

    fn kind(&self, s: f64, harmonic: bool) -> KickKind {
        if harmonic {
            KickKind::Harmonic { omega2: s }
        } else {
            KickKind::Quadrupole { slope: s }
        }
    }

    fn best(&self, ens: &Ensemble, harmonic: bool) -> Result<KickSpec, RunError> {
        optimize_kick(ens, self.t_free, self.kind(0.0, harmonic), self.duration, self.compensation, self.gravity).map_err(numerical)
    }

    pub fn run(&self, u: &Conv, seed: u64) -> Result<Report, RunError> {
        let ens = sample_thermal(self.kt, self.sigma_x, self.samples, seed).map_err(numerical)?;
        let kick = match self.fixed {
            Some(s) => KickSpec { kind: self.kind(s, self.harmonic), duration: self.duration, gravity_compensation: self.compensation },
            None => self.best(&ens, self.harmonic)?,
        };
        let out = delta_kick(&ens, self.t_free, &kick, self.gravity).map_err(numerical)?;
        let free = KickSpec { kind: self.kind(0.0, self.harmonic), ..kick };
        let drifted = delta_kick(&ens, self.t_free, &free, self.gravity).map_err(numerical)?.ensemble;
        let mut r = Report::default();
        let (t0, t1) = (ens.kinetic_temperature(), out.ensemble.kinetic_temperature());
        r.add("temperature_initial", u.nk(t0), "nK");
        r.add("temperature_final", u.nk(t1), "nK");
        r.add("cooling_ratio", t1 / t0, "");
        r.add("sigma_v_initial", u.mm_s(ens.sigma_v()), "mm/s");
        r.add("sigma_x_after_expansion", u.um(drifted.sigma_x()), "um");
        if self.harmonic {
            r.add("kick_strength", u.per_ms(kick.strength()), "1/ms");
        } else {
            r.add("kick_strength", u.mm_s(kick.strength()), "mm/s");
        }
        if self.harmonic {
            let closed = harmonic_cooling_ratio(self.sigma_x, self.kt.sqrt(), self.t_free);
            r.add("cooling_ratio_closed_form", closed, "");
            r.add("cooling_ratio_relative_error", (t1 / t0 - closed).abs() / closed, "");
            let reg = drifted.regression();
            r.add("regression_coefficient", u.per_ms(reg), "1/ms");
            r.add("strength_vs_regression", (kick.strength() - reg).abs() / reg.abs().max(f64::MIN_POSITIVE), "");
            if self.compare {
                let q = self.best(&ens, false)?;
                let tq = delta_kick(&ens, self.t_free, &q, self.gravity).map_err(numerical)?.ensemble.kinetic_temperature();
                r.add("temperature_final_quadrupole", u.nk(tq), "nK");
            }
        }
        if out.impulse_warning {
            r.warnings.push("kick duration exceeds t_free/10; impulse approximation is poor".into());
        }
        r.add("impulse_warning", if out.impulse_warning { 1.0 } else { 0.0 }, "");
        if self.dump {
            r.tables.push(ensemble_table("ensemble_initial.csv", &ens, u));
            r.tables.push(ensemble_table("ensemble_final.csv", &out.ensemble, u));
        }
        Ok(r)
    }
}

fn ensemble_table(name: &str, e: &Ensemble, u: &Conv) -> Table {
    let mut t = Table::new(name, &["x [um]", "v [mm/s]", "weight"]).meta("seed", e.seed);
    for i in 0..e.len() {
        t.push(vec![u.um(e.x[i]).into(), u.mm_s(e.v[i]).into(), e.weight[i].into()]);
    }
    t
}
