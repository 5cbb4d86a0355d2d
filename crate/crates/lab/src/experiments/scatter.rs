use tunnelsim_core::math::linspace;
use tunnelsim_core::scattering::{group_delay_at, rectangular_transmission, scatter, ScatteringSolution};
use tunnelsim_core::{Dimension, Runtime};

use super::{missing, Conv};
use crate::error::{numerical, RunError};
use crate::output::{Report, Table};
use crate::scenario::{Document, ScenarioError};

#[derive(Debug, Clone)]
struct Scan {
    e_min: f64,
    e_max: f64,
    points: usize,
    kappa_d: f64,
}

/// Group delay of a rectangular barrier against its thickness at a fixed
/// energy, plus an optional energy scan at one thickness.
#[derive(Debug, Clone)]
pub struct ScatterPlan {
    height: f64,
    energy: f64,
    kappa_d: Vec<f64>,
    scan: Option<Scan>,
}

fn rect(v0: f64, d: f64) -> impl Fn(f64) -> f64 + Sync {
    move |x| if (0.0..d).contains(&x) { v0 } else { 0.0 }
}

impl ScatterPlan {
    pub fn parse(doc: &Document) -> Result<Self, ScenarioError> {
        let height = doc.req_quantity("barrier.height", Dimension::Energy)?;
        let energy = doc.req_quantity("probe.energy", Dimension::Energy)?;
        if !(energy > 0.0 && energy < height) {
            return Err(doc.reject("probe.energy", "must lie between zero and the barrier height"));
        }
        let kappa_d = doc.numbers("barrier.kappa_d")?.ok_or_else(|| missing("barrier.kappa_d"))?;
        if kappa_d.iter().any(|k| !(*k > 0.0)) {
            return Err(doc.reject("barrier.kappa_d", "thicknesses must be positive"));
        }
        let scan = match doc.quantity("scan.e_min", Dimension::Energy)? {
            None => None,
            Some(e_min) => {
                let e_max = doc.req_quantity("scan.e_max", Dimension::Energy)?;
                let points = doc.integer("scan.points")?.ok_or_else(|| missing("scan.points"))? as usize;
                let kappa_d = doc.req_number("scan.kappa_d")?;
                if !(e_min > 0.0 && e_max > e_min) || points < 3 {
                    return Err(doc.reject("scan.e_min", "need 0 < e_min < e_max and at least 3 points"));
                }
                Some(Scan { e_min, e_max, points, kappa_d })
            }
        };
        Ok(Self { height, energy, kappa_d, scan })
    }

    fn width(&self, kd: f64) -> f64 {
        kd / (2.0 * (self.height - self.energy)).sqrt()
    }

    pub fn run<R: Runtime>(&self, u: &Conv, rt: &R) -> Result<Report, RunError> {
        let (v0, e) = (self.height, self.energy);
        let k = (2.0 * e).sqrt();
        let kappa = (2.0 * (v0 - e)).sqrt();
        let opaque = 2.0 / (k * kappa);
        let rows = rt.map(self.kappa_d.len(), |i| {
            let d = self.width(self.kappa_d[i]);
            let a = scatter(rect(v0, d), 0.0, d, e)?;
            let tau = group_delay_at(rect(v0, d), 0.0, d, e)?;
            Ok::<_, tunnelsim_core::scattering::ScatterError>((d, a.transmission(), tau))
        });
        let mut table = Table::new(
            "group_delay_vs_width.csv",
            &["kappa_d", "width [um]", "T", "tau_g [ms]", "tau_g/tau_opaque", "free_time [ms]", "advance [ms]"],
        )
        .meta("barrier_height [nK]", u.nk(v0))
        .meta("energy [nK]", u.nk(e))
        .meta("tau_opaque [ms]", u.ms(opaque));
        let mut taus = Vec::new();
        for (kd, r) in self.kappa_d.iter().zip(rows) {
            let (d, t, tau) = r.map_err(numerical)?;
            taus.push((*kd, tau));
            table.push(vec![(*kd).into(), u.um(d).into(), t.into(), u.ms(tau).into(), (tau / opaque).into(), u.ms(d / k).into(), u.ms(d / k - tau).into()]);
        }
        let mut report = Report::default();
        report.tables.push(table);
        report.add("tau_opaque", u.ms(opaque), "ms");
        let at = |kd: f64| taus.iter().find(|(k, _)| (*k - kd).abs() < 1e-9).map(|p| p.1);
        if let (Some(t5), Some(t10)) = (at(5.0), at(10.0)) {
            report.add("tau_g_kd5", u.ms(t5), "ms");
            report.add("tau_g_kd10", u.ms(t10), "ms");
            report.add("saturation_change_5_to_10", ((t10 - t5) / t5).abs(), "");
        }
        if let Some(&(kd, tau)) = taus.iter().max_by(|a, b| a.0.total_cmp(&b.0)) {
            report.add("thickest_kappa_d", kd, "");
            report.add("opaque_ratio_thickest", tau / opaque, "");
        }
        if let Some(s) = &self.scan {
            let d = self.width(s.kappa_d);
            let es = linspace(s.e_min, s.e_max, s.points);
            let sol = ScatteringSolution::scan(rect(v0, d), 0.0, d, &es, rt).map_err(numerical)?;
            let delays = sol.group_delays().map_err(numerical)?;
            let mut t = Table::new(
                "scattering.csv",
                &["E [nK]", "re_t", "im_t", "re_r", "im_r", "T", "phase [rad]", "group_delay [ms]", "T_analytic"],
            )
            .meta("kappa_d", s.kappa_d)
            .meta("width [um]", u.um(d));
            let mut worst = 0.0f64;
            for i in 0..sol.len() {
                let exact = rectangular_transmission(v0, d, es[i]);
                worst = worst.max((sol.t[i].norm_sqr() - exact).abs());
                t.push(vec![
                    u.nk(es[i]).into(),
                    sol.t[i].re.into(),
                    sol.t[i].im.into(),
                    sol.r[i].re.into(),
                    sol.r[i].im.into(),
                    sol.t[i].norm_sqr().into(),
                    sol.phase[i].into(),
                    u.ms(delays[i]).into(),
                    exact.into(),
                ]);
            }
            report.tables.push(t);
            report.add("scan_flux_residual", sol.flux_residual(), "");
            report.add("scan_max_T_error", worst, "");
        }
        Ok(report)
    }
}
