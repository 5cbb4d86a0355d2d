use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tunnelsim_core::causal::{
    energy_ratio, group_delay_of, kernel_from_transfer, klein_gordon_slab, low_pass, perturbation_test, transmit, CausalError, CausalKernel, TransferFunction, Waveform,
};
use tunnelsim_core::{Complex64, Runtime};

use crate::error::{numerical, RunError};
use crate::output::{Cell, Report, Table};
use crate::scenario::{Document, ScenarioError};
use crate::waveio::{kernel_table, read_waveform, waveform_table};

/// Klein–Gordon slab against free propagation over the same distance, in
/// scaled units (front speed, cutoff frequency and length are plain numbers).
#[derive(Debug, Clone)]
pub struct CausalPlan {
    c: f64,
    cutoff: f64,
    length: f64,
    points: usize,
    dt: f64,
    filter_cutoff: f64,
    filter_poles: u32,
    tail_tol: f64,
    carrier: f64,
    sigma: f64,
    onset: f64,
    step_samples: usize,
    trials: usize,
    trial_samples: usize,
    stride: usize,
    input: Option<Waveform>,
}

fn positive(doc: &Document, key: &str, default: Option<f64>) -> Result<f64, ScenarioError> {
    let v = match (doc.number(key)?, default) {
        (Some(v), _) => v,
        (None, Some(d)) => d,
        (None, None) => doc.req_number(key)?,
    };
    if !(v > 0.0) {
        return Err(doc.reject(key, "must be positive"));
    }
    Ok(v)
}

impl CausalPlan {
    pub fn parse(doc: &Document) -> Result<Self, ScenarioError> {
        let c = positive(doc, "medium.front_speed", Some(1.0))?;
        let cutoff = positive(doc, "medium.cutoff", None)?;
        let length = positive(doc, "medium.length", None)?;
        let points = doc.integer("kernel.points")?.unwrap_or(65536) as usize;
        if !points.is_power_of_two() || points < 64 {
            return Err(doc.reject("kernel.points", "must be a power of two ≥ 64"));
        }
        let dt = positive(doc, "kernel.dt", None)?;
        let filter_cutoff = positive(doc, "kernel.filter_cutoff", None)?;
        let filter_poles = doc.integer("kernel.filter_poles")?.unwrap_or(8) as u32;
        let tail_tol = positive(doc, "kernel.tail_tol", Some(1e-13))?;
        let nyquist = std::f64::consts::PI / dt;
        if filter_cutoff >= nyquist {
            return Err(doc.reject("kernel.filter_cutoff", format!("must lie below the Nyquist frequency {nyquist:.3}")));
        }
        let carrier = doc.number("pulse.carrier")?.unwrap_or(0.5 * cutoff);
        let sigma = positive(doc, "pulse.sigma", None)?;
        let onset = positive(doc, "step.onset", Some(10.0))?;
        let step_samples = doc.integer("step.samples")?.unwrap_or(4000) as usize;
        let trials = doc.integer("perturbation.trials")?.unwrap_or(100) as usize;
        let trial_samples = doc.integer("perturbation.samples")?.unwrap_or(4096) as usize;
        if trial_samples < 16 || step_samples < 16 {
            return Err(doc.reject("perturbation.samples", "need at least 16 samples"));
        }
        let stride = doc.integer("output.stride")?.unwrap_or(10).max(1) as usize;
        let input = match doc.string("pulse.file") {
            None => None,
            Some(path) => {
                let text = std::fs::read_to_string(&path).map_err(|e| doc.reject("pulse.file", format!("{path}: {e}")))?;
                let w = read_waveform(&text).map_err(|e| doc.reject("pulse.file", e.to_string()))?;
                if (w.dt - dt).abs() > 1e-9 * dt {
                    return Err(doc.reject("pulse.file", format!("time step {} differs from kernel.dt {dt}", w.dt)));
                }
                Some(w)
            }
        };
        Ok(Self { c, cutoff, length, points, dt, filter_cutoff, filter_poles, tail_tol, carrier, sigma, onset, step_samples, trials, trial_samples, stride, input })
    }

    fn slab(&self, w: f64) -> Complex64 {
        klein_gordon_slab(w, self.c, self.cutoff, self.length)
    }

    fn free(&self, w: f64) -> Complex64 {
        Complex64::from_polar(1.0, w * self.length / self.c)
    }

    fn kernel<R: Runtime, F: Fn(f64) -> Complex64>(&self, rt: &R, f: F) -> Result<(TransferFunction, CausalKernel), CausalError> {
        let lp = |w| low_pass(w, self.filter_cutoff, self.filter_poles);
        let tf = TransferFunction::sample(self.points, self.dt, self.c, self.length, |w| f(w) * lp(w))?;
        let fft = rt.plan_fft(self.points);
        let k = kernel_from_transfer(&tf, fft.as_ref(), self.tail_tol)?;
        Ok((tf, k))
    }

    pub fn run<R: Runtime>(&self, rt: &R, seed: u64) -> Result<Report, RunError> {
        let (tf_b, kb) = self.kernel(rt, |w| self.slab(w)).map_err(numerical)?;
        let (tf_r, kr) = self.kernel(rt, |w| self.free(w)).map_err(numerical)?;
        let mut r = Report::default();
        r.tables.push(kernel_table("kernel.csv", &kb, self.stride));
        r.tables.push(kernel_table("kernel_free.csv", &kr, self.stride));
        let mut t = Table::new("transfer.csv", &["omega", "re_t", "im_t", "abs_t"]).meta("front_delay", format!("{:e}", self.length / self.c));
        let n = tf_b.len();
        for k in (0..n).map(|k| (k + n / 2) % n).step_by(self.stride) {
            let z = tf_b.t[k];
            t.push(vec![tf_b.omega[k].into(), z.re.into(), z.im.into(), z.norm().into()]);
        }
        r.tables.push(t);
        r.add("acausal_residual", kb.acausal_residual, "");
        r.add("acausal_residual_free", kr.acausal_residual, "");
        r.add("imaginary_residual", kb.imaginary_residual, "");
        r.add("hermitian_error", tf_b.hermitian_error(), "");
        r.add("passivity_excess", tf_b.passivity_excess().max(tf_r.passivity_excess()), "");
        r.add("kernel_length", kb.f.len() as f64, "samples");
        r.add("transmission_at_carrier", self.slab(self.carrier).norm(), "");

        // Band-limited pulse: peak advance relative to free propagation.
        let nt = (16.0 * self.sigma / self.dt) as usize + kb.f.len() + 400;
        let pulse = match &self.input {
            Some(w) => w.clone(),
            None => Waveform::gaussian(0.0, self.dt, nt, 8.0 * self.sigma, self.sigma, self.carrier),
        };
        let outs = rt.map(2, |i| transmit(if i == 0 { &kb } else { &kr }, &pulse));
        let mut outs = outs.into_iter();
        let out_b = outs.next().unwrap_or(Err(CausalError::Grid("missing output"))).map_err(numerical)?;
        let out_r = outs.next().unwrap_or(Err(CausalError::Grid("missing output"))).map_err(numerical)?;
        let tau_g = group_delay_of(|w| self.slab(w), self.carrier, 1e-5 * self.carrier.abs().max(1e-3));
        let predicted = self.length / self.c - tau_g;
        let measured = out_r.peak_time() - out_b.peak_time();
        r.add("group_delay", tau_g, "");
        r.add("peak_advance_predicted", predicted, "");
        r.add("peak_advance_measured", measured, "");
        r.add("peak_advance_relative_error", ((measured - predicted) / predicted).abs(), "");
        let e_b = energy_ratio(&pulse, &out_b);
        let e_r = energy_ratio(&pulse, &out_r);
        r.add("energy_ratio_barrier", e_b, "");
        r.add("energy_ratio_free", e_r, "");
        let mut w = Table::new("waveforms.csv", &["t", "abs_in", "abs_barrier", "abs_barrier_scaled", "abs_free"]);
        let scale = out_r.peak() / out_b.peak().max(f64::MIN_POSITIVE);
        for j in (0..pulse.len()).step_by(self.stride) {
            w.push(vec![pulse.time(j).into(), pulse.samples[j].norm().into(), out_b.samples[j].norm().into(), (out_b.samples[j].norm() * scale).into(), out_r.samples[j].norm().into()]);
        }
        r.tables.push(w);
        r.tables.push(waveform_table("pulse_in.csv", &pulse));
        r.tables.push(waveform_table("pulse_out.csv", &out_b));

        // Truncated pulse: everything after the input peak removed.
        let t_cut = pulse.peak_time();
        let cut = Waveform::from_fn(pulse.t0, pulse.dt, pulse.len(), pulse.kind, |t| if t > t_cut { Complex64::new(0.0, 0.0) } else { pulse.samples[((t - pulse.t0) / pulse.dt).round() as usize] });
        let out_cut = transmit(&kb, &cut).map_err(numerical)?;
        let bound = t_cut + kb.front_delay();
        let full_pre: Vec<usize> = (0..out_b.len()).filter(|&j| out_b.time(j) <= bound).collect();
        let mismatch = full_pre.iter().map(|&j| (out_b.samples[j] - out_cut.samples[j]).norm()).fold(0.0, f64::max) / out_b.peak().max(f64::MIN_POSITIVE);
        let replica = full_pre.iter().copied().fold(0, |b, j| if out_cut.samples[j].norm() > out_cut.samples[b].norm() { j } else { b });
        let replica_time = out_cut.time(replica);
        r.add("truncated_pre_bound_mismatch", mismatch, "");
        r.add("truncated_replica_peak_time", replica_time, "");
        r.add("truncated_replica_advance", bound - replica_time, "");
        r.add("truncated_replica_before_bound", if replica_time < bound - 2.0 * self.dt { 1.0 } else { 0.0 }, "");
        r.add("truncation_time", t_cut, "");
        let mut tt = Table::new("truncated.csv", &["t", "abs_in_cut", "abs_out_full", "abs_out_cut"]).meta("t_cut", t_cut).meta("bound", bound);
        for j in (0..cut.len()).step_by(self.stride) {
            tt.push(vec![cut.time(j).into(), cut.samples[j].norm().into(), out_b.samples[j].norm().into(), out_cut.samples[j].norm().into()]);
        }
        r.tables.push(tt);

        // Abrupt front.
        let step = Waveform::step(0.0, self.dt, self.step_samples, self.onset, self.carrier);
        let out_s = transmit(&kb, &step).map_err(numerical)?;
        let free_front = self.onset + self.length / self.c;
        let front = out_s.front_time(1e-10).unwrap_or(f64::INFINITY);
        r.add("step_front", front, "");
        r.add("step_free_front", free_front, "");
        r.add("step_front_margin", front - free_front, "");
        r.add("step_pre_front_max", out_s.pre_front_max(), "");
        r.tables.push(waveform_table("step_out.csv", &out_s));

        let trials = self.trials(rt, seed, &kb, &kr);
        let mut tr = Table::new("perturbation.csv", &["trial", "kernel", "t_cut", "bound", "first_divergence", "max_pre_bound", "causal", "energy_ratio"]);
        let (mut failures, mut worst, mut min_margin, mut max_energy) = (0usize, 0.0f64, f64::INFINITY, 0.0f64);
        for (i, t) in trials.into_iter().enumerate() {
            let t = t.map_err(numerical)?;
            failures += usize::from(!t.causal);
            worst = worst.max(t.max_pre_bound);
            if let Some(fd) = t.first_divergence {
                min_margin = min_margin.min(fd - t.bound);
            }
            if t.passive {
                max_energy = max_energy.max(t.energy_ratio);
            }
            let fd = t.first_divergence.map_or(Cell::Text("none".into()), Cell::Num);
            tr.push(vec![i.into(), t.kernel.into(), t.t_cut.into(), t.bound.into(), fd, t.max_pre_bound.into(), Cell::Int(i64::from(t.causal)), t.energy_ratio.into()]);
        }
        r.tables.push(tr);
        r.add("perturbation_trials", self.trials as f64, "");
        r.add("perturbation_failures", failures as f64, "");
        r.add("perturbation_max_pre_bound", worst, "");
        r.add("perturbation_min_margin", if min_margin.is_finite() { min_margin } else { 0.0 }, "");
        r.add("energy_ratio_max", e_b.max(e_r).max(max_energy), "");
        if !tf_b.is_passive() {
            r.warnings.push("transfer function exceeds unity: active medium".into());
        }
        Ok(r)
    }

    /// Random (kernel, input, t_cut) triples. Kernel 0 is the slab, 1 free
    /// propagation, 2 a random tap filter with a random delay.
    fn trials<R: Runtime>(&self, rt: &R, seed: u64, kb: &CausalKernel, kr: &CausalKernel) -> Vec<Result<Trial, CausalError>> {
        let n = self.trial_samples;
        let dt = self.dt;
        rt.map(self.trials, |i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64 + 1);
            let which = rng.random_range(0..3u8);
            let random;
            let kernel = match which {
                0 => kb,
                1 => kr,
                _ => {
                    let taps = rng.random_range(1..64usize);
                    let f = (0..taps).map(|_| rng.random_range(-1.0..1.0)).collect();
                    random = CausalKernel { dt, f, delay_samples: rng.random_range(0..n / 8), acausal_residual: 0.0, imaginary_residual: 0.0 };
                    &random
                }
            };
            let span = n as f64 * dt;
            let input = if rng.random_bool(0.5) {
                let center = rng.random_range(0.2..0.6) * span;
                let sigma = rng.random_range(0.02..0.1) * span;
                Waveform::gaussian(0.0, dt, n, center, sigma, rng.random_range(-1.0..1.0) * self.cutoff)
            } else {
                Waveform::step(0.0, dt, n, rng.random_range(0.05..0.4) * span, rng.random_range(-1.0..1.0) * self.cutoff)
            };
            let t_cut = rng.random_range(0.1..0.7) * span;
            let (a, b) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let rep = perturbation_test(kernel, &input, t_cut, |_| Complex64::new(a + rng.random_range(-0.5..0.5), b))?;
            let out = transmit(kernel, &input)?;
            Ok(Trial {
                kernel: ["slab", "free", "random"][which as usize],
                t_cut,
                bound: rep.bound,
                first_divergence: rep.first_divergence,
                max_pre_bound: rep.max_pre_bound,
                causal: rep.causal,
                passive: which < 2,
                energy_ratio: energy_ratio(&input, &out),
            })
        })
    }
}

#[derive(Debug, Clone)]
struct Trial {
    kernel: &'static str,
    t_cut: f64,
    bound: f64,
    first_divergence: Option<f64>,
    max_pre_bound: f64,
    causal: bool,
    passive: bool,
    energy_ratio: f64,
}
