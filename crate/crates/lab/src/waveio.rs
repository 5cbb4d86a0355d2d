//! Plain-text waveforms: one `t, value` pair per line, or `t, re, im` for
//! complex samples. Lines starting with `#` and a non-numeric header are
//! skipped.

use thiserror::Error;
use tunnelsim_core::causal::{CausalKernel, WaveKind, Waveform};
use tunnelsim_core::Complex64;

use crate::output::{Cell, Table};

#[derive(Debug, Error, PartialEq)]
pub enum WaveIoError {
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("waveform needs at least two samples")]
    TooShort,
    #[error("line {line}: time step {step} differs from {expected}")]
    NonUniform { line: usize, step: f64, expected: f64 },
}

/// `t,value` when every sample is real, `t,re,im` otherwise. Front
/// waveforms carry a `# front: t_f` line.
pub fn waveform_table(name: &str, w: &Waveform) -> Table {
    let real = w.samples.iter().all(|z| z.im == 0.0);
    let mut t = Table::new(name, if real { &["t", "value"] } else { &["t", "re", "im"] });
    if let WaveKind::Front { t_f } = w.kind {
        t = t.meta("front", format!("{t_f:e}"));
    }
    for (j, z) in w.samples.iter().enumerate() {
        let mut row = vec![Cell::Num(w.time(j)), Cell::Num(z.re)];
        if !real {
            row.push(Cell::Num(z.im));
        }
        t.push(row);
    }
    t
}

/// Parses the format written by [`waveform_table`]. A `# front: t_f`
/// comment marks a has-front waveform.
pub fn read_waveform(text: &str) -> Result<Waveform, WaveIoError> {
    let mut times: Vec<f64> = Vec::new();
    let mut samples = Vec::new();
    let mut front = None;
    let mut header_seen = false;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let l = raw.trim();
        if l.is_empty() {
            continue;
        }
        if let Some(c) = l.strip_prefix('#') {
            if let Some(v) = c.trim().strip_prefix("front:") {
                front = Some(v.trim().parse::<f64>().map_err(|e| WaveIoError::Line { line, message: e.to_string() })?);
            }
            continue;
        }
        let cols: Vec<&str> = l.split(',').map(str::trim).collect();
        let nums: Result<Vec<f64>, _> = cols.iter().map(|c| c.parse::<f64>()).collect();
        let nums = match nums {
            Ok(n) => n,
            Err(_) if !header_seen && times.is_empty() => {
                header_seen = true;
                continue;
            }
            Err(e) => return Err(WaveIoError::Line { line, message: e.to_string() }),
        };
        let z = match nums.as_slice() {
            [_, v] => Complex64::new(*v, 0.0),
            [_, re, im] => Complex64::new(*re, *im),
            _ => return Err(WaveIoError::Line { line, message: format!("expected 2 or 3 columns, found {}", nums.len()) }),
        };
        if let (Some(&prev), Some(&first)) = (times.last(), times.first()) {
            let expected = if times.len() >= 2 { times[1] - first } else { nums[0] - prev };
            let step = nums[0] - prev;
            if !(expected > 0.0) || (step - expected).abs() > 1e-9 * expected.abs().max(1.0) {
                return Err(WaveIoError::NonUniform { line, step, expected });
            }
        }
        times.push(nums[0]);
        samples.push(z);
    }
    if samples.len() < 2 {
        return Err(WaveIoError::TooShort);
    }
    let t0 = times[0];
    let dt = (times[times.len() - 1] - t0) / (times.len() - 1) as f64;
    let kind = front.map_or(WaveKind::BandLimited, |t_f| WaveKind::Front { t_f });
    Ok(Waveform { t0, dt, samples, kind })
}

/// `tau,f` kernel export, every `stride`-th sample.
pub fn kernel_table(name: &str, k: &CausalKernel, stride: usize) -> Table {
    let mut t = Table::new(name, &["tau", "f"]).meta("front_delay", format!("{:e}", k.front_delay())).meta("acausal_residual", format!("{:e}", k.acausal_residual));
    for (m, f) in k.f.iter().enumerate().step_by(stride.max(1)) {
        t.push(vec![Cell::Num(m as f64 * k.dt), Cell::Num(*f)]);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_round_trip() {
        let w = Waveform::gaussian(-1.0, 0.125, 33, 0.5, 0.7, 3.0);
        let back = read_waveform(&waveform_table("w.csv", &w).to_csv()).unwrap();
        assert_eq!(back, w);
    }

    #[test]
    fn real_front_round_trip() {
        let w = Waveform::step(0.0, 0.5, 20, 3.0, 0.0);
        let text = waveform_table("w.csv", &w).to_csv();
        assert!(text.contains("t,value"));
        assert_eq!(read_waveform(&text).unwrap(), w);
    }

    #[test]
    fn rejects_uneven_steps() {
        let err = read_waveform("t,value\n0,1\n1,1\n3,1\n").unwrap_err();
        assert!(matches!(err, WaveIoError::NonUniform { line: 4, .. }));
    }
}
