//! Time-scheduled potential terms, Larmor field regions and well finding.

use alloc::vec::Vec;

#[allow(unused_imports)] // only needed when std is absent from the build
use num_traits::Float;
use thiserror::Error;

use crate::grid::Grid;
use crate::math::golden_min;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PotentialError {
    #[error("invalid potential parameter: {0}")]
    Invalid(&'static str),
    #[error("no interior local minimum with a finite enclosing barrier in [{0}, {1}]")]
    NoWell(f64, f64),
}

/// Activity interval of a term; `Interval` is half-open `[t_on, t_off)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Window {
    Always,
    Interval { t_on: f64, t_off: f64 },
}

impl Window {
    pub fn active(&self, t: f64) -> bool {
        match *self {
            Window::Always => true,
            Window::Interval { t_on, t_off } => t >= t_on && t < t_off,
        }
    }

    pub fn start(&self) -> f64 {
        match *self {
            Window::Always => 0.0,
            Window::Interval { t_on, .. } => t_on,
        }
    }

    fn validate(&self) -> Result<(), PotentialError> {
        match *self {
            Window::Interval { t_on, t_off } if !(t_on < t_off) => Err(PotentialError::Invalid("window needs t_on < t_off")),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    /// `v0` on `center − width/2 ≤ x < center + width/2`.
    Rectangular { v0: f64, center: f64, width: f64 },
    /// `v0·exp(−2(x−center)²/waist²)`.
    Gaussian { v0: f64, center: f64, waist: f64 },
    /// `slope·|x − vertex|`.
    LinearVee { slope: f64, vertex: f64 },
    /// `½·omega2·(x − center)²`.
    Harmonic { omega2: f64, center: f64 },
    /// `g·x`.
    UniformGradient { g: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialTerm {
    pub shape: Shape,
    pub window: Window,
    /// Centre velocity; the centre at time `t` is `center + drift·(t − t_on)`.
    pub drift: f64,
}

impl PotentialTerm {
    pub fn new(shape: Shape) -> Self {
        Self { shape, window: Window::Always, drift: 0.0 }
    }

    pub fn with_window(mut self, window: Window) -> Self {
        self.window = window;
        self
    }

    pub fn with_drift(mut self, drift: f64) -> Self {
        self.drift = drift;
        self
    }

    pub fn validate(&self) -> Result<(), PotentialError> {
        self.window.validate()?;
        if !self.drift.is_finite() {
            return Err(PotentialError::Invalid("drift must be finite"));
        }
        match self.shape {
            Shape::Rectangular { width, .. } if !(width > 0.0) => Err(PotentialError::Invalid("rectangular width must be > 0")),
            Shape::Gaussian { waist, .. } if !(waist > 0.0) => Err(PotentialError::Invalid("gaussian waist must be > 0")),
            Shape::LinearVee { slope, .. } if !(slope > 0.0) => Err(PotentialError::Invalid("vee slope must be > 0")),
            _ => Ok(()),
        }
    }

    fn shift(&self, t: f64) -> f64 {
        self.drift * (t - self.window.start())
    }

    /// Value ignoring the window.
    pub fn shape_value(&self, x: f64, t: f64) -> f64 {
        let s = self.shift(t);
        match self.shape {
            Shape::Rectangular { v0, center, width } => {
                let c = center + s;
                if x >= c - 0.5 * width && x < c + 0.5 * width {
                    v0
                } else {
                    0.0
                }
            }
            Shape::Gaussian { v0, center, waist } => {
                let d = x - center - s;
                v0 * (-2.0 * d * d / (waist * waist)).exp()
            }
            Shape::LinearVee { slope, vertex } => slope * (x - vertex - s).abs(),
            Shape::Harmonic { omega2, center } => {
                let d = x - center - s;
                0.5 * omega2 * d * d
            }
            Shape::UniformGradient { g } => g * x,
        }
    }

    pub fn value(&self, x: f64, t: f64) -> f64 {
        if self.window.active(t) {
            self.shape_value(x, t)
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PotentialSchedule {
    pub terms: Vec<PotentialTerm>,
}

impl PotentialSchedule {
    pub fn new(terms: Vec<PotentialTerm>) -> Result<Self, PotentialError> {
        for t in &terms {
            t.validate()?;
        }
        Ok(Self { terms })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn single(shape: Shape) -> Self {
        Self { terms: alloc::vec![PotentialTerm::new(shape)] }
    }

    pub fn push(&mut self, term: PotentialTerm) -> Result<(), PotentialError> {
        term.validate()?;
        self.terms.push(term);
        Ok(())
    }

    pub fn evaluate(&self, x: f64, t: f64) -> f64 {
        self.terms.iter().map(|term| term.value(x, t)).sum()
    }

    /// True when no term is windowed or drifting.
    pub fn is_static(&self) -> bool {
        self.terms.iter().all(|t| t.window == Window::Always && t.drift == 0.0)
    }

    pub fn sample_into(&self, grid: &Grid, t: f64, out: &mut [f64]) {
        for (j, v) in out.iter_mut().enumerate() {
            *v = self.evaluate(grid.x(j), t);
        }
    }

    pub fn sample(&self, grid: &Grid, t: f64) -> Vec<f64> {
        let mut v = alloc::vec![0.0; grid.len()];
        self.sample_into(grid, t, &mut v);
        v
    }

    /// Deepest well on `[a, b]` at time `t`, see [`local_minimum_of`].
    pub fn local_minimum(&self, t: f64, a: f64, b: f64) -> Result<Well, PotentialError> {
        local_minimum_of(|x| self.evaluate(x, t), a, b)
    }
}

/// Spatial profile of a Larmor field, in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FieldRegion {
    /// Indicator of `a ≤ x < b`.
    Interval { a: f64, b: f64 },
    /// `exp(−(x−center)²/(2·width²))`.
    Gaussian { center: f64, width: f64 },
}

impl FieldRegion {
    pub fn profile(&self, x: f64) -> f64 {
        match *self {
            FieldRegion::Interval { a, b } => {
                if x >= a && x < b {
                    1.0
                } else {
                    0.0
                }
            }
            FieldRegion::Gaussian { center, width } => {
                let d = (x - center) / width;
                (-0.5 * d * d).exp()
            }
        }
    }
}

/// Weak field along `±z` confined to a region; spin coupling
/// `(sign·ω_L/2)·σ_z·profile(x)` while the window is active.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LarmorField {
    pub region: FieldRegion,
    pub omega_l: f64,
    pub sign: f64,
    pub window: Window,
}

impl LarmorField {
    pub fn interval(a: f64, b: f64, omega_l: f64) -> Self {
        Self { region: FieldRegion::Interval { a, b }, omega_l, sign: 1.0, window: Window::Always }
    }

    pub fn reversed(mut self) -> Self {
        self.sign = -self.sign;
        self
    }

    pub fn with_window(mut self, window: Window) -> Self {
        self.window = window;
        self
    }

    /// Signed precession frequency at `(x, t)`.
    pub fn frequency(&self, x: f64, t: f64) -> f64 {
        if self.window.active(t) {
            self.sign * self.omega_l * self.region.profile(x)
        } else {
            0.0
        }
    }
}

/// A local potential minimum and the barriers that enclose it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Well {
    pub x_min: f64,
    pub v_min: f64,
    /// `min(left_top, right_top) − v_min`.
    pub depth: f64,
    /// Rim energy, the lower of the two enclosing maxima.
    pub barrier_top: f64,
    /// Enclosing maxima; `None` when the potential keeps rising to the edge
    /// of the search interval.
    pub left_top: Option<(f64, f64)>,
    pub right_top: Option<(f64, f64)>,
    /// `V''(x_min)` by central difference.
    pub curvature: f64,
}

impl Well {
    /// `√(V''/m)` with `m = 1`.
    pub fn omega_eff(&self) -> f64 {
        self.curvature.max(0.0).sqrt()
    }

    pub fn secular_period(&self) -> f64 {
        2.0 * core::f64::consts::PI / self.omega_eff()
    }

    /// Position of the rim (the lower enclosing maximum).
    pub fn rim_x(&self) -> f64 {
        match (self.left_top, self.right_top) {
            (Some(l), Some(r)) => {
                if l.1 <= r.1 {
                    l.0
                } else {
                    r.0
                }
            }
            (Some(l), None) => l.0,
            (None, Some(r)) => r.0,
            (None, None) => self.x_min,
        }
    }
}

const SEARCH_SAMPLES: usize = 8192;

/// Finds interior minima of `f` on `[a, b]` by grid search, refines each
/// (and its enclosing maxima) by golden section to 1e-6, and returns the
/// deepest. A side that rises monotonically to the interval edge counts as
/// an infinite wall; at least one finite enclosing maximum is required.
pub fn local_minimum_of<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> Result<Well, PotentialError> {
    if !(a < b) {
        return Err(PotentialError::Invalid("search interval needs a < b"));
    }
    let n = SEARCH_SAMPLES;
    let h = (b - a) / (n - 1) as f64;
    let xs: Vec<f64> = (0..n).map(|i| a + h * i as f64).collect();
    let vs: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let mut best: Option<Well> = None;
    for i in 1..n - 1 {
        if !(vs[i - 1] > vs[i] && vs[i + 1] > vs[i]) {
            continue;
        }
        let (x_min, v_min) = golden_min(&f, xs[i - 1], xs[i + 1], 1e-6);
        let left_top = climb(&vs, i, false).map(|k| refine_max(&f, &xs, k));
        let right_top = climb(&vs, i, true).map(|k| refine_max(&f, &xs, k));
        let rim = match (left_top, right_top) {
            (Some(l), Some(r)) => l.1.min(r.1),
            (Some(l), None) => l.1,
            (None, Some(r)) => r.1,
            (None, None) => continue,
        };
        let e = 1e-3;
        let curvature = (f(x_min + e) - 2.0 * v_min + f(x_min - e)) / (e * e);
        let well = Well { x_min, v_min, depth: rim - v_min, barrier_top: rim, left_top, right_top, curvature };
        if best.is_none_or(|w| well.depth > w.depth) {
            best = Some(well);
        }
    }
    best.ok_or(PotentialError::NoWell(a, b))
}

/// Walks uphill from `i`; returns the index of the first local maximum, or
/// `None` if the edge is reached while still rising.
fn climb(vs: &[f64], i: usize, right: bool) -> Option<usize> {
    let mut k = i;
    loop {
        let next = if right {
            if k + 1 >= vs.len() {
                return None;
            }
            k + 1
        } else {
            if k == 0 {
                return None;
            }
            k - 1
        };
        if vs[next] < vs[k] {
            return Some(k);
        }
        k = next;
    }
}

fn refine_max<F: Fn(f64) -> f64>(f: &F, xs: &[f64], k: usize) -> (f64, f64) {
    let lo = xs[k.saturating_sub(1)];
    let hi = xs[(k + 1).min(xs.len() - 1)];
    let (x, nv) = golden_min(|x| -f(x), lo, hi, 1e-6);
    (x, -nv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_schedule_is_zero() {
        let s = PotentialSchedule::empty();
        for x in [-3.0, 0.0, 17.5] {
            assert_eq!(s.evaluate(x, 1.0), 0.0);
        }
    }

    #[test]
    fn windowing() {
        let s = PotentialSchedule::new(alloc::vec![
            PotentialTerm::new(Shape::UniformGradient { g: 1.0 }),
            PotentialTerm::new(Shape::Harmonic { omega2: 4.0, center: 0.0 })
                .with_window(Window::Interval { t_on: 1.0, t_off: 2.0 }),
        ])
        .unwrap();
        assert_eq!(s.evaluate(1.0, 0.5), 1.0);
        assert_eq!(s.evaluate(1.0, 1.5), 3.0);
        assert_eq!(s.evaluate(1.0, 2.0), 1.0);
    }

    #[test]
    fn drift_moves_centre() {
        let term = PotentialTerm::new(Shape::Gaussian { v0: 1.0, center: 0.0, waist: 2.0 })
            .with_window(Window::Interval { t_on: 1.0, t_off: 10.0 })
            .with_drift(-0.5);
        assert!((term.value(-1.0, 3.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_invalid_terms() {
        let bad = PotentialTerm::new(Shape::LinearVee { slope: -1.0, vertex: 0.0 });
        assert!(PotentialSchedule::new(alloc::vec![bad]).is_err());
        let bad = PotentialTerm::new(Shape::Gaussian { v0: 1.0, center: 0.0, waist: 0.0 });
        assert!(bad.validate().is_err());
    }

    #[test]
    fn no_well_cases() {
        let vee = PotentialSchedule::single(Shape::LinearVee { slope: 2.0, vertex: 0.0 });
        assert!(matches!(vee.local_minimum(0.0, -50.0, 50.0), Err(PotentialError::NoWell(..))));
        let g = PotentialSchedule::single(Shape::Gaussian { v0: 3.0, center: 0.0, waist: 5.0 });
        assert!(g.local_minimum(0.0, -50.0, 50.0).is_err());
    }

    #[test]
    fn double_gaussian_well() {
        // two barriers of height 1 and 2 at ±10: rim is the lower one
        let s = PotentialSchedule::new(alloc::vec![
            PotentialTerm::new(Shape::Gaussian { v0: 1.0, center: -10.0, waist: 4.0 }),
            PotentialTerm::new(Shape::Gaussian { v0: 2.0, center: 10.0, waist: 4.0 }),
        ])
        .unwrap();
        let w = s.local_minimum(0.0, -40.0, 40.0).unwrap();
        assert!((w.barrier_top - 1.0).abs() < 1e-6);
        assert!(w.x_min > -10.0 && w.x_min < 10.0);
        assert!((w.depth - (w.barrier_top - s.evaluate(w.x_min, 0.0))).abs() < 1e-12);
        assert!((w.rim_x() + 10.0).abs() < 0.05);
    }

    #[test]
    fn harmonic_curvature() {
        let s = PotentialSchedule::new(alloc::vec![
            PotentialTerm::new(Shape::Harmonic { omega2: 0.25, center: 1.0 }),
            PotentialTerm::new(Shape::Gaussian { v0: -0.0, center: 0.0, waist: 1.0 }),
            PotentialTerm::new(Shape::Gaussian { v0: 50.0, center: 6.0, waist: 1.0 }),
        ])
        .unwrap();
        let w = s.local_minimum(0.0, -20.0, 20.0).unwrap();
        assert!((w.x_min - 1.0).abs() < 1e-4);
        assert!((w.omega_eff() - 0.5).abs() < 1e-3);
    }

    #[test]
    fn larmor_field_sign_and_window() {
        let f = LarmorField::interval(0.0, 1.0, 0.3).with_window(Window::Interval { t_on: 0.0, t_off: 5.0 });
        assert_eq!(f.frequency(0.5, 1.0), 0.3);
        assert_eq!(f.reversed().frequency(0.5, 1.0), -0.3);
        assert_eq!(f.frequency(1.5, 1.0), 0.0);
        assert_eq!(f.frequency(0.5, 6.0), 0.0);
    }
}
