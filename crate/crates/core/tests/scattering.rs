use proptest::prelude::*;
use tunnelsim_core::math::linspace;
use tunnelsim_core::scattering::{dirichlet_spectrum, group_delay_at, scatter, scatter_from_right, ScatteringSolution};
use tunnelsim_core::SerialRuntime;

fn rect(v0: f64, d: f64) -> impl Fn(f64) -> f64 + Sync {
    move |x| if (0.0..d).contains(&x) { v0 } else { 0.0 }
}

/// Textbook rectangular-barrier transmission.
fn t_exact(v0: f64, d: f64, e: f64) -> f64 {
    if e < v0 {
        let k = (2.0 * (v0 - e)).sqrt();
        1.0 / (1.0 + v0 * v0 * (k * d).sinh().powi(2) / (4.0 * e * (v0 - e)))
    } else {
        let q = (2.0 * (e - v0)).sqrt();
        1.0 / (1.0 + v0 * v0 * (q * d).sin().powi(2) / (4.0 * e * (e - v0)))
    }
}

/// Phase of `t·e^{ikd}` for `E < V0`.
fn phase_exact(v0: f64, d: f64, e: f64) -> f64 {
    let k = (2.0 * e).sqrt();
    let kappa = (2.0 * (v0 - e)).sqrt();
    let eps = (kappa * kappa - k * k) / (2.0 * k * kappa);
    -(eps * (kappa * d).tanh()).atan()
}

#[test]
fn rectangular_barrier_matches_the_closed_form() {
    let (v0, d) = (2.0, 1.7);
    for e in linspace(0.1 * v0, 3.0 * v0, 97) {
        let a = scatter(rect(v0, d), 0.0, d, e).unwrap();
        assert!((a.transmission() - t_exact(v0, d, e)).abs() < 1e-6, "E = {e}");
    }
}

#[test]
fn group_delay_matches_the_phase_derivative() {
    let (v0, e) = (2.0f64, 1.0f64);
    for kd in [0.5, 1.0, 2.0, 4.0, 8.0] {
        let d = kd / (2.0 * (v0 - e)).sqrt();
        let h = 1e-5;
        let want = (phase_exact(v0, d, e + h) - phase_exact(v0, d, e - h)) / (2.0 * h);
        let got = group_delay_at(rect(v0, d), 0.0, d, e).unwrap();
        assert!((got - want).abs() < 1e-5 * want.abs().max(1.0), "κd = {kd}: {got} vs {want}");
    }
}

#[test]
fn opaque_group_delay_saturates() {
    let (v0, e) = (2.0f64, 1.0f64);
    let (k, kappa) = ((2.0 * e).sqrt(), (2.0 * (v0 - e)).sqrt());
    let limit = 2.0 / (k * kappa);
    let tau = |kd: f64| group_delay_at(rect(v0, kd / kappa), 0.0, kd / kappa, e).unwrap();
    assert!((tau(10.0) - limit).abs() < 1e-6 * limit);
    assert!(((tau(10.0) - tau(5.0)) / tau(5.0)).abs() < 1e-3);
}

#[test]
fn scan_is_ordered_and_conserves_flux() {
    let es = linspace(0.2, 5.0, 40);
    let s = ScatteringSolution::scan(rect(2.0, 1.0), 0.0, 1.0, &es, &SerialRuntime).unwrap();
    assert_eq!(s.len(), 40);
    assert!(s.flux_residual() < 1e-9);
    for (e, t) in es.iter().zip(s.transmission()) {
        assert!((t - t_exact(2.0, 1.0, *e)).abs() < 1e-6);
    }
}

/// Even and odd bound states of a square well of depth `v0` and width `a`
/// (energies measured from the well bottom), by bisection on the matching
/// conditions.
fn square_well_levels(v0: f64, a: f64) -> Vec<f64> {
    let f_even = |e: f64| {
        let (q, k) = ((2.0 * e).sqrt(), (2.0 * (v0 - e)).sqrt());
        q * (0.5 * q * a).sin() - k * (0.5 * q * a).cos()
    };
    let f_odd = |e: f64| {
        let (q, k) = ((2.0 * e).sqrt(), (2.0 * (v0 - e)).sqrt());
        q * (0.5 * q * a).cos() + k * (0.5 * q * a).sin()
    };
    let mut out = Vec::new();
    let grid = linspace(1e-9, v0 * (1.0 - 1e-12), 20001);
    for f in [&f_even as &dyn Fn(f64) -> f64, &f_odd] {
        for w in grid.windows(2) {
            let (mut lo, mut hi) = (w[0], w[1]);
            if f(lo).signum() == f(hi).signum() {
                continue;
            }
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if f(lo).signum() == f(mid).signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            // skip sign changes at poles of tan/cot
            let m = 0.5 * (lo + hi);
            if f(m).abs() < 1e-6 {
                out.push(m);
            }
        }
    }
    out.sort_by(f64::total_cmp);
    out
}

#[test]
fn square_well_spectrum_matches_the_matching_conditions() {
    let (v0, a) = (6.0, 4.0);
    let want = square_well_levels(v0, a);
    let n = 8192;
    let (l, r) = (-12.0, 12.0);
    let h = (r - l) / n as f64;
    let v: Vec<f64> = (0..n).map(|j| if (l + (j as f64 + 0.5) * h).abs() < 0.5 * a { 0.0 } else { v0 }).collect();
    let got = dirichlet_spectrum(&v, h, 0.0, v0, 1e-12);
    assert_eq!(got.len(), want.len());
    for (g, w) in got.iter().zip(&want) {
        assert!((g - w).abs() < 2e-3 * v0, "{g} vs {w}");
    }
}

#[test]
fn harmonic_levels_are_equally_spaced() {
    let n = 4096;
    let (l, r) = (-12.0, 12.0);
    let h = (r - l) / n as f64;
    let v: Vec<f64> = (0..n).map(|j| 0.5 * (l + (j as f64 + 0.5) * h).powi(2)).collect();
    let e = dirichlet_spectrum(&v, h, 0.0, 10.0, 1e-12);
    assert_eq!(e.len(), 10);
    for (n, en) in e.iter().enumerate() {
        assert!((en - (n as f64 + 0.5)).abs() < 1e-5, "{n}: {en}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn flux_is_conserved(v0 in -1.0f64..4.0, waist in 0.3f64..3.0, e in 0.05f64..6.0) {
        let f = move |x: f64| v0 * (-2.0 * x * x / (waist * waist)).exp();
        let span = 6.0 * waist;
        let a = scatter(f, -span, span, e).unwrap();
        prop_assert!((a.transmission() + a.reflection() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn transmission_is_reciprocal(v0 in 0.1f64..3.0, d in 0.2f64..3.0, tilt in -0.5f64..0.5, e in 0.05f64..5.0) {
        let f = move |x: f64| if (0.0..d).contains(&x) { v0 + tilt * x } else { 0.0 };
        let l = scatter(f, 0.0, d, e).unwrap();
        let r = scatter_from_right(f, 0.0, d, e).unwrap();
        prop_assert!((l.transmission() - r.transmission()).abs() < 1e-9);
    }
}

#[test]
fn square_well_count_at_the_second_state_threshold() {
    // √(2V0)·L = π(1 + δ) has a second bound state only for δ > 0; its
    // binding energy vanishes as δ², so the box and resolution scale with δ
    let l = 2.0f64;
    for (delta, span, h, want) in [(-2e-2, 40.0f64, 0.01, 1), (2e-2, 400.0, 0.01, 2), (-1e-3, 40.0, 0.001, 1), (1e-3, 3000.0, 0.001, 2)] {
        let v0 = (std::f64::consts::PI * (1.0 + delta) / l).powi(2) / 2.0;
        let n = (2.0 * span / h).round() as usize;
        let v: Vec<f64> = (0..n).map(|j| if (-span + (j as f64 + 0.5) * h).abs() < 0.5 * l { 0.0 } else { v0 }).collect();
        let got = dirichlet_spectrum(&v, h, 0.0, v0, 1e-14).len();
        assert_eq!(got, want, "δ = {delta}");
    }
}
