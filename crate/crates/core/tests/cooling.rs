use proptest::prelude::*;
use tunnelsim_core::cooling::{barrier_for_depth, delta_kick, harmonic_cooling_ratio, optimize_kick, sample_thermal, KickKind, KickSpec, SweepSpec};
use tunnelsim_core::Grid;

fn sweep() -> SweepSpec {
    SweepSpec {
        slope: 5.4,
        vertex: 0.0,
        barrier_height: 50.0,
        waist: 7.0,
        start: 60.0,
        end: -20.0,
        speed: 0.7,
        grid: Grid::new(-40.0, 40.0, 1024).unwrap(),
        dt: 0.004,
        absorber: None,
        kt: 160.0,
        batch: 4,
        cutoff: 1e-3,
        stop_after: 3,
        max_channels: 40,
        energy_points: 501,
        energy_span_kt: 6.0,
    }
}

/// Depth of the well on the outer side of a barrier parked on the left arm,
/// from a dense scan: the interior local minimum left of the barrier centre
/// and the highest point between it and the centre.
fn scanned_depth(slope: f64, v0: f64, waist: f64, center: f64, x_min: f64) -> f64 {
    let v = |x: f64| slope * x.abs() + v0 * (-2.0 * (x - center).powi(2) / (waist * waist)).exp();
    let n = 400_000;
    let h = (center - x_min) / n as f64;
    let vs: Vec<f64> = (0..=n).map(|i| v(x_min + i as f64 * h)).collect();
    let Some(j) = (1..n).find(|&i| vs[i] < vs[i - 1] && vs[i] <= vs[i + 1]) else {
        return 0.0;
    };
    let top = vs[j..].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    top - vs[j]
}

#[test]
fn thermal_sample_moments_and_determinism() {
    let (kt, sx) = (4.0, 2.5);
    let a = sample_thermal(kt, sx, 100_000, 11).unwrap();
    let b = sample_thermal(kt, sx, 100_000, 11).unwrap();
    let c = sample_thermal(kt, sx, 100_000, 12).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.x, c.x);
    // five standard errors on each moment
    let tol = 5.0 / (100_000f64).sqrt();
    assert!(a.mean_x().abs() < tol * sx);
    assert!(a.mean_v().abs() < tol * kt.sqrt());
    assert!((a.sigma_x() / sx - 1.0).abs() < tol);
    assert!((a.kinetic_temperature() / kt - 1.0).abs() < 2.0 * tol);
    assert!(a.cov_xv().abs() < tol * sx * kt.sqrt());
}

#[test]
fn optimal_harmonic_kick_matches_the_closed_form() {
    let (kt, sx, t) = (9.0, 1.0, 4.0);
    let ens = sample_thermal(kt, sx, 100_000, 2).unwrap();
    let kick = optimize_kick(&ens, t, KickKind::Harmonic { omega2: 0.0 }, 0.01, true, 0.0).unwrap();
    let out = delta_kick(&ens, t, &kick, 0.0).unwrap();
    let got = out.ensemble.kinetic_temperature() / ens.kinetic_temperature();
    let want = harmonic_cooling_ratio(sx, kt.sqrt(), t);
    assert!((got / want - 1.0).abs() < 0.02, "{got} vs {want}");
    // the optimum removes the position-velocity correlation built up in flight
    let drifted = delta_kick(&ens, t, &KickSpec { kind: KickKind::Harmonic { omega2: 0.0 }, ..kick }, 0.0).unwrap().ensemble;
    assert!((kick.strength() - drifted.regression()).abs() < 1e-4 * drifted.regression());
}

#[test]
fn gravity_without_compensation_only_shifts_the_cloud() {
    let ens = sample_thermal(1.0, 1.0, 2000, 5).unwrap();
    let k = KickSpec { kind: KickKind::Harmonic { omega2: 0.0 }, duration: 0.01, gravity_compensation: false };
    let out = delta_kick(&ens, 2.0, &k, 3.0).unwrap().ensemble;
    assert!((out.mean_v() - (ens.mean_v() - 6.0)).abs() < 1e-12);
    assert!((out.kinetic_temperature() - ens.kinetic_temperature()).abs() < 1e-12);
}

#[test]
fn long_pulses_are_flagged() {
    let ens = sample_thermal(1.0, 1.0, 10, 0).unwrap();
    let k = KickSpec { kind: KickKind::Harmonic { omega2: 1.0 }, duration: 0.5, gravity_compensation: true };
    assert!(delta_kick(&ens, 2.0, &k, 0.0).unwrap().impulse_warning);
    assert!(!delta_kick(&ens, 10.0, &k, 0.0).unwrap().impulse_warning);
}

#[test]
fn barrier_for_depth_produces_the_requested_well() {
    let s = sweep();
    for depth in [2.0, 10.0, 25.0] {
        let v0 = barrier_for_depth(&s, depth, 400.0).unwrap();
        let got = scanned_depth(s.slope, v0, s.waist, s.end, s.grid.x_min());
        assert!((got - depth).abs() < 1e-3 * depth, "depth {depth}: {got}");
    }
    assert_eq!(barrier_for_depth(&s, 0.0, 400.0), Some(0.0));
    assert_eq!(barrier_for_depth(&s, 1e4, 400.0), None);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn optimized_kicks_never_heat(kt in 0.1f64..20.0, sx in 0.2f64..5.0, t in 0.5f64..20.0, seed in 0u64..1000, quad in any::<bool>()) {
        let ens = sample_thermal(kt, sx, 500, seed).unwrap();
        let kind = if quad { KickKind::Quadrupole { slope: 0.0 } } else { KickKind::Harmonic { omega2: 0.0 } };
        let kick = optimize_kick(&ens, t, kind, 0.01, true, 0.0).unwrap();
        let free = KickSpec { kind, ..kick };
        let before = delta_kick(&ens, t, &free, 0.0).unwrap().ensemble.kinetic_temperature();
        let after = delta_kick(&ens, t, &kick, 0.0).unwrap().ensemble.kinetic_temperature();
        prop_assert!(after <= before * (1.0 + 1e-12));
        prop_assert!(kick.strength() >= 0.0);
    }
}
