use num_complex::Complex64;
use proptest::prelude::*;
use tunnelsim_core::potential::{PotentialTerm, Shape};
use tunnelsim_core::propagate::{evolve, relax_ground_state, RelaxConfig};
use tunnelsim_core::{Fft, Grid, PotentialSchedule, PropagatorConfig, Radix2Fft, WaveFunction};

fn distance(a: &WaveFunction, b: &WaveFunction) -> f64 {
    let dx = a.grid().dx();
    a.amplitudes().iter().zip(b.amplitudes()).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt() * dx.sqrt()
}

fn naive_dft(x: &[Complex64]) -> Vec<Complex64> {
    let n = x.len();
    (0..n)
        .map(|k| {
            x.iter()
                .enumerate()
                .map(|(j, &v)| v * Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * (j * k % n) as f64 / n as f64))
                .sum()
        })
        .collect()
}

#[test]
fn radix2_matches_direct_dft() {
    let n = 64;
    let x: Vec<Complex64> = (0..n).map(|j| Complex64::new((j as f64 * 0.37).sin(), (j as f64 * 1.3).cos() - 0.2)).collect();
    let fft = Radix2Fft::new(n);
    let mut y = x.clone();
    fft.forward(&mut y, &mut []);
    let want = naive_dft(&x);
    for (a, b) in y.iter().zip(&want) {
        assert!((a - b).norm() < 1e-11, "{a} vs {b}");
    }
}

#[test]
fn free_gaussian_spreads_like_the_closed_form() {
    let g = Grid::new(-100.0, 100.0, 2048).unwrap();
    let fft = Radix2Fft::new(2048);
    let (s0, k0, t) = (2.0, 0.5, 12.0);
    let psi = WaveFunction::gaussian_packet(g, -10.0, s0, k0).unwrap();
    let out = evolve(&psi, &PotentialSchedule::empty(), &PropagatorConfig::new(0.01), 0.0, t, &fft).unwrap();
    let o = out.state.observables();
    // σ(t)² = σ0² + (t/2σ0)²
    let want = s0 * s0 + (t / (2.0 * s0)).powi(2);
    assert!((o.var_x - want).abs() < 1e-9 * want, "{} vs {want}", o.var_x);
    assert!((o.mean_x - (-10.0 + k0 * t)).abs() < 1e-9);
}

#[test]
fn displaced_oscillator_follows_the_classical_orbit() {
    let g = Grid::new(-20.0, 20.0, 512).unwrap();
    let fft = Radix2Fft::new(512);
    let w = 0.8f64;
    let x0 = 3.0;
    // ground-state width of the oscillator: σ² = 1/(2ω)
    let psi = WaveFunction::gaussian_packet(g, x0, (0.5 / w).sqrt(), 0.0).unwrap();
    let s = PotentialSchedule::single(Shape::Harmonic { omega2: w * w, center: 0.0 });
    let t = 2.3;
    let out = evolve(&psi, &s, &PropagatorConfig::new(1e-3), 0.0, t, &fft).unwrap();
    let o = out.state.observables();
    assert!((o.mean_x - x0 * (w * t).cos()).abs() < 1e-6, "{}", o.mean_x);
    assert!((o.var_x - 0.5 / w).abs() < 1e-6);
}

#[test]
fn norm_is_conserved_over_a_thousand_steps() {
    let g = Grid::new(-60.0, 60.0, 1024).unwrap();
    let fft = Radix2Fft::new(1024);
    let psi = WaveFunction::gaussian_packet(g, -20.0, 3.0, 1.5).unwrap();
    let s = PotentialSchedule::new(vec![
        PotentialTerm::new(Shape::Gaussian { v0: 1.0, center: 0.0, waist: 2.0 }).with_drift(0.1),
        PotentialTerm::new(Shape::Harmonic { omega2: 1e-3, center: 0.0 }),
    ])
    .unwrap();
    let out = evolve(&psi, &s, &PropagatorConfig::new(0.01), 0.0, 10.0, &fft).unwrap();
    assert_eq!(out.trajectory.steps, 1000);
    assert!((out.state.norm2() - 1.0).abs() < 1e-10);
}

#[test]
fn strang_splitting_is_second_order() {
    let g = Grid::new(-40.0, 40.0, 512).unwrap();
    let fft = Radix2Fft::new(512);
    let psi = WaveFunction::gaussian_packet(g, -8.0, 2.0, 1.2).unwrap();
    let s = PotentialSchedule::new(vec![PotentialTerm::new(Shape::Gaussian { v0: 0.8, center: 0.0, waist: 1.5 }).with_drift(-0.2)]).unwrap();
    let run = |dt: f64| evolve(&psi, &s, &PropagatorConfig::new(dt), 0.0, 6.0, &fft).unwrap().state;
    let (a, b, c) = (run(0.04), run(0.02), run(0.01));
    let ratio = distance(&a, &b) / distance(&b, &c);
    assert!((3.5..=4.5).contains(&ratio), "{ratio}");
}

#[test]
fn conjugate_evolution_reverses_time() {
    let g = Grid::new(-40.0, 40.0, 512).unwrap();
    let fft = Radix2Fft::new(512);
    let psi = WaveFunction::gaussian_packet(g, -5.0, 2.0, 1.0).unwrap();
    let s = PotentialSchedule::single(Shape::Rectangular { v0: 0.6, center: 2.0, width: 2.0 });
    let cfg = PropagatorConfig::new(0.01);
    let fwd = evolve(&psi, &s, &cfg, 0.0, 8.0, &fft).unwrap().state;
    let conj = WaveFunction::new(g, fwd.amplitudes().iter().map(|c| c.conj()).collect()).unwrap();
    let back = evolve(&conj, &s, &cfg, 0.0, 8.0, &fft).unwrap().state;
    let back = WaveFunction::new(g, back.amplitudes().iter().map(|c| c.conj()).collect()).unwrap();
    assert!(distance(&back, &psi) < 1e-8);
}

#[test]
fn relaxation_finds_the_linear_well_ground_state() {
    // V = |x| has ground energy −a'₁/2^{1/3} with a'₁ the first zero of Ai'.
    let g = Grid::new(-15.0, 15.0, 1024).unwrap();
    let fft = Radix2Fft::new(1024);
    let v: Vec<f64> = g.xs().iter().map(|x| x.abs()).collect();
    let gs = relax_ground_state(&g, &v, &RelaxConfig { dtau: 1e-3, ..Default::default() }, None, &fft).unwrap();
    let want = 1.018_792_971_647_471 / 2f64.powf(1.0 / 3.0);
    assert!((gs.energy - want).abs() < 1e-4, "{} vs {want}", gs.energy);
    // virial theorem for a linear potential: 2⟨T⟩ = ⟨V⟩
    assert!((2.0 * gs.kinetic - gs.potential).abs() < 1e-3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn parseval_holds(seed in proptest::collection::vec(-1.0f64..1.0, 256)) {
        let x: Vec<Complex64> = seed.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect();
        let n = x.len();
        let fft = Radix2Fft::new(n);
        let mut y = x.clone();
        fft.forward(&mut y, &mut []);
        let ex: f64 = x.iter().map(|c| c.norm_sqr()).sum();
        let ey: f64 = y.iter().map(|c| c.norm_sqr()).sum::<f64>() / n as f64;
        prop_assert!((ex - ey).abs() <= 1e-12 * ex.max(1.0));
        fft.inverse(&mut y, &mut []);
        for (a, b) in x.iter().zip(&y) {
            prop_assert!((a - b / n as f64).norm() < 1e-13);
        }
    }

    #[test]
    fn unitary_steps_keep_the_norm(x0 in -10.0f64..10.0, sigma in 1.0f64..4.0, k0 in -2.0f64..2.0, v0 in -1.0f64..2.0) {
        let g = Grid::new(-50.0, 50.0, 512).unwrap();
        let fft = Radix2Fft::new(512);
        let psi = WaveFunction::gaussian_packet(g, x0, sigma, k0).unwrap();
        let s = PotentialSchedule::single(Shape::Gaussian { v0, center: 0.0, waist: 2.0 });
        let out = evolve(&psi, &s, &PropagatorConfig::new(0.02), 0.0, 2.0, &fft).unwrap();
        prop_assert!((out.state.norm2() - 1.0).abs() < 1e-11);
    }
}
