use proptest::prelude::*;
use tunnelsim_core::causal::{
    energy_ratio, kernel_from_transfer, klein_gordon_slab, low_pass, perturbation_test, transmit, CausalError, CausalKernel, TransferFunction, Waveform,
};
use tunnelsim_core::{Complex64, Fft, Radix2Fft};

const N: usize = 16384;
const DT: f64 = 0.02;

fn slab(w: f64) -> Complex64 {
    klein_gordon_slab(w, 1.0, 1.0, 4.0) * low_pass(w, 10.0, 8)
}

fn slab_kernel() -> CausalKernel {
    let tf = TransferFunction::sample(N, DT, 1.0, 4.0, slab).unwrap();
    kernel_from_transfer(&tf, &Radix2Fft::new(N), 1e-13).unwrap()
}

/// Output by multiplication in the frequency domain on a zero-padded grid.
fn spectral_response(input: &Waveform, t: impl Fn(f64) -> Complex64) -> Vec<Complex64> {
    let fft = Radix2Fft::new(N);
    let mut buf = vec![Complex64::new(0.0, 0.0); N];
    buf[..input.len()].copy_from_slice(&input.samples);
    // e^{+iωt} analysis for the e^{−iωt} convention
    fft.inverse(&mut buf, &mut []);
    for (k, z) in buf.iter_mut().enumerate() {
        let kk = if k < N / 2 { k as f64 } else { k as f64 - N as f64 };
        *z *= t(2.0 * std::f64::consts::PI * kk / (N as f64 * DT));
    }
    fft.forward(&mut buf, &mut []);
    buf.iter().take(input.len()).map(|z| z / N as f64).collect()
}

#[test]
fn slab_kernel_is_causal_and_real() {
    let k = slab_kernel();
    assert!(k.acausal_residual < 1e-6, "{}", k.acausal_residual);
    assert!(k.imaginary_residual < 1e-9, "{}", k.imaginary_residual);
    assert_eq!(k.delay_samples, 200);
    let tf = TransferFunction::sample(N, DT, 1.0, 4.0, slab).unwrap();
    assert!(tf.is_passive());
    assert!(tf.hermitian_error() < 1e-12);
}

#[test]
fn retarded_convolution_matches_spectral_multiplication() {
    let k = slab_kernel();
    let input = Waveform::gaussian(0.0, DT, 4096, 20.0, 3.0, 1.5);
    let got = transmit(&k, &input).unwrap();
    let want = spectral_response(&input, slab);
    let peak = got.peak();
    let err = got.samples.iter().zip(&want).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max) / peak;
    assert!(err < 1e-9, "{err}");
}

#[test]
fn delay_kernel_shifts_by_whole_samples() {
    let k = CausalKernel::delta(DT, 37);
    let input = Waveform::gaussian(0.0, DT, 500, 3.0, 0.5, 2.0);
    let out = transmit(&k, &input).unwrap();
    for j in 0..out.len() {
        let want = if j >= 37 { input.samples[j - 37] } else { Complex64::new(0.0, 0.0) };
        assert!((out.samples[j] - want).norm() < 1e-15);
    }
}

#[test]
fn advanced_response_is_rejected() {
    let tf = TransferFunction::sample(1024, DT, 1.0, 0.0, |w| Complex64::from_polar(1.0, -2.0 * w) * low_pass(w, 10.0, 8)).unwrap();
    match kernel_from_transfer(&tf, &Radix2Fft::new(1024), 1e-13) {
        Err(CausalError::Acausal { residual }) => assert!(residual > 0.1),
        other => panic!("{other:?}"),
    }
    assert!(TransferFunction::sample(1000, DT, 1.0, 0.0, |_| Complex64::new(1.0, 0.0)).is_err());
}

#[test]
fn slab_step_front_starts_after_the_transit_time() {
    let k = slab_kernel();
    let input = Waveform::step(0.0, DT, 2000, 5.0, 1.5);
    let out = transmit(&k, &input).unwrap();
    assert_eq!(out.pre_front_max(), 0.0);
    assert!(out.front_time(1e-12).unwrap() >= 5.0 + 4.0 - 1e-9);
    let pulse = Waveform::gaussian(0.0, DT, 4096, 20.0, 3.0, 1.5);
    assert!(energy_ratio(&pulse, &transmit(&k, &pulse).unwrap()) <= 1.0);
}

fn random_kernel(taps: Vec<f64>, delay: usize) -> CausalKernel {
    CausalKernel { dt: DT, f: taps, delay_samples: delay, acausal_residual: 0.0, imaginary_residual: 0.0 }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn transmit_is_linear(
        taps in proptest::collection::vec(-1.0f64..1.0, 1..64),
        delay in 0usize..50,
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
        c1 in 4.0f64..10.0,
        c2 in 4.0f64..10.0,
    ) {
        let k = random_kernel(taps, delay);
        let x = Waveform::gaussian(0.0, DT, 512, c1, 0.7, 1.0);
        let y = Waveform::gaussian(0.0, DT, 512, c2, 0.4, -2.0);
        let mut mix = x.clone();
        for (m, s) in mix.samples.iter_mut().zip(&y.samples) {
            *m = *m * a + s * b;
        }
        let (ox, oy, om) = (transmit(&k, &x).unwrap(), transmit(&k, &y).unwrap(), transmit(&k, &mix).unwrap());
        let scale = ox.peak().max(oy.peak()).max(1.0) * (a.abs() + b.abs()).max(1.0);
        for j in 0..om.len() {
            let want = ox.samples[j] * a + oy.samples[j] * b;
            prop_assert!((om.samples[j] - want).norm() <= 1e-12 * scale);
        }
    }

    #[test]
    fn fronts_never_run_ahead(
        taps in proptest::collection::vec(-1.0f64..1.0, 1..64),
        delay in 0usize..50,
        t_f in 0.5f64..5.0,
        t_cut in 0.5f64..8.0,
        amp in 0.1f64..10.0,
    ) {
        let k = random_kernel(taps, delay);
        let step = Waveform::step(0.0, DT, 600, t_f, 1.3);
        let out = transmit(&k, &step).unwrap();
        prop_assert_eq!(out.pre_front_max(), 0.0);
        let pulse = Waveform::gaussian(0.0, DT, 600, 4.0, 1.0, 0.8);
        let r = perturbation_test(&k, &pulse, t_cut, |t| Complex64::new(amp * (3.0 * t).sin(), amp)).unwrap();
        prop_assert!(r.causal, "{:?}", r);
    }
}
