use super::*;
use crate::{
    forward::{build_jsa, expected_interferogram, SignalState, SignalStatistics, SourceModel},
    grid::{ghz_to_angular, wavelength_to_angular},
    FrequencyGrid,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn grid(n: usize, ghz: f64) -> FrequencyGrid {
    FrequencyGrid::from_spacing(wavelength_to_angular(1550.0), ghz_to_angular(ghz), n).unwrap()
}

fn chirped(g: FrequencyGrid, s: f64, beta: f64) -> Jsa {
    Jsa::from_fn(g, g, |a, b| {
        C64::from_polar((-(a * a + b * b) / (2.0 * s * s)).exp(), -beta * a * b)
    })
}

#[test]
fn separable_gaussian_has_unit_schmidt_number() {
    let g = grid(64, 10.0);
    let r = schmidt(&chirped(g, ghz_to_angular(120.0), 0.0)).unwrap();
    assert!((r.k - 1.0).abs() < 1e-6, "{}", r.k);
    assert!((r.coefficients[0] - 1.0).abs() < 1e-9);
}

#[test]
fn two_equal_disjoint_modes_give_k_two() {
    let g = grid(16, 10.0);
    let f = Array2::from_shape_fn((16, 16), |(i, j)| {
        let same_half = (i < 8) == (j < 8);
        if same_half {
            C64::new(1.0, 0.0)
        } else {
            C64::default()
        }
    });
    let r = schmidt(&Jsa::new(g, g, f).unwrap()).unwrap();
    assert!((r.k - 2.0).abs() < 1e-12, "{}", r.k);
    assert!((r.coefficients[0] - r.coefficients[1]).abs() < 1e-12);
}

#[test]
fn chirped_gaussian_matches_continuum_schmidt_number() {
    // K = √(1 + (βσ²)²) for f ∝ exp(−(ω₁²+ω₂²)/2σ² − iβω₁ω₂)
    let s = ghz_to_angular(200.0);
    let g = grid(160, 10.0);
    for beta in [0.0, 1.0e5, 2.0e5, 4.0e5] {
        let k = schmidt(&chirped(g, s, beta)).unwrap().k;
        let b = beta * s * s;
        let want = (1.0 + b * b).sqrt();
        assert!((k - want).abs() < 1e-3 * want, "beta {beta}: {k} vs {want}");
    }
}

#[test]
fn schmidt_modes_resynthesise_the_jsa() {
    let g = grid(48, 10.0);
    let f = chirped(g, ghz_to_angular(100.0), 3e5);
    let r = schmidt(&f).unwrap();
    let norm = f.norm_sqr().sqrt();
    let mut max_err: f64 = 0.0;
    for i in 0..48 {
        for j in 0..48 {
            let v: C64 = (0..r.signal_modes.len())
                .map(|k| r.signal_modes[k].amplitudes()[i] * r.herald_modes[k].amplitudes()[j] * r.coefficients[k])
                .sum();
            max_err = max_err.max((v * norm - f.matrix()[[i, j]]).norm());
        }
    }
    assert!(max_err < 1e-9, "{max_err}");
    for m in &r.signal_modes {
        assert!((m.norm_sqr() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn schmidt_number_increases_with_chirp() {
    let g = grid(64, 10.0);
    let s = ghz_to_angular(150.0);
    let ks: Vec<f64> = (0..8)
        .map(|k| schmidt(&chirped(g, s, k as f64 * 0.5e5)).unwrap().k)
        .collect();
    for w in ks.windows(2) {
        assert!(w[1] > w[0], "{ks:?}");
    }
}

#[test]
fn chirped_preset_source_separates_complex_and_amplitude_k() {
    let g = grid(128, 10.0);
    let s = ghz_to_angular(280.0);
    let jsa = build_jsa(&SourceModel::separable(s, s, 2.0e5).unwrap(), &g, &g).unwrap();
    let k = schmidt(&jsa).unwrap().k;
    let k_abs = schmidt(&jsa.amplitude_only()).unwrap().k;
    assert!((k_abs - 1.0).abs() < 1e-6, "{k_abs}");
    assert!(k - k_abs > 0.1, "{k} vs {k_abs}");
}

#[test]
fn zero_jsa_is_rejected() {
    let g = grid(8, 10.0);
    let z = Jsa::new(g, g, Array2::zeros((8, 8))).unwrap();
    assert!(matches!(schmidt(&z), Err(Error::ZeroMatrix(_))));
}

#[test]
fn g2_prediction() {
    assert!((g2_predicted(1.02).unwrap() - 1.980).abs() < 5e-4);
    assert!((g2_predicted(1.26).unwrap() - 1.794).abs() < 5e-4);
    assert_eq!(g2_predicted(1.0).unwrap(), 2.0);
    assert!((g2_predicted(1e12).unwrap() - 1.0).abs() < 1e-11);
    assert_eq!(g2_predicted(f64::INFINITY).unwrap(), 1.0);
    assert!(g2_predicted(0.99).is_err());
    assert!(g2_predicted(f64::NAN).is_err());
}

#[test]
fn overlap_basics() {
    let g = grid(32, 10.0);
    let f = chirped(g, ghz_to_angular(60.0), 1e5);
    assert!((overlap(&f, &f).unwrap() - 1.0).abs() < 1e-12);
    let rotated = Jsa::new(g, g, f.matrix().mapv(|z| z * C64::from_polar(2.0, 1.1))).unwrap();
    assert!((overlap(&f, &rotated).unwrap() - 1.0).abs() < 1e-12);
    let left = Jsa::new(g, g, Array2::from_shape_fn((32, 32), |(i, _)| C64::from(f64::from(i < 16)))).unwrap();
    let right = Jsa::new(g, g, Array2::from_shape_fn((32, 32), |(i, _)| C64::from(f64::from(i >= 16)))).unwrap();
    assert_eq!(overlap(&left, &right).unwrap(), 0.0);
    let other = grid(32, 11.0);
    assert!(matches!(
        overlap(&f, &Jsa::from_fn(other, other, |_, _| C64::new(1.0, 0.0))),
        Err(Error::GridMismatch(_))
    ));
}

#[test]
fn chirped_vs_unchirped_overlap_golden() {
    let g = grid(128, 10.0);
    let s = ghz_to_angular(280.0);
    let v = overlap(&chirped(g, s, 0.0), &chirped(g, s, 1.69e5)).unwrap();
    assert!((v - 0.937_446_660_939_971_1).abs() < 1e-9, "{v}");
    // continuum value 1/(1 + (βσ²)²/4)
    let b = 1.69e5 * s * s;
    assert!((v - 1.0 / (1.0 + b * b / 4.0)).abs() < 3e-3);
}

fn model_phase(g: FrequencyGrid, s: f64, c: [f64; 6]) -> Jsa {
    Jsa::from_fn(g, g, |a, b| {
        let ph = c[0] + c[1] * a + c[2] * b + c[3] * a * a + c[4] * b * b - c[5] * a * b;
        C64::from_polar((-(a * a + b * b) / (2.0 * s * s)).exp(), ph)
    })
}

#[test]
fn chirp_fit_is_exact_within_model_class() {
    let g = grid(96, 10.0);
    let s = ghz_to_angular(200.0);
    let c = [0.7, 300.0, -150.0, -4.0e4, 2.5e4, 1.7e5];
    let fit = fit_chirp(&model_phase(g, s, c)).unwrap();
    assert!((fit.beta - c[5]).abs() < 1e-6 * c[5], "{fit:?}");
    for k in 1..6 {
        assert!((fit.coefficients[k] - c[k]).abs() < 1e-6 * c[k].abs(), "{k}: {fit:?}");
    }
    assert!(fit.residual_rms < 1e-9);
}

#[test]
fn chirp_fit_recovers_forward_model_gdd() {
    let g = grid(128, 10.0);
    let s = ghz_to_angular(280.0);
    let jsa = build_jsa(&SourceModel::separable(s, s, 2.0e5).unwrap(), &g, &g).unwrap();
    let fit = fit_chirp(&jsa).unwrap();
    assert!((fit.beta / 2.0e5 - 1.0).abs() < 5e-3, "{fit:?}");
    // the separable pump terms land in c₁₁ and c₂₂
    assert!((fit.coefficients[3] + 1.0e5).abs() < 1e-3 * 1.0e5);
}

#[test]
fn chirp_fit_null_case() {
    let g = grid(64, 10.0);
    let s = ghz_to_angular(150.0);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let f = model_phase(g, s, [0.0; 6]).matrix().mapv(|z| z * C64::from_polar(1.0, 0.05 * (rng.random::<f64>() - 0.5)));
    let fit = fit_chirp(&Jsa::new(g, g, f).unwrap()).unwrap();
    assert!(fit.beta_std_error > 0.0);
    assert!(fit.beta.abs() < 2.0 * fit.beta_std_error, "{fit:?}");
}

#[test]
fn random_phase_fails_to_unwrap() {
    let g = grid(32, 10.0);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let f = Array2::from_shape_fn((32, 32), |_| C64::from_polar(1.0, rng.random_range(-PI..PI)));
    assert!(matches!(
        fit_chirp(&Jsa::new(g, g, f).unwrap()),
        Err(Error::UnwrapFailure { .. })
    ));
}

#[test]
fn unwrap_rejects_low_amplitude_bins() {
    let g = grid(64, 10.0);
    let f = chirped(g, ghz_to_angular(60.0), 4e5);
    let u = unwrap_phase(&f, UNWRAP_LEVEL).unwrap();
    let peak = f.matrix().iter().map(|z| z.norm()).fold(0.0, f64::max);
    for ((i, j), v) in u.indexed_iter() {
        assert_eq!(v.is_some(), f.matrix()[[i, j]].norm() >= UNWRAP_LEVEL * peak);
    }
}

fn balanced(stats: SignalStatistics) -> Interferogram {
    let g = grid(128, 10.0);
    let alpha = SpectralMode::gaussian(g, 0.0, ghz_to_angular(280.0), 0.0)
        .normalized()
        .unwrap()
        .scaled(C64::new(0.0125f64.sqrt(), 0.0));
    let psi = alpha.normalized().unwrap();
    expected_interferogram(&SignalState::Pure(psi), &alpha, 10_000.0, stats).unwrap()
}

#[test]
fn visibility_ladder() {
    // balanced ψ = α: background 2n_r+n_r² : 4 : 5 (×n²u²) against fringe
    // amplitude 2n_r : 2 : 2 for single photon, coherent, thermal
    let n = 0.0125;
    let sp = fringe_visibility(&balanced(SignalStatistics::SinglePhoton)).unwrap();
    let coh = fringe_visibility(&balanced(SignalStatistics::Coherent { mean_photons: n })).unwrap();
    let th = fringe_visibility(&balanced(SignalStatistics::Thermal { mean_photons: n })).unwrap();
    assert!((sp - 2.0 / (2.0 + n)).abs() < 2e-3, "{sp}");
    assert!((coh - 0.5).abs() < 2e-3, "{coh}");
    assert!((th - 0.4).abs() < 2e-3, "{th}");
    assert!(sp >= coh && coh >= th);
}

#[test]
fn visibility_needs_two_fringes() {
    let g = grid(128, 10.0);
    let alpha = SpectralMode::gaussian(g, 0.0, ghz_to_angular(280.0), 0.0);
    let short = expected_interferogram(
        &SignalState::Pure(alpha.normalized().unwrap()),
        &alpha,
        500.0,
        SignalStatistics::Coherent { mean_photons: 1.0 },
    )
    .unwrap();
    assert!(matches!(fringe_visibility(&short), Err(Error::InsufficientFringes(_))));
}

#[test]
fn chi_square_values() {
    let e = [10.0, 20.0, 30.0, 40.0];
    assert_eq!(chi_square(&e, &e).unwrap(), ChiSquare { chi2: 0.0, dof: 3 });
    // (12−10)²/10 + (18−20)²/20 = 0.6
    let c = chi_square(&[12.0, 18.0, 30.0, 40.0], &e).unwrap();
    assert!((c.chi2 - 0.6).abs() < 1e-12);
    // expected scaled to the observed total
    let c = chi_square(&[20.0, 40.0, 60.0, 80.0], &e).unwrap();
    assert!(c.chi2.abs() < 1e-12);
    // bins under 5 pooled: (3+1 vs 2+2) → 0
    let c = chi_square(&[3.0, 1.0, 50.0, 50.0], &[2.0, 2.0, 50.0, 50.0]).unwrap();
    assert_eq!(c.dof, 2);
    assert!(c.chi2.abs() < 1e-12);
    assert!(chi_square(&[1.0], &[1.0, 2.0]).is_err());
    assert!(chi_square(&[0.0, 0.0], &[1.0, 1.0]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn k_ignores_global_and_separable_phases(
        beta in 0.0f64..4e5,
        theta in -PI..PI,
        p1 in -1e3f64..1e3,
        q2 in -1e5f64..1e5,
    ) {
        let g = grid(48, 10.0);
        let f = chirped(g, ghz_to_angular(120.0), beta);
        let k0 = schmidt(&f).unwrap().k;
        let h = Jsa::from_fn(g, g, |a, b| {
            let z = (-(a * a + b * b) / (2.0 * ghz_to_angular(120.0).powi(2))).exp();
            C64::from_polar(z, -beta * a * b + theta + p1 * a + q2 * b * b)
        });
        let k1 = schmidt(&h).unwrap().k;
        prop_assert!((k0 - k1).abs() < 1e-9 * k0);
    }

    #[test]
    fn overlap_is_symmetric_and_bounded(b1 in -3e5f64..3e5, b2 in -3e5f64..3e5) {
        let g = grid(32, 10.0);
        let s = ghz_to_angular(80.0);
        let (x, y) = (chirped(g, s, b1), chirped(g, s, b2));
        let v = overlap(&x, &y).unwrap();
        prop_assert!((0.0..=1.0).contains(&v));
        prop_assert!((v - overlap(&y, &x).unwrap()).abs() < 1e-12);
    }
}
