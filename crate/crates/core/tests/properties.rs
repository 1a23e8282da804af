use num_complex::Complex64;
use photon_teleport_core::povm::entangled_outcome_amplitude;
use photon_teleport_core::{
    fidelity, inner_product, normalize, norm_sqr, BiphotonAmplitude, Fourier, FrequencyGrid, GaussianEprParams,
    MirrorConvention, OutcomeGrid, OutcomeIndex, Protocol, WavePacket,
};
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn complex_vec(n: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b)| c(a, b)), n)
}

fn grid_strategy() -> impl Strategy<Value = FrequencyGrid> {
    (0.0f64..50.0, 2usize..9, 0.1f64..2.0)
        .prop_map(|(lo, p, dw)| FrequencyGrid::new(lo, lo + dw * (1 << p) as f64, 1 << p).unwrap())
}

fn small_pair(mu: f64) -> (FrequencyGrid, BiphotonAmplitude) {
    let g = FrequencyGrid::new(0.0, 24.0, 24).unwrap();
    let p = GaussianEprParams::new(mu, 1.6, 12.0, 12.0).unwrap();
    (g, BiphotonAmplitude::gaussian_epr(p, &g, &g).unwrap())
}

fn is_nonzero(v: &[Complex64]) -> bool {
    v.iter().any(|x| x.norm() > 1e-3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn parseval_holds_for_any_vector(g in grid_strategy(), seed in complex_vec(256)) {
        let v = &seed[..g.n_points()];
        let tv = Fourier::new(&g).forward(v);
        let dt = g.conjugate_time_grid().delta_t();
        let lhs = norm_sqr(v, &g);
        let rhs: f64 = tv.iter().map(|x| x.norm_sqr()).sum::<f64>() * dt;
        prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.max(1.0));
    }

    #[test]
    fn inner_product_is_sesquilinear(a in complex_vec(16), b in complex_vec(16), s in (-2.0f64..2.0, -2.0f64..2.0)) {
        let g = FrequencyGrid::new(1.0, 9.0, 16).unwrap();
        let s = c(s.0, s.1);
        let sb: Vec<_> = b.iter().map(|x| x * s).collect();
        let sa: Vec<_> = a.iter().map(|x| x * s).collect();
        let base = inner_product(&a, &b, &g).unwrap();
        prop_assert!((inner_product(&a, &sb, &g).unwrap() - base * s).norm() < 1e-12);
        prop_assert!((inner_product(&sa, &b, &g).unwrap() - base * s.conj()).norm() < 1e-12);
        prop_assert!((inner_product(&b, &a, &g).unwrap() - base.conj()).norm() < 1e-12);
    }

    #[test]
    fn normalize_yields_unit_norm(a in complex_vec(32)) {
        prop_assume!(is_nonzero(&a));
        let g = FrequencyGrid::new(0.0, 8.0, 32).unwrap();
        let f = normalize(&a, &g).unwrap();
        prop_assert!((f.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gaussian_spectral_and_temporal_variances(width in 0.8f64..3.0, center in 40.0f64..88.0, t0 in -1.0f64..1.0) {
        let g = FrequencyGrid::new(0.0, 128.0, 256).unwrap();
        let f = WavePacket::gaussian(center, width, t0, &g).unwrap();
        let (mean, var) = f.spectral_moments();
        prop_assert!((mean - center).abs() < 1e-6);
        prop_assert!((var / (width * width) - 1.0).abs() < 0.005);
        let tv = Fourier::new(&g).forward(f.amplitudes());
        let tg = g.conjugate_time_grid();
        let w: Vec<f64> = tv.iter().map(|x| x.norm_sqr()).collect();
        let total: f64 = w.iter().sum();
        let tm: f64 = w.iter().enumerate().map(|(k, p)| p * tg.point(k)).sum::<f64>() / total;
        let tvar: f64 = w.iter().enumerate().map(|(k, p)| p * (tg.point(k) - tm).powi(2)).sum::<f64>() / total;
        prop_assert!((tm + t0).abs() < 1e-6);
        prop_assert!((tvar * 4.0 * width * width - 1.0).abs() < 0.01);
    }

    #[test]
    fn gaussian_overlap_matches_closed_form(width in 1.0f64..3.0, d in 0.0f64..6.0) {
        let g = FrequencyGrid::new(0.0, 100.0, 400).unwrap();
        let a = WavePacket::gaussian(47.0, width, 0.0, &g).unwrap();
        let b = WavePacket::gaussian(47.0 + d, width, 0.0, &g).unwrap();
        let expected = (-d * d / (4.0 * width * width)).exp();
        prop_assert!((fidelity(&a, &b).unwrap() - expected).abs() < 1e-6);
        let amp = (-d * d / (8.0 * width * width)).exp();
        prop_assert!((a.overlap(&b).unwrap().norm() - amp).abs() < 1e-6);
    }

    #[test]
    fn conditional_amplitude_is_linear_in_input(
        a in complex_vec(24), b in complex_vec(24), s in (-1.0f64..1.0, -1.0f64..1.0), k in 0usize..24, d in -23isize..24,
    ) {
        prop_assume!(is_nonzero(&a) && is_nonzero(&b));
        let (g, pair) = small_pair(-0.6);
        let fa = normalize(&a, &g).unwrap();
        let fb = normalize(&b, &g).unwrap();
        let s = c(s.0, s.1);
        let mix: Vec<_> = fa.amplitudes().iter().zip(fb.amplitudes()).map(|(x, y)| x + s * y).collect();
        let outcomes = OutcomeGrid::new(&g);
        let (t, om) = outcomes.outcome(OutcomeIndex { k, d });
        let pa = entangled_outcome_amplitude(&pair, &fa, t, om).unwrap();
        let pb = entangled_outcome_amplitude(&pair, &fb, t, om).unwrap();
        // compare against the unit-norm superposition
        let norm = norm_sqr(&mix, &g).sqrt();
        prop_assume!(norm > 1e-3);
        let fm = normalize(&mix, &g).unwrap();
        let pm = entangled_outcome_amplitude(&pair, &fm, t, om).unwrap();
        for j in 0..pm.len() {
            let expect = (pa[j] + s * pb[j]) / norm;
            prop_assert!((pm[j] - expect).norm() < 1e-10);
        }
    }

    #[test]
    fn global_phase_changes_nothing(phi in 0.0f64..std::f64::consts::TAU, center in 10.0f64..14.0) {
        let (g, pair) = small_pair(-0.7);
        let f = WavePacket::gaussian(center, 1.1, 0.3, &g).unwrap();
        let rot: Vec<_> = f.amplitudes().iter().map(|x| x * Complex64::from_polar(1.0, phi)).collect();
        let fr = normalize(&rot, &g).unwrap();
        let ma = Protocol::new(&pair, &f, MirrorConvention::Doubled).unwrap().outcome_map();
        let mb = Protocol::new(&pair, &fr, MirrorConvention::Doubled).unwrap().outcome_map();
        for (x, y) in ma.records().zip(mb.records()) {
            prop_assert!((x.density - y.density).abs() < 1e-12);
            prop_assert!((x.fidelity_raw - y.fidelity_raw).abs() < 1e-9);
            prop_assert!((x.fidelity_corrected - y.fidelity_corrected).abs() < 1e-9);
        }
    }

    #[test]
    fn outcome_probabilities_sum_to_one(mu in -0.95f64..0.95, sigma in 1.2f64..2.0, center in 10.0f64..14.0, width in 0.9f64..1.8) {
        let g = FrequencyGrid::new(0.0, 24.0, 24).unwrap();
        let p = GaussianEprParams::new(mu, sigma, 12.0, 12.0).unwrap();
        let pair = BiphotonAmplitude::gaussian_epr(p, &g, &g).unwrap();
        let f = WavePacket::gaussian(center, width, 0.0, &g).unwrap();
        let map = Protocol::new(&pair, &f, MirrorConvention::Doubled).unwrap().outcome_map();
        prop_assert!((map.total_probability() - 1.0).abs() < 1e-9);
        prop_assert!(map.records().all(|r| (0.0..=1.0).contains(&r.fidelity_corrected)));
    }

    #[test]
    fn gaussian_epr_is_normalized_and_symmetric(mu in -0.99f64..0.99, sigma in 1.0f64..2.5) {
        let g = FrequencyGrid::new(0.0, 32.0, 64).unwrap();
        let p = GaussianEprParams::new(mu, sigma, 16.0, 16.0).unwrap();
        let pair = BiphotonAmplitude::gaussian_epr(p, &g, &g).unwrap();
        prop_assert!((pair.norm_sqr() - 1.0).abs() < 1e-10);
        let v = pair.values();
        for i in 0..64 {
            for j in 0..64 {
                prop_assert!((v[(i, j)] - v[(j, i)]).norm() < 1e-12);
            }
        }
    }
}
