use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;

use optomech::constants::HBAR;
use optomech::coupling::{coupling_set, parallel_perp_split, scattered_mode};
use optomech::grid_modes::{far_field, hg_mode, inner_product, integrate, membrane_cosine_mode, Grid2D, SpatialField};
use optomech::mc_oracle::{force_series, simulate_arrivals};
use optomech::mechanics::{susceptibility, OscillatorParams};
use optomech::receivers::{homodyne_imprecision, pixelate, wls_estimate, CameraConfig, HomodyneConfig};
use optomech::spectra::{
    apparent_displacement_psd, backaction_force_psd, block_cross_spectrum, dgcz_criterion, imprecision_psd,
    quadrature_cross_spectrum, resonance_grid, two_mode_cross_spectrum, IlluminationParams,
};

const LM: f64 = 1.0;

fn config() -> ProptestConfig {
    ProptestConfig { cases: 24, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn hg_modes_are_orthonormal(m in 0usize..=6, n in 0usize..=6, dm in 0usize..=6, dn in 0usize..=6,
                                w0 in 0.5f64..2.0, x0 in -0.5f64..0.5) {
        prop_assume!(m + n <= 6 && dm + dn <= 6);
        let g = Grid2D::centered(6.0 * w0 + x0.abs(), 6.0 * w0, 257, 256).unwrap();
        let a = hg_mode(m, n, w0, (x0, 0.0), g).unwrap();
        let b = hg_mode(dm, dn, w0, (x0, 0.0), g).unwrap();
        let ip = inner_product(&a, &b).unwrap();
        let expected = if (m, n) == (dm, dn) { 1.0 } else { 0.0 };
        prop_assert!((ip - expected).norm() <= 1e-6, "⟨u{m}{n}, u{dm}{dn}⟩ = {ip}");
    }

    #[test]
    fn inner_product_is_conjugate_symmetric(re in prop::collection::vec(-1.0f64..1.0, 8),
                                            im in prop::collection::vec(-1.0f64..1.0, 8)) {
        let g = Grid2D::square(3.0, 33).unwrap();
        let poly = |c: &[f64], x: f64, y: f64| c[0] + c[1] * x + c[2] * y + c[3] * x * y;
        let u = SpatialField::from_fn(g, |x, y| {
            Complex64::new(poly(&re[..4], x, y), poly(&im[..4], x, y)) * (-(x * x + y * y)).exp()
        });
        let v = SpatialField::from_fn(g, |x, y| {
            Complex64::new(poly(&re[4..], x, y), poly(&im[4..], x, y)) * (-(x * x + y * y) / 2.0).exp()
        });
        let uv = inner_product(&u, &v).unwrap();
        let vu = inner_product(&v, &u).unwrap();
        prop_assert!((uv - vu.conj()).norm() <= 1e-15 * (1.0 + uv.norm()));
    }

    #[test]
    fn coupling_split_and_parseval(x0 in 0.0f64..1.0, y0 in 0.0f64..1.0, frac in 0.15f64..0.45) {
        let w0 = frac * LM;
        let g = Grid2D::for_beam(w0, LM).unwrap();
        let phi = membrane_cosine_mode(LM, g).unwrap();
        let set = coupling_set(w0, x0 * LM, y0 * LM, &phi, 20).unwrap();
        let b2 = set.beta * set.beta;
        prop_assert!((b2 - set.beta_par.powi(2) - set.beta_perp.powi(2)).abs() <= 1e-6 * b2);
        prop_assert!(set.expansion_power() <= b2 * (1.0 + 1e-9));
        prop_assert!(set.expansion_power() >= 0.999 * b2);
        prop_assert!(set.beta >= 0.0 && set.beta <= phi.max_abs() + 1e-12);
        prop_assert!((set.beta_mn[[0, 0]].re - set.beta_par).abs() <= 1e-10);
    }

    #[test]
    fn coupling_is_periodic(x0 in -0.5f64..0.5, y0 in -0.5f64..0.5) {
        let w0 = 0.3 * LM;
        let g = Grid2D::square(4.0 * LM, 513).unwrap();
        let phi = membrane_cosine_mode(LM, g).unwrap();
        let here = coupling_set(w0, x0, y0, &phi, 6).unwrap();
        let there = coupling_set(w0, x0 + 2.0 * LM, y0, &phi, 6).unwrap();
        prop_assert!((here.beta - there.beta).abs() <= 1e-8);
        prop_assert!((here.beta_par - there.beta_par).abs() <= 1e-8);
        prop_assert!((here.beta_perp - there.beta_perp).abs() <= 1e-8);
    }

    #[test]
    fn node_expansion_has_odd_parity(frac in 0.1f64..0.4, y0 in -0.5f64..0.5) {
        let w0 = frac * LM;
        let g = Grid2D::for_beam(w0, LM).unwrap();
        let phi = membrane_cosine_mode(LM, g).unwrap();
        let set = coupling_set(w0, 0.5 * LM, y0 * LM, &phi, 8).unwrap();
        for m in (0..=8).step_by(2) {
            for n in 0..=8 {
                prop_assert!(set.beta_mn[[m, n]].norm() <= 1e-10, "β_{m}{n} = {}", set.beta_mn[[m, n]]);
            }
        }
    }

    #[test]
    fn susceptibility_parity(w in -1e6f64..1e6, q in 1.0f64..1e8, wm in 1e3f64..1e6) {
        let osc = OscillatorParams::with_quality(wm, 1e-12, q, 0.0).unwrap();
        prop_assert_eq!(susceptibility(&osc, -w), susceptibility(&osc, w).conj());
    }

    #[test]
    fn sql_inequality(theta in 0.01f64..3.13, beta in 1e-3f64..1.0, lambda in 1e-7f64..1e-5, flux in 1e3f64..1e20) {
        let ill = IlluminationParams::new(lambda, flux, theta).unwrap();
        let product = imprecision_psd(&ill, beta).unwrap() * backaction_force_psd(&ill, beta);
        prop_assert!(product >= HBAR * HBAR * (1.0 - 1e-12));
        let phase = ill.with_angle(PI / 2.0);
        let p = imprecision_psd(&phase, beta).unwrap() * backaction_force_psd(&phase, beta);
        prop_assert!((p / (HBAR * HBAR) - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn spectra_are_non_negative(theta in 0.01f64..3.13, log_k2n in 8.0f64..28.0, t in 0.0f64..300.0,
                                q in 10.0f64..1e7) {
        let osc = OscillatorParams::with_quality(2.0 * PI * 40e3, 1e-12, q, t).unwrap();
        let il = IlluminationParams::from_k2n(1.064e-6, 10f64.powf(log_k2n), theta).unwrap();
        let grid = resonance_grid(&osc, 60, 1e3);
        let b = apparent_displacement_psd(&il, 0.6, &osc, &grid).unwrap();
        for v in b.total().values.iter().chain(&b.imprecision).chain(&b.backaction).chain(&b.thermal) {
            prop_assert!(*v >= 0.0 && v.is_finite());
        }
        let i = dgcz_criterion(&il, 0.6, &osc, &grid).unwrap();
        prop_assert!(i.values.iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn block_spectra_reconstruct_scattered_mode(bp in -1.0f64..1.0, bq in 0.0f64..1.0) {
        let osc = OscillatorParams::with_quality(1e5, 1e-12, 1e4, 0.0).unwrap();
        let il = IlluminationParams::new(1e-6, 1e15, PI / 2.0).unwrap();
        let w = resonance_grid(&osc, 20, 100.0);
        let b2 = bp * bp + bq * bq;
        prop_assume!(b2 > 1e-6);
        let total = quadrature_cross_spectrum(&il, b2.sqrt(), &osc, &w).unwrap();
        let pp = block_cross_spectrum(&il, bp, bp, &osc, &w).unwrap();
        let qq = block_cross_spectrum(&il, bq, bq, &osc, &w).unwrap();
        let pq = two_mode_cross_spectrum(&il, bp, bq, &osc, &w).unwrap();
        for i in 0..w.len() {
            // β² S_sc = β∥² S∥∥ + β⊥² S⊥⊥ + 2β∥β⊥ S∥⊥
            let lhs = total.values[i] * b2;
            let rhs = pp.values[i] * (bp * bp) + qq.values[i] * (bq * bq) + pq.values[i] * (2.0 * bp * bq);
            prop_assert!((lhs - rhs).norm() <= 1e-12 * lhs.norm());
        }
    }

    #[test]
    fn homodyne_never_beats_the_bound(phase in 0.0f64..PI, xi in 0.05f64..1.0, log_ratio in -2.0f64..8.0,
                                      mix in 0.0f64..1.0) {
        let w0 = 0.3 * LM;
        let g = Grid2D::for_beam(w0, LM).unwrap();
        let phi = membrane_cosine_mode(LM, g).unwrap();
        let u = hg_mode(0, 0, w0, (0.25 * LM, 0.0), g).unwrap();
        let (beta, u_sc) = scattered_mode(&u, &phi).unwrap();
        let other = hg_mode(0, 1, w0, (0.25 * LM, 0.0), g).unwrap();
        let lo = u_sc
            .combine(Complex64::new((1.0 - mix).sqrt(), 0.0), &other, Complex64::new(mix.sqrt(), 0.0))
            .unwrap()
            .normalized()
            .unwrap();
        let ill = IlluminationParams::new(1.064e-6, 1e12, PI / 2.0).unwrap();
        let cfg = HomodyneConfig::new(lo, 10f64.powf(log_ratio) * ill.photon_flux, phase, xi).unwrap();
        let s = homodyne_imprecision(&cfg, &ill, beta, &u_sc).unwrap();
        let k = ill.wavenumber();
        let bound = 1.0 / (8.0 * k * k * beta * beta * ill.photon_flux);
        prop_assert!(s.psd >= bound * (1.0 - 1e-9));
    }

    #[test]
    fn wls_is_unbiased_for_any_pixel(pixel in 0.5f64..12.0, z0 in -1e-12f64..1e-12, x0 in 0.05f64..0.45) {
        let w0 = 0.3 * LM;
        let g = Grid2D::for_beam(w0, LM).unwrap();
        let phi = membrane_cosine_mode(LM, g).unwrap();
        let u = hg_mode(0, 0, w0, (x0 * LM, 0.0), g).unwrap();
        let (beta, u_sc) = scattered_mode(&u, &phi).unwrap();
        let (lambda, d) = (1e-2, 10.0);
        let ff_in = far_field(&u, lambda, d).unwrap();
        let ff_sc = far_field(&u_sc, lambda, d).unwrap();
        let ill = IlluminationParams::new(lambda, 1e15, PI / 2.0).unwrap();
        let cam = CameraConfig::new(d, pixel * ff_in.grid().dx(), 1.0, 10.0).unwrap();
        let pixels = pixelate(&cam, &ff_in, &ff_sc, &ill, beta).unwrap();
        let est = wls_estimate(&cam, &pixels, &pixels.currents_at(z0)).unwrap();
        prop_assert!((est.z_est - z0).abs() <= 1e-10 * z0.abs().max(1e-30));
    }

    #[test]
    fn seeds_are_deterministic(seed in any::<u64>()) {
        let g = Grid2D::square(1e-4, 33).unwrap();
        let u = hg_mode(0, 0, 2e-5, (0.0, 0.0), g).unwrap();
        let phi = membrane_cosine_mode(1e-4, g).unwrap();
        let a = simulate_arrivals(&u, 1e6, 1e-3, 1e-5, seed).unwrap();
        let b = simulate_arrivals(&u, 1e6, 1e-3, 1e-5, seed).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(force_series(&a, &phi, 1e7), force_series(&b, &phi, 1e7));
    }
}

#[test]
fn quadrature_converges_at_default_resolution() {
    let w0 = 0.3 * LM;
    let (x0, y0) = (0.23 * LM, -0.11 * LM);
    let beta00 = |points: usize| {
        let g = Grid2D::square(4.0 * LM, points).unwrap();
        let phi = membrane_cosine_mode(LM, g).unwrap();
        let u = hg_mode(0, 0, w0, (x0, y0), g).unwrap();
        let (beta, u_sc) = scattered_mode(&u, &phi).unwrap();
        beta * inner_product(&u, &u_sc).unwrap().re
    };
    let coarse = beta00(513);
    let fine = beta00(1025);
    assert!((coarse - fine).abs() <= 1e-8 * fine.abs(), "{coarse} vs {fine}");
}

#[test]
fn far_field_preserves_power() {
    let w0 = 0.3 * LM;
    let g = Grid2D::for_beam(w0, LM).unwrap();
    let phi = membrane_cosine_mode(LM, g).unwrap();
    let (lambda, d) = (1.064e-6, 1.0);
    for x0 in [0.0, 0.25, 0.5] {
        let u = hg_mode(0, 0, w0, (x0 * LM, 0.1 * LM), g).unwrap();
        let (beta, u_sc) = scattered_mode(&u, &phi).unwrap();
        let split = parallel_perp_split(&u, &u_sc, beta).unwrap();
        for f in [Some(&u), Some(&u_sc), split.u_perp.as_ref()].into_iter().flatten() {
            let ff = far_field(f, lambda, d).unwrap();
            let p = integrate(ff.grid(), &ff.intensity()) / (lambda * lambda * d * d);
            assert!((p - 1.0).abs() <= 1e-4, "x0 = {x0}: far-field power {p}");
        }
    }
}
