mod common;

use std::f64::consts::PI;

use common::{full_band, grid, max_diff, random_field};
use emhd_core::spectral::{
    dealiased_product, forward_transform, inverse_transform, GridSpec, RealField, SpectralField,
    WaveVector,
};
use emhd_core::Error;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn dft(u: &RealField, k: WaveVector) -> Complex64 {
    let g = u.grid();
    let n = g.n();
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..n {
        for i in 0..n {
            let phase = -(k.kx as f64 * g.coordinate(i) + k.ky as f64 * g.coordinate(j));
            acc += u.at(i, j) * Complex64::from_polar(1.0, phase);
        }
    }
    acc / (n * n) as f64
}

fn synthesize(f: &SpectralField, x: f64, y: f64) -> f64 {
    let g = f.grid();
    let mut acc = Complex64::new(0.0, 0.0);
    for k in g.active_modes() {
        acc += f.coeff(k) * Complex64::from_polar(1.0, k.kx as f64 * x + k.ky as f64 * y);
    }
    acc.re
}

#[test]
fn forward_matches_direct_dft_on_8x8() {
    let g = grid(8);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let samples: Vec<f64> = (0..64).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let u = RealField::new(g, samples).unwrap();
    let f = forward_transform(&u).unwrap();
    for k in g.active_modes() {
        assert!((f.coeff(k) - dft(&u, k)).norm() < 1e-12, "mode {k:?}");
    }
    assert_eq!(f.out_of_band_max(), 0.0);
}

#[test]
fn inverse_matches_direct_summation() {
    for n in [8, 16] {
        let g = grid(n);
        let f = full_band(g, 5);
        let u = inverse_transform(&f).unwrap();
        for j in 0..n {
            for i in 0..n {
                let exact = synthesize(&f, g.coordinate(i), g.coordinate(j));
                assert!((u.at(i, j) - exact).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn non_hermitian_input_rejected() {
    let g = grid(16);
    let f = SpectralField::from_fn(g, |k| {
        if k == WaveVector::new(1, 0) {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    assert!(matches!(
        inverse_transform(&f),
        Err(Error::NotRealField { .. })
    ));
}

#[test]
fn non_finite_samples_rejected() {
    let g = grid(8);
    let mut s = vec![0.0; 64];
    s[3] = f64::NAN;
    assert_eq!(RealField::new(g, s).unwrap_err(), Error::InvalidField);
}

fn convolution(u: &SpectralField, v: &SpectralField) -> SpectralField {
    let g = u.grid();
    let modes: Vec<WaveVector> = g.active_modes().collect();
    SpectralField::from_fn(g, |k| {
        let mut acc = Complex64::new(0.0, 0.0);
        for &k1 in &modes {
            let k2 = WaveVector::new(k.kx - k1.kx, k.ky - k1.ky);
            if g.in_band(k2) {
                acc += u.coeff(k1) * v.coeff(k2);
            }
        }
        acc
    })
}

#[test]
fn product_matches_convolution_oracle() {
    // 96 is divisible by 3, where the plain two-thirds grid would alias.
    for n in [16, 32, 96] {
        let g = grid(n);
        let u = full_band(g, 1);
        let v = full_band(g, 2);
        let p = dealiased_product(&u, &v).unwrap();
        let oracle = convolution(&u, &v);
        assert!(max_diff(&p, &oracle) < 1e-12, "n = {n}");
        assert_eq!(p.out_of_band_max(), 0.0);
    }
}

#[test]
fn spectral_derivative_against_fourth_order_differences() {
    let errors: Vec<f64> = [64, 128, 256, 512]
        .iter()
        .map(|&n| {
            let g = grid(n);
            let u = random_field(g, 7, 4, 0.0);
            let samples = inverse_transform(&u).unwrap();
            let exact = inverse_transform(&u.partial_x()).unwrap();
            let h = 2.0 * PI / n as f64;
            let mut err: f64 = 0.0;
            for j in 0..n {
                for i in 0..n {
                    let at =
                        |d: isize| samples.at((i as isize + d).rem_euclid(n as isize) as usize, j);
                    let fd = (-at(2) + 8.0 * at(1) - 8.0 * at(-1) + at(-2)) / (12.0 * h);
                    err = err.max((fd - exact.at(i, j)).abs());
                }
            }
            err
        })
        .collect();
    for w in errors.windows(2) {
        let rate = (w[0] / w[1]).log2();
        assert!((rate - 4.0).abs() <= 0.2, "rate {rate} from {errors:?}");
    }
}

#[test]
fn parseval_on_quadrature() {
    let g = grid(64);
    let f = full_band(g, 9);
    let u = inverse_transform(&f).unwrap();
    let mean_sq = u.samples().iter().map(|x| x * x).sum::<f64>() / g.len() as f64;
    let spectral: f64 = f.coeffs().iter().map(|c| c.norm_sqr()).sum();
    assert!((mean_sq - spectral).abs() <= 1e-12 * spectral);
    assert!((f.mean_square() - spectral).abs() <= 1e-14 * spectral);
}

#[test]
fn product_on_native_grid_of_small_modes() {
    let g = grid(32);
    let c = SpectralField::cosine(g, WaveVector::new(1, 0), 1.0).unwrap();
    let p = dealiased_product(&c, &c).unwrap();
    let expect = &SpectralField::constant(g, 0.5).unwrap()
        + &SpectralField::cosine(g, WaveVector::new(2, 0), 0.5).unwrap();
    assert!(max_diff(&p, &expect) < 1e-15);
}

fn grids() -> impl Strategy<Value = GridSpec> {
    prop_oneof![Just(8usize), Just(16), Just(32), Just(48)].prop_map(|n| GridSpec::new(n).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn round_trip_band_limited(g in grids(), seed in any::<u64>()) {
        let f = full_band(g, seed);
        let u = inverse_transform(&f).unwrap();
        let back = forward_transform(&u).unwrap();
        let again = inverse_transform(&back).unwrap();
        let diff = u.samples().iter().zip(again.samples()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        prop_assert!(diff <= 1e-12 * u.max_abs());
        prop_assert!(max_diff(&f, &back) <= 1e-12 * f.max_abs_coeff());
    }

    #[test]
    fn forward_is_idempotent_projection(g in grids(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let samples: Vec<f64> = (0..g.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let f = forward_transform(&RealField::new(g, samples).unwrap()).unwrap();
        let f2 = forward_transform(&inverse_transform(&f).unwrap()).unwrap();
        prop_assert!(max_diff(&f, &f2) <= 1e-12 * f.max_abs_coeff());
        prop_assert_eq!(f.hermitian_defect(), 0.0);
    }

    #[test]
    fn multiplier_composition_exact(g in grids(), seed in any::<u64>(), s1 in 0.0f64..3.0, s2 in 0.0f64..3.0) {
        let f = full_band(g, seed);
        let m1 = |k: WaveVector| 1.0 + (k.kx * k.kx) as f64 + s1 * k.ky as f64;
        let m2 = |k: WaveVector| s2 - k.norm();
        let seq = f.apply_real_multiplier(m2).apply_real_multiplier(m1);
        let once = f.apply_real_multiplier(|k| m1(k) * m2(k));
        prop_assert!(max_diff(&seq, &once) <= 4.0 * f64::EPSILON * once.max_abs_coeff());
        // Λ² and −Δ share the symbol kx² + ky².
        let lap = f.laplacian();
        prop_assert!(max_diff(&f.fractional_laplacian(2.0), &-&lap) <= 4.0 * f64::EPSILON * lap.max_abs_coeff());
    }

    #[test]
    fn product_bilinear_and_commutative(g in grids(), seed in any::<u64>(), lam in -3.0f64..3.0) {
        let u = full_band(g, seed);
        let v = full_band(g, seed.wrapping_add(1));
        let w = full_band(g, seed.wrapping_add(2));
        let uv = dealiased_product(&u, &v).unwrap();
        let vu = dealiased_product(&v, &u).unwrap();
        let scale = uv.max_abs_coeff().max(1e-300);
        prop_assert!(max_diff(&uv, &vu) <= 1e-14 * scale);
        let lhs = dealiased_product(&u.add_scaled(lam, &w), &v).unwrap();
        let rhs = uv.add_scaled(lam, &dealiased_product(&w, &v).unwrap());
        prop_assert!(max_diff(&lhs, &rhs) <= 1e-13 * (1.0 + lam.abs()) * scale);
    }

    #[test]
    fn operations_preserve_reality(g in grids(), seed in any::<u64>(), s in 0.0f64..2.0) {
        let u = full_band(g, seed);
        let v = full_band(g, seed ^ 0x55);
        for f in [
            u.partial_x(),
            u.partial_y(),
            u.laplacian(),
            u.fractional_laplacian(s),
            dealiased_product(&u, &v).unwrap(),
        ] {
            prop_assert!(f.hermitian_defect() <= 1e-12 * f.max_abs_coeff().max(1.0));
            prop_assert_eq!(f.out_of_band_max(), 0.0);
        }
    }
}
