mod common;

use common::{full_band, grid, max_diff, random_field};
use emhd_core::emhd::{
    conserved_quantities, full_rhs, magnetic_field, nonlinear_a, nonlinear_b, nonlinear_terms,
    EmhdParams, EmhdState,
};
use emhd_core::spectral::{forward_transform, SpectralField, WaveVector};
use emhd_core::Error;
use proptest::prelude::*;

fn state(n: usize, seed: u64) -> EmhdState {
    let g = grid(n);
    EmhdState::new(full_band(g, seed), full_band(g, seed ^ 0xABCD), 0.0).unwrap()
}

#[test]
fn symbolic_examples() {
    let g = grid(32);
    let cx = SpectralField::cosine(g, WaveVector::new(1, 0), 1.0).unwrap();
    let cy = SpectralField::cosine(g, WaveVector::new(0, 1), 1.0).unwrap();
    // a_y b_x − a_x b_y = 0·(−sin y) − (−sin x)(−sin y)
    let expect = SpectralField::from_fn(g, |k| {
        let v = match (k.kx, k.ky) {
            (1, 1) | (-1, -1) => 0.25,
            (1, -1) | (-1, 1) => -0.25,
            _ => 0.0,
        };
        num_complex::Complex64::new(v, 0.0)
    });
    assert!(max_diff(&nonlinear_a(&cx, &cy).unwrap(), &expect) < 1e-15);

    let a = &cx + &SpectralField::cosine(g, WaveVector::new(0, 2), 1.0).unwrap();
    let nb = nonlinear_b(&a);
    let expect = SpectralField::from_fn(g, |k| {
        let v = match (k.kx, k.ky) {
            (1, 2) | (-1, -2) => -1.5,
            (1, -2) | (-1, 2) => 1.5,
            _ => 0.0,
        };
        num_complex::Complex64::new(v, 0.0)
    });
    assert!(max_diff(&nb, &expect) < 1e-13);
}

#[test]
fn degenerate_nonlinearities_vanish_exactly() {
    let g = grid(64);
    let a = full_band(g, 1);
    assert_eq!(nonlinear_a(&a, &a).unwrap().max_abs_coeff(), 0.0);
    // The shared path transforms N_a and N_b together, so N_a carries
    // rounding from N_b.
    let (na, nb) = nonlinear_terms(&a, &a).unwrap();
    assert!(na.max_abs_coeff() <= 1e-14 * nb.max_abs_coeff());
    let eig = &SpectralField::cosine(g, WaveVector::new(1, 0), 1.0).unwrap()
        + &SpectralField::cosine(g, WaveVector::new(0, 1), 0.7).unwrap();
    assert_eq!(nonlinear_b(&eig).max_abs_coeff(), 0.0);
    let one_d = SpectralField::cosine(g, WaveVector::new(3, 0), 1.0).unwrap();
    assert!(nonlinear_b(&one_d).max_abs_coeff() < 1e-14);
}

#[test]
fn magnetic_field_examples() {
    let g = grid(32);
    let cy = SpectralField::cosine(g, WaveVector::new(0, 1), 1.0).unwrap();
    let st = EmhdState::new(cy, SpectralField::zeros(g), 0.0).unwrap();
    let [bx, by, bz] = magnetic_field(&st).unwrap();
    for j in 0..32 {
        for i in 0..32 {
            assert!((bx.at(i, j) + g.coordinate(j).sin()).abs() < 1e-14);
            assert!(by.at(i, j).abs() < 1e-14);
            assert!(bz.at(i, j).abs() < 1e-14);
        }
    }
}

#[test]
fn magnetic_field_divergence_free() {
    let st = state(64, 3);
    let [bx, by, _] = magnetic_field(&st).unwrap();
    let div =
        &forward_transform(&bx).unwrap().partial_x() + &forward_transform(&by).unwrap().partial_y();
    assert!(div.max_abs_coeff() <= 1e-12 * st.a.max_abs_coeff());
}

#[test]
fn pure_dissipation_rhs() {
    let g = grid(32);
    let cx = SpectralField::cosine(g, WaveVector::new(1, 0), 1.0).unwrap();
    let st = EmhdState::new(SpectralField::zeros(g), cx.clone(), 0.0).unwrap();
    let params = EmhdParams::new(1.5, 1.0).unwrap();
    let t = full_rhs(&st, &params).unwrap();
    assert_eq!(t.da_dt.max_abs_coeff(), 0.0);
    assert!(max_diff(&t.db_dt, &-&cx) < 1e-15);
    let z = full_rhs(&EmhdState::zeros(g), &params).unwrap();
    assert_eq!(z.da_dt.max_abs_coeff() + z.db_dt.max_abs_coeff(), 0.0);
}

#[test]
fn parameter_gate() {
    assert_eq!(
        EmhdParams::new(1.0, 1.0).unwrap_err(),
        Error::ThresholdViolated { sum: 2.0 }
    );
    assert!(EmhdParams::exploration(1.0, 0.8).is_ok());
    assert!(EmhdParams::exploration(2.0, 0.8).is_err());
    assert!(EmhdParams::new(1.5, 1.5)
        .unwrap()
        .with_dissipation(-1.0, 1.0)
        .is_err());
}

fn inner_scale(x: &SpectralField, y: &SpectralField) -> f64 {
    x.l2_norm() * y.l2_norm()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn energy_and_helicity_neutrality(n in prop_oneof![Just(32usize), Just(48), Just(64)], seed in any::<u64>()) {
        let st = state(n, seed);
        let (na, nb) = nonlinear_terms(&st.a, &st.b).unwrap();
        let lap = st.a.laplacian();
        let energy = na.inner(&lap).unwrap() + nb.inner(&st.b).unwrap();
        let scale = inner_scale(&na, &lap) + inner_scale(&nb, &st.b);
        prop_assert!(energy.abs() <= 1e-12 * scale, "{energy} vs {scale}");
        prop_assert!(na.inner(&st.b).unwrap().abs() <= 1e-12 * inner_scale(&na, &st.b));
        prop_assert!(nb.inner(&st.a).unwrap().abs() <= 1e-12 * inner_scale(&nb, &st.a));
    }

    #[test]
    fn split_and_shared_evaluations_agree(seed in any::<u64>()) {
        let st = state(32, seed);
        let (na, nb) = nonlinear_terms(&st.a, &st.b).unwrap();
        prop_assert!(max_diff(&na, &nonlinear_a(&st.a, &st.b).unwrap()) <= 1e-13 * na.max_abs_coeff());
        prop_assert!(max_diff(&nb, &nonlinear_b(&st.a)) <= 1e-13 * nb.max_abs_coeff());
    }

    #[test]
    fn means_of_tendency_vanish(seed in any::<u64>(), c in -2.0f64..2.0) {
        let g = grid(32);
        let a = &full_band(g, seed) + &SpectralField::constant(g, c).unwrap();
        let b = &full_band(g, seed ^ 7) + &SpectralField::constant(g, -c).unwrap();
        let st = EmhdState::new(a, b, 0.0).unwrap();
        let t = full_rhs(&st, &EmhdParams::new(1.2, 1.3).unwrap()).unwrap();
        prop_assert_eq!(t.da_dt.mean(), 0.0);
        prop_assert_eq!(t.db_dt.mean(), 0.0);
    }

    #[test]
    fn antisymmetry_and_scaling(seed in any::<u64>(), lam in -3.0f64..3.0, mu in -3.0f64..3.0) {
        let g = grid(32);
        let a = full_band(g, seed);
        let b = full_band(g, seed ^ 9);
        let ab = nonlinear_a(&a, &b).unwrap();
        prop_assert_eq!(&nonlinear_a(&b, &a).unwrap(), &-&ab);
        let scaled = nonlinear_a(&a.scale(lam), &b.scale(mu)).unwrap();
        prop_assert!(max_diff(&scaled, &ab.scale(lam * mu)) <= 1e-13 * (lam * mu).abs().max(1e-3) * ab.max_abs_coeff());
        let nb = nonlinear_b(&a);
        let nb_scaled = nonlinear_b(&a.scale(lam));
        prop_assert!(max_diff(&nb_scaled, &nb.scale(lam * lam)) <= 1e-13 * (lam * lam).max(1e-3) * nb.max_abs_coeff());
    }

    #[test]
    fn energy_dissipation_sign(seed in any::<u64>(), alpha in 0.2f64..1.9, beta in 0.2f64..1.9, nu in 0.1f64..2.0) {
        let g = grid(32);
        let st = EmhdState::new(random_field(g, seed, 8, 1.0), random_field(g, seed ^ 3, 8, 1.0), 0.0).unwrap();
        let params = EmhdParams::exploration(alpha, beta).unwrap().with_dissipation(nu, 2.0 * nu).unwrap();
        let t = full_rhs(&st, &params).unwrap();
        // dE/dt = −⟨a_t, Δa⟩ + ⟨b_t, b⟩
        let rate = -t.da_dt.inner(&st.a.laplacian()).unwrap() + t.db_dt.inner(&st.b).unwrap();
        let expect = -nu * st.a.fractional_laplacian(1.0 + alpha / 2.0).l2_norm_sq()
            - 2.0 * nu * st.b.fractional_laplacian(beta / 2.0).l2_norm_sq();
        prop_assert!(expect < 0.0);
        prop_assert!((rate - expect).abs() <= 1e-12 * expect.abs());
    }
}

#[test]
fn conserved_quantity_examples() {
    let g = grid(32);
    let pi2 = std::f64::consts::PI.powi(2);
    let cx = SpectralField::cosine(g, WaveVector::new(1, 0), 1.0).unwrap();
    let q =
        conserved_quantities(&EmhdState::new(cx.clone(), SpectralField::zeros(g), 0.0).unwrap());
    assert!((q.energy - pi2).abs() < 1e-13);
    let q = conserved_quantities(&EmhdState::new(cx.clone(), cx, 0.0).unwrap());
    assert!((q.helicity - 2.0 * pi2).abs() < 1e-13);
}
