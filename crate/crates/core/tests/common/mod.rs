#![allow(dead_code)]

use emhd_core::spectral::random::{random_band_field, BandSpec};
use emhd_core::spectral::{GridSpec, SpectralField};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn grid(n: usize) -> GridSpec {
    GridSpec::new(n).unwrap()
}

/// Random mean-free field with `|k| <= k_max` and `(1+|k|²)^{-e/2}` decay.
pub fn random_field(grid: GridSpec, seed: u64, k_max: u32, exponent: f64) -> SpectralField {
    let band = BandSpec {
        k_min: 1,
        k_max,
        spectrum_exponent: exponent,
        amplitude: 1.0,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_band_field(grid, &band, &mut rng).unwrap()
}

/// Full-band random field.
pub fn full_band(grid: GridSpec, seed: u64) -> SpectralField {
    random_field(grid, seed, grid.dealias_cutoff() as u32, 1.0)
}

pub fn max_diff(a: &SpectralField, b: &SpectralField) -> f64 {
    a.coeffs()
        .iter()
        .zip(b.coeffs())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}
