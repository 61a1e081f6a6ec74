//! Seeded random band-limited fields.
//!
//! Modes are drawn in a fixed order that depends only on the band, never on
//! the grid, so the same seed gives the same trigonometric polynomial on
//! every resolution that can represent it.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{GridSpec, SpectralField, WaveVector};
use crate::error::{Error, Result};

/// Annulus `k_min <= |k| <= k_max` with magnitudes
/// `amplitude · (1 + |k|²)^{-exponent/2}` and uniform random phases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandSpec {
    pub k_min: u32,
    pub k_max: u32,
    pub spectrum_exponent: f64,
    pub amplitude: f64,
}

impl BandSpec {
    pub fn validate(&self, grid: GridSpec) -> Result<()> {
        if self.k_min > self.k_max {
            return Err(Error::InvalidBand(format!(
                "k_min {} > k_max {}",
                self.k_min, self.k_max
            )));
        }
        if self.k_max as usize > grid.dealias_cutoff() {
            return Err(Error::InvalidBand(format!(
                "k_max {} exceeds dealias cutoff {} of the {}-point grid",
                self.k_max,
                grid.dealias_cutoff(),
                grid.n()
            )));
        }
        if !self.amplitude.is_finite() || !self.spectrum_exponent.is_finite() {
            return Err(Error::InvalidBand(
                "non-finite amplitude or exponent".into(),
            ));
        }
        Ok(())
    }

    fn contains(&self, k: WaveVector) -> bool {
        let r2 = k.kx * k.kx + k.ky * k.ky;
        let lo = (self.k_min as i64).pow(2);
        let hi = (self.k_max as i64).pow(2);
        r2 >= lo && r2 <= hi && r2 > 0
    }
}

/// Draws one real random field in `band`. The mean is always zero.
pub fn random_band_field<R: Rng + ?Sized>(
    grid: GridSpec,
    band: &BandSpec,
    rng: &mut R,
) -> Result<SpectralField> {
    band.validate(grid)?;
    let kmax = band.k_max as i64;
    let mut modes = Vec::new();
    for ky in 0..=kmax {
        for kx in -kmax..=kmax {
            if ky == 0 && kx <= 0 {
                continue;
            }
            let k = WaveVector::new(kx, ky);
            if !band.contains(k) {
                continue;
            }
            let phase = rng.gen::<f64>() * 2.0 * PI;
            let mag = band.amplitude * (1.0 + k.norm_sq()).powf(-0.5 * band.spectrum_exponent);
            let c = Complex64::from_polar(mag, phase);
            modes.push((k, c));
            modes.push((-k, c.conj()));
        }
    }
    SpectralField::from_modes(grid, modes)
}
