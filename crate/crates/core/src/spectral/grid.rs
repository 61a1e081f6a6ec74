use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Integer wave vector on the 2-torus `[0, 2π)²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WaveVector {
    pub kx: i64,
    pub ky: i64,
}

impl WaveVector {
    pub const ZERO: WaveVector = WaveVector { kx: 0, ky: 0 };

    pub const fn new(kx: i64, ky: i64) -> Self {
        Self { kx, ky }
    }

    pub fn norm_sq(self) -> f64 {
        (self.kx * self.kx + self.ky * self.ky) as f64
    }

    /// Euclidean magnitude `|k|`.
    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn max_abs(self) -> i64 {
        self.kx.abs().max(self.ky.abs())
    }
}

impl std::ops::Neg for WaveVector {
    type Output = Self;

    fn neg(self) -> Self {
        Self::new(-self.kx, -self.ky)
    }
}

/// Square uniform grid on the torus with the 2/3-rule Galerkin band
/// `|kx|, |ky| <= floor(n/3)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct GridSpec {
    n: usize,
}

impl GridSpec {
    pub fn new(n_per_axis: usize) -> Result<Self> {
        if n_per_axis < 8 {
            return Err(Error::InvalidGrid(format!(
                "need at least 8 points per axis, got {n_per_axis}"
            )));
        }
        if !n_per_axis.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "points per axis must be even, got {n_per_axis}"
            )));
        }
        Ok(Self { n: n_per_axis })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn domain_length(&self) -> f64 {
        2.0 * PI
    }

    /// Largest retained `|k_i|`.
    pub fn dealias_cutoff(&self) -> usize {
        self.n / 3
    }

    /// Largest Euclidean `|k|` in the retained square, `cutoff·√2`.
    pub fn k_max(&self) -> f64 {
        self.dealias_cutoff() as f64 * std::f64::consts::SQRT_2
    }

    /// Size of the collocation grid used for products.
    ///
    /// Products of two band-limited fields reach `|k_i| <= 2N`; their aliases
    /// stay outside the band iff the grid has more than `3N` points, so when
    /// `3 | n` the product grid is padded to the next even size above `3N`.
    pub fn product_n(&self) -> usize {
        let needed = 3 * self.dealias_cutoff() + 1;
        let m = self.n.max(needed);
        m + m % 2
    }

    /// Area of the torus, `(2π)²`.
    pub fn area(&self) -> f64 {
        self.domain_length() * self.domain_length()
    }

    /// Collocation coordinate `x_j = 2πj/n`.
    pub fn coordinate(&self, j: usize) -> f64 {
        self.domain_length() * j as f64 / self.n as f64
    }

    pub fn in_band(&self, k: WaveVector) -> bool {
        k.max_abs() <= self.dealias_cutoff() as i64
    }

    /// Flat index of `k` in the `n × n` storage (rows = ky, columns = kx,
    /// each axis in FFT order).
    pub fn index(&self, k: WaveVector) -> usize {
        let n = self.n as i64;
        let ix = k.kx.rem_euclid(n) as usize;
        let iy = k.ky.rem_euclid(n) as usize;
        iy * self.n + ix
    }

    pub fn wave_vector(&self, index: usize) -> WaveVector {
        let iy = index / self.n;
        let ix = index % self.n;
        WaveVector::new(signed_frequency(ix, self.n), signed_frequency(iy, self.n))
    }

    /// All retained wave vectors, ky-major.
    pub fn active_modes(&self) -> impl Iterator<Item = WaveVector> + '_ {
        let c = self.dealias_cutoff() as i64;
        (-c..=c).flat_map(move |ky| (-c..=c).map(move |kx| WaveVector::new(kx, ky)))
    }

    /// `(flat index, wave vector)` for every retained mode.
    pub fn active_indexed(&self) -> impl Iterator<Item = (usize, WaveVector)> + '_ {
        self.active_modes().map(move |k| (self.index(k), k))
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

impl TryFrom<usize> for GridSpec {
    type Error = Error;

    fn try_from(n: usize) -> Result<Self> {
        GridSpec::new(n)
    }
}

impl From<GridSpec> for usize {
    fn from(g: GridSpec) -> usize {
        g.n
    }
}

/// Signed frequency of FFT bin `i` on an axis of length `n`.
pub(crate) fn signed_frequency(i: usize, n: usize) -> i64 {
    if i <= n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}
