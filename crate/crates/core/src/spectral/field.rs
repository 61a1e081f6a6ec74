use std::ops::{Add, Neg, Sub};

use num_complex::Complex64;

use super::fft::{fft2, Direction};
use super::grid::{GridSpec, WaveVector};
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Tolerance on `|c(-k) - conj c(k)|`, relative to the largest coefficient.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Fourier coefficients of one real scalar field on the torus, normalized so
/// that `u(x) = Σ_k c(k) e^{ik·x}` and `c(0)` is the mean of `u`.
///
/// Storage covers the full `n × n` index range; modes outside the Galerkin
/// band are kept at exactly zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: GridSpec,
    coeffs: Vec<Complex64>,
}

/// Samples of a real field at `(x_i, y_j) = (2πi/n, 2πj/n)`, stored row-major
/// with `y` as the slow index.
#[derive(Debug, Clone, PartialEq)]
pub struct RealField {
    grid: GridSpec,
    samples: Vec<f64>,
}

impl SpectralField {
    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            grid,
            coeffs: vec![ZERO; grid.len()],
        }
    }

    /// Builds a field from a function of the wave vector, evaluated on the
    /// Galerkin band only.
    pub fn from_fn(grid: GridSpec, mut f: impl FnMut(WaveVector) -> Complex64) -> Self {
        let mut out = Self::zeros(grid);
        for (idx, k) in grid.active_indexed() {
            out.coeffs[idx] = f(k);
        }
        out
    }

    /// Sets the listed modes; out-of-band modes are rejected.
    pub fn from_modes(
        grid: GridSpec,
        modes: impl IntoIterator<Item = (WaveVector, Complex64)>,
    ) -> Result<Self> {
        let mut out = Self::zeros(grid);
        for (k, c) in modes {
            if !grid.in_band(k) {
                return Err(Error::InvalidBand(format!(
                    "mode ({}, {}) outside |k_i| <= {}",
                    k.kx,
                    k.ky,
                    grid.dealias_cutoff()
                )));
            }
            out.coeffs[grid.index(k)] += c;
        }
        Ok(out)
    }

    /// `amplitude · cos(k·x)`.
    pub fn cosine(grid: GridSpec, k: WaveVector, amplitude: f64) -> Result<Self> {
        if k == WaveVector::ZERO {
            return Self::constant(grid, amplitude);
        }
        let h = Complex64::new(0.5 * amplitude, 0.0);
        Self::from_modes(grid, [(k, h), (-k, h)])
    }

    /// `amplitude · sin(k·x)`.
    pub fn sine(grid: GridSpec, k: WaveVector, amplitude: f64) -> Result<Self> {
        let h = Complex64::new(0.0, -0.5 * amplitude);
        Self::from_modes(grid, [(k, h), (-k, h.conj())])
    }

    pub fn constant(grid: GridSpec, value: f64) -> Result<Self> {
        Self::from_modes(grid, [(WaveVector::ZERO, Complex64::new(value, 0.0))])
    }

    /// Wraps a raw coefficient array (FFT order, ky-major). Out-of-band
    /// entries are zeroed.
    pub fn from_raw(grid: GridSpec, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} coefficients, got {}",
                grid.len(),
                coeffs.len()
            )));
        }
        if coeffs
            .iter()
            .any(|c| !c.re.is_finite() || !c.im.is_finite())
        {
            return Err(Error::InvalidField);
        }
        let mut out = Self { grid, coeffs };
        out.truncate();
        Ok(out)
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: WaveVector) -> Complex64 {
        if self.grid.in_band(k) {
            self.coeffs[self.grid.index(k)]
        } else {
            ZERO
        }
    }

    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    fn truncate(&mut self) {
        let g = self.grid;
        for (idx, c) in self.coeffs.iter_mut().enumerate() {
            if !g.in_band(g.wave_vector(idx)) {
                *c = ZERO;
            }
        }
    }

    pub fn check_same_grid(&self, other: &SpectralField) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch {
                left: self.grid.n(),
                right: other.grid.n(),
            });
        }
        Ok(())
    }

    /// `c_out(k) = m(k) · c_in(k)` on the Galerkin band.
    pub fn apply_multiplier(&self, mut m: impl FnMut(WaveVector) -> Complex64) -> Self {
        let mut out = Self::zeros(self.grid);
        for (idx, k) in self.grid.active_indexed() {
            out.coeffs[idx] = m(k) * self.coeffs[idx];
        }
        out
    }

    pub fn apply_real_multiplier(&self, mut m: impl FnMut(WaveVector) -> f64) -> Self {
        let mut out = Self::zeros(self.grid);
        for (idx, k) in self.grid.active_indexed() {
            out.coeffs[idx] = self.coeffs[idx] * m(k);
        }
        out
    }

    /// Multiplies by a precomputed table indexed like the coefficients.
    pub fn apply_table(&self, table: &[f64]) -> Self {
        debug_assert_eq!(table.len(), self.coeffs.len());
        let mut out = Self::zeros(self.grid);
        for (idx, _) in self.grid.active_indexed() {
            out.coeffs[idx] = self.coeffs[idx] * table[idx];
        }
        out
    }

    pub fn partial_x(&self) -> Self {
        self.apply_multiplier(|k| Complex64::new(0.0, k.kx as f64))
    }

    pub fn partial_y(&self) -> Self {
        self.apply_multiplier(|k| Complex64::new(0.0, k.ky as f64))
    }

    pub fn laplacian(&self) -> Self {
        self.apply_real_multiplier(|k| -k.norm_sq())
    }

    /// `Λ^s`, multiplier `|k|^s`; the mean is annihilated for every `s != 0`.
    pub fn fractional_laplacian(&self, s: f64) -> Self {
        self.apply_real_multiplier(|k| fractional_symbol(k, s))
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            grid: self.grid,
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }

    /// `self + factor · other`.
    pub fn add_scaled(&self, factor: f64, other: &SpectralField) -> Self {
        debug_assert_eq!(self.grid, other.grid);
        Self {
            grid: self.grid,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b * factor)
                .collect(),
        }
    }

    pub(crate) fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// `Σ_k |c(k)|²`, the mean square of the field.
    pub fn mean_square(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// `‖u‖²_{L²(T²)} = (2π)² Σ_k |c(k)|²`.
    pub fn l2_norm_sq(&self) -> f64 {
        self.grid.area() * self.mean_square()
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    /// Real `L²(T²)` inner product `∫ u v dx`, via Parseval.
    pub fn inner(&self, other: &SpectralField) -> Result<f64> {
        self.check_same_grid(other)?;
        let s: f64 = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.re * b.re + a.im * b.im)
            .sum();
        Ok(self.grid.area() * s)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// `max_k |c(-k) - conj c(k)|`.
    pub fn hermitian_defect(&self) -> f64 {
        let g = self.grid;
        g.active_indexed()
            .map(|(idx, k)| (self.coeffs[g.index(-k)] - self.coeffs[idx].conj()).norm())
            .fold(0.0, f64::max)
    }

    /// Largest coefficient magnitude outside the Galerkin band.
    pub fn out_of_band_max(&self) -> f64 {
        let g = self.grid;
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(idx, _)| !g.in_band(g.wave_vector(*idx)))
            .map(|(_, c)| c.norm())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs
            .iter()
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Copies the modes shared with `grid`'s band into a field on `grid`.
    pub fn resample(&self, grid: GridSpec) -> Self {
        SpectralField::from_fn(grid, |k| self.coeff(k))
    }
}

/// `|k|^s`, with the zero mode mapped to 0 unless `s == 0`.
pub fn fractional_symbol(k: WaveVector, s: f64) -> f64 {
    if s == 0.0 {
        1.0
    } else if k == WaveVector::ZERO {
        0.0
    } else {
        k.norm().powf(s)
    }
}

impl Add for &SpectralField {
    type Output = SpectralField;
    fn add(self, rhs: &SpectralField) -> SpectralField {
        self.add_scaled(1.0, rhs)
    }
}

impl Sub for &SpectralField {
    type Output = SpectralField;
    fn sub(self, rhs: &SpectralField) -> SpectralField {
        self.add_scaled(-1.0, rhs)
    }
}

impl Neg for &SpectralField {
    type Output = SpectralField;
    fn neg(self) -> SpectralField {
        self.scale(-1.0)
    }
}

impl RealField {
    pub fn new(grid: GridSpec, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} samples, got {}",
                grid.len(),
                samples.len()
            )));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidField);
        }
        Ok(Self { grid, samples })
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let n = grid.n();
        let mut samples = Vec::with_capacity(n * n);
        for j in 0..n {
            let y = grid.coordinate(j);
            for i in 0..n {
                samples.push(f(grid.coordinate(i), y));
            }
        }
        Self::new(grid, samples)
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// Sample at grid point `(i, j)` = `(x_i, y_j)`.
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.samples[j * self.grid.n() + i]
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }
}

/// Grid values to normalized Galerkin-band coefficients.
pub fn forward_transform(u: &RealField) -> Result<SpectralField> {
    if u.samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidField);
    }
    Ok(from_collocation(u.grid, u.grid.n(), &u.samples))
}

/// Pointwise evaluation of `Σ_k c(k) e^{ik·x}` on the native grid.
pub fn inverse_transform(f: &SpectralField) -> Result<RealField> {
    let scale = f.max_abs_coeff().max(f64::MIN_POSITIVE);
    let defect = f.hermitian_defect();
    if defect > HERMITIAN_TOL * scale {
        return Err(Error::NotRealField { defect });
    }
    let samples = to_collocation(&[f], f.grid.n()).pop().expect("one field");
    RealField::new(f.grid, samples).map_err(|_| Error::InvalidField)
}

/// Alias-free product of two band-limited fields, truncated to the band.
pub fn dealiased_product(u: &SpectralField, v: &SpectralField) -> Result<SpectralField> {
    u.check_same_grid(v)?;
    let m = u.grid.product_n();
    let vals = to_collocation(&[u, v], m);
    let prod: Vec<f64> = vals[0].iter().zip(&vals[1]).map(|(a, b)| a * b).collect();
    Ok(from_collocation(u.grid, m, &prod))
}

/// Evaluates band-limited fields on an `m × m` collocation grid, two per
/// complex transform.
pub(crate) fn to_collocation(fields: &[&SpectralField], m: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(fields.len());
    for pair in fields.chunks(2) {
        let grid = pair[0].grid;
        let mut buf = vec![ZERO; m * m];
        let mi = m as i64;
        for (idx, k) in grid.active_indexed() {
            let dst = (k.ky.rem_euclid(mi) as usize) * m + k.kx.rem_euclid(mi) as usize;
            let mut z = pair[0].coeffs[idx];
            if let Some(second) = pair.get(1) {
                // f + i g
                let c = second.coeffs[idx];
                z += Complex64::new(-c.im, c.re);
            }
            buf[dst] = z;
        }
        fft2(&mut buf, m, Direction::Inverse);
        out.push(buf.iter().map(|z| z.re).collect());
        if pair.len() == 2 {
            out.push(buf.iter().map(|z| z.im).collect());
        }
    }
    out
}

/// Band-limited coefficients of real collocation values on an `m × m` grid.
pub(crate) fn from_collocation(grid: GridSpec, m: usize, values: &[f64]) -> SpectralField {
    from_collocation_pair(grid, m, values, None).0
}

/// Transforms two real grids at once; the outputs are exactly Hermitian.
pub(crate) fn from_collocation_pair(
    grid: GridSpec,
    m: usize,
    first: &[f64],
    second: Option<&[f64]>,
) -> (SpectralField, SpectralField) {
    debug_assert_eq!(first.len(), m * m);
    let mut buf: Vec<Complex64> = match second {
        Some(g) => first
            .iter()
            .zip(g)
            .map(|(&a, &b)| Complex64::new(a, b))
            .collect(),
        None => first.iter().map(|&a| Complex64::new(a, 0.0)).collect(),
    };
    fft2(&mut buf, m, Direction::Forward);
    let norm = 1.0 / (m * m) as f64;
    let mi = m as i64;
    let at = |k: WaveVector| buf[(k.ky.rem_euclid(mi) as usize) * m + k.kx.rem_euclid(mi) as usize];
    let mut f = SpectralField::zeros(grid);
    let mut g = SpectralField::zeros(grid);
    for (idx, k) in grid.active_indexed() {
        let z = at(k);
        let zc = at(-k).conj();
        f.coeffs[idx] = (z + zc) * (0.5 * norm);
        // (z - zc) / 2i
        let d = (z - zc) * (0.5 * norm);
        g.coeffs[idx] = Complex64::new(d.im, -d.re);
    }
    (f, g)
}
