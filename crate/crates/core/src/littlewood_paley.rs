//! Smooth dyadic decomposition on the torus.
//!
//! The cutoff `χ` is radial, equal to 1 on `|ξ| <= 3/4` and 0 on `|ξ| >= 1`,
//! with the transition `1 - s((|ξ| - 3/4)/(1/4))` where
//! `s(t) = g(t)/(g(t) + g(1-t))`, `g(t) = exp(-1/t)`. Shell multipliers are
//! `φ_{-1} = χ` and `φ_q(ξ) = χ(ξ/2^{q+1}) - χ(ξ/2^q)` for `q >= 0`, so
//! `S_q = Σ_{j<=q} Δ_j` has multiplier `χ(ξ/2^{q+1})`.

use std::borrow::Cow;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{
    from_collocation, from_collocation_pair, inverse_transform, to_collocation, GridSpec,
    SpectralField, WaveVector,
};

const PLATEAU: f64 = 0.75;

/// `C^∞` step on `[0, 1]` with `smooth_step(t) + smooth_step(1 - t) = 1`.
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let g = |x: f64| (-1.0 / x).exp();
    let (a, b) = (g(t), g(1.0 - t));
    a / (a + b)
}

/// Radial cutoff `χ(|ξ|)`.
pub fn chi(xi_norm: f64) -> f64 {
    if xi_norm <= PLATEAU {
        1.0
    } else if xi_norm >= 1.0 {
        0.0
    } else {
        1.0 - smooth_step((xi_norm - PLATEAU) / (1.0 - PLATEAU))
    }
}

/// Dyadic scale `λ_q = 2^q` (so `λ_{-1} = 1/2`).
pub fn lambda(q: i32) -> f64 {
    2f64.powi(q)
}

/// Shell multiplier `φ_q(|k|)`.
pub fn phi(k_norm: f64, q: i32) -> Result<f64> {
    match q {
        q if q < -1 => Err(Error::InvalidShell(q)),
        -1 => Ok(chi(k_norm)),
        q => Ok(chi(k_norm * lambda(-q - 1)) - chi(k_norm * lambda(-q))),
    }
}

/// Multiplier of `S_q`: `χ(|k|/2^{q+1})`, and 0 for `q <= -2`.
pub fn low_symbol(k_norm: f64, q: i32) -> f64 {
    if q <= -2 {
        0.0
    } else {
        chi(k_norm * lambda(-q - 1))
    }
}

/// Lebesgue exponent for collocation-grid norms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lebesgue {
    One,
    Two,
    Infinity,
}

impl Lebesgue {
    pub fn reciprocal(self) -> f64 {
        match self {
            Lebesgue::One => 1.0,
            Lebesgue::Two => 0.5,
            Lebesgue::Infinity => 0.0,
        }
    }

    /// Norm of grid samples with the uniform quadrature weight `(2π/n)²`.
    pub fn norm(self, samples: &[f64], grid: GridSpec) -> f64 {
        let w = grid.area() / samples.len() as f64;
        match self {
            Lebesgue::One => w * samples.iter().map(|v| v.abs()).sum::<f64>(),
            Lebesgue::Two => (w * samples.iter().map(|v| v * v).sum::<f64>()).sqrt(),
            Lebesgue::Infinity => samples.iter().map(|v| v.abs()).fold(0.0, f64::max),
        }
    }
}

/// `{Δ_q u}` for `q = -1 ..= q_max`.
#[derive(Debug, Clone)]
pub struct DyadicDecomposition {
    pub blocks: Vec<SpectralField>,
}

impl DyadicDecomposition {
    pub fn shell(&self, q: i32) -> Option<&SpectralField> {
        usize::try_from(q + 1).ok().and_then(|i| self.blocks.get(i))
    }

    pub fn reconstruct(&self) -> SpectralField {
        let mut it = self.blocks.iter();
        let first = it.next().expect("at least the q = -1 block").clone();
        it.fold(first, |acc, b| &acc + b)
    }
}

/// Low–high, high–low and high–high parts of a product.
#[derive(Debug, Clone)]
pub struct BonySplit {
    pub low_high: SpectralField,
    pub high_low: SpectralField,
    pub high_high: SpectralField,
}

impl BonySplit {
    pub fn total(&self) -> SpectralField {
        &(&self.low_high + &self.high_low) + &self.high_high
    }
}

/// The three interaction sums of `Δ_q(u·∇v)`.
#[derive(Debug, Clone)]
pub struct TransportTerms {
    pub low_high: SpectralField,
    pub high_low: SpectralField,
    pub high_high: SpectralField,
}

impl TransportTerms {
    pub fn total(&self) -> SpectralField {
        &(&self.low_high + &self.high_low) + &self.high_high
    }
}

/// Cutoff tables for one grid, plus the block calculus built on them.
///
/// Tables are built once per grid for `q = -1 ..= q_max + 2`; anything
/// outside that range is evaluated on demand.
#[derive(Debug, Clone)]
pub struct LittlewoodPaley {
    grid: GridSpec,
    q_max: i32,
    shell_tables: Vec<Vec<f64>>,
    low_tables: Vec<Vec<f64>>,
}

impl LittlewoodPaley {
    pub fn new(grid: GridSpec) -> Self {
        let q_max = (std::f64::consts::SQRT_2 * grid.dealias_cutoff() as f64)
            .log2()
            .ceil() as i32
            + 1;
        let build = |f: &dyn Fn(f64) -> f64| {
            let mut t = vec![0.0; grid.len()];
            for (idx, k) in grid.active_indexed() {
                t[idx] = f(k.norm());
            }
            t
        };
        let shell_tables = (-1..=q_max + 2)
            .map(|q| build(&|r| phi(r, q).expect("q >= -1")))
            .collect();
        let low_tables = (-1..=q_max + 2)
            .map(|q| build(&|r| low_symbol(r, q)))
            .collect();
        Self {
            grid,
            q_max,
            shell_tables,
            low_tables,
        }
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    /// Shell index beyond which every block vanishes on the grid.
    pub fn q_max(&self) -> i32 {
        self.q_max
    }

    pub fn shells(&self) -> std::ops::RangeInclusive<i32> {
        -1..=self.q_max
    }

    pub fn phi_eval(&self, k: WaveVector, q: i32) -> Result<f64> {
        phi(k.norm(), q)
    }

    fn cached(&self, tables: &[Vec<f64>], q: i32) -> Option<usize> {
        let i = usize::try_from(q + 1).ok()?;
        (i < tables.len()).then_some(i)
    }

    /// `φ_q` sampled on the coefficient layout; zero for `q < -1`.
    pub fn shell_table(&self, q: i32) -> Cow<'_, [f64]> {
        match self.cached(&self.shell_tables, q) {
            Some(i) => Cow::Borrowed(&self.shell_tables[i]),
            None if q < -1 => Cow::Owned(vec![0.0; self.grid.len()]),
            None => Cow::Owned(self.table(|r| phi(r, q).expect("q >= -1"))),
        }
    }

    /// Multiplier of `S_q` on the coefficient layout.
    pub fn low_table(&self, q: i32) -> Cow<'_, [f64]> {
        match self.cached(&self.low_tables, q) {
            Some(i) => Cow::Borrowed(&self.low_tables[i]),
            None => Cow::Owned(self.table(|r| low_symbol(r, q))),
        }
    }

    fn table(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        let mut t = vec![0.0; self.grid.len()];
        for (idx, k) in self.grid.active_indexed() {
            t[idx] = f(k.norm());
        }
        t
    }

    /// `Δ_q u`; zero for `q < -1`.
    pub fn dyadic_block(&self, u: &SpectralField, q: i32) -> SpectralField {
        u.apply_table(&self.shell_table(q))
    }

    /// `S_q u = Σ_{j<=q} Δ_j u`.
    pub fn low_cutoff(&self, u: &SpectralField, q: i32) -> SpectralField {
        u.apply_table(&self.low_table(q))
    }

    /// `Δ_{q-1} u + Δ_q u + Δ_{q+1} u`.
    pub fn tilde_block(&self, u: &SpectralField, q: i32) -> SpectralField {
        let (a, b, c) = (
            self.shell_table(q - 1),
            self.shell_table(q),
            self.shell_table(q + 1),
        );
        let sum: Vec<f64> = a
            .iter()
            .zip(b.iter())
            .zip(c.iter())
            .map(|((x, y), z)| x + y + z)
            .collect();
        u.apply_table(&sum)
    }

    pub fn decompose(&self, u: &SpectralField) -> DyadicDecomposition {
        DyadicDecomposition {
            blocks: self.shells().map(|q| self.dyadic_block(u, q)).collect(),
        }
    }

    /// Per-mode weight `Σ_q λ_q^{2s} φ_q(k)²`, so that
    /// `Σ_q λ_q^{2s} ‖Δ_q u‖² = (2π)² Σ_k w(k) |û(k)|²`.
    pub fn dyadic_weights(&self, s: f64) -> Vec<f64> {
        let mut w = vec![0.0; self.grid.len()];
        for q in self.shells() {
            let scale = lambda(q).powf(2.0 * s);
            let t = self.shell_table(q);
            for (idx, _) in self.grid.active_indexed() {
                w[idx] += scale * t[idx] * t[idx];
            }
        }
        w
    }

    /// `(Σ_q λ_q^{2s} ‖Δ_q u‖²_{L²})^{1/2}`.
    pub fn dyadic_sobolev_norm(&self, u: &SpectralField, s: f64) -> f64 {
        let w = self.dyadic_weights(s);
        let sum: f64 = self
            .grid
            .active_indexed()
            .map(|(idx, _)| w[idx] * u.coeffs()[idx].norm_sqr())
            .sum();
        (self.grid.area() * sum).sqrt()
    }

    /// Bony decomposition of `uv`, each part alias-free.
    pub fn bony_split(&self, u: &SpectralField, v: &SpectralField) -> Result<BonySplit> {
        u.check_same_grid(v)?;
        let g = self.grid;
        let m = g.product_n();
        let mut lh = vec![0.0; m * m];
        let mut hl = vec![0.0; m * m];
        let mut hh = vec![0.0; m * m];
        for l in self.shells() {
            let fields = [
                self.low_cutoff(u, l - 2),
                self.dyadic_block(v, l),
                self.dyadic_block(u, l),
                self.low_cutoff(v, l - 2),
                self.tilde_block(v, l),
            ];
            let phys = to_collocation(&fields.iter().collect::<Vec<_>>(), m);
            for i in 0..m * m {
                lh[i] += phys[0][i] * phys[1][i];
                hl[i] += phys[2][i] * phys[3][i];
                hh[i] += phys[2][i] * phys[4][i];
            }
        }
        let (low_high, high_low) = from_collocation_pair(g, m, &lh, Some(&hl));
        Ok(BonySplit {
            low_high,
            high_low,
            high_high: from_collocation(g, m, &hh),
        })
    }

    /// Low–high, high–low and high–high parts of `Δ_q(u·∇v)` for a planar
    /// vector field `u = (u_x, u_y)`:
    ///
    /// ```text
    /// Σ_{|q-l|<=2} Δ_q(S_{l-2}u · ∇Δ_l v) + Σ_{|q-l|<=2} Δ_q(Δ_l u · ∇S_{l-2}v)
    ///   + Σ_{l>=q-2} Δ_q(Δ_l u · ∇Δ̃_l v)
    /// ```
    pub fn transport_paraproduct_terms(
        &self,
        u: [&SpectralField; 2],
        v: &SpectralField,
        q: i32,
    ) -> Result<TransportTerms> {
        if q < -1 {
            return Err(Error::InvalidShell(q));
        }
        u[0].check_same_grid(v)?;
        u[1].check_same_grid(v)?;
        let g = self.grid;
        let m = g.product_n();
        let grad = |f: &SpectralField| [f.partial_x(), f.partial_y()];
        let accumulate =
            |acc: &mut Vec<f64>, left: [SpectralField; 2], right: [SpectralField; 2]| {
                let phys = to_collocation(&[&left[0], &right[0], &left[1], &right[1]], m);
                for i in 0..m * m {
                    acc[i] += phys[0][i] * phys[1][i] + phys[2][i] * phys[3][i];
                }
            };
        let mut lh = vec![0.0; m * m];
        let mut hl = vec![0.0; m * m];
        let mut hh = vec![0.0; m * m];
        for l in (q - 2).max(-1)..=(q + 2).min(self.q_max) {
            let su = [self.low_cutoff(u[0], l - 2), self.low_cutoff(u[1], l - 2)];
            accumulate(&mut lh, su, grad(&self.dyadic_block(v, l)));
            let du = [self.dyadic_block(u[0], l), self.dyadic_block(u[1], l)];
            accumulate(&mut hl, du, grad(&self.low_cutoff(v, l - 2)));
        }
        for l in (q - 2).max(-1)..=self.q_max {
            let du = [self.dyadic_block(u[0], l), self.dyadic_block(u[1], l)];
            accumulate(&mut hh, du, grad(&self.tilde_block(v, l)));
        }
        let (lh, hl) = from_collocation_pair(g, m, &lh, Some(&hl));
        let hh = from_collocation(g, m, &hh);
        Ok(TransportTerms {
            low_high: self.dyadic_block(&lh, q),
            high_low: self.dyadic_block(&hl, q),
            high_high: self.dyadic_block(&hh, q),
        })
    }

    /// `[Δ_q, S_{p-2}u Λ^s] Δ_p v = Δ_q(S_{p-2}u · Λ^s Δ_p v) − S_{p-2}u · Δ_q Λ^s Δ_p v`.
    pub fn commutator(
        &self,
        u: &SpectralField,
        v: &SpectralField,
        p: i32,
        q: i32,
        s: f64,
    ) -> Result<SpectralField> {
        for shell in [p, q] {
            if shell < -1 {
                return Err(Error::InvalidShell(shell));
            }
        }
        u.check_same_grid(v)?;
        let g = self.grid;
        let m = g.product_n();
        // Constants commute with every multiplier, so only the nonconstant
        // part of S_{p-2}u contributes.
        let mut low = self.low_cutoff(u, p - 2);
        low.coeffs_mut()[0] = Complex64::new(0.0, 0.0);
        if low.max_abs_coeff() == 0.0 {
            return Ok(SpectralField::zeros(g));
        }
        let high = self.dyadic_block(v, p).fractional_laplacian(s);
        let high_q = self.dyadic_block(&high, q);
        let phys = to_collocation(&[&low, &high, &high_q], m);
        let first: Vec<f64> = phys[0].iter().zip(&phys[1]).map(|(a, b)| a * b).collect();
        let second: Vec<f64> = phys[0].iter().zip(&phys[2]).map(|(a, b)| a * b).collect();
        let (first, second) = from_collocation_pair(g, m, &first, Some(&second));
        Ok(&self.dyadic_block(&first, q) - &second)
    }

    /// Pointwise `|∇^m f|` on the native grid, where the tensor norm runs
    /// over all ordered index tuples: `Σ_a C(m,a) |∂_x^a ∂_y^{m-a} f|²`.
    fn gradient_power_magnitude(&self, f: &SpectralField, m: u32) -> Result<Vec<f64>> {
        let n2 = self.grid.len();
        let mut acc = vec![0.0; n2];
        for a in 0..=m {
            let binom = binomial(m, a) as f64;
            let d = f.apply_multiplier(|k| {
                let ik = |c: i64| num_complex::Complex64::new(0.0, c as f64);
                ik(k.kx).powu(a) * ik(k.ky).powu(m - a)
            });
            let phys = inverse_transform(&d)?;
            for (dst, v) in acc.iter_mut().zip(phys.samples()) {
                *dst += binom * v * v;
            }
        }
        Ok(acc.into_iter().map(f64::sqrt).collect())
    }

    /// `‖∇^m Δ_q u‖_{L^r} / (λ_q^{m + 2(1/p − 1/r)} ‖Δ_q u‖_{L^p})`.
    pub fn bernstein_forward(
        &self,
        u: &SpectralField,
        q: i32,
        m: u32,
        p: Lebesgue,
        r: Lebesgue,
    ) -> Result<f64> {
        if p.reciprocal() < r.reciprocal() {
            return Err(Error::InvalidParams(format!(
                "need r >= p, got p={p:?}, r={r:?}"
            )));
        }
        let block = self.block_checked(u, q)?;
        let lhs = r.norm(&self.gradient_power_magnitude(&block, m)?, self.grid);
        let base = p.norm(inverse_transform(&block)?.samples(), self.grid);
        let exponent = m as f64 + 2.0 * (p.reciprocal() - r.reciprocal());
        Ok(lhs / (lambda(q).powf(exponent) * base))
    }

    /// `λ_q^m ‖Δ_q u‖_{L^r} / ‖∇^m Δ_q u‖_{L^r}`.
    pub fn bernstein_reverse(&self, u: &SpectralField, q: i32, m: u32, r: Lebesgue) -> Result<f64> {
        let block = self.block_checked(u, q)?;
        let grad = r.norm(&self.gradient_power_magnitude(&block, m)?, self.grid);
        if grad == 0.0 {
            return Err(Error::ZeroBlock(q));
        }
        let base = r.norm(inverse_transform(&block)?.samples(), self.grid);
        Ok(lambda(q).powi(m as i32) * base / grad)
    }

    fn block_checked(&self, u: &SpectralField, q: i32) -> Result<SpectralField> {
        if q < -1 {
            return Err(Error::InvalidShell(q));
        }
        let block = self.dyadic_block(u, q);
        if block.max_abs_coeff() == 0.0 {
            return Err(Error::ZeroBlock(q));
        }
        Ok(block)
    }
}

/// `(Σ_k (1 + |k|²)^s |û(k)|²)^{1/2}` scaled to the `L²(T²)` normalization.
pub fn sobolev_norm(u: &SpectralField, s: f64) -> f64 {
    let g = u.grid();
    let sum: f64 = g
        .active_indexed()
        .map(|(idx, k)| (1.0 + k.norm_sq()).powf(s) * u.coeffs()[idx].norm_sqr())
        .sum();
    (g.area() * sum).sqrt()
}

fn binomial(n: u32, k: u32) -> u64 {
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}
