//! Galerkin-truncated EMHD vector field.
//!
//! With the Poisson bracket `{f, g} = f_x g_y − f_y g_x` the nonlinear terms
//! are `N_a = a_y b_x − a_x b_y = −{a, b}` and `N_b = a_y Δa_x − a_x Δa_y =
//! −{a, Δa}`, and the tendencies are
//!
//! ```text
//! da/dt = −N_a − ν_a Λ^α a,     db/dt = N_b − ν_b Λ^β b.
//! ```
//!
//! Cyclic invariance `∫ f{g,h} = ∫ g{h,f}` gives, for band-limited fields,
//! `⟨N_a, Δa⟩ + ⟨N_b, b⟩ = 0` (energy) and `⟨N_a, b⟩ = ⟨N_b, a⟩ = 0`
//! (helicity). Products are alias-free, so these hold to rounding.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{from_collocation_pair, to_collocation, GridSpec, RealField, SpectralField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParamMode {
    /// Requires `α + β > 2`.
    #[default]
    Theorem,
    /// Accepts any `α, β ∈ (0, 2)`.
    Exploration,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmhdParams {
    pub alpha: f64,
    pub beta: f64,
    #[serde(default = "one")]
    pub nu_a: f64,
    #[serde(default = "one")]
    pub nu_b: f64,
    #[serde(default)]
    pub mode: ParamMode,
    /// When false the Hall terms are dropped and only dissipation remains.
    #[serde(default = "yes")]
    pub nonlinear: bool,
}

fn one() -> f64 {
    1.0
}

fn yes() -> bool {
    true
}

impl EmhdParams {
    /// Theorem-mode parameters with unit dissipation.
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        let p = Self {
            alpha,
            beta,
            nu_a: 1.0,
            nu_b: 1.0,
            mode: ParamMode::Theorem,
            nonlinear: true,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn exploration(alpha: f64, beta: f64) -> Result<Self> {
        let p = Self {
            mode: ParamMode::Exploration,
            ..Self::new_unchecked(alpha, beta)
        };
        p.validate()?;
        Ok(p)
    }

    fn new_unchecked(alpha: f64, beta: f64) -> Self {
        Self {
            alpha,
            beta,
            nu_a: 1.0,
            nu_b: 1.0,
            mode: ParamMode::Theorem,
            nonlinear: true,
        }
    }

    pub fn with_dissipation(mut self, nu_a: f64, nu_b: f64) -> Result<Self> {
        self.nu_a = nu_a;
        self.nu_b = nu_b;
        self.validate()?;
        Ok(self)
    }

    pub fn linear_only(mut self) -> Self {
        self.nonlinear = false;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta)] {
            if !(v > 0.0 && v < 2.0) {
                return Err(Error::InvalidParams(format!("{name} = {v} not in (0, 2)")));
            }
        }
        for (name, v) in [("nu_a", self.nu_a), ("nu_b", self.nu_b)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidParams(format!("{name} = {v} must be >= 0")));
            }
        }
        if self.mode == ParamMode::Theorem && self.alpha + self.beta <= 2.0 {
            return Err(Error::ThresholdViolated {
                sum: self.alpha + self.beta,
            });
        }
        Ok(())
    }
}

/// Magnetic potential `a`, vertical field `b`, and time.
#[derive(Debug, Clone, PartialEq)]
pub struct EmhdState {
    pub a: SpectralField,
    pub b: SpectralField,
    pub time: f64,
}

impl EmhdState {
    pub fn new(a: SpectralField, b: SpectralField, time: f64) -> Result<Self> {
        a.check_same_grid(&b)?;
        Ok(Self { a, b, time })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            a: SpectralField::zeros(grid),
            b: SpectralField::zeros(grid),
            time: 0.0,
        }
    }

    pub fn grid(&self) -> GridSpec {
        self.a.grid()
    }

    pub fn is_finite(&self) -> bool {
        self.time.is_finite() && self.a.is_finite() && self.b.is_finite()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tendency {
    pub da_dt: SpectralField,
    pub db_dt: SpectralField,
}

fn zero_mean(f: &mut SpectralField) {
    // Jacobians integrate to zero; drop the rounding residue in the mean.
    f.coeffs_mut()[0] = num_complex::Complex64::new(0.0, 0.0);
}

/// `a_y b_x − a_x b_y`, alias-free.
pub fn nonlinear_a(a: &SpectralField, b: &SpectralField) -> Result<SpectralField> {
    a.check_same_grid(b)?;
    let m = a.grid().product_n();
    // Both gradients packed in the same order, so `b = a` cancels exactly.
    let fields = [a.partial_x(), a.partial_y(), b.partial_x(), b.partial_y()];
    let p = to_collocation(&fields.iter().collect::<Vec<_>>(), m);
    let vals: Vec<f64> = (0..m * m)
        .map(|i| p[1][i] * p[2][i] - p[0][i] * p[3][i])
        .collect();
    let mut out = from_collocation_pair(a.grid(), m, &vals, None).0;
    zero_mean(&mut out);
    Ok(out)
}

/// `a_y Δa_x − a_x Δa_y`, alias-free.
pub fn nonlinear_b(a: &SpectralField) -> SpectralField {
    let m = a.grid().product_n();
    let lap = a.laplacian();
    let fields = [
        a.partial_x(),
        a.partial_y(),
        lap.partial_x(),
        lap.partial_y(),
    ];
    let p = to_collocation(&fields.iter().collect::<Vec<_>>(), m);
    let vals: Vec<f64> = (0..m * m)
        .map(|i| p[1][i] * p[2][i] - p[0][i] * p[3][i])
        .collect();
    let mut out = from_collocation_pair(a.grid(), m, &vals, None).0;
    zero_mean(&mut out);
    out
}

/// Both nonlinear terms `(N_a, N_b)` sharing the transforms of `∇a`.
pub fn nonlinear_terms(
    a: &SpectralField,
    b: &SpectralField,
) -> Result<(SpectralField, SpectralField)> {
    a.check_same_grid(b)?;
    let grid = a.grid();
    let m = grid.product_n();
    let lap = a.laplacian();
    let fields = [
        a.partial_x(),
        a.partial_y(),
        b.partial_x(),
        b.partial_y(),
        lap.partial_x(),
        lap.partial_y(),
    ];
    let p = to_collocation(&fields.iter().collect::<Vec<_>>(), m);
    let (ax, ay, bx, by, lx, ly) = (&p[0], &p[1], &p[2], &p[3], &p[4], &p[5]);
    let mut na = vec![0.0; m * m];
    let mut nb = vec![0.0; m * m];
    for i in 0..m * m {
        na[i] = ay[i] * bx[i] - ax[i] * by[i];
        nb[i] = ay[i] * lx[i] - ax[i] * ly[i];
    }
    let (mut na, mut nb) = from_collocation_pair(grid, m, &na, Some(&nb));
    zero_mean(&mut na);
    zero_mean(&mut nb);
    Ok((na, nb))
}

/// Tendency of the Hall terms alone: `(−N_a, N_b)`, or zero when the
/// nonlinearity is switched off.
pub fn nonlinear_tendency(state: &EmhdState, params: &EmhdParams) -> Result<Tendency> {
    if !params.nonlinear {
        let g = state.grid();
        return Ok(Tendency {
            da_dt: SpectralField::zeros(g),
            db_dt: SpectralField::zeros(g),
        });
    }
    let (na, nb) = nonlinear_terms(&state.a, &state.b)?;
    Ok(Tendency {
        da_dt: -&na,
        db_dt: nb,
    })
}

/// Full Galerkin right-hand side, dissipation included.
pub fn full_rhs(state: &EmhdState, params: &EmhdParams) -> Result<Tendency> {
    params.validate()?;
    let nl = nonlinear_tendency(state, params)?;
    Ok(Tendency {
        da_dt: nl
            .da_dt
            .add_scaled(-params.nu_a, &state.a.fractional_laplacian(params.alpha)),
        db_dt: nl
            .db_dt
            .add_scaled(-params.nu_b, &state.b.fractional_laplacian(params.beta)),
    })
}

/// `B = (a_y, −a_x, b)` on the native grid.
pub fn magnetic_field(state: &EmhdState) -> Result<[RealField; 3]> {
    let n = state.grid().n();
    let bx = state.a.partial_y();
    let by = -&state.a.partial_x();
    let mut p = to_collocation(&[&bx, &by, &state.b], n).into_iter();
    let mut next = || RealField::new(state.grid(), p.next().expect("three fields"));
    Ok([next()?, next()?, next()?])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConservedQuantities {
    /// `½(‖∇a‖² + ‖b‖²)`
    pub energy: f64,
    /// `∫ a b dx`
    pub helicity: f64,
    pub mean_a: f64,
    pub mean_b: f64,
}

pub fn conserved_quantities(state: &EmhdState) -> ConservedQuantities {
    let g = state.grid();
    let (mut grad_a, mut b2, mut ab) = (0.0, 0.0, 0.0);
    for (idx, k) in g.active_indexed() {
        let (ca, cb) = (state.a.coeffs()[idx], state.b.coeffs()[idx]);
        grad_a += k.norm_sq() * ca.norm_sqr();
        b2 += cb.norm_sqr();
        ab += ca.re * cb.re + ca.im * cb.im;
    }
    ConservedQuantities {
        energy: 0.5 * g.area() * (grad_a + b2),
        helicity: g.area() * ab,
        mean_a: state.a.mean(),
        mean_b: state.b.mean(),
    }
}
