//! Energy and dissipation functionals, the Gronwall monitor and the
//! low–high cancellation check.
//!
//! ```text
//! E_s = Σ_q λ_q^{2s} (‖ΛΔ_q a‖² + ‖Δ_q b‖²)
//! D_s = Σ_q λ_q^{2s} (‖Λ^{1+α/2}Δ_q a‖² + ‖Λ^{β/2}Δ_q b‖²)
//! ```
//!
//! The monitor works with the inequality `dE_s/dt + 2 D_s <= C E_s^{1+γ}`
//! (the factor 2 because `d/dt ‖f‖² = 2⟨f, f_t⟩`). `C_hat` is the smallest
//! such constant on the sampled trajectory, and `T0 = 1/(2γ C_hat (1 +
//! E_s(0))^γ)` is then the time up to which `E_s <= 2^{1/γ} E_s(0)` follows
//! from the differential inequality.

mod constants;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use constants::{
    commutator_ratio, empirical_constant_suite, norm_equivalence_range, reference_band,
    ConstantReport, PairMax, ShellMax, FROZEN_BERNSTEIN_FORWARD, FROZEN_BERNSTEIN_REVERSE,
    FROZEN_COMMUTATOR, FROZEN_NORM_EQUIVALENCE, REGRESSION_SLACK,
};

use crate::emhd::{conserved_quantities, EmhdState};
use crate::error::{Error, Result};
use crate::integrator::Observer;
use crate::littlewood_paley::{lambda, LittlewoodPaley};
use crate::spectral::{to_collocation, SpectralField};

/// Added to `E_s` when `E_s(0) = 0`.
pub const REGULARIZATION_DELTA: f64 = 1e-30;

/// Relative slack on the `2^{2θ} E_s(0)` bound absorbing finite differences.
pub const BOUND_TOLERANCE: f64 = 0.05;

/// Exponents derived from `(α, β)` and the Sobolev index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoremParams {
    pub alpha: f64,
    pub beta: f64,
    pub s: f64,
    /// `0 < θ < 1 − 2/(α+β)`
    pub theta: f64,
    /// `½(1−θ)(α+β) − 1`
    pub epsilon: f64,
    /// `1/(2θ)`
    pub gamma: f64,
}

impl TheoremParams {
    /// Smallest admissible Sobolev index `2 − ε`.
    pub fn s_min(&self) -> f64 {
        2.0 - self.epsilon
    }

    /// `2^{2θ} = 2^{1/γ}`.
    pub fn growth_bound(&self) -> f64 {
        2f64.powf(2.0 * self.theta)
    }

    pub fn theta_upper(alpha: f64, beta: f64) -> f64 {
        1.0 - 2.0 / (alpha + beta)
    }
}

fn check_exponents(alpha: f64, beta: f64) -> Result<()> {
    for (name, v) in [("alpha", alpha), ("beta", beta)] {
        if !(v > 0.0 && v < 2.0) {
            return Err(Error::InvalidParams(format!("{name} = {v} not in (0, 2)")));
        }
    }
    if alpha + beta <= 2.0 {
        return Err(Error::ThresholdViolated { sum: alpha + beta });
    }
    Ok(())
}

/// θ at the midpoint of `(0, 1 − 2/(α+β))`, and `s = max(s_requested, 2 − ε)`
/// (`2 − ε` when no index is requested).
pub fn select_theorem_params(
    alpha: f64,
    beta: f64,
    s_requested: Option<f64>,
) -> Result<TheoremParams> {
    check_exponents(alpha, beta)?;
    theorem_params_with_theta(
        alpha,
        beta,
        0.5 * TheoremParams::theta_upper(alpha, beta),
        s_requested,
    )
}

/// Same as [`select_theorem_params`] with an explicit θ.
pub fn theorem_params_with_theta(
    alpha: f64,
    beta: f64,
    theta: f64,
    s_requested: Option<f64>,
) -> Result<TheoremParams> {
    check_exponents(alpha, beta)?;
    let upper = TheoremParams::theta_upper(alpha, beta);
    if !(theta > 0.0 && theta < upper) {
        return Err(Error::InvalidParams(format!(
            "theta = {theta} not in (0, {upper})"
        )));
    }
    let epsilon = 0.5 * (1.0 - theta) * (alpha + beta) - 1.0;
    let s_min = 2.0 - epsilon;
    let s = match s_requested {
        Some(s) if s >= s_min => s,
        Some(s) => {
            log::warn!("Sobolev index {s} below 2 - epsilon; raised to {s_min}");
            s_min
        }
        None => s_min,
    };
    Ok(TheoremParams {
        alpha,
        beta,
        s,
        theta,
        epsilon,
        gamma: 1.0 / (2.0 * theta),
    })
}

/// Per-mode weights turning `E_s` and `D_s` into single spectral sums.
#[derive(Debug, Clone)]
pub struct FunctionalWeights {
    energy_a: Vec<f64>,
    energy_b: Vec<f64>,
    dissipation_a: Vec<f64>,
    dissipation_b: Vec<f64>,
    area: f64,
}

impl FunctionalWeights {
    pub fn new(lp: &LittlewoodPaley, s: f64, alpha: f64, beta: f64) -> Self {
        let grid = lp.grid();
        let shell = lp.dyadic_weights(s);
        let mut w = Self {
            energy_a: vec![0.0; grid.len()],
            energy_b: vec![0.0; grid.len()],
            dissipation_a: vec![0.0; grid.len()],
            dissipation_b: vec![0.0; grid.len()],
            area: grid.area(),
        };
        for (idx, k) in grid.active_indexed() {
            let r = k.norm();
            let sym = |p: f64| if r == 0.0 { 0.0 } else { r.powf(p) };
            w.energy_a[idx] = shell[idx] * k.norm_sq();
            w.energy_b[idx] = shell[idx];
            w.dissipation_a[idx] = shell[idx] * sym(2.0 + alpha);
            w.dissipation_b[idx] = shell[idx] * if beta == 0.0 { 1.0 } else { sym(beta) };
        }
        w
    }

    fn quadratic(&self, wa: &[f64], wb: &[f64], state: &EmhdState) -> f64 {
        let ca = state.a.coeffs();
        let cb = state.b.coeffs();
        let grid = state.grid();
        let sum: f64 = grid
            .active_indexed()
            .map(|(i, _)| wa[i] * ca[i].norm_sqr() + wb[i] * cb[i].norm_sqr())
            .sum();
        self.area * sum
    }

    pub fn energy(&self, state: &EmhdState) -> f64 {
        self.quadratic(&self.energy_a, &self.energy_b, state)
    }

    pub fn dissipation(&self, state: &EmhdState) -> f64 {
        self.quadratic(&self.dissipation_a, &self.dissipation_b, state)
    }
}

/// `E_s` of a state.
pub fn energy_functional(lp: &LittlewoodPaley, state: &EmhdState, s: f64) -> f64 {
    FunctionalWeights::new(lp, s, 0.0, 0.0).energy(state)
}

/// `D_s` of a state.
pub fn dissipation_functional(
    lp: &LittlewoodPaley,
    state: &EmhdState,
    s: f64,
    alpha: f64,
    beta: f64,
) -> f64 {
    FunctionalWeights::new(lp, s, alpha, beta).dissipation(state)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyRecord {
    pub time: f64,
    pub e_s: f64,
    pub d_s: f64,
    pub energy: f64,
    pub helicity: f64,
    pub mean_a: f64,
    pub mean_b: f64,
}

/// Time-ordered diagnostics with free-form metadata.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DiagnosticsSeries {
    pub records: Vec<EnergyRecord>,
    pub metadata: BTreeMap<String, String>,
}

impl DiagnosticsSeries {
    /// Appends unless the time does not advance past the last record.
    pub fn push(&mut self, record: EnergyRecord) -> bool {
        if let Some(last) = self.records.last() {
            if record.time <= last.time {
                return false;
            }
        }
        self.records.push(record);
        true
    }

    pub fn last_time(&self) -> Option<f64> {
        self.records.last().map(|r| r.time)
    }

    /// Largest `E_s(t) / E_s(0)` over the series.
    pub fn max_growth(&self) -> Option<f64> {
        let e0 = self.records.first()?.e_s;
        if e0 <= 0.0 {
            return None;
        }
        Some(
            self.records
                .iter()
                .map(|r| r.e_s / e0)
                .fold(f64::MIN, f64::max),
        )
    }
}

/// Observer that records an [`EnergyRecord`] per call and reports `E_s`.
#[derive(Debug, Clone)]
pub struct DiagnosticsRecorder {
    weights: FunctionalWeights,
    pub series: DiagnosticsSeries,
}

impl DiagnosticsRecorder {
    pub fn new(lp: &LittlewoodPaley, s: f64, alpha: f64, beta: f64) -> Self {
        Self {
            weights: FunctionalWeights::new(lp, s, alpha, beta),
            series: DiagnosticsSeries::default(),
        }
    }

    pub fn with_series(mut self, series: DiagnosticsSeries) -> Self {
        self.series = series;
        self
    }

    pub fn record(&self, state: &EmhdState) -> EnergyRecord {
        let cq = conserved_quantities(state);
        EnergyRecord {
            time: state.time,
            e_s: self.weights.energy(state),
            d_s: self.weights.dissipation(state),
            energy: cq.energy,
            helicity: cq.helicity,
            mean_a: cq.mean_a,
            mean_b: cq.mean_b,
        }
    }
}

impl Observer for DiagnosticsRecorder {
    fn observe(&mut self, state: &EmhdState) -> Result<Option<f64>> {
        let rec = self.record(state);
        self.series.push(rec);
        Ok(Some(rec.e_s))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GronwallFit {
    /// Smallest `C` with `dE_s/dt + 2D_s <= C E_s^{1+γ}` on the samples.
    pub c_hat: f64,
    /// `1/(2γ C_hat (1 + E_s(0))^γ)`; infinite when `C_hat = 0`.
    pub t0: f64,
    /// `E_s(t) <= (1 + tol) 2^{2θ} E_s(0)` on `[0, min(T0, t_last)]`.
    pub bound_satisfied: bool,
    /// `sup E_s(t) / (E_s(0) / (1 − γ C_hat t E_s(0)^γ)^{1/γ})` on the same
    /// interval.
    pub margin: f64,
    /// Largest `E_s(t)/E_s(0)` on the checked interval.
    pub max_growth: f64,
    /// End of the checked interval.
    pub checked_until: f64,
    /// Whether `E_s + δ` was used because `E_s(0) = 0`.
    pub regularized: bool,
}

/// Fits `C_hat`, computes `T0` and checks the growth bound.
pub fn gronwall_monitor(series: &DiagnosticsSeries, tp: &TheoremParams) -> Result<GronwallFit> {
    let recs = &series.records;
    if recs.len() < 3 {
        return Err(Error::InsufficientSamples {
            needed: 3,
            got: recs.len(),
        });
    }
    let regularized = recs[0].e_s <= 0.0;
    let delta = if regularized {
        REGULARIZATION_DELTA
    } else {
        0.0
    };
    let e = |i: usize| recs[i].e_s + delta;
    let gamma = tp.gamma;

    let mut c_hat: f64 = 0.0;
    for i in 1..recs.len() - 1 {
        let h1 = recs[i].time - recs[i - 1].time;
        let h2 = recs[i + 1].time - recs[i].time;
        let de = -h2 / (h1 * (h1 + h2)) * e(i - 1)
            + (h2 - h1) / (h1 * h2) * e(i)
            + h1 / (h2 * (h1 + h2)) * e(i + 1);
        let excess = de + 2.0 * recs[i].d_s;
        if excess > 0.0 {
            c_hat = c_hat.max(excess / e(i).powf(1.0 + gamma));
        }
    }

    let e0 = e(0);
    let t0 = if c_hat > 0.0 {
        1.0 / (2.0 * gamma * c_hat * (1.0 + e0).powf(gamma))
    } else {
        f64::INFINITY
    };
    let t_start = recs[0].time;
    let checked_until = (t_start + t0).min(recs[recs.len() - 1].time);
    let limit = (1.0 + BOUND_TOLERANCE) * tp.growth_bound() * e0;
    let mut bound_satisfied = true;
    let mut margin: f64 = 0.0;
    let mut max_growth: f64 = 0.0;
    for (i, r) in recs.iter().enumerate() {
        if r.time > checked_until {
            break;
        }
        let t = r.time - t_start;
        let ei = e(i);
        bound_satisfied &= ei <= limit;
        let denom = 1.0 - gamma * c_hat * t * e0.powf(gamma);
        let envelope = if denom > 0.0 {
            e0 / denom.powf(1.0 / gamma)
        } else {
            f64::INFINITY
        };
        margin = margin.max(ei / envelope);
        max_growth = max_growth.max(ei / e0);
    }
    Ok(GronwallFit {
        c_hat,
        t0,
        bound_satisfied,
        margin,
        max_growth,
        checked_until,
        regularized,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CancellationReport {
    pub i112: f64,
    pub j112: f64,
    /// `|I + J| / (|I| + |J| + guard)`
    pub residual: f64,
}

/// Evaluates both leading low–high sums directly:
///
/// ```text
/// I = −Σ_q Σ_{|p−q|<=2} λ_q^{2s} ∫ S_{q−2}a_y · Δ_qΔ_p b_x · Δ_qΛ²a
/// J = +Σ_q Σ_{|p−q|<=2} λ_q^{2s} ∫ S_{q−2}a_y · Δ_qΔ_pΛ²a · Δ_q b_x
/// ```
///
/// Triple products are integrated on the product grid, which is exact for
/// band-limited factors (total degree `3N` is below the grid size).
pub fn cancellation_check(
    lp: &LittlewoodPaley,
    a: &SpectralField,
    b: &SpectralField,
    s: f64,
) -> Result<CancellationReport> {
    a.check_same_grid(b)?;
    let grid = a.grid();
    let m = grid.product_n();
    let weight = grid.area() / (m * m) as f64;
    let ay = a.partial_y();
    let bx = b.partial_x();
    let lap_a = a.fractional_laplacian(2.0);
    let triple = |f: &[f64], g: &[f64], h: &[f64]| -> f64 {
        weight
            * f.iter()
                .zip(g)
                .zip(h)
                .map(|((x, y), z)| x * y * z)
                .sum::<f64>()
    };
    let (mut i112, mut j112) = (0.0, 0.0);
    for q in lp.shells() {
        let scale = lambda(q).powf(2.0 * s);
        let low = lp.low_cutoff(&ay, q - 2);
        if low.max_abs_coeff() == 0.0 {
            continue;
        }
        let bx_q = lp.dyadic_block(&bx, q);
        let lap_q = lp.dyadic_block(&lap_a, q);
        let base = to_collocation(&[&low, &bx_q, &lap_q], m);
        for p in (q - 2).max(-1)..=q + 2 {
            let g = lp.dyadic_block(&lp.dyadic_block(&bx, p), q);
            let h = lp.dyadic_block(&lp.dyadic_block(&lap_a, p), q);
            let pair = to_collocation(&[&g, &h], m);
            i112 -= scale * triple(&base[0], &pair[0], &base[2]);
            j112 += scale * triple(&base[0], &pair[1], &base[1]);
        }
    }
    let residual = (i112 + j112).abs() / (i112.abs() + j112.abs() + f64::MIN_POSITIVE);
    Ok(CancellationReport {
        i112,
        j112,
        residual,
    })
}
