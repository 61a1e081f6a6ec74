//! Littlewood–Paley and diagnostics self-check for the `lp-check` command.

use std::fmt;

use emhd_core::diagnostics::reference_band;
use emhd_core::diagnostics::{
    cancellation_check, empirical_constant_suite, norm_equivalence_range, ConstantReport,
    FROZEN_NORM_EQUIVALENCE,
};
use emhd_core::littlewood_paley::{phi, LittlewoodPaley};
use emhd_core::spectral::random::random_band_field;
use emhd_core::spectral::{dealiased_product, GridSpec, SpectralField};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;

pub const PARTITION_TOL: f64 = 1e-14;
pub const BONY_TOL: f64 = 1e-11;
pub const CANCELLATION_TOL: f64 = 1e-11;
pub const NORM_EQUIVALENCE_TOL: f64 = 0.05;

#[derive(Debug, Clone)]
pub struct LpCheckReport {
    pub grid_n: usize,
    pub samples: usize,
    pub partition_error: f64,
    pub bony_residual: f64,
    pub cancellation_residual: f64,
    pub constants: ConstantReport,
    /// `(s, lo, hi, frozen)`
    pub norm_equivalence: Vec<(f64, f64, f64, f64)>,
}

impl LpCheckReport {
    fn norm_equivalence_ok(&self) -> bool {
        self.norm_equivalence.iter().all(|&(_, lo, hi, frozen)| {
            lo >= (1.0 - NORM_EQUIVALENCE_TOL) * frozen
                && hi <= (1.0 + NORM_EQUIVALENCE_TOL) * frozen
        })
    }

    pub fn passed(&self) -> bool {
        self.partition_error <= PARTITION_TOL
            && self.bony_residual <= BONY_TOL
            && self.cancellation_residual <= CANCELLATION_TOL
            && self.constants.regressions().is_empty()
            && self.norm_equivalence_ok()
    }
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "FAIL"
    }
}

impl fmt::Display for LpCheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "grid n={} samples={}", self.grid_n, self.samples)?;
        writeln!(
            f,
            "partition of unity   max error {:.3e} (tol {PARTITION_TOL:e}) {}",
            self.partition_error,
            verdict(self.partition_error <= PARTITION_TOL)
        )?;
        writeln!(
            f,
            "bony reconstruction  max residual {:.3e} (tol {BONY_TOL:e}) {}",
            self.bony_residual,
            verdict(self.bony_residual <= BONY_TOL)
        )?;
        writeln!(
            f,
            "cancellation s=2     max residual {:.3e} (tol {CANCELLATION_TOL:e}) {}",
            self.cancellation_residual,
            verdict(self.cancellation_residual <= CANCELLATION_TOL)
        )?;
        let c = &self.constants;
        let regressions = c.regressions();
        writeln!(
            f,
            "constants            forward {:.4} reverse {:.4} commutator {:.4} {}",
            c.forward_max,
            c.reverse_max,
            c.commutator_max,
            if regressions.is_empty() {
                "ok".to_string()
            } else {
                format!("FAIL ({})", regressions.join(", "))
            }
        )?;
        for &(s, lo, hi, frozen) in &self.norm_equivalence {
            let ok = lo >= (1.0 - NORM_EQUIVALENCE_TOL) * frozen
                && hi <= (1.0 + NORM_EQUIVALENCE_TOL) * frozen;
            writeln!(
                f,
                "norm equivalence s={s} ratio [{lo:.4}, {hi:.4}] frozen {frozen:.4} {}",
                verdict(ok)
            )?;
        }
        write!(f, "overall {}", if self.passed() { "PASS" } else { "FAIL" })
    }
}

/// Runs the checks on `grid` with `samples` random pairs (at least 10).
pub fn lp_check(grid: GridSpec, samples: usize) -> Result<LpCheckReport> {
    let lp = LittlewoodPaley::new(grid);
    let mut partition_error: f64 = 0.0;
    for k in grid.active_modes() {
        let sum: f64 = lp
            .shells()
            .map(|q| phi(k.norm(), q).unwrap_or(f64::NAN))
            .sum();
        partition_error = partition_error.max((sum - 1.0).abs());
    }

    let band = reference_band(grid);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut draw = || random_band_field(grid, &band, &mut rng);
    let mut bony_residual: f64 = 0.0;
    let mut cancellation_residual: f64 = 0.0;
    for i in 0..samples {
        let (u, v): (SpectralField, SpectralField) = (draw()?, draw()?);
        let product = dealiased_product(&u, &v)?;
        let err =
            (&lp.bony_split(&u, &v)?.total() - &product).max_abs_coeff() / product.max_abs_coeff();
        bony_residual = bony_residual.max(err);
        if i < samples.min(20) {
            cancellation_residual =
                cancellation_residual.max(cancellation_check(&lp, &u, &v, 2.0)?.residual);
        }
    }

    let constants = empirical_constant_suite(samples, grid)?;
    let norm_equivalence = [0.0, 1.0, 2.0, 3.0]
        .into_iter()
        .zip(FROZEN_NORM_EQUIVALENCE)
        .map(|(s, frozen)| {
            norm_equivalence_range(grid, s, samples.min(10)).map(|(lo, hi)| (s, lo, hi, frozen))
        })
        .collect::<emhd_core::Result<Vec<_>>>()?;
    Ok(LpCheckReport {
        grid_n: grid.n(),
        samples,
        partition_error,
        bony_residual,
        cancellation_residual,
        constants,
        norm_equivalence,
    })
}
