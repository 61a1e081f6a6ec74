//! Self-convergence of the Galerkin truncation under grid refinement.

use std::path::Path;

use emhd_core::emhd::EmhdState;
use emhd_core::integrator::Termination;
use emhd_core::spectral::{GridSpec, SpectralField};
use emhd_core::Error;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{Result, RunnerError};
use crate::output;
use crate::run::simulate;

/// Difference of two final states on the modes of the smallest grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairDifference {
    pub coarse: usize,
    pub fine: usize,
    /// `(‖∇δa‖² + ‖δb‖²)^{1/2}`
    pub norm: f64,
}

/// Shell-binned spectrum of one final state: for each integer shell
/// `m = round(|k|)`, `(Σ |k|²|â_k|² + |b̂_k|²)^{1/2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub n: usize,
    pub shells: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub resolutions: Vec<usize>,
    pub terminations: Vec<Termination>,
    /// Consecutive pairs in the order given.
    pub differences: Vec<PairDifference>,
    /// `log(d_i / d_{i+1}) / log(N_{i+2} / N_{i+1})` with `N` the band
    /// cutoff; infinite or NaN when a difference is zero.
    pub rates: Vec<f64>,
    pub spectra: Vec<Spectrum>,
}

impl ConvergenceReport {
    /// All differences finite and each strictly below the previous one.
    pub fn strictly_decreasing(&self) -> bool {
        self.differences.iter().all(|d| d.norm.is_finite())
            && self.differences.windows(2).all(|w| w[1].norm < w[0].norm)
    }

    /// Columns `coarse,fine,difference,rate`; the first row has no rate.
    pub fn differences_csv(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Row {
            coarse: usize,
            fine: usize,
            difference: f64,
            rate: Option<f64>,
        }
        output::to_csv(self.differences.iter().enumerate().map(|(i, d)| Row {
            coarse: d.coarse,
            fine: d.fine,
            difference: d.norm,
            rate: i.checked_sub(1).map(|j| self.rates[j]),
        }))
    }

    /// Columns `n,k,amplitude`.
    pub fn spectrum_csv(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Row {
            n: usize,
            k: usize,
            amplitude: f64,
        }
        output::to_csv(self.spectra.iter().flat_map(|s| {
            s.shells.iter().enumerate().map(|(k, &amplitude)| Row {
                n: s.n,
                k,
                amplitude,
            })
        }))
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| RunnerError::io(dir, e))?;
        output::write_file(&dir.join("convergence.csv"), self.differences_csv()?)?;
        output::write_file(&dir.join("spectrum.csv"), self.spectrum_csv()?)
    }
}

fn restricted_difference(x: &EmhdState, y: &EmhdState, common: GridSpec) -> f64 {
    let da = &x.a.resample(common) - &y.a.resample(common);
    let db = &x.b.resample(common) - &y.b.resample(common);
    (da.partial_x().l2_norm_sq() + da.partial_y().l2_norm_sq() + db.l2_norm_sq()).sqrt()
}

pub fn shell_spectrum(state: &EmhdState) -> Spectrum {
    let g = state.grid();
    let mut shells = vec![0.0; g.k_max().round() as usize + 1];
    let (a, b): (&SpectralField, &SpectralField) = (&state.a, &state.b);
    for (idx, k) in g.active_indexed() {
        let m = k.norm().round() as usize;
        shells[m] += k.norm_sq() * a.coeffs()[idx].norm_sqr() + b.coeffs()[idx].norm_sqr();
    }
    for v in &mut shells {
        *v = v.sqrt();
    }
    Spectrum { n: g.n(), shells }
}

/// Runs `base` at each resolution with identical time stepping and
/// compares final states on the common modes.
pub fn convergence_study(base: &RunConfig, resolutions: &[usize]) -> Result<ConvergenceReport> {
    if resolutions.len() < 3 {
        return Err(RunnerError::Config(format!(
            "convergence study needs at least 3 resolutions, got {}",
            resolutions.len()
        )));
    }
    let grids = resolutions
        .iter()
        .map(|&n| GridSpec::new(n))
        .collect::<std::result::Result<Vec<_>, Error>>()?;
    let common = *grids.iter().min_by_key(|g| g.n()).expect("nonempty");
    if let Some(band) = base.initial_data.band() {
        band.validate(common)?;
    }
    let sims = grids
        .par_iter()
        .map(|&g| {
            let mut cfg = base.clone();
            cfg.grid = g;
            simulate(&cfg)
        })
        .collect::<Result<Vec<_>>>()?;

    let differences: Vec<PairDifference> = sims
        .windows(2)
        .map(|w| PairDifference {
            coarse: w[0].state.grid().n(),
            fine: w[1].state.grid().n(),
            norm: restricted_difference(&w[0].state, &w[1].state, common),
        })
        .collect();
    let cutoff = |n: usize| {
        GridSpec::new(n)
            .map(|g| g.dealias_cutoff() as f64)
            .unwrap_or(f64::NAN)
    };
    let rates = differences
        .windows(2)
        .map(|w| (w[0].norm / w[1].norm).ln() / (cutoff(w[1].fine) / cutoff(w[0].fine)).ln())
        .collect();
    Ok(ConvergenceReport {
        resolutions: resolutions.to_vec(),
        terminations: sims.iter().map(|s| s.termination).collect(),
        differences,
        rates,
        spectra: sims.iter().map(|s| shell_spectrum(&s.state)).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{InitialDataSpec, Preset};
    use emhd_core::integrator::IntegratorConfig;

    fn base() -> RunConfig {
        let mut cfg = RunConfig::example("unused");
        cfg.integrator = IntegratorConfig::fixed(1e-2, 0.05);
        cfg.initial_data = InitialDataSpec::Preset {
            name: Preset::CosxSiny,
        };
        cfg
    }

    #[test]
    fn needs_three_resolutions() {
        assert!(convergence_study(&base(), &[32, 64])
            .unwrap_err()
            .is_config());
    }

    #[test]
    fn repeated_resolution_gives_zero_difference() {
        let rep = convergence_study(&base(), &[32, 32, 32]).unwrap();
        assert!(rep.differences.iter().all(|d| d.norm == 0.0));
        assert!(!rep.strictly_decreasing());
        assert_eq!(rep.spectra.len(), 3);
    }

    #[test]
    fn spectrum_of_single_mode() {
        let g = GridSpec::new(16).unwrap();
        let a = SpectralField::cosine(g, emhd_core::spectral::WaveVector::new(2, 0), 2.0).unwrap();
        let st = EmhdState::new(a, SpectralField::zeros(g), 0.0).unwrap();
        let sp = shell_spectrum(&st);
        // Two modes of magnitude 1 at |k| = 2.
        assert!((sp.shells[2] - (2.0f64 * 4.0).sqrt()).abs() < 1e-14);
        assert_eq!(sp.shells.iter().filter(|v| **v > 0.0).count(), 1);
    }
}
