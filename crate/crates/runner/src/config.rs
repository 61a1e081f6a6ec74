//! Run configuration and initial data.

use std::path::{Path, PathBuf};

use emhd_core::diagnostics::{select_theorem_params, theorem_params_with_theta, TheoremParams};
use emhd_core::emhd::{EmhdParams, EmhdState, ParamMode};
use emhd_core::integrator::IntegratorConfig;
use emhd_core::spectral::random::{random_band_field, BandSpec};
use emhd_core::spectral::{GridSpec, SpectralField, WaveVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, RunnerError};

/// Generator used for every random draw; recorded in run metadata.
pub const RNG_NAME: &str = "ChaCha8Rng (rand_chacha 0.3), seed_from_u64";

/// Sobolev index for `E_s` when no theorem parameters exist.
pub const EXPLORATION_INDEX: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// `a = b = 0`
    Zero,
    /// `a = cos x + cos 2y`, `b = 0`
    CosxCos2y,
    /// `a = cos x`, `b = sin y`
    CosxSiny,
    /// `a = cos x + cos y`, `b = cos(x + y)`; `a` is a Laplacian eigenfunction.
    Eigen,
}

impl Preset {
    pub const ALL: [Preset; 4] = [
        Preset::Zero,
        Preset::CosxCos2y,
        Preset::CosxSiny,
        Preset::Eigen,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Zero => "zero",
            Preset::CosxCos2y => "cosx_cos2y",
            Preset::CosxSiny => "cosx_siny",
            Preset::Eigen => "eigen",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialDataSpec {
    Preset {
        name: Preset,
    },
    /// `a` and `b` drawn in turn from the seeded generator.
    RandomBand {
        k_min: u32,
        k_max: u32,
        spectrum_exponent: f64,
        amplitude: f64,
    },
}

impl InitialDataSpec {
    pub fn band(&self) -> Option<BandSpec> {
        match *self {
            InitialDataSpec::RandomBand {
                k_min,
                k_max,
                spectrum_exponent,
                amplitude,
            } => Some(BandSpec {
                k_min,
                k_max,
                spectrum_exponent,
                amplitude,
            }),
            InitialDataSpec::Preset { .. } => None,
        }
    }
}

impl Default for InitialDataSpec {
    fn default() -> Self {
        InitialDataSpec::RandomBand {
            k_min: 1,
            k_max: 8,
            spectrum_exponent: 4.0,
            amplitude: 0.1,
        }
    }
}

/// Deterministic in `(spec, grid band, seed)`; random fields are mean-free.
pub fn make_initial_data(spec: &InitialDataSpec, grid: GridSpec, seed: u64) -> Result<EmhdState> {
    let mode = |kx, ky, amp| SpectralField::cosine(grid, WaveVector::new(kx, ky), amp);
    let (a, b) = match *spec {
        InitialDataSpec::Preset { name } => match name {
            Preset::Zero => (SpectralField::zeros(grid), SpectralField::zeros(grid)),
            Preset::CosxCos2y => (
                &mode(1, 0, 1.0)? + &mode(0, 2, 1.0)?,
                SpectralField::zeros(grid),
            ),
            Preset::CosxSiny => (
                mode(1, 0, 1.0)?,
                SpectralField::sine(grid, WaveVector::new(0, 1), 1.0)?,
            ),
            Preset::Eigen => (&mode(1, 0, 1.0)? + &mode(0, 1, 1.0)?, mode(1, 1, 1.0)?),
        },
        InitialDataSpec::RandomBand { .. } => {
            let band = spec.band().expect("random band");
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_band_field(grid, &band, &mut rng)?;
            let b = random_band_field(grid, &band, &mut rng)?;
            (a, b)
        }
    };
    Ok(EmhdState::new(a, b, 0.0)?)
}

/// Optional overrides for θ and the Sobolev index.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TheoremOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
}

fn default_stride() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub grid: GridSpec,
    #[serde(default)]
    pub seed: u64,
    pub output_dir: PathBuf,
    /// Steps between diagnostics samples; overrides the integrator's own.
    #[serde(default = "default_stride")]
    pub observer_stride: usize,
    /// Times at which coefficient snapshots are written.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub snapshot_times: Vec<f64>,
    /// Emit an SVG chart of `E_s(t)` next to the CSV.
    #[serde(default)]
    pub svg: bool,
    pub params: EmhdParams,
    #[serde(default)]
    pub theorem: TheoremOverrides,
    pub integrator: IntegratorConfig,
    #[serde(default)]
    pub initial_data: InitialDataSpec,
}

impl RunConfig {
    /// Theorem-mode run on a 64² grid with small random band data.
    pub fn example(output_dir: impl Into<PathBuf>) -> Self {
        Self {
            grid: GridSpec::new(64).expect("valid grid"),
            seed: 0,
            output_dir: output_dir.into(),
            observer_stride: 10,
            snapshot_times: Vec::new(),
            svg: false,
            params: EmhdParams::new(1.5, 1.5).expect("valid params"),
            theorem: TheoremOverrides {
                theta: None,
                s: Some(2.0),
            },
            integrator: IntegratorConfig::fixed(1e-3, 0.2),
            initial_data: InitialDataSpec::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| RunnerError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| RunnerError::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| RunnerError::Config(e.to_string()))
    }

    pub fn integrator_config(&self) -> IntegratorConfig {
        self.integrator.with_stride(self.observer_stride)
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.integrator_config().validate()?;
        if let Some(band) = self.initial_data.band() {
            band.validate(self.grid)?;
        }
        if self
            .snapshot_times
            .iter()
            .any(|t| !(t.is_finite() && *t >= 0.0))
        {
            return Err(RunnerError::Config(
                "snapshot times must be finite and >= 0".into(),
            ));
        }
        self.theorem_params()?;
        Ok(())
    }

    /// `None` in exploration mode below the threshold, where no θ exists.
    pub fn theorem_params(&self) -> Result<Option<TheoremParams>> {
        let (a, b) = (self.params.alpha, self.params.beta);
        if self.params.mode == ParamMode::Exploration && a + b <= 2.0 {
            return Ok(None);
        }
        let tp = match self.theorem.theta {
            Some(theta) => theorem_params_with_theta(a, b, theta, self.theorem.s)?,
            None => select_theorem_params(a, b, self.theorem.s)?,
        };
        Ok(Some(tp))
    }

    /// Index used for `E_s` and `D_s`.
    pub fn sobolev_index(&self) -> Result<f64> {
        Ok(match self.theorem_params()? {
            Some(tp) => tp.s,
            None => self.theorem.s.unwrap_or(EXPLORATION_INDEX),
        })
    }
}
