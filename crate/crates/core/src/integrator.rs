//! Integrating-factor RK4 for the Galerkin system.
//!
//! The dissipation `−ν|k|^s` is diagonal, so the linear semigroup is applied
//! exactly per mode and only the Hall terms go through the RK4 stages:
//!
//! ```text
//! k1 = N(u)
//! k2 = N(E½ (u + h/2 k1))
//! k3 = N(E½ u + h/2 k2)
//! k4 = N(E u + h E½ k3)
//! u' = E u + h/6 (E k1 + 2 E½ (k2 + k3) + k4)
//! ```
//!
//! with `E = e^{Lh}`, `E½ = e^{Lh/2}`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::emhd::{nonlinear_tendency, EmhdParams, EmhdState};
use crate::error::{Error, Result};
use crate::spectral::{fractional_symbol, inverse_transform, SpectralField};

/// Added to the frequency estimate so a zero state yields a finite step.
pub const DT_GUARD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    /// Step size for fixed stepping; ignored when `adaptive` is set.
    pub dt: f64,
    /// Absolute end time.
    pub t_end: f64,
    #[serde(default = "default_cfl")]
    pub cfl_safety: f64,
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
    /// Run stops once an observer reports `E_s` above this.
    #[serde(default = "default_blowup")]
    pub blowup_threshold: f64,
    #[serde(default)]
    pub adaptive: bool,
    #[serde(default = "default_dt_max")]
    pub dt_max: f64,
    #[serde(default = "default_stride")]
    pub observer_stride: usize,
}

fn default_cfl() -> f64 {
    0.4
}
fn default_max_steps() -> usize {
    1_000_000
}
fn default_blowup() -> f64 {
    1e8
}
fn default_dt_max() -> f64 {
    1e-2
}
fn default_stride() -> usize {
    1
}

impl IntegratorConfig {
    pub fn fixed(dt: f64, t_end: f64) -> Self {
        Self {
            dt,
            t_end,
            cfl_safety: default_cfl(),
            max_steps: default_max_steps(),
            blowup_threshold: default_blowup(),
            adaptive: false,
            dt_max: default_dt_max(),
            observer_stride: default_stride(),
        }
    }

    pub fn adaptive(t_end: f64, cfl_safety: f64, dt_max: f64) -> Self {
        Self {
            adaptive: true,
            cfl_safety,
            dt_max,
            dt: dt_max,
            ..Self::fixed(dt_max, t_end)
        }
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.observer_stride = stride;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        if !self.adaptive && !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt = {} must be positive", self.dt));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return bad(format!("t_end = {} must be nonnegative", self.t_end));
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return bad(format!("cfl_safety = {} not in (0, 1]", self.cfl_safety));
        }
        if self.adaptive && !(self.dt_max > 0.0 && self.dt_max.is_finite()) {
            return bad(format!("dt_max = {} must be positive", self.dt_max));
        }
        if self.max_steps == 0 || self.observer_stride == 0 {
            return bad("max_steps and observer_stride must be positive".into());
        }
        if self.blowup_threshold.is_nan() || self.blowup_threshold <= 0.0 {
            return bad("blowup_threshold must be positive".into());
        }
        Ok(())
    }
}

/// Per-mode integrating factors `e^{−ν|k|^s h/2}` and `e^{−ν|k|^s h}`.
struct Semigroup {
    half: Vec<f64>,
    full: Vec<f64>,
}

impl Semigroup {
    fn new(field: &SpectralField, nu: f64, s: f64, h: f64) -> Self {
        let g = field.grid();
        let mut half = vec![0.0; g.len()];
        let mut full = vec![0.0; g.len()];
        for (idx, k) in g.active_indexed() {
            let rate = -nu * fractional_symbol(k, s);
            half[idx] = (rate * 0.5 * h).exp();
            full[idx] = (rate * h).exp();
        }
        Self { half, full }
    }
}

/// One IFRK4 step of size `dt`.
pub fn step(state: &EmhdState, params: &EmhdParams, dt: f64) -> Result<EmhdState> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParams(format!("dt = {dt} must be positive")));
    }
    params.validate()?;
    let ea = Semigroup::new(&state.a, params.nu_a, params.alpha, dt);
    let eb = Semigroup::new(&state.b, params.nu_b, params.beta, dt);
    let h = dt;
    let at = |t: f64, a: SpectralField, b: SpectralField| EmhdState { a, b, time: t };
    let nl = |s: &EmhdState| nonlinear_tendency(s, params);

    let k1 = nl(state)?;
    let s2 = at(
        state.time + 0.5 * h,
        state.a.add_scaled(0.5 * h, &k1.da_dt).apply_table(&ea.half),
        state.b.add_scaled(0.5 * h, &k1.db_dt).apply_table(&eb.half),
    );
    let k2 = nl(&s2)?;
    let half_a = state.a.apply_table(&ea.half);
    let half_b = state.b.apply_table(&eb.half);
    let s3 = at(
        state.time + 0.5 * h,
        half_a.add_scaled(0.5 * h, &k2.da_dt),
        half_b.add_scaled(0.5 * h, &k2.db_dt),
    );
    let k3 = nl(&s3)?;
    let s4 = at(
        state.time + h,
        state
            .a
            .apply_table(&ea.full)
            .add_scaled(h, &k3.da_dt.apply_table(&ea.half)),
        state
            .b
            .apply_table(&eb.full)
            .add_scaled(h, &k3.db_dt.apply_table(&eb.half)),
    );
    let k4 = nl(&s4)?;

    let combine = |u: &SpectralField, e: &Semigroup, k: [&SpectralField; 4]| {
        let mid = (k[1] + k[2]).apply_table(&e.half).scale(2.0);
        let incr = &(&k[0].apply_table(&e.full) + &mid) + k[3];
        u.apply_table(&e.full).add_scaled(h / 6.0, &incr)
    };
    let next = EmhdState {
        a: combine(&state.a, &ea, [&k1.da_dt, &k2.da_dt, &k3.da_dt, &k4.da_dt]),
        b: combine(&state.b, &eb, [&k1.db_dt, &k2.db_dt, &k3.db_dt, &k4.db_dt]),
        time: state.time + h,
    };
    if !next.is_finite() {
        return Err(Error::BlowupDetected { time: next.time });
    }
    Ok(next)
}

/// Step size `cfl_safety / (max|∇a| · k_max² + guard)`, capped at `dt_max`.
///
/// Hall (whistler-type) waves at wavenumber `k` travel with speed `~|∇a| k`,
/// so the fastest resolved frequency scales like `|∇a| k_max²` with
/// `k_max = cutoff · √2`.
pub fn choose_dt(state: &EmhdState, cfl_safety: f64, dt_max: f64) -> Result<f64> {
    let ax = inverse_transform(&state.a.partial_x())?;
    let ay = inverse_transform(&state.a.partial_y())?;
    let grad_max = ax
        .samples()
        .iter()
        .zip(ay.samples())
        .map(|(x, y)| x.hypot(*y))
        .fold(0.0, f64::max);
    let k_max = state.grid().k_max();
    let dt = cfl_safety / (grad_max * k_max * k_max + DT_GUARD);
    Ok(dt.min(dt_max))
}

/// Callback invoked on the observer stride. Returning `Some(e)` reports the
/// monitored size (e.g. `E_s`) that is compared with the blow-up threshold.
pub trait Observer {
    fn observe(&mut self, state: &EmhdState) -> Result<Option<f64>>;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum Termination {
    Completed,
    MaxSteps,
    Blowup { time: f64 },
    ThresholdExceeded { time: f64, value: f64 },
}

impl Termination {
    pub fn label(&self) -> &'static str {
        match self {
            Termination::Completed => "completed",
            Termination::MaxSteps => "max_steps",
            Termination::Blowup { .. } => "blowup",
            Termination::ThresholdExceeded { .. } => "threshold_exceeded",
        }
    }

    pub fn is_blowup(&self) -> bool {
        matches!(
            self,
            Termination::Blowup { .. } | Termination::ThresholdExceeded { .. }
        )
    }
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Termination::Blowup { time } => write!(f, "blowup at t={time}"),
            Termination::ThresholdExceeded { time, value } => {
                write!(f, "threshold exceeded at t={time} (E_s={value:e})")
            }
            other => f.write_str(other.label()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Integration {
    /// Final state, or the last finite one on blow-up.
    pub state: EmhdState,
    pub steps: usize,
    pub termination: Termination,
}

fn notify(
    observers: &mut [&mut dyn Observer],
    state: &EmhdState,
    threshold: f64,
) -> Result<Option<f64>> {
    let mut exceeded = None;
    for obs in observers.iter_mut() {
        if let Some(v) = obs.observe(state)? {
            if v.is_nan() || v > threshold {
                exceeded = Some(v);
            }
        }
    }
    Ok(exceeded)
}

/// Advances `state0` to `config.t_end`, calling observers at the start and
/// every `observer_stride` steps.
///
/// Fixed stepping uses `ceil(duration/dt)` equal steps so samples stay
/// uniformly spaced and the run ends exactly at `t_end`.
pub fn integrate(
    state0: &EmhdState,
    params: &EmhdParams,
    config: &IntegratorConfig,
    observers: &mut [&mut dyn Observer],
) -> Result<Integration> {
    config.validate()?;
    params.validate()?;
    let t0 = state0.time;
    let mut state = state0.clone();
    let done = |state: EmhdState, steps, termination| {
        Ok(Integration {
            state,
            steps,
            termination,
        })
    };
    if let Some(value) = notify(observers, &state, config.blowup_threshold)? {
        return done(state, 0, Termination::ThresholdExceeded { time: t0, value });
    }
    let duration = config.t_end - t0;
    if duration <= 0.0 {
        return done(state, 0, Termination::Completed);
    }
    let fixed_steps =
        (!config.adaptive).then(|| ((duration / config.dt) - 1e-9).ceil().max(1.0) as usize);
    let mut steps = 0usize;
    loop {
        let remaining = config.t_end - state.time;
        let finished = match fixed_steps {
            Some(n) => steps >= n,
            None => remaining <= 1e-12 * config.t_end.abs().max(1.0),
        };
        if finished {
            return done(state, steps, Termination::Completed);
        }
        if steps >= config.max_steps {
            return done(state, steps, Termination::MaxSteps);
        }
        let h = match fixed_steps {
            Some(n) => duration / n as f64,
            None => choose_dt(&state, config.cfl_safety, config.dt_max)?.min(remaining),
        };
        let mut next = match step(&state, params, h) {
            Ok(next) => next,
            Err(Error::BlowupDetected { time }) => {
                return done(state, steps, Termination::Blowup { time });
            }
            Err(e) => return Err(e),
        };
        steps += 1;
        next.time = match fixed_steps {
            Some(n) if steps == n => config.t_end,
            Some(n) => t0 + duration * steps as f64 / n as f64,
            None => next.time,
        };
        state = next;
        if steps.is_multiple_of(config.observer_stride) {
            if let Some(value) = notify(observers, &state, config.blowup_threshold)? {
                let time = state.time;
                return done(state, steps, Termination::ThresholdExceeded { time, value });
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{GridSpec, WaveVector};

    fn grid() -> GridSpec {
        GridSpec::new(32).unwrap()
    }

    #[test]
    fn single_mode_decays_exactly() {
        let g = grid();
        let k = WaveVector::new(3, 2);
        let a = SpectralField::cosine(g, k, 0.7).unwrap();
        let state = EmhdState::new(a.clone(), SpectralField::zeros(g), 0.0).unwrap();
        let p = EmhdParams::new(1.3, 1.2).unwrap();
        for dt in [1e-3, 0.05, 0.7] {
            let next = step(&state, &p, dt).unwrap();
            let expect = (-k.norm().powf(1.3) * dt).exp();
            let c = next.a.coeff(k).re / a.coeff(k).re;
            assert!(
                (c - expect).abs() <= 1e-15 * expect.max(1e-300) + 1e-300,
                "dt {dt}"
            );
            assert!(next.b.max_abs_coeff() < 1e-13);
        }
    }

    #[test]
    fn zero_state_stays_zero() {
        let g = grid();
        let p = EmhdParams::new(1.5, 1.5).unwrap();
        let next = step(&EmhdState::zeros(g), &p, 0.01).unwrap();
        assert_eq!(next.a.max_abs_coeff(), 0.0);
        assert_eq!(next.b.max_abs_coeff(), 0.0);
    }

    #[test]
    fn choose_dt_cases() {
        let g = GridSpec::new(64).unwrap();
        let zero = EmhdState::zeros(g);
        assert_eq!(choose_dt(&zero, 0.4, 0.01).unwrap(), 0.01);

        let a = SpectralField::cosine(g, WaveVector::new(1, 0), 1.0).unwrap();
        let s = EmhdState::new(a.clone(), SpectralField::zeros(g), 0.0).unwrap();
        let dt = choose_dt(&s, 0.4, 1.0).unwrap();
        // max|sin x| = 1 on the 64-point grid, k_max² = 2·21²
        assert!((dt - 0.4 / 882.0).abs() < 1e-15);

        let s2 = EmhdState::new(a.scale(2.0), SpectralField::zeros(g), 0.0).unwrap();
        let dt2 = choose_dt(&s2, 0.4, 1.0).unwrap();
        assert!((dt / dt2 - 2.0).abs() < 1e-12);
        assert!(choose_dt(&s, 0.2, 1.0).unwrap() < dt);
    }

    #[test]
    fn zero_duration_returns_initial_state() {
        let g = grid();
        let a = SpectralField::cosine(g, WaveVector::new(1, 1), 1.0).unwrap();
        let s = EmhdState::new(a, SpectralField::zeros(g), 0.0).unwrap();
        let p = EmhdParams::new(1.5, 1.5).unwrap();
        let out = integrate(&s, &p, &IntegratorConfig::fixed(0.01, 0.0), &mut []).unwrap();
        assert_eq!(out.state, s);
        assert_eq!(out.steps, 0);
        assert_eq!(out.termination, Termination::Completed);
    }

    struct Counter(Vec<f64>);

    impl Observer for Counter {
        fn observe(&mut self, state: &EmhdState) -> Result<Option<f64>> {
            self.0.push(state.time);
            Ok(Some(state.a.max_abs_coeff()))
        }
    }

    #[test]
    fn stride_and_termination() {
        let g = grid();
        let a = SpectralField::cosine(g, WaveVector::new(1, 1), 1.0).unwrap();
        let s = EmhdState::new(a, SpectralField::zeros(g), 0.0).unwrap();
        let p = EmhdParams::new(1.5, 1.5).unwrap();
        let mut obs = Counter(Vec::new());
        let cfg = IntegratorConfig::fixed(0.01, 0.1).with_stride(2);
        let out = integrate(&s, &p, &cfg, &mut [&mut obs]).unwrap();
        assert_eq!(out.steps, 10);
        assert_eq!(out.state.time, 0.1);
        assert_eq!(obs.0.len(), 6);

        let mut obs = Counter(Vec::new());
        let cfg = IntegratorConfig {
            max_steps: 3,
            ..IntegratorConfig::fixed(0.01, 0.1)
        };
        let out = integrate(&s, &p, &cfg, &mut [&mut obs]).unwrap();
        assert_eq!(out.termination, Termination::MaxSteps);
        assert_eq!(out.steps, 3);

        let mut obs = Counter(Vec::new());
        let cfg = IntegratorConfig {
            blowup_threshold: 0.1,
            ..IntegratorConfig::fixed(0.01, 0.1)
        };
        let out = integrate(&s, &p, &cfg, &mut [&mut obs]).unwrap();
        assert!(matches!(
            out.termination,
            Termination::ThresholdExceeded { .. }
        ));
    }
}
