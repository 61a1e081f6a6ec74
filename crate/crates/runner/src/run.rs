//! Single runs: integration, Gronwall fit and the run directory.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use emhd_core::diagnostics::{
    gronwall_monitor, DiagnosticsRecorder, DiagnosticsSeries, GronwallFit, TheoremParams,
};
use emhd_core::emhd::EmhdState;
use emhd_core::integrator::{integrate, Termination};
use emhd_core::littlewood_paley::LittlewoodPaley;

use crate::config::{make_initial_data, InitialDataSpec, RunConfig, RNG_NAME};
use crate::error::{Result, RunnerError};
use crate::output;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Completed,
    Blowup,
    BoundViolated,
}

impl RunStatus {
    pub fn exit_code(self) -> i32 {
        match self {
            RunStatus::Completed => 0,
            RunStatus::Blowup => 2,
            RunStatus::BoundViolated => 3,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            RunStatus::Completed => "completed",
            RunStatus::Blowup => "blowup",
            RunStatus::BoundViolated => "bound_violated",
        }
    }
}

/// Exit code for invalid configuration.
pub const CONFIG_ERROR_EXIT: i32 = 4;

/// Result of [`simulate`], held in memory.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub initial: EmhdState,
    /// Final state, or the last finite one on blow-up.
    pub state: EmhdState,
    pub series: DiagnosticsSeries,
    pub steps: usize,
    pub termination: Termination,
    pub sobolev_index: f64,
    pub theorem: Option<TheoremParams>,
    pub fit: Option<GronwallFit>,
    /// States at the configured snapshot times that were reached.
    pub snapshots: Vec<EmhdState>,
}

impl Simulation {
    pub fn status(&self) -> RunStatus {
        if self.termination.is_blowup() {
            RunStatus::Blowup
        } else if self.fit.is_some_and(|f| !f.bound_satisfied) {
            RunStatus::BoundViolated
        } else {
            RunStatus::Completed
        }
    }
}

fn segment_ends(config: &RunConfig) -> Vec<(f64, bool)> {
    let t_end = config.integrator.t_end;
    let mut snaps: Vec<f64> = config
        .snapshot_times
        .iter()
        .copied()
        .filter(|&t| t > 0.0 && t <= t_end)
        .collect();
    snaps.sort_by(f64::total_cmp);
    snaps.dedup();
    let mut ends: Vec<(f64, bool)> = snaps.into_iter().map(|t| (t, true)).collect();
    if ends.last().map(|e| e.0) != Some(t_end) {
        ends.push((t_end, false));
    }
    ends
}

/// Runs the configured experiment without touching the filesystem.
///
/// With snapshot times the run is integrated in segments ending at each
/// snapshot, so fixed steps are spread evenly within each segment.
pub fn simulate(config: &RunConfig) -> Result<Simulation> {
    config.validate()?;
    let initial = make_initial_data(&config.initial_data, config.grid, config.seed)?;
    let theorem = config.theorem_params()?;
    let s = config.sobolev_index()?;
    let lp = LittlewoodPaley::new(config.grid);
    let mut recorder = DiagnosticsRecorder::new(&lp, s, config.params.alpha, config.params.beta);

    let base = config.integrator_config();
    let mut snapshots = Vec::new();
    if config.snapshot_times.contains(&0.0) {
        snapshots.push(initial.clone());
    }
    let mut state = initial.clone();
    let mut steps = 0usize;
    let mut termination = Termination::Completed;
    for (end, is_snapshot) in segment_ends(config) {
        let mut seg = base;
        seg.t_end = end;
        seg.max_steps = base.max_steps - steps;
        let out = integrate(&state, &config.params, &seg, &mut [&mut recorder])?;
        steps += out.steps;
        state = out.state;
        termination = out.termination;
        if termination != Termination::Completed {
            break;
        }
        if is_snapshot {
            snapshots.push(state.clone());
        }
        if steps >= base.max_steps && end < config.integrator.t_end {
            termination = Termination::MaxSteps;
            break;
        }
    }

    let fit = match theorem {
        Some(tp) if recorder.series.records.len() >= 3 => {
            Some(gronwall_monitor(&recorder.series, &tp)?)
        }
        Some(_) => {
            log::warn!(
                "only {} diagnostics samples; Gronwall fit skipped",
                recorder.series.records.len()
            );
            None
        }
        None => None,
    };
    Ok(Simulation {
        initial,
        state,
        series: recorder.series,
        steps,
        termination,
        sobolev_index: s,
        theorem,
        fit,
        snapshots,
    })
}

/// A finished run and the directory it was written to.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub dir: PathBuf,
    pub simulation: Simulation,
    pub wall_seconds: f64,
}

impl RunOutcome {
    pub fn status(&self) -> RunStatus {
        self.simulation.status()
    }
}

fn describe_initial(spec: &InitialDataSpec) -> String {
    match *spec {
        InitialDataSpec::Preset { name } => format!("preset:{}", name.name()),
        InitialDataSpec::RandomBand {
            k_min,
            k_max,
            spectrum_exponent,
            amplitude,
        } => format!(
            "random_band:k_min={k_min},k_max={k_max},spectrum_exponent={spectrum_exponent},amplitude={amplitude}"
        ),
    }
}

/// Key/value metadata describing a finished simulation.
pub fn metadata(
    config: &RunConfig,
    sim: &Simulation,
    wall_seconds: f64,
) -> BTreeMap<String, String> {
    let mut m = BTreeMap::new();
    let mut put = |k: &str, v: String| {
        m.insert(k.to_string(), v);
    };
    let p = &config.params;
    let ic = config.integrator_config();
    put("version", crate::VERSION.to_string());
    put("rng", RNG_NAME.to_string());
    put("seed", config.seed.to_string());
    put("grid_n", config.grid.n().to_string());
    put("alpha", p.alpha.to_string());
    put("beta", p.beta.to_string());
    put("nu_a", p.nu_a.to_string());
    put("nu_b", p.nu_b.to_string());
    put("mode", format!("{:?}", p.mode).to_lowercase());
    put("nonlinear", p.nonlinear.to_string());
    put("s", sim.sobolev_index.to_string());
    put("initial_data", describe_initial(&config.initial_data));
    put("adaptive", ic.adaptive.to_string());
    put("dt", ic.dt.to_string());
    put("dt_max", ic.dt_max.to_string());
    put("cfl_safety", ic.cfl_safety.to_string());
    put("t_end", ic.t_end.to_string());
    put("observer_stride", ic.observer_stride.to_string());
    put("blowup_threshold", ic.blowup_threshold.to_string());
    put("termination", sim.termination.label().to_string());
    if let Termination::Blowup { time } | Termination::ThresholdExceeded { time, .. } =
        sim.termination
    {
        put("termination_time", time.to_string());
    }
    put("status", sim.status().label().to_string());
    put("exit_code", sim.status().exit_code().to_string());
    put("steps", sim.steps.to_string());
    put("final_time", sim.state.time.to_string());
    put("records", sim.series.records.len().to_string());
    put("wall_clock_seconds", format!("{wall_seconds:.3}"));
    let now = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs());
    put("finished_unix", now.to_string());
    if let Some(tp) = sim.theorem {
        put("theta", tp.theta.to_string());
        put("epsilon", tp.epsilon.to_string());
        put("gamma", tp.gamma.to_string());
    }
    match sim.fit {
        Some(f) => {
            put("c_hat", f.c_hat.to_string());
            put("t0", f.t0.to_string());
            put("bound_satisfied", f.bound_satisfied.to_string());
        }
        None => put("gronwall", "not fitted".to_string()),
    }
    for (k, v) in &sim.series.metadata {
        m.entry(k.clone()).or_insert_with(|| v.clone());
    }
    m
}

/// Runs `config` and writes `config.toml`, `metadata.txt`, `series.csv`,
/// `gronwall.txt` (theorem mode), snapshots and the optional SVG into
/// `config.output_dir`. Blow-up is reported through the status, not as an
/// error.
pub fn run(config: &RunConfig) -> Result<RunOutcome> {
    config.validate()?;
    let dir = config.output_dir.clone();
    std::fs::create_dir_all(&dir).map_err(|e| RunnerError::io(&dir, e))?;
    output::write_file(&dir.join("config.toml"), config.to_toml()?)?;

    let start = Instant::now();
    let sim = simulate(config)?;
    let wall_seconds = start.elapsed().as_secs_f64();

    output::write_file(
        &dir.join("series.csv"),
        output::series_csv(&sim.series.records)?,
    )?;
    if let (Some(tp), Some(fit)) = (sim.theorem, sim.fit) {
        output::write_file(
            &dir.join("gronwall.txt"),
            output::gronwall_report(&tp, &fit),
        )?;
    }
    for snap in &sim.snapshots {
        output::write_snapshot(&dir.join(output::snapshot_file_name(snap.time)), snap)?;
    }
    if config.svg {
        let bound = sim
            .theorem
            .zip(sim.series.records.first())
            .map(|(tp, r)| tp.growth_bound() * r.e_s);
        output::write_file(
            &dir.join("energy.svg"),
            output::energy_svg(&sim.series.records, bound),
        )?;
    }
    let meta = metadata(config, &sim, wall_seconds);
    output::write_file(&dir.join("metadata.txt"), output::key_values(&meta))?;
    log::info!(
        "run finished: {} after {} steps ({:.2} s)",
        sim.termination,
        sim.steps,
        wall_seconds
    );
    Ok(RunOutcome {
        dir,
        simulation: sim,
        wall_seconds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Preset;
    use emhd_core::integrator::IntegratorConfig;

    fn preset(name: Preset) -> RunConfig {
        let mut cfg = RunConfig::example("unused");
        cfg.grid = emhd_core::spectral::GridSpec::new(32).unwrap();
        cfg.initial_data = InitialDataSpec::Preset { name };
        cfg.integrator = IntegratorConfig::fixed(1e-2, 0.1);
        cfg.observer_stride = 1;
        cfg
    }

    #[test]
    fn segments_cover_snapshots_then_end() {
        let mut cfg = preset(Preset::Zero);
        cfg.snapshot_times = vec![0.05, 0.0, 0.2, 0.05];
        assert_eq!(segment_ends(&cfg), vec![(0.05, true), (0.1, false)]);
        cfg.snapshot_times = vec![0.1];
        assert_eq!(segment_ends(&cfg), vec![(0.1, true)]);
    }

    #[test]
    fn snapshots_taken_at_requested_times() {
        let mut cfg = preset(Preset::CosxSiny);
        cfg.snapshot_times = vec![0.0, 0.05, 0.1];
        let sim = simulate(&cfg).unwrap();
        let times: Vec<f64> = sim.snapshots.iter().map(|s| s.time).collect();
        assert_eq!(times.len(), 3);
        assert_eq!(times[0], 0.0);
        assert!((times[1] - 0.05).abs() < 1e-15 && (times[2] - 0.1).abs() < 1e-15);
        assert_eq!(sim.series.records.len(), 11);
    }

    #[test]
    fn status_codes() {
        assert_eq!(RunStatus::Completed.exit_code(), 0);
        assert_eq!(RunStatus::Blowup.exit_code(), 2);
        assert_eq!(RunStatus::BoundViolated.exit_code(), 3);
        let mut cfg = preset(Preset::Eigen);
        cfg.integrator.blowup_threshold = 1e-6;
        let sim = simulate(&cfg).unwrap();
        assert_eq!(sim.status(), RunStatus::Blowup);
        assert_eq!(sim.steps, 0);
    }
}
