use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use emhd_core::diagnostics::{select_theorem_params, theorem_params_with_theta};
use emhd_core::emhd::ParamMode;
use emhd_core::spectral::GridSpec;
use emhd_runner::lp_check::lp_check;
use emhd_runner::run::CONFIG_ERROR_EXIT;
use emhd_runner::{convergence_study, run, sweep, InitialDataSpec, Preset, RunConfig, RunnerError};

#[derive(Parser)]
#[command(name = "emhd", version, about = "Pseudo-spectral 2½D EMHD simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and write its run directory.
    Run(RunArgs),
    /// Run every (alpha, beta, seed) combination and write summary.csv.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        alphas: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        betas: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "0")]
        seeds: Vec<u64>,
        /// Worker threads; 0 uses one per core.
        #[arg(long, default_value_t = 0)]
        workers: usize,
    },
    /// Self-convergence study over grid resolutions.
    Converge {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_delimiter = ',', default_value = "64,96,128")]
        resolutions: Vec<usize>,
    },
    /// Check the Littlewood–Paley machinery and empirical constants.
    LpCheck {
        #[arg(long, default_value_t = 64)]
        grid: usize,
        #[arg(long, default_value_t = 100)]
        samples: usize,
    },
    /// Print the exponents derived from alpha, beta and s.
    Params {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        s: Option<f64>,
        #[arg(long)]
        theta: Option<f64>,
    },
}

/// Overrides applied on top of `--config` (or the built-in example).
#[derive(Args)]
struct RunArgs {
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; defaults to `$EMHD_OUTPUT_ROOT/<command>`.
    #[arg(long)]
    output_dir: Option<PathBuf>,
    #[arg(long, env = "EMHD_OUTPUT_ROOT", default_value = "runs")]
    output_root: PathBuf,
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    nu_a: Option<f64>,
    #[arg(long)]
    nu_b: Option<f64>,
    /// Allow alpha + beta <= 2.
    #[arg(long)]
    exploration: bool,
    /// Drop the nonlinear terms.
    #[arg(long)]
    linear: bool,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    s: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    adaptive: bool,
    #[arg(long)]
    cfl: Option<f64>,
    #[arg(long)]
    dt_max: Option<f64>,
    #[arg(long)]
    max_steps: Option<usize>,
    #[arg(long)]
    blowup_threshold: Option<f64>,
    #[arg(long)]
    observer_stride: Option<usize>,
    /// Preset initial data: zero, cosx_cos2y, cosx_siny, eigen.
    #[arg(long, conflicts_with_all = ["k_min", "k_max", "spectrum_exponent", "amplitude"])]
    preset: Option<String>,
    #[arg(long)]
    k_min: Option<u32>,
    #[arg(long)]
    k_max: Option<u32>,
    #[arg(long)]
    spectrum_exponent: Option<f64>,
    #[arg(long)]
    amplitude: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    snapshot_times: Vec<f64>,
    #[arg(long)]
    svg: bool,
}

impl RunArgs {
    fn build(&self, command: &str) -> Result<RunConfig, RunnerError> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::example(self.output_root.join(command)),
        };
        if let Some(dir) = &self.output_dir {
            cfg.output_dir = dir.clone();
        }
        if let Some(n) = self.grid {
            cfg.grid = GridSpec::new(n)?;
        }
        let set = |dst: &mut f64, src: Option<f64>| {
            if let Some(v) = src {
                *dst = v;
            }
        };
        let p = &mut cfg.params;
        set(&mut p.alpha, self.alpha);
        set(&mut p.beta, self.beta);
        set(&mut p.nu_a, self.nu_a);
        set(&mut p.nu_b, self.nu_b);
        if self.exploration {
            p.mode = ParamMode::Exploration;
        }
        if self.linear {
            p.nonlinear = false;
        }
        if self.theta.is_some() {
            cfg.theorem.theta = self.theta;
        }
        if self.s.is_some() {
            cfg.theorem.s = self.s;
        }
        let ic = &mut cfg.integrator;
        set(&mut ic.dt, self.dt);
        set(&mut ic.t_end, self.t_end);
        set(&mut ic.cfl_safety, self.cfl);
        set(&mut ic.dt_max, self.dt_max);
        set(&mut ic.blowup_threshold, self.blowup_threshold);
        if self.adaptive {
            ic.adaptive = true;
        }
        if let Some(m) = self.max_steps {
            ic.max_steps = m;
        }
        if let Some(s) = self.observer_stride {
            cfg.observer_stride = s;
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(name) = &self.preset {
            let preset = Preset::parse(name)
                .ok_or_else(|| RunnerError::Config(format!("unknown preset {name}")))?;
            cfg.initial_data = InitialDataSpec::Preset { name: preset };
        } else if self.k_min.is_some()
            || self.k_max.is_some()
            || self.spectrum_exponent.is_some()
            || self.amplitude.is_some()
        {
            let mut band = cfg
                .initial_data
                .band()
                .or_else(|| InitialDataSpec::default().band())
                .expect("default initial data is a band");
            band.k_min = self.k_min.unwrap_or(band.k_min);
            band.k_max = self.k_max.unwrap_or(band.k_max);
            set(&mut band.spectrum_exponent, self.spectrum_exponent);
            set(&mut band.amplitude, self.amplitude);
            cfg.initial_data = InitialDataSpec::RandomBand {
                k_min: band.k_min,
                k_max: band.k_max,
                spectrum_exponent: band.spectrum_exponent,
                amplitude: band.amplitude,
            };
        }
        if !self.snapshot_times.is_empty() {
            cfg.snapshot_times = self.snapshot_times.clone();
        }
        if self.svg {
            cfg.svg = true;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn fail(e: RunnerError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(if e.is_config() {
        CONFIG_ERROR_EXIT as u8
    } else {
        1
    })
}

fn execute(command: Command) -> Result<ExitCode, RunnerError> {
    match command {
        Command::Run(args) => {
            let cfg = args.build("run")?;
            let out = run(&cfg)?;
            let sim = &out.simulation;
            println!("run directory: {}", out.dir.display());
            println!("termination: {}", sim.termination);
            if let Some(fit) = sim.fit {
                println!(
                    "C_hat={:e} T0={} bound_satisfied={} margin={}",
                    fit.c_hat, fit.t0, fit.bound_satisfied, fit.margin
                );
            }
            println!("status: {}", out.status().label());
            Ok(ExitCode::from(out.status().exit_code() as u8))
        }
        Command::Sweep {
            run: args,
            alphas,
            betas,
            seeds,
            workers,
        } => {
            let cfg = args.build("sweep")?;
            let rows = sweep(&cfg, &alphas, &betas, &seeds, workers)?;
            print!("{}", emhd_runner::sweep::summary_csv(&rows)?);
            println!("summary: {}", cfg.output_dir.join("summary.csv").display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Converge {
            run: args,
            resolutions,
        } => {
            let cfg = args.build("converge")?;
            let report = convergence_study(&cfg, &resolutions)?;
            report.write(&cfg.output_dir)?;
            print!("{}", report.differences_csv()?);
            println!("strictly decreasing: {}", report.strictly_decreasing());
            Ok(ExitCode::SUCCESS)
        }
        Command::LpCheck { grid, samples } => {
            let report = lp_check(GridSpec::new(grid)?, samples)?;
            println!("{report}");
            Ok(if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
        Command::Params {
            alpha,
            beta,
            s,
            theta,
        } => {
            let tp = match theta {
                Some(theta) => theorem_params_with_theta(alpha, beta, theta, s)?,
                None => select_theorem_params(alpha, beta, s)?,
            };
            println!(
                "alpha={}\nbeta={}\ntheta={}\nepsilon={}\ngamma={}",
                tp.alpha, tp.beta, tp.theta, tp.epsilon, tp.gamma
            );
            println!(
                "s={}\ns_min={}\ngrowth_bound={}",
                tp.s,
                tp.s_min(),
                tp.growth_bound()
            );
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    execute(cli.command).unwrap_or_else(fail)
}
