//! Configuration, persistence, sweeps and convergence studies for the
//! 2½D EMHD simulator.

pub mod config;
pub mod convergence;
pub mod error;
pub mod lp_check;
pub mod output;
pub mod run;
pub mod sweep;

pub use config::{make_initial_data, InitialDataSpec, Preset, RunConfig, TheoremOverrides};
pub use convergence::{convergence_study, ConvergenceReport};
pub use error::{Result, RunnerError};
pub use run::{run, simulate, RunOutcome, RunStatus, Simulation};
pub use sweep::{sweep, SweepRow};

/// Crate version written into run metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
