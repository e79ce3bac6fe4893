//! Named Monte Carlo experiments over first-passage percolation, their
//! configs and their reports.

pub mod config;
pub mod error;
pub mod report;
pub mod runners;

pub use config::{load_config, parse_config, ExperimentConfig};
pub use error::{ExpError, Result};
pub use report::{write_report, ExperimentReport, Verdict};

/// Validates `cfg` and runs the experiment it names. `workers` sets the
/// thread count; results do not depend on it.
pub fn run_experiment(cfg: &ExperimentConfig, workers: Option<usize>) -> Result<ExperimentReport> {
    let exp = runners::find(&cfg.name)?;
    cfg.validate()?;
    cfg.check_params(exp.params)?;
    (exp.run)(cfg, workers)
}

/// (name, summary) of every experiment.
pub fn list() -> Vec<(&'static str, &'static str)> {
    runners::EXPERIMENTS.iter().map(|e| (e.name, e.summary)).collect()
}
