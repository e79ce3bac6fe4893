mod animals;
mod bernoulli_onedee;
mod borel_bound;
mod fkg;
mod length_tail;
mod lower_tail;
mod lower_upper_tail;
mod oriented;
mod uniform_ratio;
mod upper_tail;

pub use lower_upper_tail::{exact_expectation, grid_graph_window};

use crate::config::{ExperimentConfig, ParamKind};
use crate::error::{ExpError, Result};
use crate::report::ExperimentReport;
use fpp_core::empirical::mc_collect;
use fpp_core::geodesics::{shortest_passage_adaptive, GeodesicResult};
use fpp_core::{Environment, FppError, Point};

pub struct Experiment {
    pub name: &'static str,
    pub summary: &'static str,
    pub params: &'static [(&'static str, ParamKind)],
    pub run: fn(&ExperimentConfig, Option<usize>) -> Result<ExperimentReport>,
}

pub const EXPERIMENTS: [Experiment; 10] = [
    fkg::EXPERIMENT,
    upper_tail::EXPERIMENT,
    lower_upper_tail::EXPERIMENT,
    borel_bound::EXPERIMENT,
    lower_tail::EXPERIMENT,
    bernoulli_onedee::EXPERIMENT,
    uniform_ratio::EXPERIMENT,
    length_tail::EXPERIMENT,
    oriented::EXPERIMENT,
    animals::EXPERIMENT,
];

pub fn find(name: &str) -> Result<&'static Experiment> {
    EXPERIMENTS.iter().find(|e| e.name == name).ok_or_else(|| ExpError::UnknownExperiment(name.to_string()))
}

const DEFAULT_CONFIGS: [(&str, &str); 10] = [
    ("fkg", include_str!("../../configs/fkg.cfg")),
    ("upper_tail", include_str!("../../configs/upper_tail.cfg")),
    ("lower_upper_tail", include_str!("../../configs/lower_upper_tail.cfg")),
    ("borel_bound", include_str!("../../configs/borel_bound.cfg")),
    ("lower_tail", include_str!("../../configs/lower_tail.cfg")),
    ("bernoulli_onedee", include_str!("../../configs/bernoulli_onedee.cfg")),
    ("uniform_ratio", include_str!("../../configs/uniform_ratio.cfg")),
    ("length_tail", include_str!("../../configs/length_tail.cfg")),
    ("oriented", include_str!("../../configs/oriented.cfg")),
    ("animals", include_str!("../../configs/animals.cfg")),
];

/// The shipped config of `name` (the files under `configs/`).
pub fn default_config_text(name: &str) -> Result<&'static str> {
    DEFAULT_CONFIGS.iter().find(|c| c.0 == name).map(|c| c.1).ok_or_else(|| ExpError::UnknownExperiment(name.to_string()))
}

pub fn default_config(name: &str) -> Result<ExperimentConfig> {
    crate::config::parse_config(default_config_text(name)?)
}

/// Selected geodesic with padding doublings; `censored` if it still
/// touches the box boundary.
pub(crate) struct GeoSample {
    pub env: Environment,
    pub res: GeodesicResult,
    pub doubled: bool,
    pub censored: bool,
}

pub(crate) fn sample_geodesic(cfg: &ExperimentConfig, env: Environment, x: &Point) -> Result<GeoSample> {
    let origin = Point::origin(x.dim());
    let (res, k) = shortest_passage_adaptive(&env, &origin, x, cfg.padding, cfg.max_doublings)?;
    let censored = res.boundary_touched;
    Ok(GeoSample { env, res, doubled: k > 0, censored })
}

/// Runs `f` per replica and returns the results in replica order; the
/// first error aborts.
pub(crate) fn collect<T, F>(cfg: &ExperimentConfig, workers: Option<usize>, salt: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64, usize) -> Result<T> + Sync + Send,
{
    let master = fpp_core::rng::hash_words(&[cfg.seed, salt]);
    mc_collect(cfg.replicas, master, workers, f).into_iter().collect()
}

/// Collects geodesic-based per-replica values and the boundary statistics.
pub(crate) fn geodesic_replicas<T, F>(
    cfg: &ExperimentConfig,
    workers: Option<usize>,
    salt: u64,
    x: &Point,
    f: F,
) -> Result<(Vec<T>, f64, f64)>
where
    T: Send,
    F: Fn(&GeoSample) -> std::result::Result<T, FppError> + Sync + Send,
{
    let out = collect(cfg, workers, salt, |seed, _| {
        let env = Environment::new(seed, cfg.distribution.clone(), cfg.dimension);
        let s = sample_geodesic(cfg, env, x)?;
        Ok((f(&s)?, s.doubled, s.censored))
    })?;
    let n = out.len() as f64;
    let touched = out.iter().filter(|o| o.1).count() as f64 / n;
    let censored = out.iter().filter(|o| o.2).count() as f64 / n;
    Ok((out.into_iter().map(|o| o.0).collect(), touched, censored))
}

/// min/max of the cell estimates with its delta-method standard error.
/// Stays finite when the smallest estimate is 0.
pub(crate) fn balance(values: &[(f64, f64)]) -> (f64, f64) {
    let &(vmax, semax) = values.iter().max_by(|a, b| a.0.total_cmp(&b.0)).expect("nonempty");
    let &(vmin, semin) = values.iter().min_by(|a, b| a.0.total_cmp(&b.0)).expect("nonempty");
    let r = vmin / vmax;
    (r, ((semin / vmax).powi(2) + (r * semax / vmax).powi(2)).sqrt())
}
