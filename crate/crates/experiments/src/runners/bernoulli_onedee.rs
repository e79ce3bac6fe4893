use super::{geodesic_replicas, Experiment};
use crate::config::{ExperimentConfig, ParamKind};
use crate::error::{ExpError, Result};
use crate::report::{Check, ExperimentReport};
use fpp_core::empirical::{linear_fit, mean_se};
use fpp_core::{DistributionSpec, Point};

pub(crate) const EXPERIMENT: Experiment = Experiment {
    name: "bernoulli_onedee",
    summary: "zero-weight edges per step on the geodesic to n(1,…,1) under P(τ=0)=p",
    params: &[
        ("p_grid", ParamKind::F64List),
        ("n", ParamKind::Usize),
        ("slope_tol", ParamKind::F64),
    ],
    run,
};

fn run(cfg: &ExperimentConfig, workers: Option<usize>) -> Result<ExperimentReport> {
    let ps = cfg.f64_list_or("p_grid", &[0.05, 0.1, 0.2, 0.4])?;
    let n = cfg.usize_or("n", 60)?;
    let tol = cfg.f64_or("slope_tol", 0.15)?;
    if ps.len() < 2 || ps.iter().any(|&p| !(p > 0.0 && p < 1.0)) {
        return Err(ExpError::Invalid("p_grid needs at least two values in (0,1)".into()));
    }
    let d = cfg.dimension;
    let x = Point(vec![n as i64; d]);
    let mut rep = ExperimentReport::new(cfg, "E[#{e∈π: τ_e = 0}] ≍ n·p^{1/d} when τ_e ∈ {0,1}, P(τ_e = 0) = p");
    let (mut touched, mut censored, mut inexact) = (0.0f64, 0.0f64, 0usize);
    let (mut lx, mut ly) = (Vec::new(), Vec::new());
    for (i, &p) in ps.iter().enumerate() {
        let sub = ExperimentConfig { distribution: DistributionSpec::BernoulliShift { a: 0.0, b: 1.0, p: 1.0 - p }, ..cfg.clone() };
        let (vals, t, c) = geodesic_replicas(&sub, workers, i as u64, &x, |s| {
            let zeros = s.res.geodesic.edges().iter().filter(|e| s.env.weight(e) == 0.0).count();
            Ok((zeros as f64 / n as f64, s.res.selection_exact))
        })?;
        touched = touched.max(t);
        censored = censored.max(c);
        inexact += vals.iter().filter(|v| !v.1).count();
        let col: Vec<f64> = vals.iter().map(|v| v.0).collect();
        let (mean, se) = mean_se(&col);
        rep.cell("zeros_per_step", "p", p, mean, se, col.len(), None);
        let s = p.powf(1.0 / d as f64);
        rep.cell("normalized", "p", p, mean / s, se / s, col.len(), None);
        lx.push(p.ln());
        ly.push(mean.ln());
        rep.raw_series(&format!("p{p}"), col);
    }
    let (slope, _, sse) = linear_fit(&lx, &ly);
    let target = 1.0 / d as f64;
    rep.fit("slope", slope, sse);
    rep.check(Check::new("log-log slope", slope, sse, Some(target - tol), Some(target + tol)));
    rep.boundary_touch_rate = touched;
    rep.censored_rate = censored;
    rep.notes.push(format!("x = {x}; the configured distribution is replaced by the Bernoulli law of each cell"));
    if inexact > 0 {
        rep.notes.push(format!("{inexact} geodesics fell back to the Dijkstra predecessor path (selection budget)"));
    }
    rep.finish();
    Ok(rep)
}
