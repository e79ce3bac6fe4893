use super::{geodesic_replicas, Experiment};
use crate::config::{ExperimentConfig, ParamKind};
use crate::error::Result;
use crate::report::{Check, ExperimentReport};
use fpp_core::empirical::mean_se;

pub(crate) const EXPERIMENT: Experiment = Experiment {
    name: "length_tail",
    summary: "geodesic length relative to |x|₁ and its exceedance frequencies",
    params: &[("lambda_grid", ParamKind::F64List), ("length_bound", ParamKind::F64)],
    run,
};

fn run(cfg: &ExperimentConfig, workers: Option<usize>) -> Result<ExperimentReport> {
    let lambdas = cfg.f64_list_or("lambda_grid", &[1.1, 1.2, 1.3, 1.5, 2.0])?;
    let bound = cfg.f64_or("length_bound", 2.5)?;
    let mut rep = ExperimentReport::new(cfg, "P(|π| ≥ λ|x|₁) ≤ e^{−c|x|₁} for λ large enough");
    let (mut touched, mut censored) = (0.0f64, 0.0f64);
    let mut prev: Option<(i64, Vec<(f64, f64)>)> = None;
    let mut overall_max = 0.0f64;
    for (ni, &norm) in cfg.norms.iter().enumerate() {
        let x = cfg.target(norm)?;
        let (ratios, t, c) =
            geodesic_replicas(cfg, workers, ni as u64, &x, |s| Ok(s.res.geodesic.len() as f64 / norm as f64))?;
        touched = touched.max(t);
        censored = censored.max(c);
        let n = ratios.len();
        let (mean, se) = mean_se(&ratios);
        rep.cell("length_ratio", "norm", norm as f64, mean, se, n, None);
        let mx = ratios.iter().copied().fold(0.0, f64::max);
        overall_max = overall_max.max(mx);
        let mut exc = Vec::new();
        for &l in &lambdas {
            let f = ratios.iter().filter(|r| **r >= l).count() as f64 / n as f64;
            let fse = (f * (1.0 - f) / n as f64).sqrt();
            rep.cell(&format!("exceedance_norm{norm}"), "lambda", l, f, fse, n, None);
            exc.push((f, fse));
        }
        if let Some((pn, pe)) = &prev {
            for ((l, a), b) in lambdas.iter().zip(pe).zip(&exc) {
                if a.0 > 0.0 {
                    let se = (a.1 * a.1 + b.1 * b.1).sqrt();
                    rep.check(Check::at_most(format!("exceedance(λ={l}) decays from |x|₁={pn} to {norm}"), b.0 - a.0, se, 0.0));
                }
            }
        }
        rep.raw_series(&format!("norm{norm}"), ratios);
        prev = Some((norm, exc));
    }
    // a sample maximum has no standard error; the bound is checked as stated
    rep.check(Check::at_most("max |π|/|x|₁", overall_max, 0.0, bound));
    rep.fit("max_length_ratio", overall_max, 0.0);
    rep.boundary_touch_rate = touched;
    rep.censored_rate = censored;
    rep.finish();
    Ok(rep)
}
