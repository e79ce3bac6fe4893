use super::{geodesic_replicas, Experiment};
use crate::config::{ExperimentConfig, ParamKind};
use crate::error::{ExpError, Result};
use crate::report::{Check, ExperimentReport};
use fpp_core::empirical::{mean_se, measure, IntervalSet, Trunc};

pub(crate) const EXPERIMENT: Experiment = Experiment {
    name: "lower_tail",
    summary: "geodesic mass of [r, r+ε] against μ[r, r+ε]",
    params: &[("eps_grid", ParamKind::F64List), ("floor", ParamKind::F64)],
    run,
};

fn run(cfg: &ExperimentConfig, workers: Option<usize>) -> Result<ExperimentReport> {
    let eps = cfg.f64_list_or("eps_grid", &[0.05, 0.1, 0.2])?;
    let floor = cfg.f64_or("floor", 0.2)?;
    let r = cfg.distribution.ess_inf();
    let sets: Vec<IntervalSet> = eps.iter().map(|&e| IntervalSet::closed(r, r + e)).collect();
    let mus: Vec<f64> = sets.iter().map(|b| b.mass(&cfg.distribution)).collect();
    if let Some(i) = mus.iter().position(|&m| m <= 0.0) {
        return Err(ExpError::Invalid(format!("μ({}) = 0", sets[i])));
    }
    let mut rep = ExperimentReport::new(cfg, "E[T^x[r,r+ε]] ≥ c·μ[r,r+ε]");
    let norm = cfg.norms[0];
    let x = cfg.target(norm)?;
    let (vals, touched, censored) = geodesic_replicas(cfg, workers, 0, &x, |s| {
        sets.iter().map(|b| measure(&s.env, &s.res.geodesic, b, Trunc::None)).collect::<std::result::Result<Vec<f64>, _>>()
    })?;
    rep.boundary_touch_rate = touched;
    rep.censored_rate = censored;

    let mut ratios = Vec::new();
    for (i, &e) in eps.iter().enumerate() {
        let col: Vec<f64> = vals.iter().map(|v| v[i]).collect();
        let (mean, se) = mean_se(&col);
        rep.cell("measure", "eps", e, mean, se, col.len(), Some(mus[i]));
        let (q, qse) = (mean / mus[i], se / mus[i]);
        rep.cell("ratio", "eps", e, q, qse, col.len(), Some(floor));
        rep.check(Check::at_least(format!("ratio(ε={e}) ≥ {floor}"), q, qse, floor));
        ratios.push((q, qse));
        rep.raw_series(&format!("eps{e}"), col);
    }
    let (c, cse) = ratios.iter().copied().min_by(|a, b| a.0.total_cmp(&b.0)).unwrap_or((f64::NAN, f64::NAN));
    rep.fit("c_hat", c, cse);
    rep.check(Check::at_least("c_hat > 0", c, cse, f64::MIN_POSITIVE));
    rep.notes.push(format!("r = ess inf μ = {r}; |x|₁ = {norm}"));
    rep.finish();
    Ok(rep)
}
