use super::{geodesic_replicas, balance, Experiment};
use crate::config::{ExperimentConfig, ParamKind};
use crate::error::{ExpError, Result};
use crate::report::{Check, ExperimentReport};
use fpp_core::empirical::{mean_se, measure, IntervalSet, Trunc};

pub(crate) const EXPERIMENT: Experiment = Experiment {
    name: "borel_bound",
    summary: "geodesic mass of low-quantile sets normalized by μ(B)^{1/d}",
    params: &[
        ("q_grid", ParamKind::F64List),
        ("sets", ParamKind::Sets),
        ("ratio_bound", ParamKind::F64),
    ],
    run,
};

fn run(cfg: &ExperimentConfig, workers: Option<usize>) -> Result<ExperimentReport> {
    let bound = cfg.f64_or("ratio_bound", 4.0)?;
    let (labels, sets): (Vec<f64>, Vec<IntervalSet>) = if cfg.raw("sets").is_some() {
        let s = cfg.sets_or("sets", &[])?;
        ((0..s.len()).map(|i| i as f64).collect(), s)
    } else {
        let qs = cfg.f64_list_or("q_grid", &[0.01, 0.02, 0.05, 0.1])?;
        let mut v = Vec::with_capacity(qs.len());
        for &q in &qs {
            v.push(IntervalSet::half_open(0.0, cfg.distribution.quantile(q)?));
        }
        (qs, v)
    };
    let param = if cfg.raw("sets").is_some() { "set" } else { "q" };
    let d = cfg.dimension as f64;
    let mus: Vec<f64> = sets.iter().map(|b| b.mass(&cfg.distribution)).collect();
    if let Some(i) = mus.iter().position(|&m| m <= 0.0) {
        return Err(ExpError::Invalid(format!("μ({}) = 0", sets[i])));
    }
    let mut rep = ExperimentReport::new(cfg, "E[T^x(B)] ≤ C·μ(B)^{1/d} for every Borel B");
    let norm = cfg.norms[0];
    let x = cfg.target(norm)?;
    let (vals, touched, censored) = geodesic_replicas(cfg, workers, 0, &x, |s| {
        sets.iter().map(|b| measure(&s.env, &s.res.geodesic, b, Trunc::None)).collect::<std::result::Result<Vec<f64>, _>>()
    })?;
    rep.boundary_touch_rate = touched;
    rep.censored_rate = censored;

    let mut normalized = Vec::new();
    for (i, b) in sets.iter().enumerate() {
        let col: Vec<f64> = vals.iter().map(|v| v[i]).collect();
        let (mean, se) = mean_se(&col);
        rep.cell("measure", param, labels[i], mean, se, col.len(), Some(mus[i]));
        let scale = mus[i].powf(1.0 / d);
        rep.cell("normalized", param, labels[i], mean / scale, se / scale, col.len(), None);
        normalized.push((mean / scale, se / scale));
        rep.raw_series(&format!("{b}"), col);
    }
    let (ratio, rse) = balance(&normalized);
    rep.check(Check::at_least("min/max of E[T^x(B)]/μ(B)^{1/d} (≥ 1/ratio_bound)", ratio, rse, 1.0 / bound));
    let (cmax, cse) = normalized.iter().copied().max_by(|a, b| a.0.total_cmp(&b.0)).unwrap_or((f64::NAN, f64::NAN));
    rep.fit("C_hat", cmax, cse);
    rep.fit("min_over_max", ratio, rse);
    rep.notes.push(format!("|x|₁ = {norm}; sets: {}", sets.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(", ")));
    rep.finish();
    Ok(rep)
}
