use super::{geodesic_replicas, balance, Experiment};
use crate::config::{ExperimentConfig, ParamKind};
use crate::error::{ExpError, Result};
use crate::report::{Check, ExperimentReport};
use fpp_core::empirical::{mean_se, measure_counts, IntervalSet, Trunc};

pub(crate) const EXPERIMENT: Experiment = Experiment {
    name: "uniform_ratio",
    summary: "geodesic edge counts in (c, c+w] relative to μ(c, c+w]·|x|₁, uniformly over c ≥ b",
    params: &[
        ("b", ParamKind::F64),
        ("c_grid", ParamKind::F64List),
        ("width", ParamKind::F64),
        ("ratio_bound", ParamKind::F64),
    ],
    run,
};

fn run(cfg: &ExperimentConfig, workers: Option<usize>) -> Result<ExperimentReport> {
    let b = cfg.f64_or("b", 0.5)?;
    let cs = cfg.f64_list_or("c_grid", &[0.5, 1.0, 2.0, 4.0])?;
    let width = cfg.f64_or("width", 0.5)?;
    let bound = cfg.f64_or("ratio_bound", 4.0)?;
    if !(width > 0.0) || cs.iter().any(|&c| c < b) {
        return Err(ExpError::Invalid(format!("need width > 0 and every c ≥ b = {b}")));
    }
    let sets: Vec<IntervalSet> = cs.iter().map(|&c| IntervalSet::left_open(c, c + width)).collect();
    let mus: Vec<f64> = sets.iter().map(|s| s.mass(&cfg.distribution)).collect();
    if let Some(i) = mus.iter().position(|&m| m <= 0.0) {
        return Err(ExpError::Invalid(format!("μ({}) = 0", sets[i])));
    }
    let mut rep = ExperimentReport::new(cfg, "E[#{e∈π: τ_e ∈ (c,h]}] ≤ C·μ(c,h]·|x|₁ uniformly over (c,h] ⊂ [b,∞)");
    let norm = cfg.norms[0];
    let x = cfg.target(norm)?;
    let (vals, touched, censored) = geodesic_replicas(cfg, workers, 0, &x, |s| {
        sets.iter()
            .map(|st| measure_counts(&s.env, &s.res.geodesic, st, Trunc::None).map(|m| m.hit_count as f64))
            .collect::<std::result::Result<Vec<f64>, _>>()
    })?;
    rep.boundary_touch_rate = touched;
    rep.censored_rate = censored;

    let mut ratios = Vec::new();
    for (i, &c) in cs.iter().enumerate() {
        let col: Vec<f64> = vals.iter().map(|v| v[i]).collect();
        let (mean, se) = mean_se(&col);
        rep.cell("count", "c", c, mean, se, col.len(), Some(mus[i] * norm as f64));
        let scale = mus[i] * norm as f64;
        rep.cell("ratio", "c", c, mean / scale, se / scale, col.len(), None);
        ratios.push((mean / scale, se / scale));
        rep.raw_series(&format!("c{c}"), col);
    }
    let (sp, sse) = balance(&ratios);
    rep.check(Check::at_least("min/max of count ratio (≥ 1/ratio_bound)", sp, sse, 1.0 / bound));
    let (cmax, cse) = ratios.iter().copied().max_by(|a, b| a.0.total_cmp(&b.0)).unwrap_or((f64::NAN, f64::NAN));
    rep.fit("C_hat", cmax, cse);
    rep.fit("min_over_max", sp, sse);
    rep.notes.push(format!("|x|₁ = {norm}; intervals (c, c+{width}]"));
    let zero: Vec<String> = cs.iter().zip(&ratios).filter(|(_, r)| r.0 == 0.0).map(|(c, _)| c.to_string()).collect();
    if !zero.is_empty() {
        rep.notes.push(format!(
            "no geodesic edge fell in the interval at c = {}; the ratio is bounded only from above, so min/max can vanish",
            zero.join(", ")
        ));
    }
    rep.finish();
    Ok(rep)
}
