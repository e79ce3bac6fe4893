use super::{geodesic_replicas, Experiment};
use crate::config::{ExperimentConfig, ParamKind};
use crate::error::{ExpError, Result};
use crate::report::{Check, ExperimentReport};
use fpp_core::{make_edge, Point};

pub(crate) const EXPERIMENT: Experiment = Experiment {
    name: "fkg",
    summary: "conditional cdf of a fixed edge weight given the edge lies on the geodesic",
    params: &[("t_grid", ParamKind::F64List), ("edge_axis", ParamKind::Usize)],
    run,
};

fn run(cfg: &ExperimentConfig, workers: Option<usize>) -> Result<ExperimentReport> {
    let t_grid = cfg.f64_list_or("t_grid", &default_t_grid())?;
    let axis = cfg.usize_or("edge_axis", 1)?;
    if axis == 0 || axis > cfg.dimension {
        return Err(ExpError::Invalid(format!("edge_axis {axis} out of range 1..={}", cfg.dimension)));
    }
    let o = Point::origin(cfg.dimension);
    let e = make_edge(&o, &o.step(axis, 1))?;
    let x = cfg.target(cfg.norms[0])?;
    let mut rep = ExperimentReport::new(cfg, "P(τ_e ≤ t | e ∈ π) ≥ P(τ_e ≤ t)");

    let (samples, touched, censored) = geodesic_replicas(cfg, workers, 0, &x, |s| {
        let w = s.env.weight(&e);
        let on = s.res.geodesic.edges().contains(&e);
        Ok((w, on))
    })?;
    rep.boundary_touch_rate = touched;
    rep.censored_rate = censored;

    let inside: Vec<f64> = samples.iter().filter(|s| s.1).map(|s| s.0).collect();
    let n_in = inside.len();
    let n = samples.len();
    rep.notes.push(format!("edge ({}, axis {}) was on the selected geodesic in {n_in} of {n} replicas", e.base, e.axis));
    for &t in &t_grid {
        let f = cfg.distribution.cdf(t);
        let uncond = samples.iter().filter(|s| s.0 <= t).count() as f64 / n as f64;
        rep.cell("unconditional", "t", t, uncond, binom_se(uncond, f, n), n, Some(f));
        if n_in == 0 {
            rep.check(Check::at_least(format!("cond_cdf(t={t})"), f64::NAN, f64::NAN, f));
            continue;
        }
        let p = inside.iter().filter(|w| **w <= t).count() as f64 / n_in as f64;
        let se = binom_se(p, f, n_in);
        rep.cell("conditional", "t", t, p, se, n_in, Some(f));
        rep.check(Check::at_least(format!("cond_cdf(t={t})"), p, se, f));
    }
    let worst = rep
        .block("conditional")
        .iter()
        .map(|c| (c.estimate - c.reference.unwrap_or(0.0), c.stderr))
        .min_by(|a, b| a.0.total_cmp(&b.0));
    if let Some((gap, se)) = worst {
        rep.fit("min_gap", gap, se);
    }
    rep.raw_series("tau_e", samples.iter().map(|s| s.0).collect());
    rep.raw_series("on_geodesic", samples.iter().map(|s| f64::from(u8::from(s.1))).collect());
    rep.finish();
    Ok(rep)
}

/// Binomial s.e., floored by its value under the null so that p̂ ∈ {0,1}
/// does not give a zero error bar.
fn binom_se(p: f64, null: f64, n: usize) -> f64 {
    (p * (1.0 - p)).max(null * (1.0 - null)).sqrt() / (n as f64).sqrt()
}

fn default_t_grid() -> Vec<f64> {
    (1..=30).map(|i| i as f64 / 10.0).collect()
}
