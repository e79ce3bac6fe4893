use super::{collect, Experiment};
use crate::config::{ExperimentConfig, ParamKind};
use crate::error::{ExpError, Result};
use crate::report::{Check, ExperimentReport};
use fpp_core::animals::{animal_tail_bound, animal_threshold, exact_nn, kdep_bernoulli_bounds, AnimalField, AnimalInstance};
use fpp_core::empirical::{linear_fit, mean_se};
use fpp_core::weights::KDependentField;
use fpp_core::{EdgeId, Point};

pub(crate) const EXPERIMENT: Experiment = Experiment {
    name: "animals",
    summary: "greedy lattice animal weights N_n and k-dependent Bernoulli tail bounds",
    params: &[
        ("n", ParamKind::Usize),
        ("p_grid", ParamKind::F64List),
        ("s_grid", ParamKind::F64List),
        ("slope_tol", ParamKind::F64),
        ("kdep_n", ParamKind::Usize),
        ("kdep_p", ParamKind::F64),
        ("kdep_m", ParamKind::Usize),
        ("kdep_t_grid", ParamKind::F64List),
        ("kdep_trials", ParamKind::Usize),
    ],
    run,
};

fn run(cfg: &ExperimentConfig, workers: Option<usize>) -> Result<ExperimentReport> {
    let n = cfg.usize_or("n", 12)?;
    let ps = cfg.f64_list_or("p_grid", &[0.05, 0.1, 0.2, 0.4])?;
    let s_grid = cfg.f64_list_or("s_grid", &[1.0, 1.5, 2.0, 3.0])?;
    let tol = cfg.f64_or("slope_tol", 0.15)?;
    if ps.len() < 2 || ps.iter().any(|&p| !(p > 0.0 && p < 1.0)) {
        return Err(ExpError::Invalid("p_grid needs at least two values in (0,1)".into()));
    }
    let d = cfg.dimension;
    let mut rep = ExperimentReport::new(cfg, "E[N_n] ≤ C n p^{1/d}; P(N_n ≥ s n p^{1/d}) ≤ exp{−(n p^{1/d}/(k+1))(s/C₃ − d(k+1) ln 3)}");
    let (mut lx, mut ly) = (Vec::new(), Vec::new());
    let mut invariant = true;
    for (i, &p) in ps.iter().enumerate() {
        let vals = collect(cfg, workers, i as u64, |seed, _| {
            let inst = AnimalInstance { field: AnimalField::Iid { seed, p }, n, d };
            Ok(exact_nn(&inst)? as f64)
        })?;
        invariant &= vals.iter().all(|v| *v <= n as f64);
        let per: Vec<f64> = vals.iter().map(|v| v / n as f64).collect();
        let (m, se) = mean_se(&per);
        rep.cell("nn_per_step", "p", p, m, se, per.len(), None);
        let scale = p.powf(1.0 / d as f64);
        rep.cell("normalized", "p", p, m / scale, se / scale, per.len(), None);
        lx.push(p.ln());
        ly.push(m.ln());
        for &s in &s_grid {
            let level = s * n as f64 * scale;
            let f = vals.iter().filter(|v| **v >= level).count() as f64 / vals.len() as f64;
            let fse = (f * (1.0 - f) / vals.len() as f64).sqrt();
            let bound = animal_tail_bound(n, p, s, d, 0);
            rep.cell(&format!("tail_p{p}"), "s", s, f, fse, vals.len(), Some(bound));
            rep.check(Check::at_most(format!("P(N_n ≥ {s}·n·p^(1/d)) ≤ bound (p={p})"), f, fse, bound));
        }
        rep.raw_series(&format!("p{p}"), vals);
    }
    let (slope, _, sse) = linear_fit(&lx, &ly);
    let target = 1.0 / d as f64;
    rep.fit("slope", slope, sse);
    rep.check(Check::new("log-log slope of E[N_n]/n against p", slope, sse, Some(target - tol), Some(target + tol)));
    rep.check(Check::exact("N_n ≤ n on every sample", invariant));
    let thr = animal_threshold(d, 0);
    if thr.is_finite() {
        rep.notes.push(format!("tail bound valid for s > {thr}"));
    } else {
        rep.notes.push(format!("tail bound threshold exceeds f64 range in d = {d}; the bound is vacuous (1) on the whole grid"));
    }
    kdep_block(cfg, workers, &mut rep)?;
    rep.finish();
    Ok(rep)
}

/// S = Σ of `kdep_n` consecutive e1-edge values of a block field with blocks
/// of m+1 edges, so each variable depends on at most m others.
fn kdep_block(cfg: &ExperimentConfig, workers: Option<usize>, rep: &mut ExperimentReport) -> Result<()> {
    let n = cfg.usize_or("kdep_n", 200)?;
    let p = cfg.f64_or("kdep_p", 0.3)?;
    let m = cfg.usize_or("kdep_m", 3)?;
    let ts = cfg.f64_list_or("kdep_t_grid", &[5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0])?;
    let trials = cfg.usize_or("kdep_trials", 10_000)?;
    if n == 0 || trials == 0 || !(p > 0.0 && p < 1.0) {
        return Err(ExpError::Invalid("kdep_n, kdep_trials must be positive and kdep_p in (0,1)".into()));
    }
    let sub = ExperimentConfig { replicas: trials, ..cfg.clone() };
    let sums = collect(&sub, workers, 500, |seed, _| {
        let f = KDependentField { seed, k: m as i64 + 1, p, d: 2 };
        Ok((0..n as i64).map(|i| f.value(&EdgeId { base: Point::new(vec![i, 0]), axis: 1 }) as f64).sum::<f64>())
    })?;
    let mean = n as f64 * p;
    for &t in &ts {
        let f = sums.iter().filter(|s| **s - mean > t).count() as f64 / trials as f64;
        let fse = (f * (1.0 - f) / trials as f64).sqrt();
        let (bphi, bh) = kdep_bernoulli_bounds(n, p, m, t);
        rep.cell("kdep_phi", "t", t, f, fse, trials, Some(bphi));
        rep.cell("kdep_hoeffding", "t", t, f, fse, trials, Some(bh));
        rep.check(Check::at_most(format!("kdep tail(t={t}) ≤ φ bound"), f, fse, bphi));
        rep.check(Check::at_most(format!("kdep tail(t={t}) ≤ Hoeffding bound"), f, fse, bh));
    }
    rep.raw_series("kdep_sums", sums);
    Ok(())
}
