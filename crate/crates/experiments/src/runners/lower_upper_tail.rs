use super::{collect, Experiment};
use crate::config::{ExperimentConfig, ParamKind};
use crate::error::{ExpError, Result};
use crate::report::{Check, ExperimentReport};
use fpp_core::empirical::{mean_se, measure_counts, IntervalSet, Trunc};
use fpp_core::geodesics::shortest_passage_in;
use fpp_core::lattice::edges_in_box;
use fpp_core::{DistributionSpec, Environment, FppError, LatticeBox, Point};

pub(crate) const EXPERIMENT: Experiment = Experiment {
    name: "lower_upper_tail",
    summary: "exact enumeration on a 2×3 grid graph against the simulator",
    params: &[("m", ParamKind::F64)],
    run,
};

/// Largest number of weight configurations enumerated.
const MAX_CONFIGS: usize = 1 << 17;

/// The 2×3 vertex grid {0,1}×{0,1,2}.
pub fn grid_graph_window() -> LatticeBox {
    LatticeBox::new(Point::new(vec![0, 0]), Point::new(vec![1, 2])).expect("valid box")
}

/// Exact (E[#{e∈π: τ_e ≥ m}], E[T^x[m,∞)]) for the selected geodesic from `x`
/// to `y` inside `window`, by enumerating every atom assignment of its edges.
pub fn exact_expectation(
    dist: &DistributionSpec,
    window: &LatticeBox,
    x: &Point,
    y: &Point,
    m: f64,
) -> std::result::Result<(f64, f64), FppError> {
    let atoms = dist
        .atom_list()
        .ok_or_else(|| FppError::InvalidArgument("exact enumeration needs an atomic distribution".into()))?;
    let edges = edges_in_box(window);
    let total = (atoms.len() as f64).powi(edges.len() as i32);
    if total > MAX_CONFIGS as f64 {
        return Err(FppError::InvalidArgument(format!("{total} configurations exceed the limit {MAX_CONFIGS}")));
    }
    let b = IntervalSet::at_least(m);
    let mut digits = vec![0usize; edges.len()];
    let (mut e_count, mut e_frac) = (0.0, 0.0);
    for _ in 0..total as usize {
        let mut env = Environment::new(0, dist.clone(), window.dim());
        let mut prob = 1.0;
        for (e, &dg) in edges.iter().zip(&digits) {
            env.set_override(e.clone(), atoms[dg].0);
            prob *= atoms[dg].1;
        }
        let r = shortest_passage_in(&env, x, y, window)?;
        let mc = measure_counts(&env, &r.geodesic, &b, Trunc::None)?;
        e_count += prob * mc.hit_count as f64;
        e_frac += prob * mc.value;
        for dg in digits.iter_mut() {
            *dg += 1;
            if *dg < atoms.len() {
                break;
            }
            *dg = 0;
        }
    }
    Ok((e_count, e_frac))
}

fn run(cfg: &ExperimentConfig, workers: Option<usize>) -> Result<ExperimentReport> {
    if cfg.dimension != 2 {
        return Err(ExpError::Invalid("lower_upper_tail uses the planar 2×3 grid graph (dimension = 2)".into()));
    }
    let m = cfg.f64_or("m", 10.0)?;
    let window = grid_graph_window();
    let (x, y) = (window.lo.clone(), window.hi.clone());
    let mut rep = ExperimentReport::new(cfg, "E[#{e∈π: τ_e ≥ M}] exact on a small grid graph, matched by simulation");
    let (exact_count, exact_frac) = exact_expectation(&cfg.distribution, &window, &x, &y, m)?;

    let b = IntervalSet::at_least(m);
    let samples = collect(cfg, workers, 0, |seed, _| {
        let env = Environment::new(seed, cfg.distribution.clone(), 2);
        let r = shortest_passage_in(&env, &x, &y, &window)?;
        let mc = measure_counts(&env, &r.geodesic, &b, Trunc::None)?;
        Ok((mc.hit_count as f64, mc.value))
    })?;
    let counts: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let fracs: Vec<f64> = samples.iter().map(|s| s.1).collect();
    let n = samples.len();
    for (label, vals, exact) in [("count", &counts, exact_count), ("fraction", &fracs, exact_frac)] {
        let (mean, se) = mean_se(vals);
        rep.cell(label, "M", m, mean, se, n, Some(exact));
        rep.check(Check::new(format!("simulated − exact {label}"), mean - exact, se, Some(0.0), Some(0.0)));
    }
    rep.check(Check::exact("exact E[#{e∈π: τ_e ≥ M}] > 0", exact_count > 0.0));
    rep.fit("exact_count", exact_count, 0.0);
    rep.fit("exact_fraction", exact_frac, 0.0);
    rep.notes.push(format!(
        "window {}..{} with {} edges; geometry settings (norms, padding) do not apply",
        window.lo,
        window.hi,
        edges_in_box(&window).len()
    ));
    rep.raw_series("count", counts);
    rep.raw_series("fraction", fracs);
    rep.finish();
    Ok(rep)
}
