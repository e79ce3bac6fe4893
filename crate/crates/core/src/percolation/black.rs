use super::clusters::{kesten_shell_ctx, ShellContext};
use super::geometry::{box_bj, box_geometry, cube_r, BoxGeometry, BoxParams};
use super::OpenField;
use crate::constants::{barrier_length_constant, barrier_time_constant};
use crate::error::{FppError, Result};
use crate::geodesics::{WeightGrid, NO_PRED};
use crate::lattice::{EdgeId, LatticeBox, PathRec, Point};
use crate::weights::Environment;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, VecDeque};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PercConfig {
    pub rho: i64,
    pub delta: f64,
    /// threshold M̄ of the open field
    pub mbar: f64,
    /// simulation window radius in units of m around the box
    pub window_factor: i64,
    /// use the literal diameter clause m₁/10000
    pub strict: bool,
    pub lenient_fraction: f64,
    pub b1_pair_budget: usize,
}

impl Default for PercConfig {
    fn default() -> Self {
        PercConfig {
            rho: 2,
            delta: 0.05,
            mbar: 1.0,
            window_factor: 6,
            strict: false,
            lenient_fraction: 0.1,
            b1_pair_budget: 2_000_000,
        }
    }
}

impl PercConfig {
    pub fn validate(&self) -> Result<()> {
        if self.rho < 1 || !(self.delta > 0.0) || !(self.mbar > 0.0) || self.window_factor < 1 {
            return Err(FppError::InvalidArgument(
                "PercConfig needs rho ≥ 1, delta > 0, mbar > 0, window_factor ≥ 1".into(),
            ));
        }
        Ok(())
    }

    pub fn c_d(&self, d: usize) -> f64 {
        barrier_length_constant(d)
    }

    pub fn l_bar(&self, d: usize) -> f64 {
        barrier_time_constant(d, self.rho as f64, self.mbar)
    }

    /// Shell diameters must stay strictly below this.
    pub fn diameter_limit(&self, d: usize, m1: i64) -> f64 {
        if self.strict {
            m1 as f64 / 10000.0
        } else {
            ((2 * d + 1) as f64).max(self.lenient_fraction * m1 as f64)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub start: Point,
    pub path: PathRec,
    pub time: f64,
    pub length: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Barrier {
    pub g: Vec<Point>,
    pub witnesses: Vec<Witness>,
    pub max_shell_diameter: i64,
    pub diameter_limit: f64,
    pub time_budget: f64,
    pub length_budget: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "clause", rename_all = "snake_case")]
pub enum BarrierFailure {
    /// shell construction failed inside the window
    ShellBlowup { vertex: Point, reason: String },
    Diameter { vertex: Point, diameter: i64, limit: f64 },
    OutsideAnnulus { vertex: Point, shell_vertex: Point },
    Connection { vertex: Point, time: f64, length: Option<usize> },
}

impl BarrierFailure {
    /// "i" or "ii"
    pub fn clause(&self) -> &'static str {
        match self {
            BarrierFailure::Connection { .. } => "ii",
            _ => "i",
        }
    }

    pub fn vertex(&self) -> &Point {
        match self {
            BarrierFailure::ShellBlowup { vertex, .. }
            | BarrierFailure::Diameter { vertex, .. }
            | BarrierFailure::OutsideAnnulus { vertex, .. }
            | BarrierFailure::Connection { vertex, .. } => vertex,
        }
    }
}

pub type BarrierOutcome = std::result::Result<Barrier, BarrierFailure>;

/// Vertices within ℓ∞ distance 1 of the inner boundary of b.
pub fn near_boundary(b: &LatticeBox) -> Vec<Point> {
    let inner = LatticeBox::new(
        Point(b.lo.0.iter().map(|c| c + 2).collect()),
        Point(b.hi.0.iter().map(|c| c - 2).collect()),
    )
    .ok();
    b.expand(1).points().filter(|p| !inner.as_ref().is_some_and(|i| i.contains(p))).collect()
}

pub fn barrier_window(params: &BoxParams, cfg: &PercConfig) -> LatticeBox {
    box_bj(params).expand(cfg.window_factor * params.m)
}

pub fn good_barrier(env: &Environment, params: &BoxParams, cfg: &PercConfig) -> Result<BarrierOutcome> {
    cfg.validate()?;
    let geom = box_geometry(params, cfg.rho);
    if geom.degenerate {
        return Err(FppError::Precondition(format!(
            "box geometry degenerate for m={}, m1={}, rho={}",
            params.m, params.m1, cfg.rho
        )));
    }
    let field = OpenField { env: env.clone(), threshold: cfg.mbar };
    let ctx = ShellContext::new(&field, &barrier_window(params, cfg));
    Ok(good_barrier_ctx(&ctx, &geom, cfg))
}

pub fn good_barrier_ctx(ctx: &ShellContext, geom: &BoxGeometry, cfg: &PercConfig) -> BarrierOutcome {
    let d = geom.bj.dim();
    let m1 = geom.params.m1;
    let limit = cfg.diameter_limit(d, m1);
    let mut g: BTreeSet<Point> = BTreeSet::new();
    let mut max_diam = 0;
    for x in near_boundary(&geom.bj) {
        let sh = kesten_shell_ctx(ctx, &x)
            .map_err(|e| BarrierFailure::ShellBlowup { vertex: x.clone(), reason: e.to_string() })?;
        if sh.truncated {
            return Err(BarrierFailure::ShellBlowup {
                vertex: x,
                reason: "black cluster reached the window boundary".into(),
            });
        }
        let diam = sh.diameter();
        max_diam = max_diam.max(diam);
        if diam as f64 >= limit {
            return Err(BarrierFailure::Diameter { vertex: x, diameter: diam, limit });
        }
        if let Some(s) = sh.shell.iter().find(|s| !geom.in_annulus(s)) {
            return Err(BarrierFailure::OutsideAnnulus { vertex: x, shell_vertex: s.clone() });
        }
        g.extend(sh.shell);
    }

    let wg = &ctx.og.g;
    let targets: Vec<usize> = geom.c_on_inner_boundary().iter().filter_map(|p| wg.index(p)).collect();
    let mut allowed = vec![false; wg.len()];
    for (i, a) in allowed.iter_mut().enumerate() {
        *a = geom.in_annulus(&wg.point(i));
    }
    for &t in &targets {
        allowed[t] = true;
    }
    let (dist, pred) = wg.dijkstra(&targets, Some(&allowed));
    let time_budget = cfg.l_bar(d) * m1 as f64;
    let length_budget = cfg.c_d(d) * m1 as f64;
    let mut hops: Option<(Vec<Option<usize>>, Vec<usize>)> = None;
    let mut witnesses = Vec::with_capacity(g.len());
    for u in &g {
        let ui = wg.index(u).expect("shell inside window");
        let mut idxs = WeightGrid::trace(&pred, ui);
        let mut time = dist[ui];
        if time.is_finite() && (idxs.len() - 1) as f64 > length_budget {
            let (hd, hp) = hops.get_or_insert_with(|| bfs_hops(wg, &targets, &allowed));
            if hd[ui].is_some() {
                idxs = WeightGrid::trace(hp, ui);
                time = path_time(wg, &idxs);
            }
        }
        let length = idxs.len() - 1;
        if !(time <= time_budget) || length as f64 > length_budget {
            return Err(BarrierFailure::Connection {
                vertex: u.clone(),
                time,
                length: time.is_finite().then_some(length),
            });
        }
        idxs.reverse();
        witnesses.push(Witness { start: u.clone(), path: wg.to_path(&idxs), time, length });
    }
    Ok(Barrier {
        g: g.into_iter().collect(),
        witnesses,
        max_shell_diameter: max_diam,
        diameter_limit: limit,
        time_budget,
        length_budget,
    })
}

fn bfs_hops(wg: &WeightGrid, sources: &[usize], allowed: &[bool]) -> (Vec<Option<usize>>, Vec<usize>) {
    let mut dist = vec![None; wg.len()];
    let mut pred = vec![NO_PRED; wg.len()];
    let mut q = VecDeque::new();
    for &s in sources {
        if dist[s].is_none() {
            dist[s] = Some(0);
            q.push_back(s);
        }
    }
    while let Some(x) = q.pop_front() {
        let dx = dist[x].unwrap();
        wg.for_neighbors(x, |y, _, _| {
            if allowed[y] && dist[y].is_none() {
                dist[y] = Some(dx + 1);
                pred[y] = x;
                q.push_back(y);
            }
        });
    }
    (dist, pred)
}

fn path_time(wg: &WeightGrid, idxs: &[usize]) -> f64 {
    idxs.windows(2)
        .map(|w| {
            let (a, b) = (w[0].min(w[1]), w[0].max(w[1]));
            (0..wg.d).find(|&ax| wg.up(a, ax) == Some(b)).map_or(f64::INFINITY, |ax| wg.weight_up(a, ax))
        })
        .sum()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct B1Report {
    pub holds: bool,
    pub exhaustive: bool,
    pub sources: usize,
    pub pairs_checked: u64,
    pub violation: Option<(Point, Point)>,
}

/// T(v,w) ≥ (r + δ)|v − w|₁ for pairs in B^j with |v − w|₁ ≥ m, passage
/// times computed inside R(l;m).
pub fn check_b1(env: &Environment, params: &BoxParams, delta: f64, pair_budget: usize) -> Result<B1Report> {
    if !(delta > 0.0) {
        return Err(FppError::InvalidArgument(format!("delta must be > 0, got {delta}")));
    }
    let r = env.dist.ess_inf();
    let bj = box_bj(params);
    let wg = WeightGrid::new(env, &cube_r(&params.l, params.m));
    let members: Vec<usize> = bj.points().map(|p| wg.index(&p).unwrap()).collect();
    let n = members.len();
    let exhaustive = n * n.saturating_sub(1) / 2 <= pair_budget;
    let sources: Vec<usize> = if exhaustive {
        members.clone()
    } else {
        // all extreme-face vertices plus a stride sample of the rest
        let stride = ((n * n) / pair_budget.max(1)).max(2);
        members
            .iter()
            .enumerate()
            .filter(|(k, &i)| bj.on_boundary(&wg.point(i)) || k % stride == 0)
            .map(|(_, &i)| i)
            .collect()
    };
    let mut pairs = 0u64;
    for &s in &sources {
        let (dist, _) = wg.dijkstra(&[s], None);
        let ps = wg.point(s);
        for &t in &members {
            let pt = wg.point(t);
            let l1 = ps.l1_dist(&pt);
            if l1 < params.m {
                continue;
            }
            pairs += 1;
            if dist[t] < (r + delta) * l1 as f64 {
                return Ok(B1Report {
                    holds: false,
                    exhaustive,
                    sources: sources.len(),
                    pairs_checked: pairs,
                    violation: Some((ps, pt)),
                });
            }
        }
    }
    Ok(B1Report { holds: true, exhaustive, sources: sources.len(), pairs_checked: pairs, violation: None })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlackVerdict {
    pub b1: bool,
    pub b2: bool,
    pub failure: Option<BarrierFailure>,
}

impl BlackVerdict {
    pub fn black(&self) -> bool {
        self.b1 && self.b2
    }
}

pub fn combine_black(b1: bool, b2: &BarrierOutcome) -> BlackVerdict {
    BlackVerdict { b1, b2: b2.is_ok(), failure: b2.as_ref().err().cloned() }
}

pub fn black_verdict(env: &Environment, params: &BoxParams, cfg: &PercConfig) -> Result<BlackVerdict> {
    let b1 = check_b1(env, params, cfg.delta, cfg.b1_pair_budget)?.holds;
    let b2 = good_barrier(env, params, cfg)?;
    Ok(combine_black(b1, &b2))
}

pub fn is_black(env: &Environment, params: &BoxParams, cfg: &PercConfig) -> Result<bool> {
    Ok(black_verdict(env, params, cfg)?.black())
}

/// S(l;m) is black iff all 2d boxes B^{±k}(l;m) are black.
pub fn cube_is_black(env: &Environment, l: &Point, m: i64, m1: i64, cfg: &PercConfig) -> Result<bool> {
    let d = l.dim() as i32;
    for k in 1..=d {
        for j in [k, -k] {
            if !is_black(env, &BoxParams::new(l.clone(), m, m1, j)?, cfg)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Maximal runs of the path inside b that join the two faces orthogonal to
/// axis k (1-based).
pub fn crossings(path: &PathRec, b: &LatticeBox, k: usize) -> usize {
    let a = k - 1;
    let mut count = 0;
    let (mut lo_hit, mut hi_hit, mut inside) = (false, false, false);
    for v in &path.vertices {
        if b.contains(v) {
            if !inside {
                inside = true;
                lo_hit = false;
                hi_hit = false;
            }
            lo_hit |= v.0[a] == b.lo.0[a];
            hi_hit |= v.0[a] == b.hi.0[a];
        } else if inside {
            inside = false;
            count += (lo_hit && hi_hit) as usize;
        }
    }
    if inside {
        count += (lo_hit && hi_hit) as usize;
    }
    count
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxFlag {
    pub params: BoxParams,
    pub crossings: usize,
    pub black: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CubeStats {
    pub visited_cubes: usize,
    pub visited_black_cubes: usize,
    pub crossed_boxes: usize,
    pub crossed_black_boxes: usize,
    pub per_box: Vec<BoxFlag>,
}

/// Boxes B^{+k}(l') (canonical form) that may contain v.
fn candidate_boxes(v: &Point, m: i64, m1: i64) -> Vec<BoxParams> {
    let d = v.dim();
    let cell: Vec<i64> = v.0.iter().map(|c| c.div_euclid(m)).collect();
    let mut out = Vec::new();
    for k in 0..d {
        let n = 3usize.pow(d as u32 - 1);
        for mut code in 0..n {
            let mut l = cell.clone();
            for (i, li) in l.iter_mut().enumerate() {
                if i == k {
                    *li -= 1;
                } else {
                    *li += (code % 3) as i64 - 1;
                    code /= 3;
                }
            }
            out.push(BoxParams { l: Point(l), m, m1, j: (k + 1) as i32 });
        }
    }
    out
}

/// Crossings of boxes of scale m by the path; with `evaluate_black`, the
/// visited cubes and crossed boxes are also tested for blackness.
pub fn black_cube_stats(
    env: &Environment,
    geodesic: &PathRec,
    m: i64,
    m1: i64,
    cfg: &PercConfig,
    evaluate_black: bool,
) -> Result<CubeStats> {
    let cubes: BTreeSet<Point> =
        geodesic.vertices.iter().map(|v| Point(v.0.iter().map(|c| c.div_euclid(m)).collect())).collect();
    let mut boxes: BTreeSet<BoxParams> = BTreeSet::new();
    for v in &geodesic.vertices {
        for b in candidate_boxes(v, m, m1) {
            if box_bj(&b).contains(v) {
                boxes.insert(b);
            }
        }
    }
    let mut per_box = Vec::new();
    for b in boxes {
        let c = crossings(geodesic, &box_bj(&b), b.axis());
        if c == 0 {
            continue;
        }
        let black = if evaluate_black { Some(is_black(env, &b, cfg)?) } else { None };
        per_box.push(BoxFlag { params: b, crossings: c, black });
    }
    let mut visited_black_cubes = 0;
    if evaluate_black {
        for l in &cubes {
            visited_black_cubes += cube_is_black(env, l, m, m1, cfg)? as usize;
        }
    }
    Ok(CubeStats {
        visited_cubes: cubes.len(),
        visited_black_cubes,
        crossed_boxes: per_box.len(),
        crossed_black_boxes: per_box.iter().filter(|b| b.black == Some(true)).count(),
        per_box,
    })
}

/// Some path edge with both endpoints in B^j has τ_e ≥ M, or τ_e in
/// [low, high] when a range is given.
pub fn is_x_good_path(env: &Environment, path: &PathRec, params: &BoxParams, big_m: f64, range: Option<(f64, f64)>) -> bool {
    let b = box_bj(params);
    path.vertices.windows(2).any(|w| {
        if !(b.contains(&w[0]) && b.contains(&w[1])) {
            return false;
        }
        let e = crate::lattice::make_edge(&w[0], &w[1]).expect("path edges are adjacent");
        let t = env.weight(&e);
        match range {
            Some((lo, hi)) => t >= lo && t <= hi,
            None => t >= big_m,
        }
    })
}

/// Evaluates the goodness predicate on the selected geodesic from 0 to x.
pub fn is_x_good(
    env: &Environment,
    x: &Point,
    params: &BoxParams,
    big_m: f64,
    range: Option<(f64, f64)>,
    padding: f64,
) -> Result<bool> {
    let res = crate::geodesics::shortest_passage(env, &Point::origin(x.dim()), x, padding)?;
    Ok(is_x_good_path(env, &res.geodesic, params, big_m, range))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum QVariant {
    Q,
    Tilde { i: i32 },
}

fn q_clauses(geom: &BoxGeometry, gamma: f64, big_m: f64, variant: QVariant) -> Vec<(Vec<EdgeId>, f64, bool, f64, bool)> {
    match variant {
        QVariant::Q => vec![
            (geom.etilde1.clone(), big_m, true, gamma * big_m, true),
            (geom.etilde2.clone(), big_m, true, f64::INFINITY, false),
        ],
        QVariant::Tilde { i } => {
            let lo = gamma.powi(i) * big_m;
            vec![(geom.etilde(), lo, true, lo * gamma, false)]
        }
    }
}

/// Weight pattern on C̃, Ẽ₁, Ẽ₂ (r = essential infimum).
pub fn check_q(env: &Environment, geom: &BoxGeometry, c: f64, gamma: f64, big_m: f64, variant: QVariant) -> Result<bool> {
    if geom.degenerate {
        return Err(FppError::Precondition("box geometry degenerate".into()));
    }
    let r = env.dist.ess_inf();
    for (edges, lo, lc, hi, hc) in q_clauses(geom, gamma, big_m, variant) {
        for e in &edges {
            let t = env.weight(e);
            let above = if lc { t >= lo } else { t > lo };
            let below = if hc { t <= hi } else { t < hi };
            if !(above && below) {
                return Ok(false);
            }
        }
    }
    Ok(geom.ctilde_minus_etilde().iter().all(|e| env.weight(e) <= r + c))
}

pub fn check_q_box(env: &Environment, params: &BoxParams, rho: i64, c: f64, gamma: f64, big_m: f64, variant: QVariant) -> Result<bool> {
    check_q(env, &box_geometry(params, rho), c, gamma, big_m, variant)
}

/// Product of per-edge μ-probabilities of the Q pattern.
pub fn q_probability(dist: &crate::weights::DistributionSpec, geom: &BoxGeometry, c: f64, gamma: f64, big_m: f64, variant: QVariant) -> f64 {
    let r = dist.ess_inf();
    let mut p = 1.0;
    for (edges, lo, lc, hi, hc) in q_clauses(geom, gamma, big_m, variant) {
        p *= dist.interval_mass(lo, lc, hi, hc).powi(edges.len() as i32);
    }
    p * dist.cdf(r + c).powi(geom.ctilde_minus_etilde().len() as i32)
}
