//! Passage times, windowed Dijkstra and lexicographically selected geodesics.

use crate::error::{FppError, Result};
use crate::lattice::{LatticeBox, PathRec, Point};
use crate::weights::Environment;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

pub const TIGHT_TOL: f64 = 1e-9;
/// Node budget for the backtracking selection when zero-weight cycles exist.
pub const SELECT_BUDGET: usize = 2_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeodesicResult {
    #[serde(rename = "T")]
    pub t: f64,
    #[serde(flatten)]
    pub geodesic: PathRec,
    pub boundary_touched: bool,
    pub search_box: LatticeBox,
    /// False when the lex-min search ran out of budget and a Dijkstra
    /// predecessor path was returned instead.
    pub selection_exact: bool,
}

pub fn passage_time(env: &Environment, p: &PathRec) -> f64 {
    p.vertices.windows(2).map(|w| edge_weight_between(env, &w[0], &w[1])).sum()
}

fn edge_weight_between(env: &Environment, u: &Point, v: &Point) -> f64 {
    let axis = u.0.iter().zip(&v.0).position(|(a, b)| a != b).unwrap() + 1;
    if u.0[axis - 1] < v.0[axis - 1] {
        env.weight_at(&u.0, axis)
    } else {
        env.weight_at(&v.0, axis)
    }
}

/// Weights of every edge inside a box, indexed by (vertex, axis).
#[derive(Clone, Debug)]
pub struct WeightGrid {
    pub bx: LatticeBox,
    pub d: usize,
    sides: Vec<usize>,
    strides: Vec<usize>,
    /// w[idx*d + a] is the weight of {idx, idx + e_{a+1}}, NaN if it leaves the box.
    w: Vec<f64>,
}

#[derive(Clone, Copy, PartialEq)]
struct HeapItem {
    dist: f64,
    idx: usize,
}

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, o: &Self) -> Ordering {
        o.dist.total_cmp(&self.dist).then_with(|| o.idx.cmp(&self.idx))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

pub const NO_PRED: usize = usize::MAX;

impl WeightGrid {
    pub fn new(env: &Environment, bx: &LatticeBox) -> Self {
        Self::from_fn(bx, |base, axis| env.weight_at(base, axis))
    }

    pub fn from_fn(bx: &LatticeBox, f: impl Fn(&[i64], usize) -> f64) -> Self {
        let d = bx.dim();
        let sides = bx.sides();
        let mut strides = vec![1usize; d];
        for i in (0..d.saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * sides[i + 1];
        }
        let n = bx.num_vertices();
        let mut w = vec![f64::NAN; n * d];
        let mut c = bx.lo.0.clone();
        for idx in 0..n {
            for a in 0..d {
                if c[a] < bx.hi.0[a] {
                    w[idx * d + a] = f(&c, a + 1);
                }
            }
            // advance coordinates in row-major order
            for a in (0..d).rev() {
                if c[a] < bx.hi.0[a] {
                    c[a] += 1;
                    break;
                }
                c[a] = bx.lo.0[a];
            }
        }
        WeightGrid { bx: bx.clone(), d, sides, strides, w }
    }

    pub fn len(&self) -> usize {
        self.bx.num_vertices()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, p: &Point) -> Option<usize> {
        self.bx.index_of(p)
    }

    pub fn point(&self, idx: usize) -> Point {
        self.bx.point_at(idx)
    }

    pub fn coord(&self, idx: usize, a: usize) -> usize {
        (idx / self.strides[a]) % self.sides[a]
    }

    pub fn on_boundary(&self, idx: usize) -> bool {
        (0..self.d).any(|a| {
            let c = self.coord(idx, a);
            c == 0 || c + 1 == self.sides[a]
        })
    }

    /// Weight of the edge from `idx` to `idx + e_{a+1}`.
    pub fn weight_up(&self, idx: usize, a: usize) -> f64 {
        self.w[idx * self.d + a]
    }

    /// Index of `idx + e_{a+1}` if inside the box.
    pub fn up(&self, idx: usize, a: usize) -> Option<usize> {
        (self.coord(idx, a) + 1 < self.sides[a]).then(|| idx + self.strides[a])
    }

    pub fn set_weight_up(&mut self, idx: usize, a: usize, v: f64) {
        self.w[idx * self.d + a] = v;
    }

    /// Neighbours of `idx` inside the box with edge weights, in lex order.
    #[inline]
    pub fn for_neighbors(&self, idx: usize, mut f: impl FnMut(usize, f64, usize)) {
        for a in 0..self.d {
            if self.coord(idx, a) > 0 {
                let j = idx - self.strides[a];
                f(j, self.w[j * self.d + a], a);
            }
        }
        for a in (0..self.d).rev() {
            if self.coord(idx, a) + 1 < self.sides[a] {
                f(idx + self.strides[a], self.w[idx * self.d + a], a);
            }
        }
    }

    pub fn neighbors(&self, idx: usize) -> Vec<(usize, f64)> {
        let mut v = Vec::with_capacity(2 * self.d);
        self.for_neighbors(idx, |j, w, _| v.push((j, w)));
        v
    }

    /// Multi-source Dijkstra; `allowed` restricts the vertices that may be
    /// entered.
    pub fn dijkstra(&self, sources: &[usize], allowed: Option<&[bool]>) -> (Vec<f64>, Vec<usize>) {
        let n = self.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut pred = vec![NO_PRED; n];
        let mut heap = BinaryHeap::new();
        for &s in sources {
            if allowed.map_or(true, |m| m[s]) && dist[s] > 0.0 {
                dist[s] = 0.0;
                heap.push(HeapItem { dist: 0.0, idx: s });
            }
        }
        while let Some(HeapItem { dist: du, idx: u }) = heap.pop() {
            if du > dist[u] {
                continue;
            }
            self.for_neighbors(u, |v, w, _| {
                if allowed.map_or(true, |m| m[v]) {
                    let nd = du + w;
                    if nd < dist[v] {
                        dist[v] = nd;
                        pred[v] = u;
                        heap.push(HeapItem { dist: nd, idx: v });
                    }
                }
            });
        }
        (dist, pred)
    }

    /// Path of vertex indices from a source to `t` following predecessors.
    pub fn trace(pred: &[usize], t: usize) -> Vec<usize> {
        let mut out = vec![t];
        let mut c = t;
        while pred[c] != NO_PRED {
            c = pred[c];
            out.push(c);
        }
        out.reverse();
        out
    }

    pub fn to_path(&self, idxs: &[usize]) -> PathRec {
        PathRec { vertices: idxs.iter().map(|i| self.point(*i)).collect() }
    }
}

fn tol(t: f64) -> f64 {
    TIGHT_TOL * t.abs().max(1.0)
}

/// Lexicographically smallest geodesic from `s` to `t` in the grid, given the
/// distance arrays from both ends. Returns None when the budget is exhausted.
fn lex_min_geodesic(
    g: &WeightGrid,
    s: usize,
    t: usize,
    dy: &[f64],
    total: f64,
    budget: usize,
) -> Option<Vec<usize>> {
    let eps = tol(total);
    let mut on_path = vec![false; g.len()];
    // stack of (vertex, prefix weight, candidate list, next candidate)
    let mut path = vec![s];
    let mut prefix = vec![0.0f64];
    let mut cands: Vec<Vec<usize>> = Vec::new();
    let mut cursor: Vec<usize> = Vec::new();
    on_path[s] = true;
    let push_cands = |u: usize, p: f64, on_path: &[bool]| {
        let mut c = Vec::new();
        g.for_neighbors(u, |v, w, _| {
            if !on_path[v] && (p + w + dy[v] - total).abs() <= eps {
                c.push(v);
            }
        });
        c
    };
    if s == t {
        return Some(path);
    }
    cands.push(push_cands(s, 0.0, &on_path));
    cursor.push(0);
    let mut nodes = 0usize;
    while let Some(top) = cands.last() {
        let k = *cursor.last().unwrap();
        if k >= top.len() {
            cands.pop();
            cursor.pop();
            let u = path.pop().unwrap();
            prefix.pop();
            on_path[u] = false;
            continue;
        }
        *cursor.last_mut().unwrap() += 1;
        let v = top[k];
        if on_path[v] {
            continue;
        }
        nodes += 1;
        if nodes > budget {
            return None;
        }
        let u = *path.last().unwrap();
        let mut w = 0.0;
        g.for_neighbors(u, |j, wj, _| {
            if j == v {
                w = wj;
            }
        });
        let p = prefix.last().unwrap() + w;
        path.push(v);
        prefix.push(p);
        on_path[v] = true;
        if v == t {
            return Some(path);
        }
        cands.push(push_cands(v, p, &on_path));
        cursor.push(0);
    }
    None
}

pub fn padded_box(x: &Point, y: &Point, padding: f64) -> Result<LatticeBox> {
    if !(padding >= 0.0) || !padding.is_finite() {
        return Err(FppError::InvalidArgument(format!("padding {padding} must be ≥ 0")));
    }
    if x.dim() != y.dim() {
        return Err(FppError::DimensionMismatch { expected: x.dim(), got: y.dim() });
    }
    let r = (padding * x.l1_dist(y) as f64).ceil() as i64;
    let lim = i64::MAX / 4;
    if x.0.iter().chain(&y.0).any(|c| c.abs() > lim - r) {
        return Err(FppError::OutOfWindow(format!("{x} / {y}")));
    }
    Ok(LatticeBox::hull(x, y).expand(r))
}

/// Dijkstra in hull(x,y) enlarged by padding·|x−y|_1 on every side.
pub fn shortest_passage(
    env: &Environment,
    x: &Point,
    y: &Point,
    padding: f64,
) -> Result<GeodesicResult> {
    let bx = padded_box(x, y, padding)?;
    shortest_passage_in(env, x, y, &bx)
}

pub fn shortest_passage_in(
    env: &Environment,
    x: &Point,
    y: &Point,
    window: &LatticeBox,
) -> Result<GeodesicResult> {
    let g = WeightGrid::new(env, window);
    shortest_passage_grid(&g, x, y)
}

pub fn shortest_passage_grid(g: &WeightGrid, x: &Point, y: &Point) -> Result<GeodesicResult> {
    let s = g.index(x).ok_or_else(|| FppError::OutOfWindow(x.to_string()))?;
    let t = g.index(y).ok_or_else(|| FppError::OutOfWindow(y.to_string()))?;
    let (dx, pred) = g.dijkstra(&[s], None);
    let total = dx[t];
    if !total.is_finite() {
        return Err(FppError::InvalidArgument("target unreachable in window".into()));
    }
    let (dy, _) = g.dijkstra(&[t], None);
    let (idxs, exact) = match lex_min_geodesic(g, s, t, &dy, total, SELECT_BUDGET) {
        Some(p) => (p, true),
        None => (WeightGrid::trace(&pred, t), false),
    };
    let boundary_touched = idxs.iter().any(|i| g.on_boundary(*i));
    Ok(GeodesicResult {
        t: total,
        geodesic: g.to_path(&idxs),
        boundary_touched: boundary_touched && s != t,
        search_box: g.bx.clone(),
        selection_exact: exact,
    })
}

/// Doubles the padding until the geodesic stays off the window boundary or
/// `max_doublings` is reached. Returns the result and the number of doublings.
pub fn shortest_passage_adaptive(
    env: &Environment,
    x: &Point,
    y: &Point,
    padding: f64,
    max_doublings: u32,
) -> Result<(GeodesicResult, u32)> {
    let mut pad = padding;
    let mut k = 0;
    loop {
        let r = shortest_passage(env, x, y, pad)?;
        if !r.boundary_touched || k >= max_doublings {
            return Ok((r, k));
        }
        pad *= 2.0;
        k += 1;
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeodesicSet {
    pub paths: Vec<PathRec>,
    pub partial: bool,
    #[serde(rename = "T")]
    pub t: f64,
}

pub fn enumerate_geodesics(
    env: &Environment,
    x: &Point,
    y: &Point,
    padding: f64,
    cap: usize,
) -> Result<GeodesicSet> {
    let bx = padded_box(x, y, padding)?;
    enumerate_geodesics_in(env, x, y, &bx, cap)
}

/// All geodesics inside `window`, in lexicographic order, up to `cap`.
pub fn enumerate_geodesics_in(
    env: &Environment,
    x: &Point,
    y: &Point,
    window: &LatticeBox,
    cap: usize,
) -> Result<GeodesicSet> {
    let r = env.dist.ess_inf();
    if r == 0.0 && env.dist.cdf(0.0) > 0.0 {
        return Err(FppError::ZeroWeightEnumeration);
    }
    let g = WeightGrid::new(env, window);
    if (0..g.len()).any(|i| (0..g.d).any(|a| g.weight_up(i, a) == 0.0)) {
        return Err(FppError::ZeroWeightEnumeration);
    }
    let s = g.index(x).ok_or_else(|| FppError::OutOfWindow(x.to_string()))?;
    let t = g.index(y).ok_or_else(|| FppError::OutOfWindow(y.to_string()))?;
    let (dx, _) = g.dijkstra(&[s], None);
    let (dy, _) = g.dijkstra(&[t], None);
    let total = dx[t];
    let eps = tol(total);
    let mut out = Vec::new();
    let mut partial = false;
    let mut path = vec![s];
    fn rec(
        g: &WeightGrid,
        u: usize,
        t: usize,
        dx: &[f64],
        dy: &[f64],
        total: f64,
        eps: f64,
        path: &mut Vec<usize>,
        out: &mut Vec<PathRec>,
        cap: usize,
        partial: &mut bool,
    ) {
        if *partial {
            return;
        }
        if u == t {
            if out.len() >= cap {
                *partial = true;
                return;
            }
            out.push(g.to_path(path));
            return;
        }
        for (v, w) in g.neighbors(u) {
            if (dx[u] + w + dy[v] - total).abs() <= eps && dx[v] > dx[u] {
                path.push(v);
                rec(g, v, t, dx, dy, total, eps, path, out, cap, partial);
                path.pop();
            }
        }
    }
    rec(&g, s, t, &dx, &dy, total, eps, &mut path, &mut out, cap, &mut partial);
    Ok(GeodesicSet { paths: out, partial, t: total })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::make_edge;
    use crate::weights::DistributionSpec;

    fn p(c: &[i64]) -> Point {
        Point(c.to_vec())
    }

    fn unit_env() -> Environment {
        Environment::new(0, DistributionSpec::atoms(&[(1.0, 1.0)]), 2)
    }

    #[test]
    fn trivial_cases() {
        let env = unit_env();
        let r = shortest_passage(&env, &p(&[0, 0]), &p(&[1, 1]), 1.0).unwrap();
        assert_eq!(r.t, 2.0);
        assert_eq!(r.geodesic.len(), 2);
        // lex-min: (0,0),(0,1),(1,1)
        assert_eq!(r.geodesic.vertices[1], p(&[0, 1]));
        let r0 = shortest_passage(&env, &p(&[3, 3]), &p(&[3, 3]), 1.0).unwrap();
        assert_eq!(r0.t, 0.0);
        assert_eq!(r0.geodesic.len(), 0);
        let all = enumerate_geodesics(&env, &p(&[0, 0]), &p(&[1, 1]), 1.0, 100).unwrap();
        assert_eq!(all.paths.len(), 2);
        assert!(all.paths.contains(&r.geodesic));
    }

    #[test]
    fn passage_time_sum() {
        let mut env = unit_env();
        let a = p(&[0, 0]);
        let b = p(&[1, 0]);
        let c = p(&[1, 1]);
        env.set_override(make_edge(&a, &b).unwrap(), 1.5);
        env.set_override(make_edge(&b, &c).unwrap(), 2.5);
        let path = PathRec::new(vec![a.clone(), b, c]).unwrap();
        assert_eq!(passage_time(&env, &path), 4.0);
        assert_eq!(passage_time(&env, &PathRec::single(a)), 0.0);
    }

    #[test]
    fn continuous_unique() {
        let env = Environment::new(11, DistributionSpec::exponential(1.0), 2);
        let x = p(&[0, 0]);
        let y = p(&[4, 3]);
        let r = shortest_passage(&env, &x, &y, 1.0).unwrap();
        let all = enumerate_geodesics(&env, &x, &y, 1.0, 10).unwrap();
        assert_eq!(all.paths.len(), 1);
        assert_eq!(all.paths[0], r.geodesic);
        assert!((passage_time(&env, &r.geodesic) - r.t).abs() < 1e-9);
    }

    #[test]
    fn zero_weights_rejected_for_enumeration() {
        let env =
            Environment::new(1, DistributionSpec::BernoulliShift { a: 0.0, b: 1.0, p: 0.5 }, 2);
        assert_eq!(
            enumerate_geodesics(&env, &p(&[0, 0]), &p(&[1, 1]), 1.0, 5).unwrap_err(),
            FppError::ZeroWeightEnumeration
        );
    }

    #[test]
    fn zero_weight_selection_is_self_avoiding() {
        for seed in 0..20 {
            let env = Environment::new(
                seed,
                DistributionSpec::BernoulliShift { a: 0.0, b: 1.0, p: 0.4 },
                2,
            );
            let r = shortest_passage(&env, &p(&[0, 0]), &p(&[6, 2]), 1.0).unwrap();
            assert!(PathRec::new(r.geodesic.vertices.clone()).is_ok());
            assert_eq!(passage_time(&env, &r.geodesic), r.t);
        }
    }
}
