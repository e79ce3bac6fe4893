//! Thresholded open fields, chemical distances, oriented percolation and the
//! black-box machinery built on them.

mod black;
mod clusters;
mod geometry;

pub use black::*;
pub use clusters::*;
pub use geometry::*;

use crate::error::{FppError, Result};
use crate::geodesics::WeightGrid;
use crate::lattice::{EdgeId, LatticeBox, Point};
use crate::weights::Environment;
use serde::{Deserialize, Serialize};
use std::collections::{HashSet, VecDeque};

/// w_e = 1 iff τ_e ≤ threshold.
#[derive(Clone, Debug)]
pub struct OpenField {
    pub env: Environment,
    pub threshold: f64,
}

pub fn open_field(env: &Environment, threshold: f64) -> Result<OpenField> {
    if !(threshold >= 0.0) {
        return Err(FppError::InvalidArgument(format!("threshold {threshold} < 0")));
    }
    Ok(OpenField { env: env.clone(), threshold })
}

impl OpenField {
    pub fn is_open(&self, e: &EdgeId) -> bool {
        self.env.weight(e) <= self.threshold
    }

    pub fn open_at(&self, base: &[i64], axis: usize) -> bool {
        self.env.weight_at(base, axis) <= self.threshold
    }

    /// Open indicators over a window, as a grid of 1.0 (open) / 0.0.
    pub fn grid(&self, window: &LatticeBox) -> OpenGrid {
        let g = WeightGrid::new(&self.env, window);
        OpenGrid { g, threshold: self.threshold }
    }
}

/// Weights of a window plus the threshold.
#[derive(Clone, Debug)]
pub struct OpenGrid {
    pub g: WeightGrid,
    pub threshold: f64,
}

impl OpenGrid {
    pub fn open_up(&self, idx: usize, a: usize) -> bool {
        self.g.weight_up(idx, a) <= self.threshold
    }

    pub fn for_open_neighbors(&self, idx: usize, mut f: impl FnMut(usize)) {
        let t = self.threshold;
        self.g.for_neighbors(idx, |j, w, _| {
            if w <= t {
                f(j)
            }
        });
    }
}

/// BFS length of the shortest open path inside `window`; with `restrict`,
/// only edges having at least one endpoint in the set are usable.
pub fn chemical_distance(
    field: &OpenField,
    u: &Point,
    v: &Point,
    window: &LatticeBox,
    restrict: Option<&HashSet<Point>>,
) -> Result<Option<usize>> {
    let og = field.grid(window);
    chemical_distance_grid(&og, u, v, restrict)
}

pub fn chemical_distance_grid(
    og: &OpenGrid,
    u: &Point,
    v: &Point,
    restrict: Option<&HashSet<Point>>,
) -> Result<Option<usize>> {
    let g = &og.g;
    let s = g.index(u).ok_or_else(|| FppError::OutOfWindow(u.to_string()))?;
    let t = g.index(v).ok_or_else(|| FppError::OutOfWindow(v.to_string()))?;
    let mask: Option<Vec<bool>> =
        restrict.map(|r| (0..g.len()).map(|i| r.contains(&g.point(i))).collect());
    let dist = bfs_open(og, s, mask.as_deref());
    Ok(dist[t])
}

/// Open-edge BFS distances from `s`; `mask` keeps edges with an endpoint in it.
pub fn bfs_open(og: &OpenGrid, s: usize, mask: Option<&[bool]>) -> Vec<Option<usize>> {
    let mut dist = vec![None; og.g.len()];
    dist[s] = Some(0);
    let mut q = VecDeque::from([s]);
    while let Some(x) = q.pop_front() {
        let dx = dist[x].unwrap();
        og.for_open_neighbors(x, |y| {
            if dist[y].is_none() && mask.map_or(true, |m| m[x] || m[y]) {
                dist[y] = Some(dx + 1);
                q.push_back(y);
            }
        });
    }
    dist
}

/// Minimal passage time over oriented paths (0,0) → (n,n), steps in {e1, e2}.
pub fn oriented_min_passage(env: &Environment, n: usize) -> Result<f64> {
    oriented_min_passage_from(env, &[0, 0], n)
}

pub fn oriented_min_passage_from(env: &Environment, origin: &[i64], n: usize) -> Result<f64> {
    if env.d != 2 {
        return Err(FppError::InvalidArgument("oriented passage is planar (d = 2)".into()));
    }
    if n == 0 {
        return Err(FppError::InvalidArgument("n must be at least 1".into()));
    }
    let w = n + 1;
    let mut dp = vec![f64::INFINITY; w * w];
    dp[0] = 0.0;
    for i in 0..=n {
        for j in 0..=n {
            let here = dp[i * w + j];
            let base = [origin[0] + i as i64, origin[1] + j as i64];
            if i < n {
                let c = here + env.weight_at(&base, 1);
                if c < dp[(i + 1) * w + j] {
                    dp[(i + 1) * w + j] = c;
                }
            }
            if j < n {
                let c = here + env.weight_at(&base, 2);
                if c < dp[i * w + j + 1] {
                    dp[i * w + j + 1] = c;
                }
            }
        }
    }
    Ok(dp[w * w - 1])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrientedLevels {
    /// rightmost reachable x per level (None once dead)
    pub r: Vec<Option<i64>>,
    pub l: Vec<Option<i64>>,
    pub alive: Vec<bool>,
}

/// Reachable-set propagation on the rotated lattice {(x,t) : x + t even}.
/// The directed edge (x,t) → (x+1,t+1) is the lattice edge at
/// ((t+x)/2, (t−x)/2) along e1, and (x,t) → (x−1,t+1) is the one along e2.
pub fn oriented_edge_processes(field: &OpenField, init: &[i64], levels: usize) -> Result<OrientedLevels> {
    if field.env.d != 2 {
        return Err(FppError::InvalidArgument("oriented percolation is planar (d = 2)".into()));
    }
    if init.is_empty() {
        return Err(FppError::InvalidArgument("empty initial set".into()));
    }
    if init.iter().any(|x| x.rem_euclid(2) != 0) {
        return Err(FppError::InvalidArgument("initial sites must have even parity".into()));
    }
    let mut cur: Vec<i64> = init.to_vec();
    cur.sort_unstable();
    cur.dedup();
    let mut out = OrientedLevels {
        r: vec![cur.last().copied()],
        l: vec![cur.first().copied()],
        alive: vec![true],
    };
    for t in 0..levels as i64 {
        let mut next = Vec::with_capacity(cur.len() + 1);
        for &x in &cur {
            let base = [(t + x).div_euclid(2), (t - x).div_euclid(2)];
            if field.open_at(&base, 2) {
                next.push(x - 1);
            }
            if field.open_at(&base, 1) {
                next.push(x + 1);
            }
        }
        next.sort_unstable();
        next.dedup();
        cur = next;
        out.r.push(cur.last().copied());
        out.l.push(cur.first().copied());
        out.alive.push(!cur.is_empty());
        if cur.is_empty() {
            // stays dead
            for _ in (t + 1)..levels as i64 {
                out.r.push(None);
                out.l.push(None);
                out.alive.push(false);
            }
            break;
        }
    }
    Ok(out)
}
