//! Edge shells, shell-restricted passage times and (k,M)-large edges.

use crate::lattice::{v_e, EdgeId, Point};
use crate::weights::{DistributionSpec, Environment};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShellSpec {
    pub e: EdgeId,
    pub h: u32,
    pub vertices: Vec<Point>,
    pub edges: Vec<EdgeId>,
}

/// Vertices {z : |v_e − z|_∞ = h} and the edges between them; for h = 0 the
/// two endpoints of e and {e}. Both lists are sorted.
pub fn shell(e: &EdgeId, h: u32) -> ShellSpec {
    if h == 0 {
        let (a, b) = e.endpoints();
        return ShellSpec { e: e.clone(), h, vertices: vec![a, b], edges: vec![e.clone()] };
    }
    let c = v_e(e);
    let d = c.dim();
    let h = h as i64;
    let mut vertices = Vec::new();
    let side = 2 * h + 1;
    let total = side.pow(d as u32);
    for mut i in 0..total {
        let mut z = vec![0i64; d];
        for a in (0..d).rev() {
            z[a] = c.0[a] - h + i % side;
            i /= side;
        }
        let p = Point(z);
        if p.linf_dist(&c) == h {
            vertices.push(p);
        }
    }
    let mut edges = Vec::new();
    for v in &vertices {
        for a in 1..=d {
            let w = v.step(a, 1);
            if w.linf_dist(&c) == h {
                edges.push(EdgeId { base: v.clone(), axis: a });
            }
        }
    }
    edges.sort();
    ShellSpec { e: e.clone(), h: h as u32, vertices, edges }
}

#[derive(Clone, Copy, PartialEq)]
struct Item(f64, usize);
impl Eq for Item {}
impl Ord for Item {
    fn cmp(&self, o: &Self) -> Ordering {
        o.0.total_cmp(&self.0).then_with(|| o.1.cmp(&self.1))
    }
}
impl PartialOrd for Item {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// Dijkstra on an adjacency list.
pub fn graph_dijkstra(adj: &[Vec<(usize, f64)>], src: usize) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; adj.len()];
    dist[src] = 0.0;
    let mut heap = BinaryHeap::new();
    heap.push(Item(0.0, src));
    while let Some(Item(du, u)) = heap.pop() {
        if du > dist[u] {
            continue;
        }
        for &(v, w) in &adj[u] {
            let nd = du + w;
            if nd < dist[v] {
                dist[v] = nd;
                heap.push(Item(nd, v));
            }
        }
    }
    dist
}

fn shell_graph(env: &Environment, s: &ShellSpec) -> Vec<Vec<(usize, f64)>> {
    let idx: HashMap<&Point, usize> = s.vertices.iter().enumerate().map(|(i, p)| (p, i)).collect();
    let mut adj = vec![Vec::new(); s.vertices.len()];
    for e in &s.edges {
        let w = env.weight(e);
        let a = idx[&e.base];
        let b = idx[&e.other()];
        adj[a].push((b, w));
        adj[b].push((a, w));
    }
    adj
}

/// max_{u,v ∈ S_h'} T_{S_h}(u,v).
pub fn restricted_passage_max(env: &Environment, e: &EdgeId, h: u32) -> f64 {
    if h == 0 {
        return env.weight(e);
    }
    let s = shell(e, h);
    let adj = shell_graph(env, &s);
    (0..adj.len())
        .map(|i| graph_dijkstra(&adj, i).into_iter().fold(0.0, f64::max))
        .fold(0.0, f64::max)
}

pub fn is_km_large(env: &Environment, e: &EdgeId, k: u32, m: f64) -> bool {
    (0..=k).all(|h| restricted_passage_max(env, e, h) >= m)
}

/// Shell h around e encloses z iff |v_e − z|_∞ ≤ h.
pub fn encloses(e: &EdgeId, h: u32, z: &Point) -> bool {
    v_e(e).linf_dist(z) <= h as i64
}

pub fn shell_edge_count(d: usize, h: u32) -> usize {
    if h == 0 {
        return 1;
    }
    let e = EdgeId { base: Point::origin(d), axis: 1 };
    shell(&e, h).edges.len()
}

pub fn shell_vertex_count(d: usize, h: u32) -> usize {
    if h == 0 {
        return 2;
    }
    ((2 * h as usize + 1).pow(d as u32)) - ((2 * h as usize - 1).pow(d as u32))
}

/// C^{dk} (10k)^{10kd} P(τ ≥ M/C)^{k(d−1)} clipped to [0,1], with C the
/// largest shell edge count over radii ≤ k.
pub fn klarge_bound(dist: &DistributionSpec, k: u32, m: f64, d: usize) -> f64 {
    let c = (1..=k.max(1)).map(|h| shell_edge_count(d, h)).max().unwrap() as f64;
    let tail = dist.tail(m / c);
    if tail == 0.0 {
        return 0.0;
    }
    let (k, df) = (k as f64, d as f64);
    let lb = df * k * c.ln() + 10.0 * k * df * (10.0 * k).ln() + k * (df - 1.0) * tail.ln();
    lb.exp().clamp(0.0, 1.0)
}

/// Per-level union bound with the exact pair count of each shell:
/// Π_{h=1..k} min(1, npairs_h (C_h P(τ ≥ M/C_h))^{d−1}).
pub fn klarge_bound_tight(dist: &DistributionSpec, k: u32, m: f64, d: usize) -> f64 {
    let mut b = 1.0;
    for h in 1..=k {
        let c = shell_edge_count(d, h) as f64;
        let nv = shell_vertex_count(d, h) as f64;
        let pairs = nv * (nv - 1.0) / 2.0;
        let lvl = pairs * (c * dist.tail(m / c)).powi(d as i32 - 1);
        b *= lvl.min(1.0);
    }
    b
}
