use super::{OpenField, OpenGrid};
use crate::error::{FppError, Result};
use crate::lattice::{LatticeBox, Point};
use serde::{Deserialize, Serialize};
use std::collections::{HashSet, VecDeque};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Color {
    Black,
    White,
}

/// Offsets of the 3^d − 1 neighbours in the ℒ graph, lexicographic.
pub fn l_offsets(d: usize) -> Vec<Vec<i64>> {
    let total = 3usize.pow(d as u32);
    (0..total)
        .map(|mut n| {
            let mut c = vec![0i64; d];
            for i in (0..d).rev() {
                c[i] = (n % 3) as i64 - 1;
                n /= 3;
            }
            c
        })
        .filter(|c| c.iter().any(|x| *x != 0))
        .collect()
}

fn permutations(v: &[usize]) -> Vec<Vec<usize>> {
    if v.len() <= 1 {
        return vec![v.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..v.len() {
        let mut rest = v.to_vec();
        let x = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, x);
            out.push(p);
        }
    }
    out
}

impl OpenGrid {
    /// Colour of the lattice edge between adjacent window points.
    fn edge_color(&self, a: &Point, b: &Point) -> Option<Color> {
        let axis = a.0.iter().zip(&b.0).position(|(x, y)| x != y)?;
        let base = if a.0[axis] < b.0[axis] { a } else { b };
        let idx = self.g.index(base)?;
        self.g.index(&base.step(axis + 1, 1))?;
        Some(if self.open_up(idx, axis) { Color::White } else { Color::Black })
    }

    /// An ℒ step u → v has colour c iff some monotone lattice path from u to
    /// v inside the window uses only edges of colour c.
    pub fn l_step_has_color(&self, u: &Point, v: &Point, c: Color) -> bool {
        let axes: Vec<usize> = (0..u.dim()).filter(|i| u.0[*i] != v.0[*i]).collect();
        permutations(&axes).into_iter().any(|order| {
            let mut cur = u.clone();
            order.iter().all(|&a| {
                let s = v.0[a] - u.0[a];
                let nxt = cur.step(a + 1, s);
                let ok = self.edge_color(&cur, &nxt) == Some(c);
                cur = nxt;
                ok
            })
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterResult {
    pub cluster: Vec<Point>,
    pub exterior_boundary: Vec<Point>,
    /// cluster reached the window boundary (possibly infinite)
    pub truncated: bool,
}

/// The colour-c cluster of A on ℒ: A plus every vertex joined to A by a
/// colour-c ℒ path whose vertices other than the last avoid A.
pub fn cluster_in_grid(og: &OpenGrid, a: &[Point], color: Color) -> (Vec<Point>, bool) {
    let d = og.g.d;
    let offs = l_offsets(d);
    let a_set: HashSet<&Point> = a.iter().collect();
    let mut seen: HashSet<Point> = a.iter().cloned().collect();
    let mut q: VecDeque<Point> = a.iter().cloned().collect();
    let mut truncated = false;
    while let Some(x) = q.pop_front() {
        if og.g.bx.on_boundary(&x) || !og.g.bx.contains(&x) {
            truncated = true;
        }
        for o in &offs {
            let y = Point(x.0.iter().zip(o).map(|(p, q)| p + q).collect());
            if seen.contains(&y) || a_set.contains(&y) {
                continue;
            }
            if !og.g.bx.contains(&y) {
                truncated = true;
                continue;
            }
            if og.l_step_has_color(&x, &y, color) {
                seen.insert(y.clone());
                q.push_back(y);
            }
        }
    }
    let mut v: Vec<Point> = seen.into_iter().collect();
    v.sort();
    (v, truncated)
}

/// ℒ-neighbours of `a` (outside it) joined to infinity by a lattice path
/// avoiding `a`. Computed exactly inside bbox(a) + 1, whose frame connects to
/// infinity.
pub fn exterior_boundary(a: &[Point]) -> Vec<Point> {
    if a.is_empty() {
        return Vec::new();
    }
    let d = a[0].dim();
    let mut lo = a[0].clone();
    let mut hi = a[0].clone();
    for p in a {
        for i in 0..d {
            lo.0[i] = lo.0[i].min(p.0[i]);
            hi.0[i] = hi.0[i].max(p.0[i]);
        }
    }
    let region = LatticeBox { lo, hi }.expand(1);
    let n = region.num_vertices();
    let mut in_a = vec![false; n];
    for p in a {
        in_a[region.index_of(p).unwrap()] = true;
    }
    let mut outside = vec![false; n];
    let mut q = VecDeque::new();
    for i in 0..n {
        let p = region.point_at(i);
        if region.on_boundary(&p) {
            outside[i] = true;
            q.push_back(p);
        }
    }
    while let Some(p) = q.pop_front() {
        for w in p.neighbors() {
            if let Some(j) = region.index_of(&w) {
                if !in_a[j] && !outside[j] {
                    outside[j] = true;
                    q.push_back(w);
                }
            }
        }
    }
    let offs = l_offsets(d);
    let mut out: Vec<Point> = (0..n)
        .filter(|&i| outside[i])
        .map(|i| region.point_at(i))
        .filter(|p| {
            offs.iter().any(|o| {
                let y = Point(p.0.iter().zip(o).map(|(x, q)| x + q).collect());
                region.index_of(&y).is_some_and(|j| in_a[j])
            })
        })
        .collect();
    out.sort();
    out
}

pub fn cluster_and_boundary(
    field: &OpenField,
    a: &[Point],
    color: Color,
    window: &LatticeBox,
) -> Result<ClusterResult> {
    let og = field.grid(window);
    cluster_and_boundary_grid(&og, a, color)
}

pub fn cluster_and_boundary_grid(og: &OpenGrid, a: &[Point], color: Color) -> Result<ClusterResult> {
    if a.is_empty() {
        return Err(FppError::InvalidArgument("empty seed set".into()));
    }
    if let Some(p) = a.iter().find(|p| !og.g.bx.contains(p)) {
        return Err(FppError::OutOfWindow(p.to_string()));
    }
    let (cluster, truncated) = cluster_in_grid(og, a, color);
    let exterior_boundary = exterior_boundary(&cluster);
    Ok(ClusterResult { cluster, exterior_boundary, truncated })
}

struct UnionFind {
    parent: Vec<u32>,
    rank: Vec<u8>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n as u32).collect(), rank: vec![0; n] }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] as usize != x {
            let p = self.parent[x] as usize;
            self.parent[x] = self.parent[p];
            x = p;
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb as u32,
            std::cmp::Ordering::Greater => self.parent[rb] = ra as u32,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra as u32;
                self.rank[ra] += 1;
            }
        }
    }
}

/// Open clusters of a window, with the ones touching the window boundary
/// standing in for infinite clusters.
pub struct ShellContext {
    pub og: OpenGrid,
    comp: Vec<u32>,
    infinite: Vec<bool>,
}

impl ShellContext {
    pub fn new(field: &OpenField, window: &LatticeBox) -> Self {
        Self::from_grid(field.grid(window))
    }

    pub fn from_grid(og: OpenGrid) -> Self {
        let n = og.g.len();
        let d = og.g.d;
        let mut uf = UnionFind::new(n);
        for i in 0..n {
            for a in 0..d {
                let w = og.g.weight_up(i, a);
                if w <= og.threshold {
                    uf.union(i, og.g.up(i, a).unwrap());
                }
            }
        }
        let comp: Vec<u32> = (0..n).map(|i| uf.find(i) as u32).collect();
        let mut infinite = vec![false; n];
        for i in 0..n {
            if og.g.on_boundary(i) {
                infinite[comp[i] as usize] = true;
            }
        }
        ShellContext { og, comp, infinite }
    }

    pub fn window(&self) -> &LatticeBox {
        &self.og.g.bx
    }

    /// The white ℒ-cluster of p reaches the window boundary.
    pub fn is_infinite(&self, p: &Point) -> bool {
        self.og.g.index(p).is_some_and(|i| self.infinite[self.comp[i] as usize])
    }

    pub fn same_cluster(&self, a: &Point, b: &Point) -> bool {
        match (self.og.g.index(a), self.og.g.index(b)) {
            (Some(i), Some(j)) => self.comp[i] == self.comp[j],
            _ => false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KestenShell {
    pub v: Point,
    pub n_v: usize,
    pub shell: Vec<Point>,
    pub black_cluster_size: usize,
    pub truncated: bool,
}

impl KestenShell {
    /// max ℓ1 distance between shell vertices
    pub fn diameter(&self) -> i64 {
        let mut best = 0;
        for (i, a) in self.shell.iter().enumerate() {
            for b in &self.shell[i + 1..] {
                best = best.max(a.l1_dist(b));
            }
        }
        best
    }
}

pub fn d_k(v: &Point, k: i64) -> LatticeBox {
    LatticeBox { lo: v.clone(), hi: v.clone() }.expand(k)
}

/// S(v) = exterior boundary of the black cluster of D_{n(v)}(v).
pub fn kesten_shell_ctx(ctx: &ShellContext, v: &Point) -> Result<KestenShell> {
    let w = ctx.window();
    let mut k = 0i64;
    loop {
        let dk = d_k(v, k);
        if !w.contains_box(&dk) {
            return Err(FppError::ShellFailure(format!(
                "no boundary-reaching white cluster within D_{k}({v}) inside the window"
            )));
        }
        if dk.points().any(|u| ctx.is_infinite(&u)) {
            break;
        }
        k += 1;
    }
    let a: Vec<Point> = d_k(v, k).points().collect();
    let (cluster, truncated) = cluster_in_grid(&ctx.og, &a, Color::Black);
    let shell = exterior_boundary(&cluster);
    Ok(KestenShell { v: v.clone(), n_v: k as usize, shell, black_cluster_size: cluster.len(), truncated })
}

pub fn kesten_shell(field: &OpenField, v: &Point, window: &LatticeBox) -> Result<KestenShell> {
    kesten_shell_ctx(&ShellContext::new(field, window), v)
}
