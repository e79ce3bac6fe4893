//! Points, canonical edges and finite boxes of Z^d.

use crate::error::{FppError, Result};
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(pub Vec<i64>);

impl Point {
    pub fn new(coords: Vec<i64>) -> Self {
        Point(coords)
    }

    pub fn origin(d: usize) -> Self {
        Point(vec![0; d])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn l1(&self) -> i64 {
        self.0.iter().map(|c| c.abs()).sum()
    }

    pub fn linf(&self) -> i64 {
        self.0.iter().map(|c| c.abs()).max().unwrap_or(0)
    }

    pub fn l1_dist(&self, o: &Point) -> i64 {
        self.0.iter().zip(&o.0).map(|(a, b)| (a - b).abs()).sum()
    }

    pub fn linf_dist(&self, o: &Point) -> i64 {
        self.0.iter().zip(&o.0).map(|(a, b)| (a - b).abs()).max().unwrap_or(0)
    }

    /// Unit step along 1-based `axis` with sign `s` (±1).
    pub fn step(&self, axis: usize, s: i64) -> Point {
        let mut c = self.0.clone();
        c[axis - 1] = c[axis - 1].checked_add(s).expect("coordinate overflow");
        Point(c)
    }

    pub fn add(&self, o: &Point) -> Point {
        Point(
            self.0
                .iter()
                .zip(&o.0)
                .map(|(a, b)| a.checked_add(*b).expect("coordinate overflow"))
                .collect(),
        )
    }

    pub fn sub(&self, o: &Point) -> Point {
        Point(
            self.0
                .iter()
                .zip(&o.0)
                .map(|(a, b)| a.checked_sub(*b).expect("coordinate overflow"))
                .collect(),
        )
    }

    pub fn scale(&self, k: i64) -> Point {
        Point(self.0.iter().map(|a| a.checked_mul(k).expect("coordinate overflow")).collect())
    }

    /// Nearest neighbours in the fixed lexicographic order
    /// u−e1, u−e2, …, u−ed, u+ed, …, u+e1.
    pub fn neighbors(&self) -> Vec<Point> {
        let d = self.dim();
        let mut out = Vec::with_capacity(2 * d);
        for a in 1..=d {
            out.push(self.step(a, -1));
        }
        for a in (1..=d).rev() {
            out.push(self.step(a, 1));
        }
        out
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// The unordered edge {base, base + e_axis}; `axis` is 1-based.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgeId {
    pub base: Point,
    pub axis: usize,
}

impl EdgeId {
    pub fn endpoints(&self) -> (Point, Point) {
        (self.base.clone(), self.base.step(self.axis, 1))
    }

    pub fn other(&self) -> Point {
        self.base.step(self.axis, 1)
    }

    pub fn contains(&self, p: &Point) -> bool {
        *p == self.base || *p == self.other()
    }
}

pub fn make_edge(u: &Point, v: &Point) -> Result<EdgeId> {
    if u.dim() != v.dim() {
        return Err(FppError::DimensionMismatch { expected: u.dim(), got: v.dim() });
    }
    if u.l1_dist(v) != 1 {
        return Err(FppError::NotAdjacent(u.to_string(), v.to_string()));
    }
    let axis = u.0.iter().zip(&v.0).position(|(a, b)| a != b).unwrap() + 1;
    let base = if u.0[axis - 1] < v.0[axis - 1] { u.clone() } else { v.clone() };
    Ok(EdgeId { base, axis })
}

/// Endpoint with the smaller ℓ1 norm.
pub fn v_e(e: &EdgeId) -> Point {
    let (a, b) = e.endpoints();
    if a.l1() < b.l1() {
        a
    } else {
        b
    }
}

/// Closed box [lo, hi] with row-major indexing, first coordinate most
/// significant, so ascending index is lexicographic order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatticeBox {
    pub lo: Point,
    pub hi: Point,
}

impl LatticeBox {
    pub fn new(lo: Point, hi: Point) -> Result<Self> {
        if lo.dim() != hi.dim() {
            return Err(FppError::DimensionMismatch { expected: lo.dim(), got: hi.dim() });
        }
        if lo.0.iter().zip(&hi.0).any(|(a, b)| a > b) {
            return Err(FppError::InvalidArgument(format!("box corners {lo} > {hi}")));
        }
        Ok(LatticeBox { lo, hi })
    }

    pub fn cube(d: usize, lo: i64, hi: i64) -> Self {
        LatticeBox { lo: Point(vec![lo; d]), hi: Point(vec![hi; d]) }
    }

    /// Smallest box containing both points.
    pub fn hull(a: &Point, b: &Point) -> Self {
        LatticeBox {
            lo: Point(a.0.iter().zip(&b.0).map(|(x, y)| *x.min(y)).collect()),
            hi: Point(a.0.iter().zip(&b.0).map(|(x, y)| *x.max(y)).collect()),
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.dim()
    }

    pub fn side(&self, i: usize) -> usize {
        (self.hi.0[i] - self.lo.0[i] + 1) as usize
    }

    pub fn sides(&self) -> Vec<usize> {
        (0..self.dim()).map(|i| self.side(i)).collect()
    }

    pub fn num_vertices(&self) -> usize {
        self.sides().iter().product()
    }

    pub fn expand(&self, r: i64) -> Self {
        LatticeBox {
            lo: Point(self.lo.0.iter().map(|c| c - r).collect()),
            hi: Point(self.hi.0.iter().map(|c| c + r).collect()),
        }
    }

    pub fn contains(&self, p: &Point) -> bool {
        p.dim() == self.dim()
            && p.0.iter().enumerate().all(|(i, c)| *c >= self.lo.0[i] && *c <= self.hi.0[i])
    }

    pub fn contains_coords(&self, c: &[i64]) -> bool {
        c.iter().enumerate().all(|(i, x)| *x >= self.lo.0[i] && *x <= self.hi.0[i])
    }

    pub fn contains_box(&self, o: &LatticeBox) -> bool {
        self.contains(&o.lo) && self.contains(&o.hi)
    }

    /// True if `p` lies on a face of the box.
    pub fn on_boundary(&self, p: &Point) -> bool {
        self.contains(p)
            && p.0.iter().enumerate().any(|(i, c)| *c == self.lo.0[i] || *c == self.hi.0[i])
    }

    pub fn index_of(&self, p: &Point) -> Option<usize> {
        self.index_of_coords(&p.0)
    }

    pub fn index_of_coords(&self, c: &[i64]) -> Option<usize> {
        let mut idx = 0usize;
        for (i, x) in c.iter().enumerate() {
            if *x < self.lo.0[i] || *x > self.hi.0[i] {
                return None;
            }
            idx = idx * self.side(i) + (x - self.lo.0[i]) as usize;
        }
        Some(idx)
    }

    pub fn point_at(&self, mut idx: usize) -> Point {
        let d = self.dim();
        let mut c = vec![0i64; d];
        for i in (0..d).rev() {
            let s = self.side(i);
            c[i] = self.lo.0[i] + (idx % s) as i64;
            idx /= s;
        }
        Point(c)
    }

    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        (0..self.num_vertices()).map(move |i| self.point_at(i))
    }

    pub fn boundary_points(&self) -> Vec<Point> {
        self.points().filter(|p| self.on_boundary(p)).collect()
    }
}

/// All edges with both endpoints in `b`, sorted by (base, axis).
pub fn edges_in_box(b: &LatticeBox) -> Vec<EdgeId> {
    let mut out = Vec::new();
    for p in b.points() {
        for axis in 1..=b.dim() {
            if p.0[axis - 1] < b.hi.0[axis - 1] {
                out.push(EdgeId { base: p.clone(), axis });
            }
        }
    }
    out
}

/// Lattice-graph steps along single axes, as (axis, sign) pairs in the
/// neighbour order used everywhere for tie-breaking.
pub fn neighbor_dirs(d: usize) -> Vec<(usize, i64)> {
    let mut v: Vec<(usize, i64)> = (1..=d).map(|a| (a, -1)).collect();
    v.extend((1..=d).rev().map(|a| (a, 1)));
    v
}

/// A vertex self-avoiding lattice path.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PathRec {
    pub vertices: Vec<Point>,
}

impl PathRec {
    pub fn new(vertices: Vec<Point>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(FppError::InvalidArgument("empty path".into()));
        }
        for w in vertices.windows(2) {
            if w[0].l1_dist(&w[1]) != 1 {
                return Err(FppError::NotAdjacent(w[0].to_string(), w[1].to_string()));
            }
        }
        let mut seen = std::collections::HashSet::new();
        for v in &vertices {
            if !seen.insert(v) {
                return Err(FppError::InvalidArgument(format!("vertex {v} repeated")));
            }
        }
        Ok(PathRec { vertices })
    }

    pub fn single(p: Point) -> Self {
        PathRec { vertices: vec![p] }
    }

    pub fn len(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn edges(&self) -> Vec<EdgeId> {
        self.vertices.windows(2).map(|w| make_edge(&w[0], &w[1]).unwrap()).collect()
    }

    pub fn start(&self) -> &Point {
        &self.vertices[0]
    }

    pub fn end(&self) -> &Point {
        self.vertices.last().unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[i64]) -> Point {
        Point(c.to_vec())
    }

    #[test]
    fn make_edge_canonical() {
        let e = make_edge(&p(&[0, 0]), &p(&[1, 0])).unwrap();
        assert_eq!(e, EdgeId { base: p(&[0, 0]), axis: 1 });
        assert_eq!(make_edge(&p(&[1, 0]), &p(&[0, 0])).unwrap(), e);
        assert!(make_edge(&p(&[0, 0]), &p(&[1, 1])).is_err());
    }

    #[test]
    fn v_e_examples() {
        let e = |a: &[i64], b: &[i64]| make_edge(&p(a), &p(b)).unwrap();
        assert_eq!(v_e(&e(&[2, 0], &[3, 0])), p(&[2, 0]));
        assert_eq!(v_e(&e(&[0, 0], &[-1, 0])), p(&[0, 0]));
        assert_eq!(v_e(&e(&[-1, 1], &[-2, 1])), p(&[-1, 1]));
    }

    #[test]
    fn edge_counts() {
        assert_eq!(edges_in_box(&LatticeBox::cube(2, 0, 1)).len(), 4);
        assert!(edges_in_box(&LatticeBox::cube(2, 0, 0)).is_empty());
        assert_eq!(edges_in_box(&LatticeBox::cube(2, 0, 2)).len(), 12);
    }

    #[test]
    fn index_roundtrip_is_lex() {
        let b = LatticeBox::new(p(&[-1, 2, 0]), p(&[1, 4, 3])).unwrap();
        let pts: Vec<Point> = b.points().collect();
        for (i, q) in pts.iter().enumerate() {
            assert_eq!(b.index_of(q), Some(i));
        }
        let mut sorted = pts.clone();
        sorted.sort();
        assert_eq!(sorted, pts);
    }

    #[test]
    fn neighbor_order_is_lex() {
        let n = p(&[0, 0, 0]).neighbors();
        let mut s = n.clone();
        s.sort();
        assert_eq!(n, s);
    }
}
