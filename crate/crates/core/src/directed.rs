//! Half-space connection by diagonal segments of controlled length.

use crate::constants::segment_budget;
use crate::error::{FppError, Result};
use crate::lattice::Point;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalfSpace {
    /// 1-based axis
    pub axis: usize,
    pub c: f64,
}

/// A vector ±e_i ± e_j with i ≠ j (both axes 1-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagVec {
    pub i: usize,
    pub si: i64,
    pub j: usize,
    pub sj: i64,
}

impl DiagVec {
    pub fn to_point(&self, d: usize) -> Point {
        let mut v = vec![0i64; d];
        v[self.i - 1] += self.si;
        v[self.j - 1] += self.sj;
        Point(v)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentDecomposition {
    pub y_star: Point,
    pub segments: Vec<(i64, DiagVec)>,
}

impl SegmentDecomposition {
    pub fn k(&self) -> usize {
        self.segments.len()
    }

    /// Positions x + Σ_{i≤k} a_i v_i for k = 1..K.
    pub fn positions(&self, x: &Point) -> Vec<Point> {
        let d = x.dim();
        let mut cur = x.0.clone();
        let mut out = Vec::with_capacity(self.segments.len());
        for (a, v) in &self.segments {
            let p = v.to_point(d);
            for (c, q) in cur.iter_mut().zip(&p.0) {
                *c += a * q;
            }
            out.push(Point(cur.clone()));
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Clause {
    YStar,
    Parity,
    Sum,
    Count,
    VectorSet,
    Magnitude,
    Ball,
    HalfSpace,
}

impl std::fmt::Display for Clause {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Clause::YStar => "y_star clause",
            Clause::Parity => "parity clause",
            Clause::Sum => "sum clause",
            Clause::Count => "count clause",
            Clause::VectorSet => "vector-set clause",
            Clause::Magnitude => "magnitude clause",
            Clause::Ball => "ball clause",
            Clause::HalfSpace => "half-space clause",
        };
        f.write_str(s)
    }
}

struct Builder {
    pos: Vec<i64>,
    segs: Vec<(i64, DiagVec)>,
}

impl Builder {
    fn add(&mut self, a: i64, i: usize, si: i64, j: usize, sj: i64) {
        debug_assert!(a != 0 && i != j);
        self.pos[i - 1] += a * si;
        self.pos[j - 1] += a * sj;
        self.segs.push((a, DiagVec { i, si, j, sj }));
    }
}

fn sgn_toward(from: i64, to: i64) -> i64 {
    if to > from {
        1
    } else {
        -1
    }
}

pub fn connect_in_halfspace(
    x: &Point,
    y: &Point,
    h: &HalfSpace,
    m: i64,
) -> Result<SegmentDecomposition> {
    let d = x.dim();
    let pre = |s: &str| Err(FppError::Precondition(s.to_string()));
    if d < 2 || y.dim() != d {
        return pre("dimension");
    }
    if h.axis == 0 || h.axis > d {
        return pre("half-space axis out of range");
    }
    if m < 1000 {
        return pre("m ≥ 1000");
    }
    if x.l1_dist(y) > m {
        return pre("|x − y|_1 ≤ m");
    }
    let l = h.axis;
    if !((x.0[l - 1] as f64) >= h.c) {
        return pre("x·e_l ≥ c");
    }
    if !((y.0[l - 1] as f64) > h.c) {
        return pre("y·e_l > c");
    }
    let y_star = Point(
        x.0.iter().zip(&y.0).map(|(a, b)| if (a - b).rem_euclid(2) == 1 { b + 1 } else { *b }).collect(),
    );
    let mut b = Builder { pos: x.0.clone(), segs: Vec::new() };
    if y_star == *x {
        return Ok(SegmentDecomposition { y_star, segments: Vec::new() });
    }
    let a = if l == 1 { 2 } else { 1 };
    let f = m / 100;
    let g = (m + 799) / 800;
    let win = m as f64 / 300.0;
    let ys = &y_star.0;
    let far = |p: &[i64], ax: usize| ((p[ax - 1] - ys[ax - 1]).abs() as f64) > win;

    // First pair (a, l).
    if b.pos[a - 1] != ys[a - 1] || b.pos[l - 1] != ys[l - 1] {
        if far(&b.pos, a) || far(&b.pos, l) {
            let s1 = sgn_toward(x.0[a - 1], ys[a - 1]);
            // Phase 1: approach along a while the l coordinate oscillates
            // between x_l + g and x_l + 2g.
            let mut n1 = 0usize;
            if far(&b.pos, a) {
                b.add(g, a, s1, l, 1);
                n1 += 1;
                let mut up = true;
                while far(&b.pos, a) {
                    b.add(g, a, s1, l, if up { 1 } else { -1 });
                    up = !up;
                    n1 += 1;
                }
            }
            // Phase 2: approach along l while a oscillates inside the window.
            let s2 = sgn_toward(b.pos[l - 1], ys[l - 1]);
            let mut n2 = 0usize;
            let mut fwd = true;
            while far(&b.pos, l) {
                b.add(g, a, if fwd { s1 } else { -s1 }, l, s2);
                fwd = !fwd;
                n2 += 1;
            }
            // |Δa| ≤ m+1 and g ≥ m/800 give at most 800 steps per phase,
            // plus one for the initial lift.
            assert!(n1 <= 801 && n2 <= 801, "approach phases took {n1}+{n2} steps");
        }
        // Six-vector finish: Δ = p − y* is even with |Δ|_∞ ≤ m/300.
        let da = b.pos[a - 1] - ys[a - 1];
        let dl = b.pos[l - 1] - ys[l - 1];
        let a4 = f + (dl - da) / 2;
        let a6 = f + (dl + da) / 2;
        b.add(f, a, 1, l, 1);
        b.add(f, a, -1, l, 1);
        b.add(f, a, 1, l, 1);
        b.add(a4, a, 1, l, -1);
        b.add(f, a, -1, l, -1);
        b.add(a6, a, -1, l, -1);
    }
    assert!(b.segs.len() <= 1609, "first pair used {} segments", b.segs.len());

    // Remaining axes, paired with l.
    let cap = 2 * (m / 10);
    for ax in 1..=d {
        if ax == a || ax == l {
            continue;
        }
        let before = b.segs.len();
        let s = sgn_toward(b.pos[ax - 1], ys[ax - 1]);
        let mut r = (ys[ax - 1] - b.pos[ax - 1]).abs();
        while r > cap {
            b.add(f, l, 1, ax, s);
            b.add(f, l, -1, ax, s);
            r -= 2 * f;
        }
        if r > 0 {
            let half = r / 2;
            if half as f64 >= m as f64 / 1000.0 {
                b.add(half, l, 1, ax, s);
                b.add(half, l, -1, ax, s);
            } else {
                b.add(f, l, 1, ax, s);
                b.add(half - f, l, -1, ax, s);
                b.add(f, l, -1, ax, s);
                b.add(half - f, l, 1, ax, s);
            }
        }
        // (m+1)/(2⌊m/100⌋) ≤ 51 loop iterations, two vectors each, and a
        // finish of at most four.
        assert!(b.segs.len() - before <= 104, "axis {ax} used {}", b.segs.len() - before);
    }
    debug_assert_eq!(b.pos, *ys);
    Ok(SegmentDecomposition { y_star, segments: b.segs })
}

/// Checks every clause of the decomposition; returns the first violated one.
pub fn verify_segments(
    x: &Point,
    dec: &SegmentDecomposition,
    y: &Point,
    h: &HalfSpace,
    m: i64,
) -> std::result::Result<(), Clause> {
    let d = x.dim();
    let l = h.axis;
    let ys = &dec.y_star;
    if ys.dim() != d || y.linf_dist(ys) > 1 || !((ys.0[l - 1] as f64) > h.c) {
        return Err(Clause::YStar);
    }
    if ys.sub(x).0.iter().any(|c| c.rem_euclid(2) != 0) {
        return Err(Clause::Parity);
    }
    let mut sum = vec![0i64; d];
    for (a, v) in &dec.segments {
        for (s, q) in sum.iter_mut().zip(v.to_point(d).0) {
            *s += a * q;
        }
    }
    if x.add(&Point(sum)) != *ys {
        return Err(Clause::Sum);
    }
    if dec.segments.len() as u64 > segment_budget(d) {
        return Err(Clause::Count);
    }
    for (_, v) in &dec.segments {
        let ok = v.i != v.j
            && (1..=d).contains(&v.i)
            && (1..=d).contains(&v.j)
            && v.si.abs() == 1
            && v.sj.abs() == 1;
        if !ok {
            return Err(Clause::VectorSet);
        }
    }
    let mf = m as f64;
    for (a, _) in &dec.segments {
        let aa = a.unsigned_abs() as f64;
        if aa < mf / 1000.0 || aa > mf / 10.0 {
            return Err(Clause::Magnitude);
        }
    }
    let pos = dec.positions(x);
    if pos.iter().any(|p| p.linf_dist(y) > 2 * m) {
        return Err(Clause::Ball);
    }
    if pos.iter().any(|p| !((p.0[l - 1] as f64) > h.c)) {
        return Err(Clause::HalfSpace);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_example() {
        let x = Point(vec![0, 0]);
        let y = Point(vec![1, 1]);
        let h = HalfSpace { axis: 2, c: -1.0 };
        let dec = connect_in_halfspace(&x, &y, &h, 1000).unwrap();
        assert_eq!(dec.y_star, Point(vec![2, 2]));
        assert_eq!(dec.k(), 6);
        assert_eq!(verify_segments(&x, &dec, &y, &h, 1000), Ok(()));
    }

    #[test]
    fn degenerate() {
        let x = Point(vec![3, 4]);
        let h = HalfSpace { axis: 1, c: 0.0 };
        let dec = connect_in_halfspace(&x, &x, &h, 1000).unwrap();
        assert_eq!(dec.y_star, x);
        assert_eq!(dec.k(), 0);
    }

    #[test]
    fn preconditions_named() {
        let h = HalfSpace { axis: 2, c: 0.0 };
        let e = connect_in_halfspace(&Point(vec![0, 0]), &Point(vec![0, 5]), &h, 999).unwrap_err();
        assert!(e.to_string().contains("m ≥ 1000"));
        let e = connect_in_halfspace(&Point(vec![0, -1]), &Point(vec![0, 5]), &h, 1000).unwrap_err();
        assert!(e.to_string().contains("x·e_l"));
    }

    #[test]
    fn tamper_magnitude() {
        let x = Point(vec![0, 0]);
        let y = Point(vec![400, 300]);
        let h = HalfSpace { axis: 2, c: -1.0 };
        let mut dec = connect_in_halfspace(&x, &y, &h, 1000).unwrap();
        assert_eq!(verify_segments(&x, &dec, &y, &h, 1000), Ok(()));
        dec.segments[0].0 = 101;
        // the sum breaks too, so compensate with a matching segment
        let v = dec.segments[0].1;
        let back = -(101 - (1000 + 799) / 800);
        dec.segments.push((back, v));
        assert_eq!(verify_segments(&x, &dec, &y, &h, 1000), Err(Clause::Magnitude));
    }
}
