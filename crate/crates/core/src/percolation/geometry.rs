use crate::error::{FppError, Result};
use crate::lattice::{EdgeId, LatticeBox, Point};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashSet};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BoxParams {
    pub l: Point,
    pub m: i64,
    pub m1: i64,
    /// signed axis in ±1..±d
    pub j: i32,
}

impl BoxParams {
    pub fn new(l: Point, m: i64, m1: i64, j: i32) -> Result<Self> {
        let d = l.dim() as i32;
        if m < 1 || m1 < 1 || m1 >= m {
            return Err(FppError::InvalidArgument(format!("need 1 ≤ m1 < m, got m={m}, m1={m1}")));
        }
        if j == 0 || j.abs() > d {
            return Err(FppError::InvalidArgument(format!("box index j={j} out of range")));
        }
        Ok(BoxParams { l, m, m1, j })
    }

    /// m = ⌊KM⌋, m₁ = ⌊sKM⌋.
    pub fn from_scales(l: Point, j: i32, k: f64, big_m: f64, s: f64) -> Result<Self> {
        let m = (k * big_m).floor() as i64;
        let m1 = (s * k * big_m).floor() as i64;
        Self::new(l, m, m1, j)
    }

    pub fn axis(&self) -> usize {
        self.j.unsigned_abs() as usize
    }

    /// The same box written with positive j: B^{−k}(l) = B^{+k}(l − 2e_k).
    pub fn canonical(&self) -> BoxParams {
        if self.j > 0 {
            return self.clone();
        }
        let k = self.axis();
        BoxParams { l: self.l.step(k, -1).step(k, -1), m: self.m, m1: self.m1, j: -self.j }
    }
}

/// S(l;m).
pub fn cube_s(l: &Point, m: i64) -> LatticeBox {
    LatticeBox {
        lo: Point(l.0.iter().map(|c| m * c).collect()),
        hi: Point(l.0.iter().map(|c| m * (c + 1) - 1).collect()),
    }
}

/// R(l;m).
pub fn cube_r(l: &Point, m: i64) -> LatticeBox {
    LatticeBox {
        lo: Point(l.0.iter().map(|c| m * (c - 1)).collect()),
        hi: Point(l.0.iter().map(|c| m * (c + 2) - 1).collect()),
    }
}

/// B^j(l;m) = R(l;m) ∩ R(l + 2 sgn(j) e_|j|; m).
pub fn box_bj(p: &BoxParams) -> LatticeBox {
    let mut b = cube_r(&p.l, p.m);
    let k = p.axis() - 1;
    if p.j > 0 {
        b.lo.0[k] = p.m * (p.l.0[k] + 1);
    } else {
        b.hi.0[k] = p.m * p.l.0[k] - 1;
    }
    b
}

/// Symmetric shrink (ρ > 0) or growth (ρ < 0) of B^j by ρ·m₁ per side.
/// None when the shrink leaves nothing.
pub fn box_bcheck(p: &BoxParams, rho: i64) -> Option<LatticeBox> {
    let b = box_bj(p);
    let r = rho * p.m1;
    let lo = Point(b.lo.0.iter().map(|c| c + r).collect());
    let hi = Point(b.hi.0.iter().map(|c| c - r).collect());
    LatticeBox::new(lo, hi).ok()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxGeometry {
    pub params: BoxParams,
    pub rho: i64,
    pub s: LatticeBox,
    pub r: LatticeBox,
    pub bj: LatticeBox,
    pub bcheck_plus: Option<LatticeBox>,
    pub bcheck_minus: LatticeBox,
    pub d_set: Vec<Point>,
    pub c_set: Vec<Point>,
    pub ctilde: Vec<EdgeId>,
    pub etilde1: Vec<EdgeId>,
    pub etilde2: Vec<EdgeId>,
    /// set when B̌(+ρ) is empty, D is empty or B̌(+ρ) ⊄ B^j
    pub degenerate: bool,
}

impl BoxGeometry {
    pub fn in_annulus(&self, p: &Point) -> bool {
        self.bcheck_minus.contains(p) && !self.bcheck_plus.as_ref().is_some_and(|b| b.contains(p))
    }

    pub fn etilde(&self) -> Vec<EdgeId> {
        let mut v: Vec<EdgeId> = self.etilde1.iter().chain(&self.etilde2).cloned().collect();
        v.sort();
        v
    }

    /// C ∩ ∂B̌(+ρ).
    pub fn c_on_inner_boundary(&self) -> Vec<Point> {
        match &self.bcheck_plus {
            Some(b) => self.c_set.iter().filter(|p| inner_boundary(b, p)).cloned().collect(),
            None => Vec::new(),
        }
    }

    /// C̃ ∖ Ẽ.
    pub fn ctilde_minus_etilde(&self) -> Vec<EdgeId> {
        let e: HashSet<&EdgeId> = self.etilde1.iter().chain(&self.etilde2).collect();
        self.ctilde.iter().filter(|x| !e.contains(x)).cloned().collect()
    }
}

/// v ∈ b with a nearest neighbour outside b.
pub fn inner_boundary(b: &LatticeBox, v: &Point) -> bool {
    b.on_boundary(v)
}

pub fn box_geometry(params: &BoxParams, rho: i64) -> BoxGeometry {
    let m1 = params.m1;
    let s = cube_s(&params.l, params.m);
    let r = cube_r(&params.l, params.m);
    let bj = box_bj(params);
    let bplus = box_bcheck(params, rho);
    let bminus = box_bcheck(params, -rho).expect("growth is never empty");
    let mut degenerate = bplus.is_none();
    let mut d_set = Vec::new();
    let mut c_set = BTreeSet::new();
    let mut ctilde = Vec::new();
    let mut et1 = Vec::new();
    let mut et2 = Vec::new();
    if let Some(bp) = &bplus {
        degenerate |= !bj.contains_box(bp);
        let dim = bp.dim();
        // D: multiples of m1 at ℓ∞-distance > m1 from the complement
        let ranges: Vec<Vec<i64>> = (0..dim)
            .map(|i| {
                let lo = bp.lo.0[i] + m1;
                let hi = bp.hi.0[i] - m1;
                let first = lo.div_euclid(m1) * m1 + if lo.rem_euclid(m1) == 0 { 0 } else { m1 };
                let mut v = Vec::new();
                let mut x = first;
                while x <= hi {
                    v.push(x);
                    x += m1;
                }
                v
            })
            .collect();
        if ranges.iter().any(|r| r.is_empty()) {
            degenerate = true;
        } else {
            let total: usize = ranges.iter().map(|r| r.len()).product();
            for mut n in 0..total {
                let mut c = vec![0i64; dim];
                for i in (0..dim).rev() {
                    c[i] = ranges[i][n % ranges[i].len()];
                    n /= ranges[i].len();
                }
                d_set.push(Point(c));
            }
        }
        for v in &d_set {
            for i in 0..dim {
                for x in bp.lo.0[i]..=bp.hi.0[i] {
                    let mut c = v.0.clone();
                    c[i] = x;
                    c_set.insert(Point(c));
                }
            }
        }
        let in_c = |p: &Point| c_set.contains(p);
        let mut et = BTreeSet::new();
        for v in &c_set {
            for a in 1..=dim {
                let w = v.step(a, 1);
                if in_c(&w) {
                    ctilde.push(EdgeId { base: v.clone(), axis: a });
                }
            }
            for w in v.neighbors() {
                if !in_c(&w) || inner_boundary(bp, &w) {
                    et.insert(crate::lattice::make_edge(v, &w).unwrap());
                }
            }
        }
        for e in et {
            let (a, b) = e.endpoints();
            if inner_boundary(bp, &a) || inner_boundary(bp, &b) {
                et1.push(e);
            } else {
                et2.push(e);
            }
        }
        ctilde.sort();
    }
    BoxGeometry {
        params: params.clone(),
        rho,
        s,
        r,
        bj,
        bcheck_plus: bplus,
        bcheck_minus: bminus,
        d_set,
        c_set: c_set.into_iter().collect(),
        ctilde,
        etilde1: et1,
        etilde2: et2,
        degenerate,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_d2() {
        let p = BoxParams::new(Point(vec![0, 0]), 20, 3, 2).unwrap();
        let g = box_geometry(&p, 1);
        assert_eq!(g.s.num_vertices(), 400);
        assert_eq!(g.r.num_vertices(), 3600);
        assert_eq!(g.bj.sides(), vec![60, 20]);
        assert!(!g.degenerate);
        assert!(g.bj.contains_box(g.bcheck_plus.as_ref().unwrap()));
        assert!(g.bcheck_minus.contains_box(&g.bj));
        let e1: HashSet<_> = g.etilde1.iter().collect();
        assert!(g.etilde2.iter().all(|e| !e1.contains(e)));
    }

    #[test]
    fn negative_j_is_shifted_positive() {
        let p = BoxParams::new(Point(vec![1, -2]), 9, 2, -1).unwrap();
        assert_eq!(box_bj(&p), box_bj(&p.canonical()));
    }
}
