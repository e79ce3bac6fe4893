//! Edge-weight distributions, seeded environments, k-dependent fields and
//! resampling.

use crate::constants;
use crate::error::{FppError, Result};
use crate::lattice::{v_e, EdgeId};
use crate::rng::{hash_key, to_unit, TAG_KDEP, TAG_RESAMPLE, TAG_WEIGHT};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashSet};
use std::sync::Arc;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistributionSpec {
    /// (value, probability) pairs.
    Atoms { atoms: Vec<(f64, f64)> },
    /// P(τ=a)=1−p, P(τ=b)=p.
    BernoulliShift { a: f64, b: f64, p: f64 },
    Exponential { rate: f64 },
    Pareto { alpha: f64, xmin: f64 },
    Uniform { a: f64, b: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalMode {
    Cdf,
    Quantile,
    Tail,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Usefulness {
    Ok,
    Violated,
}

impl DistributionSpec {
    pub fn exponential(rate: f64) -> Self {
        DistributionSpec::Exponential { rate }
    }

    pub fn atoms(atoms: &[(f64, f64)]) -> Self {
        DistributionSpec::Atoms { atoms: atoms.to_vec() }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(FppError::InvalidArgument(m.to_string()));
        match self {
            DistributionSpec::Atoms { atoms } => {
                if atoms.is_empty() {
                    return bad("atoms: empty list");
                }
                if atoms.iter().any(|(v, p)| !(*v >= 0.0) || !(*p >= 0.0) || !v.is_finite()) {
                    return bad("atoms: values and probabilities must be nonnegative");
                }
                let s: f64 = atoms.iter().map(|a| a.1).sum();
                if (s - 1.0).abs() > 1e-9 {
                    return bad("atoms: probabilities must sum to 1");
                }
            }
            DistributionSpec::BernoulliShift { a, b, p } => {
                if !(*a >= 0.0 && *b >= 0.0) || !(0.0..=1.0).contains(p) {
                    return bad("bernoulli_shift: need a,b ≥ 0 and p in [0,1]");
                }
            }
            DistributionSpec::Exponential { rate } => {
                if !(*rate > 0.0) || !rate.is_finite() {
                    return bad("exponential: rate must be positive");
                }
            }
            DistributionSpec::Pareto { alpha, xmin } => {
                if !(*alpha > 0.0 && *xmin > 0.0) {
                    return bad("pareto: alpha and xmin must be positive");
                }
            }
            DistributionSpec::Uniform { a, b } => {
                if !(*a >= 0.0 && b > a) {
                    return bad("uniform: need 0 ≤ a < b");
                }
            }
        }
        Ok(())
    }

    /// Atoms sorted by value with merged duplicates, for atomic variants.
    pub fn atom_list(&self) -> Option<Vec<(f64, f64)>> {
        let mut v = match self {
            DistributionSpec::Atoms { atoms } => atoms.clone(),
            DistributionSpec::BernoulliShift { a, b, p } => vec![(*a, 1.0 - p), (*b, *p)],
            _ => return None,
        };
        v.retain(|a| a.1 > 0.0);
        v.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut out: Vec<(f64, f64)> = Vec::new();
        for (x, p) in v {
            match out.last_mut() {
                Some(l) if l.0 == x => l.1 += p,
                _ => out.push((x, p)),
            }
        }
        Some(out)
    }

    pub fn is_continuous(&self) -> bool {
        self.atom_list().is_none()
    }

    /// F(t) = μ[0, t].
    pub fn cdf(&self, t: f64) -> f64 {
        if let Some(a) = self.atom_list() {
            return a.iter().filter(|x| x.0 <= t).map(|x| x.1).sum::<f64>().min(1.0);
        }
        match *self {
            DistributionSpec::Exponential { rate } => {
                if t <= 0.0 {
                    0.0
                } else {
                    -(-rate * t).exp_m1()
                }
            }
            DistributionSpec::Pareto { alpha, xmin } => {
                if t < xmin {
                    0.0
                } else {
                    1.0 - (xmin / t).powf(alpha)
                }
            }
            DistributionSpec::Uniform { a, b } => ((t - a) / (b - a)).clamp(0.0, 1.0),
            _ => unreachable!(),
        }
    }

    /// F(t−) = μ[0, t).
    pub fn cdf_left(&self, t: f64) -> f64 {
        match self.atom_list() {
            Some(a) => a.iter().filter(|x| x.0 < t).map(|x| x.1).sum::<f64>().min(1.0),
            None => self.cdf(t),
        }
    }

    /// μ[t, ∞).
    pub fn tail(&self, t: f64) -> f64 {
        match self.atom_list() {
            Some(a) => a.iter().filter(|x| x.0 >= t).map(|x| x.1).sum::<f64>().min(1.0),
            None => match *self {
                DistributionSpec::Exponential { rate } => {
                    if t <= 0.0 {
                        1.0
                    } else {
                        (-rate * t).exp()
                    }
                }
                DistributionSpec::Pareto { alpha, xmin } => {
                    if t <= xmin {
                        1.0
                    } else {
                        (xmin / t).powf(alpha)
                    }
                }
                _ => 1.0 - self.cdf(t),
            },
        }
    }

    /// inf{t : F(t) ≥ q}.
    pub fn quantile(&self, q: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&q) {
            return Err(FppError::InvalidArgument(format!("quantile level {q} outside [0,1]")));
        }
        Ok(self.quantile_unchecked(q))
    }

    pub(crate) fn quantile_unchecked(&self, q: f64) -> f64 {
        if let Some(a) = self.atom_list() {
            let mut c = 0.0;
            for (x, p) in &a {
                c += p;
                if c >= q {
                    return *x;
                }
            }
            return a.last().unwrap().0;
        }
        match *self {
            DistributionSpec::Exponential { rate } => {
                if q >= 1.0 {
                    f64::INFINITY
                } else {
                    -(-q).ln_1p() / rate
                }
            }
            DistributionSpec::Pareto { alpha, xmin } => {
                if q >= 1.0 {
                    f64::INFINITY
                } else {
                    xmin * (1.0 - q).powf(-1.0 / alpha)
                }
            }
            DistributionSpec::Uniform { a, b } => a + q * (b - a),
            _ => unreachable!(),
        }
    }

    pub fn eval(&self, mode: EvalMode, arg: f64) -> Result<f64> {
        match mode {
            EvalMode::Cdf => Ok(self.cdf(arg)),
            EvalMode::Tail => Ok(self.tail(arg)),
            EvalMode::Quantile => self.quantile(arg),
        }
    }

    /// Essential infimum r.
    pub fn ess_inf(&self) -> f64 {
        if let Some(a) = self.atom_list() {
            return a[0].0;
        }
        match *self {
            DistributionSpec::Exponential { .. } => 0.0,
            DistributionSpec::Pareto { xmin, .. } => xmin,
            DistributionSpec::Uniform { a, .. } => a,
            _ => unreachable!(),
        }
    }

    pub fn mean(&self) -> f64 {
        if let Some(a) = self.atom_list() {
            return a.iter().map(|x| x.0 * x.1).sum();
        }
        match *self {
            DistributionSpec::Exponential { rate } => 1.0 / rate,
            DistributionSpec::Pareto { alpha, xmin } => {
                if alpha > 1.0 {
                    alpha * xmin / (alpha - 1.0)
                } else {
                    f64::INFINITY
                }
            }
            DistributionSpec::Uniform { a, b } => 0.5 * (a + b),
            _ => unreachable!(),
        }
    }

    /// μ of the interval with the given endpoints and closedness.
    pub fn interval_mass(&self, lo: f64, lo_closed: bool, hi: f64, hi_closed: bool) -> f64 {
        let upper = if hi.is_infinite() {
            1.0
        } else if hi_closed {
            self.cdf(hi)
        } else {
            self.cdf_left(hi)
        };
        let lower = if lo_closed { self.cdf_left(lo) } else { self.cdf(lo) };
        (upper - lower).max(0.0)
    }

    /// Real weight from a uniform in (0,1).
    #[inline]
    pub fn sample(&self, u: f64) -> f64 {
        self.quantile_unchecked(u)
    }
}

pub fn dist_eval(dist: &DistributionSpec, mode: EvalMode, arg: f64) -> Result<f64> {
    dist.eval(mode, arg)
}

/// Checks F(r) < p_c(d) when r = 0 and F(r) < p⃗_c(d) when r > 0.
pub fn check_useful(dist: &DistributionSpec, d: usize) -> Result<Usefulness> {
    let r = dist.ess_inf();
    let fr = dist.cdf(r);
    let crit = if r == 0.0 { constants::p_c(d)? } else { constants::p_c_oriented(d)? };
    Ok(if fr < crit { Usefulness::Ok } else { Usefulness::Violated })
}

#[derive(Clone, Debug)]
struct Layer {
    edges: HashSet<EdgeId>,
    seed: u64,
}

/// Deterministic lazy weight field on the edges of Z^d.
#[derive(Clone, Debug)]
pub struct Environment {
    pub seed: u64,
    pub dist: DistributionSpec,
    pub d: usize,
    overrides: Arc<BTreeMap<EdgeId, f64>>,
    layers: Arc<Vec<Layer>>,
    atoms: Option<Arc<Vec<(f64, f64)>>>,
}

impl Environment {
    pub fn new(seed: u64, dist: DistributionSpec, d: usize) -> Self {
        let atoms = dist.atom_list().map(Arc::new);
        Environment {
            seed,
            dist,
            d,
            overrides: Arc::new(BTreeMap::new()),
            layers: Arc::new(Vec::new()),
            atoms,
        }
    }

    pub fn with_overrides(mut self, ov: BTreeMap<EdgeId, f64>) -> Self {
        self.overrides = Arc::new(ov);
        self
    }

    pub fn set_override(&mut self, e: EdgeId, w: f64) {
        Arc::make_mut(&mut self.overrides).insert(e, w);
    }

    pub fn overrides(&self) -> &BTreeMap<EdgeId, f64> {
        &self.overrides
    }

    pub fn has_overrides(&self) -> bool {
        !self.overrides.is_empty() || !self.layers.is_empty()
    }

    #[inline]
    fn quantile_fast(&self, u: f64) -> f64 {
        match &self.atoms {
            Some(a) => {
                let mut c = 0.0;
                for (x, p) in a.iter() {
                    c += p;
                    if c >= u {
                        return *x;
                    }
                }
                a.last().unwrap().0
            }
            None => self.dist.sample(u),
        }
    }

    /// Weight of the edge {base, base + e_axis}, without allocating an EdgeId
    /// when no overrides or resample layers are present.
    #[inline]
    pub fn weight_at(&self, base: &[i64], axis: usize) -> f64 {
        if self.has_overrides() {
            let e = EdgeId { base: crate::lattice::Point(base.to_vec()), axis };
            return self.weight(&e);
        }
        self.quantile_fast(to_unit(hash_key(TAG_WEIGHT, self.seed, base, axis as u64)))
    }

    pub fn weight(&self, e: &EdgeId) -> f64 {
        if let Some(w) = self.overrides.get(e) {
            return *w;
        }
        for l in self.layers.iter().rev() {
            if l.edges.contains(e) {
                return self.quantile_fast(to_unit(hash_key(
                    TAG_RESAMPLE,
                    l.seed,
                    &e.base.0,
                    e.axis as u64,
                )));
            }
        }
        self.quantile_fast(to_unit(hash_key(TAG_WEIGHT, self.seed, &e.base.0, e.axis as u64)))
    }

    /// τ*: fresh μ draws keyed by (seed2, e) on `edges`, unchanged elsewhere.
    /// Overrides are dropped on resampled edges.
    pub fn resample(&self, edges: &HashSet<EdgeId>, seed2: u64) -> Environment {
        let mut out = self.clone();
        if edges.is_empty() {
            return out;
        }
        if out.overrides.keys().any(|e| edges.contains(e)) {
            let ov: BTreeMap<EdgeId, f64> = out
                .overrides
                .iter()
                .filter(|(e, _)| !edges.contains(*e))
                .map(|(e, w)| (e.clone(), *w))
                .collect();
            out.overrides = Arc::new(ov);
        }
        Arc::make_mut(&mut out.layers).push(Layer { edges: edges.clone(), seed: seed2 });
        out
    }
}

pub fn resample(env: &Environment, edges: &HashSet<EdgeId>, seed2: u64) -> Environment {
    env.resample(edges, seed2)
}

/// Block-dependent Bernoulli(p) field: edges whose v_e share a k-aligned
/// block share one uniform.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KDependentField {
    pub seed: u64,
    pub k: i64,
    pub p: f64,
    pub d: usize,
}

impl KDependentField {
    pub fn block_of(&self, e: &EdgeId) -> Vec<i64> {
        v_e(e).0.iter().map(|c| c.div_euclid(self.k)).collect()
    }

    pub fn value(&self, e: &EdgeId) -> u8 {
        let b = self.block_of(e);
        let u = to_unit(hash_key(TAG_KDEP, self.seed, &b, self.k as u64));
        u8::from(u <= self.p)
    }
}

pub fn kdep_value(field: &KDependentField, e: &EdgeId) -> u8 {
    field.value(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Point;

    fn edge(c: &[i64], axis: usize) -> EdgeId {
        EdgeId { base: Point(c.to_vec()), axis }
    }

    #[test]
    fn eval_examples() {
        let b = DistributionSpec::BernoulliShift { a: 0.0, b: 1.0, p: 0.3 };
        assert!((b.cdf(0.0) - 0.7).abs() < 1e-15);
        let e = DistributionSpec::exponential(1.0);
        assert!((e.cdf(2f64.ln()) - 0.5).abs() < 1e-15);
        let a = DistributionSpec::atoms(&[(1.0, 0.5), (10.0, 0.5)]);
        assert_eq!(a.quantile(0.6).unwrap(), 10.0);
        assert_eq!(a.quantile(0.5).unwrap(), 1.0);
        assert!(a.quantile(1.5).is_err());
        assert!(a.quantile(-0.1).is_err());
    }

    #[test]
    fn cdf_plus_tail() {
        let e = DistributionSpec::exponential(2.0);
        for t in [0.1, 0.5, 3.0] {
            assert!((e.cdf(t) + e.tail(t) - 1.0).abs() < 1e-12);
        }
        let a = DistributionSpec::atoms(&[(1.0, 0.25), (2.0, 0.75)]);
        assert!((a.cdf(1.5) + a.tail(1.5) - 1.0).abs() < 1e-15);
        assert_eq!(a.tail(2.0), 0.75);
    }

    #[test]
    fn useful() {
        let d = DistributionSpec::BernoulliShift { a: 0.0, b: 1.0, p: 0.7 };
        assert_eq!(check_useful(&d, 2).unwrap(), Usefulness::Ok);
        let pm = DistributionSpec::atoms(&[(1.0, 1.0)]);
        assert_eq!(check_useful(&pm, 2).unwrap(), Usefulness::Violated);
        assert_eq!(check_useful(&DistributionSpec::exponential(1.0), 2).unwrap(), Usefulness::Ok);
        assert!(check_useful(&pm, 5).is_err());
    }

    #[test]
    fn weight_determinism_and_override() {
        let env = Environment::new(3, DistributionSpec::exponential(1.0), 2);
        let e = edge(&[1, 2], 1);
        assert_eq!(env.weight(&e).to_bits(), env.weight(&e).to_bits());
        assert_eq!(env.weight(&e), env.weight_at(&[1, 2], 1));
        let mut env2 = env.clone();
        env2.set_override(e.clone(), 7.5);
        assert_eq!(env2.weight(&e), 7.5);
        assert_eq!(env.weight(&edge(&[0, 0], 2)), env2.weight(&edge(&[0, 0], 2)));
    }

    #[test]
    fn bernoulli_mean() {
        let env =
            Environment::new(1, DistributionSpec::BernoulliShift { a: 0.0, b: 1.0, p: 0.3 }, 2);
        let n = 100_000;
        let s: f64 = (0..n).map(|i| env.weight_at(&[i, 0], 1)).sum();
        let mean = s / n as f64;
        let se = (0.3 * 0.7 / n as f64).sqrt();
        assert!((mean - 0.3).abs() < 3.0 * se && (mean - 0.3).abs() < 0.01, "{mean}");
    }

    #[test]
    fn resample_semantics() {
        let env = Environment::new(5, DistributionSpec::exponential(1.0), 2);
        let e = edge(&[0, 0], 1);
        let f = edge(&[0, 0], 2);
        let same = env.resample(&HashSet::new(), 9);
        assert_eq!(same.weight(&e), env.weight(&e));
        let set: HashSet<EdgeId> = [e.clone()].into_iter().collect();
        let r = env.resample(&set, 9);
        assert_eq!(r.weight(&f), env.weight(&f));
        assert_ne!(r.weight(&e), env.weight(&e));
    }

    #[test]
    fn resample_distribution_ks() {
        let dist = DistributionSpec::exponential(1.0);
        let env = Environment::new(5, dist.clone(), 2);
        let e = edge(&[0, 0], 1);
        let set: HashSet<EdgeId> = [e.clone()].into_iter().collect();
        let n = 10_000;
        let mut xs: Vec<f64> = (0..n).map(|s| env.resample(&set, s).weight(&e)).collect();
        xs.sort_by(f64::total_cmp);
        let ks = xs
            .iter()
            .enumerate()
            .map(|(i, x)| {
                let f = dist.cdf(*x);
                (f - i as f64 / n as f64).abs().max((f - (i + 1) as f64 / n as f64).abs())
            })
            .fold(0.0, f64::max);
        assert!(ks < 0.02, "ks {ks}");
    }

    #[test]
    fn kdep_blocks() {
        let f = KDependentField { seed: 2, k: 3, p: 0.4, d: 2 };
        // v_e of both edges is (1,1), same block.
        assert_eq!(f.value(&edge(&[1, 1], 1)), f.value(&edge(&[1, 1], 2)));
        // Marginal over distinct blocks.
        let n = 100_000;
        let ones: u32 = (0..n).map(|i| f.value(&edge(&[3 * i, 0], 1)) as u32).sum();
        let m = ones as f64 / n as f64;
        assert!((m - 0.4).abs() < 3.0 * (0.24 / n as f64).sqrt());
    }

    #[test]
    fn kdep_far_correlation() {
        let n = 100_000u64;
        let (mut sa, mut sb, mut sab) = (0.0, 0.0, 0.0);
        for s in 0..n {
            let f = KDependentField { seed: s, k: 2, p: 0.3, d: 2 };
            let a = f.value(&edge(&[0, 0], 1)) as f64;
            let b = f.value(&edge(&[2, 0], 1)) as f64;
            sa += a;
            sb += b;
            sab += a * b;
        }
        let nf = n as f64;
        let (ma, mb) = (sa / nf, sb / nf);
        let cov = sab / nf - ma * mb;
        let corr = cov / (ma * (1.0 - ma) * mb * (1.0 - mb)).sqrt();
        assert!(corr.abs() < 0.02, "corr {corr}");
    }

    #[test]
    fn quantile_inverts_cdf() {
        for d in [
            DistributionSpec::exponential(1.5),
            DistributionSpec::Pareto { alpha: 2.0, xmin: 1.0 },
            DistributionSpec::Uniform { a: 0.5, b: 2.0 },
        ] {
            for t in [0.6, 1.2, 1.9] {
                let f = d.cdf(t);
                if !(f > 0.0 && f < 1.0) {
                    assert_eq!(d.quantile(f).unwrap(), if f == 0.0 { d.ess_inf() } else { d.quantile(1.0).unwrap() });
                    continue;
                }
                let q = d.quantile(d.cdf(t)).unwrap();
                assert!((q - t).abs() < 1e-9, "{d:?} {t} {q}");
            }
        }
    }
}
