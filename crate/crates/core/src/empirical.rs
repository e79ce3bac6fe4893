//! Interval sets, empirical measures along paths, and the replica engine.

use crate::error::{FppError, Result};
use crate::lattice::PathRec;
use crate::rng::replica_seed;
use crate::weights::{DistributionSpec, Environment};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub fn new(lo: f64, lo_closed: bool, hi: f64, hi_closed: bool) -> Self {
        Interval { lo, hi, lo_closed, hi_closed: hi_closed && hi.is_finite() }
    }

    pub fn half_open(lo: f64, hi: f64) -> Self {
        Interval::new(lo, true, hi, false)
    }

    pub fn atom(x: f64) -> Self {
        Interval::new(x, true, x, true)
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi || (self.lo == self.hi && !(self.lo_closed && self.hi_closed))
    }

    pub fn contains(&self, x: f64) -> bool {
        let above = if self.lo_closed { x >= self.lo } else { x > self.lo };
        let below = if self.hi_closed { x <= self.hi } else { x < self.hi };
        above && below
    }
}

/// Finite union of intervals (atoms are degenerate closed intervals),
/// kept sorted and disjoint.
#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct IntervalSet {
    pub pieces: Vec<Interval>,
}

impl IntervalSet {
    pub fn empty() -> Self {
        IntervalSet { pieces: Vec::new() }
    }

    pub fn from_pieces(pieces: Vec<Interval>) -> Self {
        let mut s = IntervalSet { pieces };
        s.normalize();
        s
    }

    pub fn whole() -> Self {
        Self::from_pieces(vec![Interval::new(0.0, true, f64::INFINITY, false)])
    }

    pub fn half_open(lo: f64, hi: f64) -> Self {
        Self::from_pieces(vec![Interval::half_open(lo, hi)])
    }

    /// [t, ∞)
    pub fn at_least(t: f64) -> Self {
        Self::from_pieces(vec![Interval::new(t, true, f64::INFINITY, false)])
    }

    /// (c, h]
    pub fn left_open(c: f64, h: f64) -> Self {
        Self::from_pieces(vec![Interval::new(c, false, h, true)])
    }

    /// [a, b]
    pub fn closed(a: f64, b: f64) -> Self {
        Self::from_pieces(vec![Interval::new(a, true, b, true)])
    }

    pub fn atom(x: f64) -> Self {
        Self::from_pieces(vec![Interval::atom(x)])
    }

    pub fn union(&self, o: &IntervalSet) -> Self {
        let mut v = self.pieces.clone();
        v.extend(o.pieces.iter().copied());
        Self::from_pieces(v)
    }

    fn normalize(&mut self) {
        self.pieces.retain(|p| !p.is_empty());
        self.pieces.sort_by(|a, b| a.lo.total_cmp(&b.lo).then(b.lo_closed.cmp(&a.lo_closed)));
        let mut out: Vec<Interval> = Vec::new();
        for p in self.pieces.drain(..) {
            if let Some(l) = out.last_mut() {
                let touches = p.lo < l.hi || (p.lo == l.hi && (l.hi_closed || p.lo_closed));
                if touches {
                    if p.hi > l.hi || (p.hi == l.hi && p.hi_closed) {
                        l.hi = p.hi;
                        l.hi_closed = p.hi_closed;
                    }
                    if p.lo == l.lo {
                        l.lo_closed |= p.lo_closed;
                    }
                    continue;
                }
            }
            out.push(p);
        }
        self.pieces = out;
    }

    pub fn contains(&self, x: f64) -> bool {
        self.pieces.iter().any(|p| p.contains(x))
    }

    /// μ(B).
    pub fn mass(&self, dist: &DistributionSpec) -> f64 {
        self.pieces
            .iter()
            .map(|p| dist.interval_mass(p.lo, p.lo_closed, p.hi, p.hi_closed))
            .sum::<f64>()
            .min(1.0)
    }

    pub fn is_disjoint(&self, o: &IntervalSet) -> bool {
        // pieces are disjoint within each set, so the union has the same
        // count iff no piece of one meets a piece of the other
        self.pieces.iter().all(|a| {
            o.pieces.iter().all(|b| {
                let lo = if a.lo > b.lo || (a.lo == b.lo && !a.lo_closed) { a } else { b };
                let hi = if a.hi < b.hi || (a.hi == b.hi && !a.hi_closed) { a } else { b };
                Interval::new(lo.lo, lo.lo_closed, hi.hi, hi.hi_closed).is_empty()
            })
        })
    }

    /// Parses literals such as `[0,0.5) ∪ {2} ∪ [3,inf)`. Union separators are
    /// `∪`, `U` or `u`; infinity is `inf` or `∞`; atoms are `{a,b,...}`.
    pub fn parse(s: &str) -> Result<Self> {
        Parser::new(s).parse_set()
    }
}

impl fmt::Display for IntervalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.pieces.is_empty() {
            return write!(f, "{{}}");
        }
        let num = |x: f64| if x.is_infinite() { "inf".to_string() } else { format!("{x}") };
        for (i, p) in self.pieces.iter().enumerate() {
            if i > 0 {
                write!(f, " ∪ ")?;
            }
            if p.lo == p.hi && p.lo_closed && p.hi_closed {
                write!(f, "{{{}}}", num(p.lo))?;
            } else {
                write!(
                    f,
                    "{}{},{}{}",
                    if p.lo_closed { '[' } else { '(' },
                    num(p.lo),
                    num(p.hi),
                    if p.hi_closed { ']' } else { ')' }
                )?;
            }
        }
        Ok(())
    }
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
}

impl Parser {
    fn new(s: &str) -> Self {
        Parser { chars: s.chars().collect(), pos: 0 }
    }

    fn err<T>(&self, msg: &str) -> Result<T> {
        let token: String = self.chars[self.pos.min(self.chars.len())..]
            .iter()
            .take_while(|c| !c.is_whitespace())
            .take(12)
            .collect();
        Err(FppError::Parse {
            col: self.pos + 1,
            token: if token.is_empty() { "<end>".into() } else { token },
            msg: msg.into(),
        })
    }

    fn ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn expect(&mut self, c: char) -> Result<()> {
        self.ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(&format!("expected `{c}`"))
        }
    }

    fn number(&mut self) -> Result<f64> {
        self.ws();
        let start = self.pos;
        if self.peek() == Some('∞') {
            self.pos += 1;
            return Ok(f64::INFINITY);
        }
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == '.' || c == '-' || c == '+' {
                self.pos += 1;
            } else {
                break;
            }
        }
        let tok: String = self.chars[start..self.pos].iter().collect();
        if tok == "inf" || tok == "+inf" {
            return Ok(f64::INFINITY);
        }
        match tok.parse::<f64>() {
            Ok(v) if v.is_finite() && v >= 0.0 => Ok(v),
            Ok(_) => {
                self.pos = start;
                self.err("numbers must be finite and nonnegative")
            }
            Err(_) => {
                self.pos = start;
                self.err("expected a number")
            }
        }
    }

    fn term(&mut self) -> Result<Vec<Interval>> {
        self.ws();
        match self.peek() {
            Some('{') => {
                self.pos += 1;
                let mut v = Vec::new();
                self.ws();
                if self.peek() == Some('}') {
                    self.pos += 1;
                    return Ok(v);
                }
                loop {
                    let x = self.number()?;
                    if x.is_infinite() {
                        return self.err("atom cannot be infinite");
                    }
                    v.push(Interval::atom(x));
                    self.ws();
                    match self.peek() {
                        Some(',') => self.pos += 1,
                        Some('}') => {
                            self.pos += 1;
                            return Ok(v);
                        }
                        _ => return self.err("expected `,` or `}`"),
                    }
                }
            }
            Some(c @ ('[' | '(')) => {
                self.pos += 1;
                let lo = self.number()?;
                if lo.is_infinite() {
                    return self.err("lower endpoint cannot be infinite");
                }
                self.expect(',')?;
                let hi = self.number()?;
                self.ws();
                let hc = match self.peek() {
                    Some(']') => true,
                    Some(')') => false,
                    _ => return self.err("expected `]` or `)`"),
                };
                if hc && hi.is_infinite() {
                    return self.err("infinite endpoint must be open");
                }
                if hi < lo {
                    return self.err("upper endpoint below lower endpoint");
                }
                self.pos += 1;
                Ok(vec![Interval::new(lo, c == '[', hi, hc)])
            }
            _ => self.err("expected `[`, `(` or `{`"),
        }
    }

    fn parse_set(&mut self) -> Result<IntervalSet> {
        let mut pieces = self.term()?;
        loop {
            self.ws();
            match self.peek() {
                None => break,
                Some('∪' | 'U' | 'u') => {
                    self.pos += 1;
                    pieces.extend(self.term()?);
                }
                _ => return self.err("expected `∪` or end of input"),
            }
        }
        Ok(IntervalSet::from_pieces(pieces))
    }
}

/// Truncation of the first and last edges of a path.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trunc {
    None,
    /// remove (2k)^d edges at each end
    K(u32),
    /// remove this many edges at each end
    Edges(usize),
}

impl Trunc {
    pub fn cut(&self, d: usize) -> usize {
        match *self {
            Trunc::None => 0,
            Trunc::K(k) => (2 * k as usize).pow(d as u32),
            Trunc::Edges(c) => c,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalMeasure {
    pub path_length: usize,
    pub hit_count: usize,
    pub value: f64,
}

/// Weights of the edges of `p` retained after truncation.
pub fn retained_weights(env: &Environment, p: &PathRec, trunc: Trunc) -> Result<Vec<f64>> {
    let n = p.len();
    if n == 0 {
        return Err(FppError::PathTooShort { len: 0, needed: 0 });
    }
    let cut = trunc.cut(env.d);
    if trunc != Trunc::None && n <= 2 * cut {
        return Err(FppError::PathTooShort { len: n, needed: 2 * cut });
    }
    Ok(p.edges()[cut..n - cut].iter().map(|e| env.weight(e)).collect())
}

pub fn measure_counts(
    env: &Environment,
    p: &PathRec,
    b: &IntervalSet,
    trunc: Trunc,
) -> Result<EmpiricalMeasure> {
    let w = retained_weights(env, p, trunc)?;
    let hits = w.iter().filter(|x| b.contains(**x)).count();
    Ok(EmpiricalMeasure { path_length: w.len(), hit_count: hits, value: hits as f64 / w.len() as f64 })
}

pub fn measure(env: &Environment, p: &PathRec, b: &IntervalSet, trunc: Trunc) -> Result<f64> {
    Ok(measure_counts(env, p, b, trunc)?.value)
}

pub fn moment(env: &Environment, p: &PathRec, ell: u32, trunc: Trunc) -> Result<f64> {
    if ell == 0 {
        return Err(FppError::InvalidArgument("moment order must be positive".into()));
    }
    let w = retained_weights(env, p, trunc)?;
    Ok(w.iter().map(|x| x.powi(ell as i32)).sum::<f64>() / w.len() as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McSummary {
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
    pub values: Vec<f64>,
    pub failures: Vec<(usize, String)>,
}

/// Mean and unbiased standard error, summed in index order.
pub fn mean_se(v: &[f64]) -> (f64, f64) {
    let n = v.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = v.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, f64::NAN);
    }
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Least-squares slope and intercept with the slope's standard error.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - icpt - slope * a).powi(2)).sum();
    let se = if x.len() > 2 { (rss / (n - 2.0) / sxx).sqrt() } else { 0.0 };
    (slope, icpt, se)
}

fn with_pool<R: Send>(workers: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    match workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .expect("thread pool")
            .install(f),
        None => f(),
    }
}

/// Evaluates `f(replica_seed, index)` for every replica, in parallel, and
/// returns results in index order.
pub fn mc_collect<T, F>(replicas: usize, master: u64, workers: Option<usize>, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64, usize) -> T + Sync + Send,
{
    with_pool(workers, || {
        (0..replicas).into_par_iter().map(|i| f(replica_seed(master, i as u64), i)).collect()
    })
}

pub fn mc_mean<F>(sampler: F, replicas: usize, master: u64, workers: Option<usize>) -> Result<McSummary>
where
    F: Fn(u64) -> Result<f64> + Sync + Send,
{
    if replicas < 2 {
        return Err(FppError::InvalidArgument("need at least 2 replicas".into()));
    }
    let res = mc_collect(replicas, master, workers, |s, _| sampler(s));
    let mut values = Vec::with_capacity(replicas);
    let mut failures = Vec::new();
    for (i, r) in res.into_iter().enumerate() {
        match r {
            Ok(v) => values.push(v),
            Err(e) => failures.push((i, e.to_string())),
        }
    }
    let (mean, stderr) = mean_se(&values);
    Ok(McSummary { mean, stderr, n: values.len(), values, failures })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{make_edge, Point};

    fn path_with_weights(w: &[f64]) -> (Environment, PathRec) {
        let mut env = Environment::new(0, DistributionSpec::exponential(1.0), 2);
        let verts: Vec<Point> = (0..=w.len() as i64).map(|i| Point(vec![i, 0])).collect();
        for (i, x) in w.iter().enumerate() {
            env.set_override(make_edge(&verts[i], &verts[i + 1]).unwrap(), *x);
        }
        (env, PathRec::new(verts).unwrap())
    }

    #[test]
    fn measure_examples() {
        let (env, p) = path_with_weights(&[0.0, 1.0, 1.0, 0.0]);
        assert_eq!(measure(&env, &p, &IntervalSet::half_open(0.0, 0.5), Trunc::None).unwrap(), 0.5);
        assert_eq!(measure(&env, &p, &IntervalSet::whole(), Trunc::None).unwrap(), 1.0);
        let (env, p) = path_with_weights(&[5.0, 1.0, 1.0, 5.0]);
        let m = measure_counts(&env, &p, &IntervalSet::atom(5.0), Trunc::Edges(1)).unwrap();
        assert_eq!((m.value, m.path_length), (0.0, 2));
        assert!(measure(&env, &p, &IntervalSet::atom(5.0), Trunc::Edges(2)).is_err());
    }

    #[test]
    fn moment_examples() {
        let (env, p) = path_with_weights(&[1.0, 2.0]);
        assert_eq!(moment(&env, &p, 2, Trunc::None).unwrap(), 2.5);
        let (env, p) = path_with_weights(&[0.0, 0.0, 0.0]);
        assert_eq!(moment(&env, &p, 3, Trunc::None).unwrap(), 0.0);
    }

    #[test]
    fn parse_roundtrip() {
        let s = IntervalSet::parse("[0,0.5) ∪ {2} ∪ [3,inf)").unwrap();
        assert_eq!(s.pieces.len(), 3);
        assert!(s.contains(0.0) && !s.contains(0.5) && s.contains(2.0) && s.contains(1e9));
        assert_eq!(IntervalSet::parse(&s.to_string()).unwrap(), s);
        let t = IntervalSet::parse("(1,2] U [2,3)").unwrap();
        assert_eq!(t.pieces.len(), 1);
        assert!(!t.contains(1.0) && t.contains(2.9));
        assert!(IntervalSet::parse("[0,∞)").unwrap().contains(5.0));
    }

    #[test]
    fn parse_errors_cite_token() {
        match IntervalSet::parse("[0,abc)").unwrap_err() {
            FppError::Parse { col, token, .. } => {
                assert_eq!(col, 4);
                assert!(token.starts_with("abc"));
            }
            e => panic!("{e}"),
        }
        assert!(IntervalSet::parse("[2,1)").is_err());
        assert!(IntervalSet::parse("[0,1) & [2,3)").is_err());
        assert!(IntervalSet::parse("[0,inf]").is_err());
    }

    #[test]
    fn mass_of_sets() {
        let a = DistributionSpec::atoms(&[(1.0, 0.25), (2.0, 0.75)]);
        assert_eq!(IntervalSet::atom(2.0).mass(&a), 0.75);
        assert_eq!(IntervalSet::left_open(1.0, 2.0).mass(&a), 0.75);
        assert_eq!(IntervalSet::half_open(1.0, 2.0).mass(&a), 0.25);
        let e = DistributionSpec::exponential(1.0);
        assert!((IntervalSet::at_least(1.0).mass(&e) - (-1f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn mc_constant_and_determinism() {
        let r = mc_mean(|_| Ok(3.0), 10, 1, None).unwrap();
        assert_eq!((r.mean, r.stderr), (3.0, 0.0));
        let f = |s: u64| Ok(crate::rng::to_unit(s));
        let a = mc_mean(f, 500, 7, Some(1)).unwrap();
        let b = mc_mean(f, 500, 7, Some(8)).unwrap();
        assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        assert_eq!(a.values, b.values);
    }

    #[test]
    fn mc_bernoulli() {
        let r = mc_mean(|s| Ok(f64::from(u8::from(crate::rng::to_unit(s) < 0.5))), 10_000, 3, None)
            .unwrap();
        assert!((r.mean - 0.5).abs() < 0.015);
    }

    #[test]
    fn mc_failures_recorded() {
        let r = mc_mean(
            |s| if s % 3 == 0 { Err(FppError::InvalidArgument("x".into())) } else { Ok(1.0) },
            100,
            2,
            None,
        )
        .unwrap();
        assert_eq!(r.n + r.failures.len(), 100);
    }
}
