//! Flat key-value experiment configs with `[section]` headers.
//!
//! ```text
//! name = fkg
//! [model]
//! dimension = 2
//! distribution = exponential(1)
//! [geometry]
//! norms = 20
//! direction = 1,1
//! [run]
//! replicas = 2000
//! seed = 7
//! [params]
//! t_grid = 0.1:3.0:0.1
//! ```

use crate::error::{ExpError, Result};
use fpp_core::empirical::IntervalSet;
use fpp_core::{DistributionSpec, FppError, Point};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub name: String,
    pub dimension: usize,
    pub distribution: DistributionSpec,
    /// |x|₁ values
    pub norms: Vec<i64>,
    pub direction: Vec<i64>,
    pub padding: f64,
    pub max_doublings: u32,
    pub replicas: usize,
    pub seed: u64,
    pub params: BTreeMap<String, String>,
    /// (line, column) of each value, for error messages
    #[serde(skip)]
    pub locations: BTreeMap<String, (usize, usize)>,
}

/// Value type of an experiment parameter.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParamKind {
    F64,
    Usize,
    F64List,
    UsizeList,
    Dist,
    Sets,
}

impl ExperimentConfig {
    pub fn new(name: &str, distribution: DistributionSpec) -> Self {
        ExperimentConfig {
            name: name.to_string(),
            dimension: 2,
            distribution,
            norms: vec![20],
            direction: vec![1, 1],
            padding: 1.0,
            max_doublings: 2,
            replicas: 200,
            seed: 1,
            params: BTreeMap::new(),
            locations: BTreeMap::new(),
        }
    }

    pub fn with_param(mut self, key: &str, value: &str) -> Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }

    /// Target x with |x|₁ = norm along the configured direction.
    pub fn target(&self, norm: i64) -> Result<Point> {
        let dl1: i64 = self.direction.iter().map(|c| c.abs()).sum();
        if self.direction.len() != self.dimension || dl1 == 0 {
            return Err(ExpError::Invalid(format!(
                "direction {:?} does not match dimension {}",
                self.direction, self.dimension
            )));
        }
        if norm % dl1 != 0 {
            return Err(ExpError::Invalid(format!(
                "|x|₁ = {norm} is not a multiple of the direction's ℓ1 norm {dl1}"
            )));
        }
        Ok(Point(self.direction.iter().map(|c| c * norm / dl1).collect()))
    }

    fn loc(&self, key: &str) -> (usize, usize) {
        self.locations.get(&format!("params.{key}")).copied().unwrap_or((0, 0))
    }

    fn param_err(&self, key: &str, msg: String) -> ExpError {
        let (line, col) = self.loc(key);
        if line == 0 {
            ExpError::Invalid(format!("params.{key}: {msg}"))
        } else {
            ExpError::Config { line, col, msg: format!("params.{key}: {msg}") }
        }
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.params.get(key).map(|s| s.as_str())
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        match self.raw(key) {
            None => Ok(default),
            Some(s) => parse_f64(s).map_err(|m| self.param_err(key, m)),
        }
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        match self.raw(key) {
            None => Ok(default),
            Some(s) => s.trim().parse().map_err(|_| self.param_err(key, format!("expected an integer, got `{s}`"))),
        }
    }

    pub fn f64_list_or(&self, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        match self.raw(key) {
            None => Ok(default.to_vec()),
            Some(s) => parse_f64_list(s).map_err(|m| self.param_err(key, m)),
        }
    }

    pub fn usize_list_or(&self, key: &str, default: &[usize]) -> Result<Vec<usize>> {
        match self.raw(key) {
            None => Ok(default.to_vec()),
            Some(s) => s
                .split(',')
                .map(|t| t.trim().parse::<usize>().map_err(|_| format!("expected integers, got `{}`", t.trim())))
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|m| self.param_err(key, m)),
        }
    }

    pub fn dist_or(&self, key: &str, default: &DistributionSpec) -> Result<DistributionSpec> {
        let Some(s) = self.raw(key) else { return Ok(default.clone()) };
        parse_distribution(s).map_err(|(_, m)| self.param_err(key, m))
    }

    /// Interval-set literals separated by `;`.
    pub fn sets_or(&self, key: &str, default: &[IntervalSet]) -> Result<Vec<IntervalSet>> {
        let Some(s) = self.raw(key) else { return Ok(default.to_vec()) };
        let (line, col) = self.loc(key);
        let mut out = Vec::new();
        let mut offset = 0;
        for part in s.split(';') {
            let lead = part.len() - part.trim_start().len();
            match IntervalSet::parse(part.trim()) {
                Ok(v) => out.push(v),
                Err(FppError::Parse { col: c, token, msg }) => {
                    let chars = s[..offset + lead].chars().count();
                    return Err(ExpError::Config {
                        line,
                        col: col + chars + c - 1,
                        msg: format!("params.{key}: {msg} at `{token}`"),
                    });
                }
                Err(e) => return Err(self.param_err(key, e.to_string())),
            }
            offset += part.len() + 1;
        }
        Ok(out)
    }

    /// Rejects parameters a runner does not understand or cannot parse.
    pub fn check_params(&self, allowed: &[(&str, ParamKind)]) -> Result<()> {
        for k in self.params.keys() {
            let Some((_, kind)) = allowed.iter().find(|(n, _)| n == k) else {
                let names: Vec<&str> = allowed.iter().map(|(n, _)| *n).collect();
                return Err(self.param_err(k, format!("unknown parameter (allowed: {})", names.join(", "))));
            };
            match kind {
                ParamKind::F64 => self.f64_or(k, 0.0).map(drop)?,
                ParamKind::Usize => self.usize_or(k, 0).map(drop)?,
                ParamKind::F64List => self.f64_list_or(k, &[]).map(drop)?,
                ParamKind::UsizeList => self.usize_list_or(k, &[]).map(drop)?,
                ParamKind::Dist => self.dist_or(k, &self.distribution).map(drop)?,
                ParamKind::Sets => self.sets_or(k, &[]).map(drop)?,
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.dimension < 2 {
            return Err(ExpError::Invalid("dimension must be at least 2".into()));
        }
        self.distribution.validate()?;
        if self.replicas < 2 {
            return Err(ExpError::Invalid("replicas must be at least 2".into()));
        }
        if !(self.padding >= 1.0) {
            return Err(ExpError::Invalid("padding must be at least 1".into()));
        }
        if self.norms.is_empty() || self.norms.iter().any(|n| *n < 1) {
            return Err(ExpError::Invalid("norms must be positive".into()));
        }
        Ok(())
    }

    /// Canonical JSON used for hashing; excludes source locations.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    pub fn hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let h = Sha256::digest(self.canonical_json().as_bytes());
        h.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Renders the config back into the text format.
    pub fn to_text(&self) -> String {
        let mut s = format!("name = {}\n\n[model]\n", self.name);
        s += &format!("dimension = {}\ndistribution = {}\n\n", self.dimension, dist_literal(&self.distribution));
        s += "[geometry]\n";
        s += &format!("norms = {}\n", join(&self.norms));
        s += &format!("direction = {}\n", join(&self.direction));
        s += &format!("padding = {}\nmax_doublings = {}\n\n", self.padding, self.max_doublings);
        s += &format!("[run]\nreplicas = {}\nseed = {}\n", self.replicas, self.seed);
        if !self.params.is_empty() {
            s += "\n[params]\n";
            for (k, v) in &self.params {
                s += &format!("{k} = {v}\n");
            }
        }
        s
    }
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn parse_f64(s: &str) -> std::result::Result<f64, String> {
    let t = s.trim();
    match t {
        "inf" | "∞" => Ok(f64::INFINITY),
        _ => t.parse::<f64>().map_err(|_| format!("expected a number, got `{t}`")),
    }
}

/// Comma lists with `a:b:step` ranges (inclusive up to rounding).
pub fn parse_f64_list(s: &str) -> std::result::Result<Vec<f64>, String> {
    let mut out = Vec::new();
    for part in s.split(',') {
        let part = part.trim();
        let bits: Vec<&str> = part.split(':').collect();
        match bits.len() {
            1 => out.push(parse_f64(part)?),
            3 => {
                let (a, b, h) = (parse_f64(bits[0])?, parse_f64(bits[1])?, parse_f64(bits[2])?);
                if !(h > 0.0) || b < a {
                    return Err(format!("bad range `{part}`"));
                }
                let n = ((b - a) / h + 1e-9).floor() as usize;
                // round to the step's decimal resolution
                out.extend((0..=n).map(|i| ((a + i as f64 * h) * 1e9).round() / 1e9));
            }
            _ => return Err(format!("bad list item `{part}`")),
        }
    }
    Ok(out)
}

fn dist_literal(d: &DistributionSpec) -> String {
    match d {
        DistributionSpec::Atoms { atoms } => {
            let a: Vec<String> = atoms.iter().map(|(x, p)| format!("{x}:{p}")).collect();
            format!("atoms({})", a.join(", "))
        }
        DistributionSpec::BernoulliShift { a, b, p } => format!("bernoulli({a}, {b}, {p})"),
        DistributionSpec::Exponential { rate } => format!("exponential({rate})"),
        DistributionSpec::Pareto { alpha, xmin } => format!("pareto({alpha}, {xmin})"),
        DistributionSpec::Uniform { a, b } => format!("uniform({a}, {b})"),
    }
}

/// `exponential(rate)`, `pareto(alpha, xmin)`, `uniform(a, b)`,
/// `bernoulli(a, b, p)` with P(b) = p, `atoms(v:p, v:p, ...)`.
pub fn parse_distribution(s: &str) -> std::result::Result<DistributionSpec, (usize, String)> {
    let t = s.trim();
    let open = t.find('(').ok_or((0, format!("expected kind(args), got `{t}`")))?;
    if !t.ends_with(')') {
        return Err((t.len(), "missing `)`".into()));
    }
    let kind = t[..open].trim();
    let inner = &t[open + 1..t.len() - 1];
    let nums = |n: usize| -> std::result::Result<Vec<f64>, (usize, String)> {
        let v: Vec<f64> = inner
            .split(',')
            .map(|x| parse_f64(x).map_err(|m| (open + 1, m)))
            .collect::<std::result::Result<_, _>>()?;
        if v.len() != n {
            return Err((open + 1, format!("{kind} takes {n} arguments, got {}", v.len())));
        }
        Ok(v)
    };
    let d = match kind {
        "exponential" => DistributionSpec::Exponential { rate: nums(1)?[0] },
        "pareto" => {
            let v = nums(2)?;
            DistributionSpec::Pareto { alpha: v[0], xmin: v[1] }
        }
        "uniform" => {
            let v = nums(2)?;
            DistributionSpec::Uniform { a: v[0], b: v[1] }
        }
        "bernoulli" => {
            let v = nums(3)?;
            DistributionSpec::BernoulliShift { a: v[0], b: v[1], p: v[2] }
        }
        "atoms" => {
            let mut atoms = Vec::new();
            for a in inner.split(',') {
                let (x, p) = a.split_once(':').ok_or((open + 1, format!("atom `{}` is not value:prob", a.trim())))?;
                atoms.push((parse_f64(x).map_err(|m| (open + 1, m))?, parse_f64(p).map_err(|m| (open + 1, m))?));
            }
            DistributionSpec::Atoms { atoms }
        }
        _ => return Err((0, format!("unknown distribution `{kind}`"))),
    };
    d.validate().map_err(|e| (0, e.to_string()))?;
    Ok(d)
}

const SECTIONS: [&str; 4] = ["model", "geometry", "run", "params"];

/// Parses the text format. Every error carries a 1-based line and column.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut section = String::new();
    let mut seen: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    let mut values: BTreeMap<String, String> = BTreeMap::new();
    for (ln, raw_line) in text.lines().enumerate() {
        let line = ln + 1;
        let body = match raw_line.find('#') {
            Some(i) => &raw_line[..i],
            None => raw_line,
        };
        if body.trim().is_empty() {
            continue;
        }
        let lead = body.len() - body.trim_start().len();
        let col0 = body[..lead].chars().count() + 1;
        let t = body.trim();
        if t.starts_with('[') {
            if !t.ends_with(']') {
                return Err(ExpError::Config { line, col: col0, msg: format!("malformed section header `{t}`") });
            }
            let name = t[1..t.len() - 1].trim();
            if !SECTIONS.contains(&name) {
                return Err(ExpError::Config { line, col: col0 + 1, msg: format!("unknown section `{name}`") });
            }
            section = name.to_string();
            continue;
        }
        let Some(eq) = body.find('=') else {
            return Err(ExpError::Config { line, col: col0, msg: format!("expected `key = value`, got `{t}`") });
        };
        let key = body[..eq].trim();
        if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(ExpError::Config { line, col: col0, msg: format!("bad key `{key}`") });
        }
        let after = &body[eq + 1..];
        let vlead = after.len() - after.trim_start().len();
        let vcol = body[..eq + 1 + vlead].chars().count() + 1;
        let value = after.trim().to_string();
        let full = if section.is_empty() { key.to_string() } else { format!("{section}.{key}") };
        if seen.contains_key(&full) {
            return Err(ExpError::Config { line, col: col0, msg: format!("duplicate key `{full}`") });
        }
        seen.insert(full.clone(), (line, vcol));
        values.insert(full, value);
    }

    let err_at = |key: &str, msg: String| {
        let (line, col) = seen.get(key).copied().unwrap_or((1, 1));
        ExpError::Config { line, col, msg }
    };
    let name = values.get("name").ok_or_else(|| ExpError::Config { line: 1, col: 1, msg: "missing `name`".into() })?;
    let dist_text = values
        .get("model.distribution")
        .ok_or_else(|| ExpError::Config { line: 1, col: 1, msg: "missing `[model] distribution`".into() })?;
    let distribution = parse_distribution(dist_text).map_err(|(off, m)| {
        let (line, col) = seen["model.distribution"];
        ExpError::Config { line, col: col + off, msg: m }
    })?;
    let mut cfg = ExperimentConfig::new(name, distribution);
    for (key, value) in &values {
        let int = |v: &str| v.parse::<i64>().map_err(|_| err_at(key, format!("expected an integer, got `{v}`")));
        let int_list = |v: &str| -> Result<Vec<i64>> { v.split(',').map(|t| int(t.trim())).collect() };
        match key.as_str() {
            "name" | "model.distribution" => {}
            "model.dimension" => cfg.dimension = int(value)? as usize,
            "geometry.norms" => cfg.norms = int_list(value)?,
            "geometry.direction" => cfg.direction = int_list(value)?,
            "geometry.padding" => cfg.padding = parse_f64(value).map_err(|m| err_at(key, m))?,
            "geometry.max_doublings" => cfg.max_doublings = int(value)? as u32,
            "run.replicas" => cfg.replicas = int(value)? as usize,
            "run.seed" => cfg.seed = value.parse().map_err(|_| err_at(key, format!("expected a seed, got `{value}`")))?,
            k if k.starts_with("params.") => {
                cfg.params.insert(k["params.".len()..].to_string(), value.clone());
            }
            k => return Err(err_at(key, format!("unknown key `{k}`"))),
        }
    }
    if !values.contains_key("geometry.direction") {
        cfg.direction = vec![1; cfg.dimension];
    }
    cfg.locations = seen;
    Ok(cfg)
}

pub fn load_config(path: &std::path::Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(crate::error::io_err(path))?;
    parse_config(&text)
}
