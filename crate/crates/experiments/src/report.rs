use crate::config::ExperimentConfig;
use crate::error::{io_err, Result};
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::{Path, PathBuf};

pub const SCHEMA: &str = "fpp-lab/1";
pub const CSV_HEADER: &str = "block,param,x,estimate,stderr,n,reference";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Consistent,
    Violated,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Consistent => "consistent",
            Verdict::Violated => "violated",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

/// One estimated quantity at one parameter value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub block: String,
    pub param: String,
    pub x: f64,
    pub estimate: f64,
    pub stderr: f64,
    pub n: usize,
    pub reference: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Holds,
    /// fails, but by at most 3 standard errors
    WithinNoise,
    Violated,
    /// not enough data to evaluate
    Undetermined,
}

/// `statistic` should lie in [lower, upper].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub statistic: f64,
    pub stderr: f64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub status: CheckStatus,
}

impl Check {
    pub fn new(name: impl Into<String>, statistic: f64, stderr: f64, lower: Option<f64>, upper: Option<f64>) -> Self {
        let status = if !statistic.is_finite() || stderr.is_nan() {
            CheckStatus::Undetermined
        } else {
            let miss = lower.map_or(0.0, |l| (l - statistic).max(0.0)) + upper.map_or(0.0, |u| (statistic - u).max(0.0));
            if miss == 0.0 {
                CheckStatus::Holds
            } else if miss <= 3.0 * stderr {
                CheckStatus::WithinNoise
            } else {
                CheckStatus::Violated
            }
        };
        Check { name: name.into(), statistic, stderr, lower, upper, status }
    }

    pub fn at_least(name: impl Into<String>, statistic: f64, stderr: f64, lower: f64) -> Self {
        Self::new(name, statistic, stderr, Some(lower), None)
    }

    pub fn at_most(name: impl Into<String>, statistic: f64, stderr: f64, upper: f64) -> Self {
        Self::new(name, statistic, stderr, None, Some(upper))
    }

    /// Exact (noise-free) condition.
    pub fn exact(name: impl Into<String>, ok: bool) -> Self {
        Self::new(name, if ok { 1.0 } else { 0.0 }, 0.0, Some(1.0), None)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fitted {
    pub name: String,
    pub value: f64,
    pub stderr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RawSeries {
    pub cell: String,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema: String,
    pub name: String,
    pub inequality: String,
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub constants_hash: String,
    pub cells: Vec<Cell>,
    pub fitted: Vec<Fitted>,
    pub checks: Vec<Check>,
    pub boundary_touch_rate: f64,
    pub censored_rate: f64,
    pub verdict: Verdict,
    pub notes: Vec<String>,
    pub raw: Vec<RawSeries>,
}

impl ExperimentReport {
    pub fn new(cfg: &ExperimentConfig, inequality: &str) -> Self {
        use sha2::{Digest, Sha256};
        let ch = Sha256::digest(fpp_core::constants::table_fingerprint().as_bytes());
        ExperimentReport {
            schema: SCHEMA.to_string(),
            name: cfg.name.clone(),
            inequality: inequality.to_string(),
            config: cfg.clone(),
            config_hash: cfg.hash(),
            constants_hash: ch.iter().map(|b| format!("{b:02x}")).collect(),
            cells: Vec::new(),
            fitted: Vec::new(),
            checks: Vec::new(),
            boundary_touch_rate: 0.0,
            censored_rate: 0.0,
            verdict: Verdict::Inconclusive,
            notes: Vec::new(),
            raw: Vec::new(),
        }
    }

    pub fn cell(&mut self, block: &str, param: &str, x: f64, estimate: f64, stderr: f64, n: usize, reference: Option<f64>) {
        self.cells.push(Cell { block: block.into(), param: param.into(), x, estimate, stderr, n, reference });
    }

    pub fn block(&self, block: &str) -> Vec<&Cell> {
        self.cells.iter().filter(|c| c.block == block).collect()
    }

    pub fn fit(&mut self, name: &str, value: f64, stderr: f64) {
        self.fitted.push(Fitted { name: name.into(), value, stderr });
    }

    pub fn fitted_value(&self, name: &str) -> Option<f64> {
        self.fitted.iter().find(|f| f.name == name).map(|f| f.value)
    }

    pub fn check(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn raw_series(&mut self, cell: &str, values: Vec<f64>) {
        self.raw.push(RawSeries { cell: cell.into(), values });
    }

    /// Violated only by a > 3 s.e. failure; a high boundary-touch rate or
    /// too few replicas makes the run inconclusive instead.
    pub fn finish(&mut self) {
        let checks = &self.checks;
        self.verdict = if self.censored_rate > 0.05 {
            self.notes.push(format!(
                "{:.1}% of geodesics touched the search box boundary after padding doublings; increase padding or max_doublings",
                100.0 * self.censored_rate
            ));
            Verdict::Inconclusive
        } else if self.config.replicas < 30 {
            self.notes.push("fewer than 30 replicas: no verdict".into());
            Verdict::Inconclusive
        } else if checks.iter().any(|c| c.status == CheckStatus::Violated) {
            Verdict::Violated
        } else if checks.is_empty() || checks.iter().any(|c| c.status == CheckStatus::Undetermined) {
            Verdict::Inconclusive
        } else {
            Verdict::Consistent
        };
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(CSV_HEADER);
        s.push('\n');
        for c in &self.cells {
            let reference = c.reference.map(|r| r.to_string()).unwrap_or_default();
            s += &format!("{},{},{},{},{},{},{}\n", c.block, c.param, c.x, c.estimate, c.stderr, c.n, reference);
        }
        s
    }

    /// Estimate against parameter, one panel per block, with ±1 s.e. bars.
    pub fn to_svg(&self) -> String {
        let mut blocks: Vec<&str> = Vec::new();
        for c in &self.cells {
            if !blocks.contains(&c.block.as_str()) {
                blocks.push(&c.block);
            }
        }
        let (w, ph) = (640.0, 220.0);
        let h = ph * blocks.len().max(1) as f64;
        let mut s = format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        );
        for (bi, b) in blocks.iter().enumerate() {
            let cells: Vec<&Cell> = self.cells.iter().filter(|c| c.block == *b && c.estimate.is_finite()).collect();
            let top = bi as f64 * ph;
            s += &format!("<text x=\"10\" y=\"{}\" font-family=\"sans-serif\" font-size=\"13\">{} / {}</text>\n", top + 18.0, self.name, b);
            if cells.is_empty() {
                continue;
            }
            let se = |c: &Cell| if c.stderr.is_finite() { c.stderr } else { 0.0 };
            let xmin = cells.iter().map(|c| c.x).fold(f64::INFINITY, f64::min);
            let xmax = cells.iter().map(|c| c.x).fold(f64::NEG_INFINITY, f64::max);
            let ymin = cells.iter().map(|c| c.estimate - se(c)).fold(f64::INFINITY, f64::min).min(0.0);
            let ymax = cells.iter().map(|c| c.estimate + se(c)).fold(f64::NEG_INFINITY, f64::max);
            let sx = |x: f64| 50.0 + if xmax > xmin { (x - xmin) / (xmax - xmin) * (w - 80.0) } else { (w - 80.0) / 2.0 };
            let sy = |y: f64| top + ph - 30.0 - if ymax > ymin { (y - ymin) / (ymax - ymin) * (ph - 60.0) } else { 0.0 };
            s += &format!(
                "<line x1=\"50\" y1=\"{0}\" x2=\"{1}\" y2=\"{0}\" stroke=\"black\"/>\n<line x1=\"50\" y1=\"{2}\" x2=\"50\" y2=\"{0}\" stroke=\"black\"/>\n",
                top + ph - 30.0,
                w - 30.0,
                top + 30.0
            );
            s += &format!(
                "<text x=\"52\" y=\"{}\" font-family=\"sans-serif\" font-size=\"10\">{:.4}</text>\n<text x=\"52\" y=\"{}\" font-family=\"sans-serif\" font-size=\"10\">{:.4}</text>\n",
                top + 38.0,
                ymax,
                top + ph - 34.0,
                ymin
            );
            let pts: Vec<String> = cells.iter().map(|c| format!("{:.2},{:.2}", sx(c.x), sy(c.estimate))).collect();
            s += &format!("<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\" points=\"{}\"/>\n", pts.join(" "));
            for c in &cells {
                let (x, e) = (sx(c.x), se(c));
                s += &format!(
                    "<line x1=\"{x:.2}\" y1=\"{:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"gray\"/>\n<circle cx=\"{x:.2}\" cy=\"{:.2}\" r=\"2.5\" fill=\"steelblue\"/>\n",
                    sy(c.estimate - e),
                    sy(c.estimate + e),
                    sy(c.estimate)
                );
            }
        }
        s += "</svg>\n";
        s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub name: String,
    pub seed: u64,
    pub config_hash: String,
    pub verdict: Verdict,
    pub timestamp: u64,
    pub runtime_ms: u64,
    pub dir: PathBuf,
}

/// Writes report.json, cells.csv and plot.svg under `dir/<name>/` and
/// appends a line to `dir/manifest.jsonl`.
pub fn write_report(rep: &ExperimentReport, dir: &Path, runtime_ms: u64) -> Result<ManifestEntry> {
    let sub = dir.join(&rep.name);
    std::fs::create_dir_all(&sub).map_err(io_err(&sub))?;
    let files = [("report.json", rep.to_json()), ("cells.csv", rep.to_csv()), ("plot.svg", rep.to_svg())];
    for (f, body) in files {
        let p = sub.join(f);
        std::fs::write(&p, body).map_err(io_err(&p))?;
    }
    let timestamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let entry = ManifestEntry {
        name: rep.name.clone(),
        seed: rep.config.seed,
        config_hash: rep.config_hash.clone(),
        verdict: rep.verdict,
        timestamp,
        runtime_ms,
        dir: sub,
    };
    let mp = dir.join("manifest.jsonl");
    let mut f = std::fs::OpenOptions::new().create(true).append(true).open(&mp).map_err(io_err(&mp))?;
    writeln!(f, "{}", serde_json::to_string(&entry)?).map_err(io_err(&mp))?;
    Ok(entry)
}
