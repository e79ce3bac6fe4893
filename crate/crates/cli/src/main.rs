use clap::{Parser, Subcommand};
use fpp_core::geodesics::shortest_passage;
use fpp_core::percolation::{box_bj, check_b1, cube_r, cube_s, good_barrier, BoxParams, PercConfig};
use fpp_core::{Environment, Point};
use fpp_experiments::config::parse_distribution;
use fpp_experiments::report::CheckStatus;
use fpp_experiments::{load_config, run_experiment, runners, write_report, ExpError, Verdict};
use serde_json::json;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

const EXIT_USAGE: u8 = 1;
const EXIT_VIOLATED: u8 = 2;
const EXIT_INCONCLUSIVE: u8 = 3;

#[derive(Parser)]
#[command(name = "fpp-lab", version, about = "First-passage percolation experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a named experiment and write its artifacts
    Run {
        experiment: String,
        /// config file; the shipped default is used when omitted
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        replicas: Option<usize>,
        /// output directory (default: $FPP_LAB_OUT, else ./fpp-lab-out)
        #[arg(long)]
        out: Option<PathBuf>,
        /// worker threads; never changes results
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Selected geodesic between two points, as JSON
    Geodesic {
        #[arg(long, allow_hyphen_values = true)]
        from: String,
        #[arg(long, allow_hyphen_values = true)]
        to: String,
        #[arg(long, default_value = "exponential(1)")]
        dist: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1.0)]
        padding: f64,
    },
    /// Box geometry, condition B1 and the good-barrier outcome of B^j(l;m)
    InspectBox {
        #[arg(long, allow_hyphen_values = true)]
        l: String,
        #[arg(long)]
        m: i64,
        #[arg(long)]
        m1: i64,
        #[arg(long, allow_hyphen_values = true)]
        j: i32,
        #[arg(long, default_value = "exponential(1)")]
        dist: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// white threshold M̄
        #[arg(long)]
        mbar: Option<f64>,
        #[arg(long)]
        rho: Option<i64>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        strict: bool,
    },
    /// List the named experiments
    ListExperiments,
    /// Parse and validate a config file
    ValidateConfig { file: PathBuf },
}

#[derive(Debug)]
enum CliError {
    Exp(ExpError),
    Usage(String),
}

impl From<ExpError> for CliError {
    fn from(e: ExpError) -> Self {
        CliError::Exp(e)
    }
}

impl From<fpp_core::FppError> for CliError {
    fn from(e: fpp_core::FppError) -> Self {
        CliError::Exp(e.into())
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Exp(e) => write!(f, "{e}"),
            CliError::Usage(m) => f.write_str(m),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli.cmd) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

/// Like `println!`, but a closed pipe (e.g. `| head`) is not an error.
fn emit(line: &str) {
    let _ = writeln!(std::io::stdout().lock(), "{line}");
}

fn parse_point(s: &str) -> Result<Point, CliError> {
    let coords: Result<Vec<i64>, _> = s.split(',').map(|t| t.trim().parse::<i64>()).collect();
    match coords {
        Ok(c) if !c.is_empty() => Ok(Point::new(c)),
        _ => Err(CliError::Usage(format!("bad point `{s}` (expected comma-separated integers)"))),
    }
}

fn parse_dist(s: &str) -> Result<fpp_core::DistributionSpec, CliError> {
    parse_distribution(s).map_err(|(col, m)| CliError::Usage(format!("--dist `{s}`, column {}: {m}", col + 1)))
}

fn execute(cmd: Cmd) -> Result<u8, CliError> {
    match cmd {
        Cmd::ListExperiments => {
            for (name, summary) in fpp_experiments::list() {
                emit(&format!("{name:<18} {summary}"));
            }
            Ok(0)
        }
        Cmd::ValidateConfig { file } => {
            let cfg = load_config(&file)?;
            cfg.validate()?;
            let exp = runners::find(&cfg.name)?;
            cfg.check_params(exp.params)?;
            emit(&format!("{}: ok ({}, config hash {})", file.display(), cfg.name, cfg.hash()));
            Ok(0)
        }
        Cmd::Run { experiment, config, seed, replicas, out, workers } => {
            let mut cfg = match &config {
                Some(p) => load_config(p)?,
                None => runners::default_config(&experiment)?,
            };
            if cfg.name != experiment {
                return Err(CliError::Usage(format!("config names experiment `{}`, not `{experiment}`", cfg.name)));
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(r) = replicas {
                cfg.replicas = r;
            }
            if workers == Some(0) {
                return Err(CliError::Usage("--workers must be at least 1".into()));
            }
            let dir = out
                .or_else(|| std::env::var_os("FPP_LAB_OUT").map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from("fpp-lab-out"));
            let t0 = Instant::now();
            let rep = run_experiment(&cfg, workers)?;
            let ms = t0.elapsed().as_millis() as u64;
            let entry = write_report(&rep, &dir, ms)?;
            emit(&format!("{}: {}", rep.name, rep.inequality));
            for c in &rep.checks {
                let mark = match c.status {
                    CheckStatus::Holds => "ok",
                    CheckStatus::WithinNoise => "ok (within 3 s.e.)",
                    CheckStatus::Violated => "VIOLATED",
                    CheckStatus::Undetermined => "undetermined",
                };
                emit(&format!("  {:<60} {:>12.6} ± {:<10.6} {mark}", c.name, c.statistic, c.stderr));
            }
            for f in &rep.fitted {
                emit(&format!("  fitted {} = {:.6} ± {:.6}", f.name, f.value, f.stderr));
            }
            for n in &rep.notes {
                emit(&format!("  note: {n}"));
            }
            emit(&format!("verdict: {} ({} ms, artifacts in {})", rep.verdict, ms, entry.dir.display()));
            Ok(match rep.verdict {
                Verdict::Consistent => 0,
                Verdict::Violated => EXIT_VIOLATED,
                Verdict::Inconclusive => EXIT_INCONCLUSIVE,
            })
        }
        Cmd::Geodesic { from, to, dist, seed, padding } => {
            let (x, y) = (parse_point(&from)?, parse_point(&to)?);
            if x.dim() != y.dim() {
                return Err(CliError::Usage("--from and --to differ in dimension".into()));
            }
            let env = Environment::new(seed, parse_dist(&dist)?, x.dim());
            let r = shortest_passage(&env, &x, &y, padding)?;
            let out = json!({
                "T": r.t,
                "length": r.geodesic.len(),
                "vertices": r.geodesic.vertices,
                "boundary_touched": r.boundary_touched,
                "selection_exact": r.selection_exact,
            });
            emit(&serde_json::to_string_pretty(&out).expect("json"));
            Ok(0)
        }
        Cmd::InspectBox { l, m, m1, j, dist, seed, mbar, rho, delta, strict } => {
            let l = parse_point(&l)?;
            let params = BoxParams::new(l.clone(), m, m1, j)?;
            let mut pc = PercConfig { strict, ..PercConfig::default() };
            if let Some(v) = mbar {
                pc.mbar = v;
            }
            if let Some(v) = rho {
                pc.rho = v;
            }
            if let Some(v) = delta {
                pc.delta = v;
            }
            pc.validate()?;
            let env = Environment::new(seed, parse_dist(&dist)?, l.dim());
            let b1 = check_b1(&env, &params, pc.delta, pc.b1_pair_budget)?;
            let b2 = good_barrier(&env, &params, &pc)?;
            let barrier = match &b2 {
                Ok(b) => json!({
                    "ok": true,
                    "witnesses": b.witnesses.len(),
                    "max_shell_diameter": b.max_shell_diameter,
                    "diameter_limit": b.diameter_limit,
                    "time_budget": b.time_budget,
                    "length_budget": b.length_budget,
                }),
                Err(f) => json!({ "ok": false, "clause": f.clause(), "failure": f }),
            };
            let out = json!({
                "params": params,
                "S": cube_s(&l, m),
                "R": cube_r(&l, m),
                "B": box_bj(&params),
                "B1": b1,
                "B2": barrier,
                "black": b1.holds && b2.is_ok(),
            });
            emit(&serde_json::to_string_pretty(&out).expect("json"));
            Ok(0)
        }
    }
}
