//! Benchmark suites: generate a corpus, solve every (problem, solver) cell,
//! and summarize with performance profiles and shifted geometric means.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::generators::{Family, GeneratorSpec};
use super::profile::{dm_profile, performance_ratios, sgm, tau_grid, ProfileError, TimingTable};
use crate::linsys::LinSysMode;
use crate::supermann::{solve, SolverParams, Status};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid suite: {0}")]
    Suite(String),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("suite file: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DirectionName {
    Anderson,
    Broyden,
    Km,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub label: String,
    pub direction: DirectionName,
    #[serde(default)]
    pub mem: Option<usize>,
    #[serde(default)]
    pub k0: Option<bool>,
    #[serde(default)]
    pub lambda: Option<f64>,
    #[serde(default)]
    pub indirect: bool,
}

impl SolverConfig {
    pub fn params(&self, eps: f64, max_time: f64) -> SolverParams {
        let mut p = match self.direction {
            DirectionName::Anderson => SolverParams::anderson(self.mem.unwrap_or(5)),
            DirectionName::Broyden => SolverParams::broyden(self.mem.unwrap_or(50)),
            DirectionName::Km => SolverParams::km(),
        };
        if let Some(k0) = self.k0 {
            p.k0_enabled = k0;
        }
        if let Some(l) = self.lambda {
            p.lambda = l;
        }
        if self.indirect {
            p.linsys = LinSysMode::Indirect { cg_tol: 1e-3 };
        }
        p.eps = eps;
        p.max_time = max_time;
        p
    }
}

/// One family instance, repeated over several seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemGroup {
    #[serde(flatten)]
    pub family: Family,
    pub seeds: Vec<u64>,
}

fn default_eps() -> f64 {
    1e-4
}
fn default_max_time() -> f64 {
    60.0
}
fn default_sigma() -> f64 {
    10.0
}
fn default_tau_max() -> f64 {
    100.0
}
fn default_tau_points() -> usize {
    50
}
fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteSpec {
    pub problems: Vec<ProblemGroup>,
    pub solvers: Vec<SolverConfig>,
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default = "default_max_time")]
    pub max_time: f64,
    /// Shift for the geometric mean, in seconds.
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    #[serde(default = "default_tau_max")]
    pub tau_max: f64,
    #[serde(default = "default_tau_points")]
    pub tau_points: usize,
    #[serde(default = "default_true")]
    pub svg: bool,
}

impl SuiteSpec {
    pub fn from_json(text: &str) -> Result<Self, BenchError> {
        let s: SuiteSpec = serde_json::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        if self.solvers.is_empty() {
            return Err(BenchError::Suite("no solvers".into()));
        }
        if self.problems.iter().all(|g| g.seeds.is_empty()) {
            return Err(BenchError::Suite("no problems".into()));
        }
        let mut labels: Vec<&str> = self.solvers.iter().map(|s| s.label.as_str()).collect();
        labels.sort_unstable();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            return Err(BenchError::Suite("solver labels must be unique".into()));
        }
        for s in &self.solvers {
            s.params(self.eps, self.max_time)
                .validate()
                .map_err(|e| BenchError::Suite(format!("solver {}: {e}", s.label)))?;
        }
        if !(self.sigma >= 0.0) || !(self.tau_max >= 1.0) || self.tau_points == 0 {
            return Err(BenchError::Suite("sigma, tau_max or tau_points out of range".into()));
        }
        Ok(())
    }

    pub fn generator_specs(&self) -> Vec<GeneratorSpec> {
        self.problems
            .iter()
            .flat_map(|g| g.seeds.iter().map(|&seed| GeneratorSpec::new(g.family.clone(), seed)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimingRow {
    pub problem_id: String,
    pub solver: String,
    /// `solved`, `infeasible`, `unbounded`, `timed_out`, or `error`.
    pub status: String,
    pub seconds: f64,
    pub iters: usize,
    pub projections: u64,
    pub linsolves: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileRow {
    pub solver: String,
    pub tau: f64,
    pub rho: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SgmRow {
    pub solver: String,
    pub sgm10: f64,
    pub success_rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub rows: Vec<TimingRow>,
    pub table: TimingTable,
    pub taus: Vec<f64>,
    /// `profile[s][k] = ρ_s(taus[k])`.
    pub profile: Vec<Vec<f64>>,
    pub sgm: Vec<SgmRow>,
}

impl SuiteReport {
    pub fn profile_rows(&self) -> Vec<ProfileRow> {
        self.table
            .solvers
            .iter()
            .zip(&self.profile)
            .flat_map(|(s, curve)| {
                self.taus.iter().zip(curve).map(move |(&tau, &rho)| ProfileRow {
                    solver: s.clone(),
                    tau,
                    rho,
                })
            })
            .collect()
    }
}

fn run_cell(spec: &GeneratorSpec, problem: &Result<crate::ConicProblem, String>, cfg: &SolverConfig, suite: &SuiteSpec) -> TimingRow {
    let mut row = TimingRow {
        problem_id: spec.id(),
        solver: cfg.label.clone(),
        status: "error".into(),
        seconds: 0.0,
        iters: 0,
        projections: 0,
        linsolves: 0,
    };
    let Ok(problem) = problem else {
        return row;
    };
    let params = cfg.params(suite.eps, suite.max_time);
    let start = Instant::now();
    let out = solve(problem, &params, None);
    row.seconds = start.elapsed().as_secs_f64();
    if let Ok(out) = out {
        row.status = out.status.as_str().into();
        row.iters = out.stats.iterations;
        row.projections = out.stats.projections;
        row.linsolves = out.stats.linear_solves;
    }
    row
}

/// Solves every cell of the suite with `jobs` worker threads. Individual
/// failures become status rows; they never abort the run.
pub fn run_suite(suite: &SuiteSpec, jobs: usize) -> Result<SuiteReport, BenchError> {
    suite.validate()?;
    let specs = suite.generator_specs();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| BenchError::Suite(e.to_string()))?;
    let rows: Vec<TimingRow> = pool.install(|| {
        let problems: Vec<Result<crate::ConicProblem, String>> =
            specs.par_iter().map(|s| s.generate().map_err(|e| e.to_string())).collect();
        let cells: Vec<(usize, usize)> = (0..specs.len())
            .flat_map(|p| (0..suite.solvers.len()).map(move |s| (p, s)))
            .collect();
        cells
            .par_iter()
            .map(|&(p, s)| run_cell(&specs[p], &problems[p], &suite.solvers[s], suite))
            .collect()
    });
    summarize(suite, rows)
}

/// Builds the timing table, profiles and means from finished rows (ordered
/// problem-major, solver-minor).
pub fn summarize(suite: &SuiteSpec, rows: Vec<TimingRow>) -> Result<SuiteReport, BenchError> {
    let ns = suite.solvers.len();
    let solvers: Vec<String> = suite.solvers.iter().map(|s| s.label.clone()).collect();
    let problems: Vec<String> = rows.chunks(ns).map(|c| c[0].problem_id.clone()).collect();
    let times: Vec<Vec<f64>> = rows
        .chunks(ns)
        .map(|c| {
            c.iter()
                .map(|r| {
                    if r.status == Status::Solved.as_str() {
                        r.seconds.max(1e-9)
                    } else {
                        f64::INFINITY
                    }
                })
                .collect()
        })
        .collect();
    let table = TimingTable::new(solvers, problems, times)?;
    let ratios = performance_ratios(&table);
    let taus = tau_grid(suite.tau_max, suite.tau_points);
    let profile = dm_profile(&ratios.r, &taus)?;
    let sgm_rows = (0..ns)
        .map(|s| {
            let t = table.solver_times(s);
            let ok = t.iter().filter(|v| v.is_finite()).count() as f64 / t.len() as f64;
            SgmRow {
                solver: table.solvers[s].clone(),
                sgm10: sgm(&t, suite.sigma).unwrap_or(f64::INFINITY),
                success_rate: ok,
            }
        })
        .collect();
    Ok(SuiteReport {
        rows,
        table,
        taus,
        profile,
        sgm: sgm_rows,
    })
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `timing.csv`, `profile.csv`, `sgm.csv` and, if requested,
/// `profile.svg` into `dir`.
pub fn write_artifacts(report: &SuiteReport, dir: &Path, svg: bool) -> Result<(), BenchError> {
    std::fs::create_dir_all(dir)?;
    write_csv(&dir.join("timing.csv"), &report.rows)?;
    write_csv(&dir.join("profile.csv"), &report.profile_rows())?;
    write_csv(&dir.join("sgm.csv"), &report.sgm)?;
    if svg {
        std::fs::write(dir.join("profile.svg"), profile_svg(report))?;
    }
    Ok(())
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

/// Step plot of the profile curves, `τ` on a log axis.
pub fn profile_svg(report: &SuiteReport) -> String {
    let (w, h, pad) = (640.0, 400.0, 50.0);
    let tmax = report.taus.last().copied().unwrap_or(1.0).max(1.0 + 1e-9);
    let x = |tau: f64| pad + (w - 2.0 * pad) * tau.ln() / tmax.ln();
    let y = |rho: f64| h - pad - (h - 2.0 * pad) * rho;
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(
        s,
        r#"<rect x="{pad}" y="{pad}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        w - 2.0 * pad,
        h - 2.0 * pad
    );
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">τ (log scale, 1 to {tmax})</text>"#, w / 2.0, h - 15.0);
    let _ = writeln!(s, r#"<text x="15" y="{}" transform="rotate(-90 15 {})" text-anchor="middle">ρ(τ)</text>"#, h / 2.0, h / 2.0);
    for (i, (name, curve)) in report.table.solvers.iter().zip(&report.profile).enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut pts = String::new();
        let mut prev: Option<f64> = None;
        for (&tau, &rho) in report.taus.iter().zip(curve) {
            if let Some(p) = prev {
                let _ = write!(pts, "{:.2},{:.2} ", x(tau), y(p));
            }
            let _ = write!(pts, "{:.2},{:.2} ", x(tau), y(rho));
            prev = Some(rho);
        }
        let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#, pts.trim_end());
        let ly = pad + 18.0 * (i as f64 + 1.0);
        let _ = writeln!(s, r#"<text x="{}" y="{ly}" fill="{color}">{name}</text>"#, w - pad - 80.0);
    }
    s.push_str("</svg>\n");
    s
}
