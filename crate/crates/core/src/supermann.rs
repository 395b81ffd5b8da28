//! SuperMann driver over the Douglas–Rachford operator, and the plain
//! Krasnosel'skii–Mann baseline.
//!
//! Each accelerated iteration computes a direction `d`, then either takes a
//! blind step `u + d` (K0) or line-searches `w = u + αd` until the residual
//! at `w` is small enough (K1, `u⁺ = w`) or `w` defines a hyperplane that
//! separates `u` from the fixed-point set (K2, `u⁺ = u − λ ρ/‖Rw‖² Rw`).
//!
//! Oracle accounting, with `l_ν` the number of trial residuals at iteration ν:
//! - projections: `1 + Σ_ν (1 + l_ν)`, the leading 1 being the residual of `u⁰`;
//! - linear solves: `1 + Σ_ν s_ν` with `s_ν = 1` for K0 steps and `2` otherwise
//!   (the direction solve `d̃` plus the solve for the new iterate).

use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::directions::{AaState, DirectionEngine, RbState, SecantPair};
use crate::linalg::{norm, sub};
use crate::linsys::{LinSolveCache, LinSysError, LinSysMode};
use crate::operator::{hyperplane_rho, IterateBundle, Operator};
use crate::problem::{ConicProblem, EmbeddedPoint, PrimalDualTriple};
use crate::termination::{self, Classification, Metrics};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    LinSys(#[from] LinSysError),
    #[error("initial point has length {got}, expected {expected}")]
    InitialPoint { expected: usize, got: usize },
}

/// Direction family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum DirectionKind {
    /// No acceleration: Krasnosel'skii–Mann iterations.
    None,
    RestartedBroyden { mem: usize, theta_bar: f64 },
    Anderson { mem: usize },
}

impl DirectionKind {
    pub fn label(&self) -> String {
        match self {
            DirectionKind::None => "km".to_string(),
            DirectionKind::RestartedBroyden { mem, .. } => format!("rb{mem}"),
            DirectionKind::Anderson { mem } => format!("aa{mem}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverParams {
    pub c0: f64,
    pub c1: f64,
    pub q: f64,
    pub sigma: f64,
    pub lambda: f64,
    pub eps: f64,
    /// Wall-clock limit in seconds.
    pub max_time: f64,
    /// Optional hard cap on outer iterations; reaching it reports `TimedOut`.
    pub max_iters: Option<usize>,
    /// Trial points per line search before falling back to a KM step.
    pub max_backtracks: usize,
    pub direction: DirectionKind,
    pub k0_enabled: bool,
    pub linsys: LinSysMode,
    /// Keep every iterate `u^ν` in the stats (for post-hoc analysis).
    pub record_iterates: bool,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self::anderson(5)
    }
}

impl SolverParams {
    fn base(direction: DirectionKind, k0_enabled: bool) -> Self {
        Self {
            c0: 0.1,
            c1: 0.99,
            q: 0.99,
            sigma: 0.1,
            lambda: 1.5,
            eps: 1e-4,
            max_time: 300.0,
            max_iters: None,
            max_backtracks: 10,
            direction,
            k0_enabled,
            linsys: LinSysMode::Direct,
            record_iterates: false,
        }
    }

    /// Anderson acceleration with K0 steps enabled.
    pub fn anderson(mem: usize) -> Self {
        Self::base(DirectionKind::Anderson { mem }, true)
    }

    /// Restarted Broyden with K0 steps disabled.
    pub fn broyden(mem: usize) -> Self {
        Self::base(DirectionKind::RestartedBroyden { mem, theta_bar: 0.5 }, false)
    }

    /// Krasnosel'skii–Mann baseline.
    pub fn km() -> Self {
        Self::base(DirectionKind::None, false)
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        let bad = |msg: String| Err(SolverError::InvalidParameter(msg));
        for (name, v) in [("c0", self.c0), ("c1", self.c1), ("q", self.q)] {
            if !(0.0..1.0).contains(&v) {
                return bad(format!("{name} = {v} must lie in [0, 1)"));
            }
        }
        if !(self.sigma > 0.0 && self.sigma < 1.0) {
            return bad(format!("sigma = {} must lie in (0, 1)", self.sigma));
        }
        if !(self.lambda > 0.0 && self.lambda < 2.0) {
            return bad(format!("lambda = {} must lie in (0, 2)", self.lambda));
        }
        if !(self.eps > 0.0) {
            return bad(format!("eps = {} must be positive", self.eps));
        }
        if !(self.max_time >= 0.0) {
            return bad(format!("max_time = {} must be nonnegative", self.max_time));
        }
        if self.max_backtracks == 0 {
            return bad("max_backtracks must be at least 1".into());
        }
        match self.direction {
            DirectionKind::RestartedBroyden { mem, theta_bar } => {
                if mem == 0 {
                    return bad("memory must be positive".into());
                }
                if !(theta_bar > 0.0 && theta_bar < 1.0) {
                    return bad(format!("theta_bar = {theta_bar} must lie in (0, 1)"));
                }
            }
            DirectionKind::Anderson { mem } if mem == 0 => return bad("memory must be positive".into()),
            _ => {}
        }
        if let LinSysMode::Indirect { cg_tol } = self.linsys {
            if !(cg_tol > 0.0) {
                return bad(format!("cg_tol = {cg_tol} must be positive"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StepKind {
    K0,
    K1,
    K2,
    /// Plain relaxed step (baseline mode or exhausted line search).
    Km,
}

impl StepKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            StepKind::K0 => "K0",
            StepKind::K1 => "K1",
            StepKind::K2 => "K2",
            StepKind::Km => "KM",
        }
    }
}

/// One row of the progress log.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRecord {
    pub iter: usize,
    pub norm_ru: f64,
    pub pr: f64,
    pub dr: f64,
    pub gap: f64,
    pub step: StepKind,
    pub alpha: f64,
    /// Trial residual evaluations in the line search (`l_ν`).
    pub backtracks: usize,
    pub elapsed_sec: f64,
}

impl IterationRecord {
    pub const CSV_HEADER: &'static str = "iter,norm_Ru,pr,dr,gap,step_kind,alpha,backtracks,elapsed_sec";

    pub fn to_csv(&self) -> String {
        format!(
            "{},{:e},{:e},{:e},{:e},{},{},{},{:.6}",
            self.iter,
            self.norm_ru,
            self.pr,
            self.dr,
            self.gap,
            self.step.as_str(),
            self.alpha,
            self.backtracks,
            self.elapsed_sec
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SolverStats {
    /// Steps taken (iterations that ended in an update).
    pub iterations: usize,
    pub k0_steps: usize,
    pub k1_steps: usize,
    pub k2_steps: usize,
    pub km_steps: usize,
    /// `Σ l_ν`.
    pub backtracks: usize,
    pub projections: u64,
    pub linear_solves: u64,
    pub cg_failures: u64,
    pub history: Vec<IterationRecord>,
    #[serde(skip)]
    pub iterates: Vec<Vec<f64>>,
    pub wall_time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Status {
    Solved,
    Infeasible,
    Unbounded,
    TimedOut,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Solved => "solved",
            Status::Infeasible => "infeasible",
            Status::Unbounded => "unbounded",
            Status::TimedOut => "timed_out",
        }
    }

    /// A definitive answer (optimum or certificate).
    pub fn is_definitive(&self) -> bool {
        !matches!(self, Status::TimedOut)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Solution {
    Optimal(PrimalDualTriple),
    /// `y ∈ K*` with `Aᵀy ≈ 0`, scaled so that `⟨b, y⟩ = −1`.
    Infeasibility { y: Vec<f64> },
    /// `(x, s)` with `Ax + s ≈ 0`, `s ∈ K`, scaled so that `⟨c, x⟩ = −1`.
    Unboundedness { x: Vec<f64>, s: Vec<f64> },
    None,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome {
    pub status: Status,
    pub solution: Solution,
    pub metrics: Metrics,
    pub stats: SolverStats,
    /// Last iterate `u^ν`.
    pub final_u: EmbeddedPoint,
}

impl SolveOutcome {
    pub fn objective(&self, p: &ConicProblem) -> Option<f64> {
        match &self.solution {
            Solution::Optimal(t) => Some(p.objective(&t.x)),
            _ => None,
        }
    }

    pub fn x(&self) -> Option<&[f64]> {
        match &self.solution {
            Solution::Optimal(t) => Some(&t.x),
            _ => None,
        }
    }
}

/// Observer for logged iterations.
pub type Progress<'a> = &'a mut dyn FnMut(&IterationRecord);

/// Runs the accelerated solver. With `DirectionKind::None` this is the
/// Krasnosel'skii–Mann iteration.
pub fn solve(problem: &ConicProblem, params: &SolverParams, u0: Option<EmbeddedPoint>) -> Result<SolveOutcome, SolverError> {
    solve_with_progress(problem, params, u0, None)
}

/// Krasnosel'skii–Mann baseline `u⁺ = (1 − λ)u + λTu`.
pub fn km_solve(problem: &ConicProblem, params: &SolverParams) -> Result<SolveOutcome, SolverError> {
    let mut p = params.clone();
    p.direction = DirectionKind::None;
    solve_with_progress(problem, &p, None, None)
}

pub fn solve_with_progress(
    problem: &ConicProblem,
    params: &SolverParams,
    u0: Option<EmbeddedPoint>,
    progress: Option<Progress<'_>>,
) -> Result<SolveOutcome, SolverError> {
    params.validate()?;
    let start = Instant::now();
    let cache = LinSolveCache::init(problem, params.linsys)?;
    let u0 = match u0 {
        Some(u) => {
            if u.n() != problem.n() || u.m() != problem.m() {
                return Err(SolverError::InitialPoint {
                    expected: problem.embedded_dim(),
                    got: u.len(),
                });
            }
            u
        }
        None => EmbeddedPoint::initial(problem.n(), problem.m()),
    };
    let mut run = Run {
        problem,
        params,
        op: Operator::new(problem, &cache),
        stats: SolverStats::default(),
        start,
        progress,
    };
    run.execute(u0)
}

struct Run<'a, 'p> {
    problem: &'a ConicProblem,
    params: &'a SolverParams,
    op: Operator<'a>,
    stats: SolverStats,
    start: Instant,
    progress: Option<Progress<'p>>,
}

impl Run<'_, '_> {
    fn execute(&mut self, u0: EmbeddedPoint) -> Result<SolveOutcome, SolverError> {
        let prm = self.params;
        let mut engine = match prm.direction {
            DirectionKind::None => None,
            DirectionKind::RestartedBroyden { mem, theta_bar } => {
                Some(DirectionEngine::Broyden(RbState::new(mem, theta_bar)))
            }
            DirectionKind::Anderson { mem } => Some(DirectionEngine::Anderson(AaState::new(mem))),
        };

        let mut bundle = self.op.evaluate(u0)?;
        let eta0 = bundle.ru_norm;
        let mut eta = eta0;
        let mut r_safe = eta0;
        let mut pair: Option<SecantPair> = None;

        for nu in 0.. {
            if prm.record_iterates {
                self.stats.iterates.push(bundle.u.as_slice().to_vec());
            }
            let (metrics, cand) = termination::evaluate(&bundle, self.problem);
            let class = termination::classify(&metrics, prm.eps);
            if class != Classification::Continue {
                return Ok(self.finish(class_status(class), bundle, metrics, cand));
            }
            let out_of_time = self.start.elapsed().as_secs_f64() > prm.max_time;
            let out_of_iters = prm.max_iters.is_some_and(|k| nu >= k);
            if out_of_time || out_of_iters {
                return Ok(self.finish(Status::TimedOut, bundle, metrics, cand));
            }
            self.op.set_iteration(nu);

            let ru_norm = bundle.ru_norm;
            let (next, record_step) = match engine.as_mut() {
                None => {
                    let u_new = relaxed_step(&bundle, prm.lambda);
                    (self.op.evaluate(u_new)?, (StepKind::Km, 1.0, 0))
                }
                Some(engine) => {
                    let d = engine.direction(pair.as_ref(), &bundle.ru);
                    if prm.k0_enabled && ru_norm <= prm.c0 * eta {
                        let u_new: Vec<f64> = bundle.u.as_slice().iter().zip(&d).map(|(u, d)| u + d).collect();
                        let next = self.op.evaluate(EmbeddedPoint::from_vec(bundle.u.n(), u_new))?;
                        pair = Some(SecantPair::new(d, sub(&next.ru, &bundle.ru)));
                        eta = ru_norm;
                        (next, (StepKind::K0, 1.0, 0))
                    } else {
                        let n = bundle.u.n();
                        let d_tilde = self.op.solve_linear(&EmbeddedPoint::from_vec(n, d.clone()))?;
                        let mut alpha = 1.0;
                        let mut accepted: Option<(Vec<f64>, StepKind)> = None;
                        let mut last = None;
                        let mut trials = 0;
                        while trials < prm.max_backtracks {
                            trials += 1;
                            let cand = self.op.candidate_residual(&bundle, d_tilde.as_slice(), &d, alpha);
                            let rw_norm = cand.rw_norm;
                            if rw_norm == 0.0 {
                                accepted = Some((cand.w.clone(), StepKind::K1));
                                last = Some(cand);
                                break;
                            }
                            if ru_norm <= r_safe && rw_norm <= prm.c1 * ru_norm {
                                r_safe = rw_norm + prm.q.powi(nu as i32) * eta0;
                                accepted = Some((cand.w.clone(), StepKind::K1));
                                last = Some(cand);
                                break;
                            }
                            let rho = hyperplane_rho(bundle.u.as_slice(), &cand);
                            if rho >= prm.sigma * ru_norm * rw_norm {
                                let step = prm.lambda * rho / (rw_norm * rw_norm);
                                let u_new: Vec<f64> = bundle
                                    .u
                                    .as_slice()
                                    .iter()
                                    .zip(&cand.rw)
                                    .map(|(u, r)| u - step * r)
                                    .collect();
                                accepted = Some((u_new, StepKind::K2));
                                last = Some(cand);
                                break;
                            }
                            alpha *= 0.5;
                            last = Some(cand);
                        }
                        let last = last.expect("at least one trial point");
                        let (u_new, kind) = match accepted {
                            Some(a) => a,
                            None => (relaxed_step(&bundle, prm.lambda).into_vec(), StepKind::Km),
                        };
                        pair = Some(SecantPair::new(
                            sub(&last.w, bundle.u.as_slice()),
                            sub(&last.rw, &bundle.ru),
                        ));
                        let next = self.op.evaluate(EmbeddedPoint::from_vec(n, u_new))?;
                        (next, (kind, last.alpha, trials))
                    }
                }
            };

            let (step, alpha, trials) = record_step;
            match step {
                StepKind::K0 => self.stats.k0_steps += 1,
                StepKind::K1 => self.stats.k1_steps += 1,
                StepKind::K2 => self.stats.k2_steps += 1,
                StepKind::Km => self.stats.km_steps += 1,
            }
            self.stats.iterations += 1;
            self.stats.backtracks += trials;
            let record = IterationRecord {
                iter: nu,
                norm_ru: ru_norm,
                pr: metrics.pr,
                dr: metrics.dr,
                gap: metrics.gap,
                step,
                alpha,
                backtracks: trials,
                elapsed_sec: self.start.elapsed().as_secs_f64(),
            };
            if let Some(cb) = self.progress.as_mut() {
                cb(&record);
            }
            self.stats.history.push(record);
            bundle = next;
        }
        unreachable!("iteration loop only exits by returning")
    }

    fn finish(
        &mut self,
        status: Status,
        bundle: IterateBundle,
        metrics: Metrics,
        cand: Option<PrimalDualTriple>,
    ) -> SolveOutcome {
        let counts = self.op.counts();
        self.stats.projections = counts.projections;
        self.stats.linear_solves = counts.linear_solves;
        self.stats.cg_failures = counts.cg_failures;
        self.stats.wall_time = self.start.elapsed().as_secs_f64();
        let solution = match status {
            Status::Solved => Solution::Optimal(cand.expect("solved implies a candidate")),
            Status::Infeasible => {
                let (raw, _) = termination::unnormalized_triple(&bundle);
                let by = crate::linalg::dot(&self.problem.b, &raw.y);
                Solution::Infeasibility {
                    y: raw.y.iter().map(|v| v / by.abs()).collect(),
                }
            }
            Status::Unbounded => {
                let (raw, _) = termination::unnormalized_triple(&bundle);
                let cx = crate::linalg::dot(&self.problem.c, &raw.x).abs();
                Solution::Unboundedness {
                    x: raw.x.iter().map(|v| v / cx).collect(),
                    s: raw.s.iter().map(|v| v / cx).collect(),
                }
            }
            Status::TimedOut => Solution::None,
        };
        SolveOutcome {
            status,
            solution,
            metrics,
            stats: std::mem::take(&mut self.stats),
            final_u: bundle.u,
        }
    }
}

fn class_status(c: Classification) -> Status {
    match c {
        Classification::Solved => Status::Solved,
        Classification::Infeasible => Status::Infeasible,
        Classification::Unbounded => Status::Unbounded,
        Classification::Continue => unreachable!("continue is not terminal"),
    }
}

/// `u − λ Ru`.
fn relaxed_step(bundle: &IterateBundle, lambda: f64) -> EmbeddedPoint {
    let v = bundle
        .u
        .as_slice()
        .iter()
        .zip(&bundle.ru)
        .map(|(u, r)| u - lambda * r)
        .collect();
    EmbeddedPoint::from_vec(bundle.u.n(), v)
}

/// Distance helper for post-hoc Fejér checks on recorded iterates.
pub fn distance_to(u: &[f64], target: &[f64]) -> f64 {
    norm(&sub(u, target))
}
