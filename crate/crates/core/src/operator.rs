//! The Douglas–Rachford operator on the embedding,
//!
//! ```text
//! ũ = (I + Q)⁻¹ u,   ū = Π_C(2ũ − u),   Tu = u + ū − ũ,
//! ```
//!
//! and its fixed-point residual `Ru = u − Tu = ũ − ū`.

use std::cell::{Cell, RefCell};

use crate::cones::{project_embedding_in_place, ConeKind};
use crate::linalg::{dot, norm};
use crate::linsys::{LinSolveCache, LinSysError};
use crate::problem::{ConicProblem, EmbeddedPoint};

/// `u` together with the intermediate points of one operator evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct IterateBundle {
    pub u: EmbeddedPoint,
    pub u_tilde: EmbeddedPoint,
    pub u_bar: EmbeddedPoint,
    /// `Ru = ũ − ū`.
    pub ru: Vec<f64>,
    pub ru_norm: f64,
}

impl IterateBundle {
    /// `Tu = u − Ru`.
    pub fn tu(&self) -> Vec<f64> {
        self.u.as_slice().iter().zip(&self.ru).map(|(a, r)| a - r).collect()
    }
}

/// Residual at a trial point `w = u + αd`, computed without a linear solve.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub alpha: f64,
    pub w: Vec<f64>,
    pub w_tilde: Vec<f64>,
    pub rw: Vec<f64>,
    pub rw_norm: f64,
}

/// Oracle call counters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OracleCounts {
    pub linear_solves: u64,
    pub projections: u64,
    pub cg_failures: u64,
}

/// Evaluates `T` and `R` for one problem. Holds the per-solve CG warm start
/// and counters; the problem and cache are shared read-only.
pub struct Operator<'a> {
    problem: &'a ConicProblem,
    cache: &'a LinSolveCache,
    blocks: Vec<(ConeKind, usize)>,
    counts: Cell<OracleCounts>,
    warm: RefCell<Vec<f64>>,
    iteration: Cell<usize>,
}

impl<'a> Operator<'a> {
    pub fn new(problem: &'a ConicProblem, cache: &'a LinSolveCache) -> Self {
        Self {
            problem,
            cache,
            blocks: problem.cones.blocks(),
            counts: Cell::new(OracleCounts::default()),
            warm: RefCell::new(Vec::new()),
            iteration: Cell::new(0),
        }
    }

    pub fn problem(&self) -> &ConicProblem {
        self.problem
    }

    pub fn counts(&self) -> OracleCounts {
        self.counts.get()
    }

    /// Outer iteration index, used by the indirect CG tolerance schedule.
    pub fn set_iteration(&self, iter: usize) {
        self.iteration.set(iter);
    }

    /// `(I + Q)⁻¹ v`. In indirect mode a CG iteration cap is not fatal: the
    /// best iterate is used and the failure is counted.
    pub fn solve_linear(&self, v: &EmbeddedPoint) -> Result<EmbeddedPoint, LinSysError> {
        let mut c = self.counts.get();
        c.linear_solves += 1;
        let res = match self.cache.cg_tolerance(self.iteration.get()) {
            None => self.cache.solve(v),
            Some(tol) => {
                let mut warm = self.warm.borrow_mut();
                self.cache.solve_tol(v, tol, Some(&mut warm))
            }
        };
        let out = match res {
            Ok(x) => Ok(x),
            Err(LinSysError::CgMaxIterations { best, .. }) => {
                c.cg_failures += 1;
                Ok(EmbeddedPoint::from_vec(v.n(), best))
            }
            Err(e) => Err(e),
        };
        self.counts.set(c);
        out
    }

    fn project(&self, v: &mut EmbeddedPoint) {
        let mut c = self.counts.get();
        c.projections += 1;
        self.counts.set(c);
        project_embedding_in_place(v, &self.blocks);
    }

    /// Full evaluation: one linear solve and one projection.
    pub fn evaluate(&self, u: EmbeddedPoint) -> Result<IterateBundle, LinSysError> {
        if u.n() != self.problem.n() || u.m() != self.problem.m() {
            return Err(LinSysError::DimensionMismatch {
                expected: self.problem.embedded_dim(),
                got: u.len(),
            });
        }
        let u_tilde = self.solve_linear(&u)?;
        Ok(self.evaluate_with_tilde(u, u_tilde))
    }

    /// Evaluation when `ũ` is already known: one projection.
    pub fn evaluate_with_tilde(&self, u: EmbeddedPoint, u_tilde: EmbeddedPoint) -> IterateBundle {
        let mut u_bar = reflect(&u_tilde, &u);
        self.project(&mut u_bar);
        let ru: Vec<f64> = u_tilde.as_slice().iter().zip(u_bar.as_slice()).map(|(a, b)| a - b).collect();
        let ru_norm = norm(&ru);
        IterateBundle {
            u,
            u_tilde,
            u_bar,
            ru,
            ru_norm,
        }
    }

    /// `Rw` at `w = u + αd` using `w̃ = ũ + α d̃`, where `d̃ = (I + Q)⁻¹ d`.
    /// Exactly one projection, no linear solve.
    pub fn candidate_residual(&self, bundle: &IterateBundle, d_tilde: &[f64], d: &[f64], alpha: f64) -> Candidate {
        let n = bundle.u.n();
        let w: Vec<f64> = bundle.u.as_slice().iter().zip(d).map(|(u, d)| u + alpha * d).collect();
        let w_tilde: Vec<f64> = bundle
            .u_tilde
            .as_slice()
            .iter()
            .zip(d_tilde)
            .map(|(u, d)| u + alpha * d)
            .collect();
        let mut w_bar = EmbeddedPoint::from_vec(n, w_tilde.iter().zip(&w).map(|(t, w)| 2.0 * t - w).collect());
        self.project(&mut w_bar);
        let rw: Vec<f64> = w_tilde.iter().zip(w_bar.as_slice()).map(|(a, b)| a - b).collect();
        let rw_norm = norm(&rw);
        Candidate {
            alpha,
            w,
            w_tilde,
            rw,
            rw_norm,
        }
    }
}

fn reflect(u_tilde: &EmbeddedPoint, u: &EmbeddedPoint) -> EmbeddedPoint {
    EmbeddedPoint::from_vec(
        u.n(),
        u_tilde
            .as_slice()
            .iter()
            .zip(u.as_slice())
            .map(|(t, v)| 2.0 * t - v)
            .collect(),
    )
}

/// `⟨Rw, u − Tw⟩ = ⟨Rw, u − w + Rw⟩`.
pub fn hyperplane_rho(u: &[f64], cand: &Candidate) -> f64 {
    let diff: Vec<f64> = u
        .iter()
        .zip(&cand.w)
        .zip(&cand.rw)
        .map(|((u, w), r)| u - w + r)
        .collect();
    dot(&cand.rw, &diff)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linsys::LinSysMode;
    use crate::problem::ConeSpec;
    use crate::sparse::CscMatrix;

    /// min x s.t. x ≥ 1
    fn lp_1d() -> ConicProblem {
        ConicProblem::new(
            CscMatrix::from_dense(&[vec![-1.0]]),
            vec![-1.0],
            vec![1.0],
            ConeSpec { l: 1, ..Default::default() },
        )
        .unwrap()
    }

    #[test]
    fn plain_drs_recovers_1d_optimum() {
        let p = lp_1d();
        let cache = LinSolveCache::init(&p, LinSysMode::Direct).unwrap();
        let op = Operator::new(&p, &cache);
        let mut b = op.evaluate(EmbeddedPoint::initial(1, 1)).unwrap();
        let mut iters = 0;
        while b.ru_norm > 1e-9 {
            let next = EmbeddedPoint::from_vec(1, b.tu());
            b = op.evaluate(next).unwrap();
            iters += 1;
            assert!(iters < 100_000, "DRS did not converge");
        }
        let x = b.u.chi()[0] / b.u.tau();
        assert!((x - 1.0).abs() < 1e-6, "x = {x}");
        // residual vanishes at the fixed point
        let again = op.evaluate(b.u.clone()).unwrap();
        assert!(again.ru_norm <= 1e-9 * (1.0 + norm(b.u.as_slice())));
    }

    #[test]
    fn zero_step_candidate_matches_bundle() {
        let p = lp_1d();
        let cache = LinSolveCache::init(&p, LinSysMode::Direct).unwrap();
        let op = Operator::new(&p, &cache);
        let b = op.evaluate(EmbeddedPoint::from_parts(&[0.3], &[-0.7], 0.9)).unwrap();
        let d = vec![1.0, 2.0, -1.0];
        let dt = op.solve_linear(&EmbeddedPoint::from_vec(1, d.clone())).unwrap();
        let before = op.counts();
        let c = op.candidate_residual(&b, dt.as_slice(), &d, 0.0);
        assert_eq!(op.counts().projections, before.projections + 1);
        assert_eq!(op.counts().linear_solves, before.linear_solves);
        for (x, y) in c.rw.iter().zip(&b.ru) {
            assert!((x - y).abs() <= 1e-15);
        }
    }
}
