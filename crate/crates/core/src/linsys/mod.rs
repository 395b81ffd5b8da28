//! Solves `(I + Q) ũ = u` for the embedding operator `Q`.
//!
//! Write `I + Q = [[M, h], [−hᵀ, 1]]` with `M = [[I, Aᵀ], [−A, I]]` and
//! `h = (c, b)`. Eliminating the last row gives `(M + hhᵀ) p = u_xy − u_τ h`,
//! which the Sherman–Morrison formula reduces to solves with `M` plus the
//! cached vector `g = M⁻¹h`:
//!
//! ```text
//! q = M⁻¹(u_xy − u_τ h)
//! p = q − g ⟨h, q⟩ / (1 + ⟨h, g⟩)
//! τ̃ = u_τ + ⟨h, p⟩
//! ```
//!
//! Solves with `M` go either through an LDLᵀ factorization of the
//! quasi-definite `K = [[I, Aᵀ], [A, −I]]` (direct) or through conjugate
//! gradient on `(I + AᵀA) z₁ = r₁ − Aᵀr₂` (indirect).

mod cg;
mod ldl;
mod ordering;

pub use cg::CgReport;
pub use ldl::{LdlFactor, UpperCsc};
pub use ordering::minimum_degree;

use thiserror::Error;

use crate::linalg::{axpy, dot};
use crate::problem::{ConicProblem, EmbeddedPoint};
use crate::sparse::CscMatrix;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinSysError {
    #[error("factorization failed: {0}")]
    FactorizationFailure(String),
    #[error("conjugate gradient hit {iterations} iterations (residual {residual:.3e})")]
    CgMaxIterations {
        best: Vec<f64>,
        residual: f64,
        iterations: usize,
    },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

impl LinSysError {
    /// The best available iterate, if the error carries one.
    pub fn into_best(self) -> Option<Vec<f64>> {
        match self {
            LinSysError::CgMaxIterations { best, .. } => Some(best),
            _ => None,
        }
    }
}

/// Linear-system strategy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LinSysMode {
    Direct,
    /// Conjugate gradient with tolerance schedule
    /// `tol_ν = max(1e-9, cg_tol / (ν + 1)^1.5)`.
    Indirect { cg_tol: f64 },
}

impl Default for LinSysMode {
    fn default() -> Self {
        LinSysMode::Direct
    }
}

/// Tightest tolerance used by the indirect schedule.
pub const CG_TOL_FLOOR: f64 = 1e-9;
const CG_TOL_SETUP: f64 = 1e-12;

#[derive(Debug, Clone)]
enum Backend {
    Direct {
        factor: LdlFactor,
        /// `perm[k]` = original index placed at position `k`.
        perm: Vec<usize>,
    },
    Indirect {
        cg_tol: f64,
    },
}

/// Per-problem data for repeated solves with `I + Q`. Immutable after
/// [`LinSolveCache::init`].
#[derive(Debug, Clone)]
pub struct LinSolveCache {
    n: usize,
    m: usize,
    a: CscMatrix,
    backend: Backend,
    h: Vec<f64>,
    g: Vec<f64>,
    denom: f64,
    factorizations: usize,
}

impl LinSolveCache {
    pub fn init(problem: &ConicProblem, mode: LinSysMode) -> Result<Self, LinSysError> {
        let (n, m) = (problem.n(), problem.m());
        let backend = match mode {
            LinSysMode::Direct => {
                let (factor, perm) = factor_kkt(&problem.a)?;
                Backend::Direct { factor, perm }
            }
            LinSysMode::Indirect { cg_tol } => Backend::Indirect { cg_tol },
        };
        let factorizations = usize::from(matches!(backend, Backend::Direct { .. }));
        let mut cache = Self {
            n,
            m,
            a: problem.a.clone(),
            backend,
            h: problem.c.iter().chain(&problem.b).copied().collect(),
            g: Vec::new(),
            denom: 1.0,
            factorizations,
        };
        let h = cache.h.clone();
        let (g, _) = cache.solve_m_tol(&h, CG_TOL_SETUP, None).or_else(|e| match e {
            LinSysError::CgMaxIterations { best, residual, iterations } => Ok((
                best,
                CgReport {
                    iterations,
                    residual,
                    converged: false,
                },
            )),
            other => Err(other),
        })?;
        cache.denom = 1.0 + dot(&h, &g);
        cache.g = g;
        if !(cache.denom > 0.0) {
            return Err(LinSysError::FactorizationFailure(format!(
                "1 + <h, g> = {} is not positive",
                cache.denom
            )));
        }
        Ok(cache)
    }

    pub fn mode(&self) -> LinSysMode {
        match self.backend {
            Backend::Direct { .. } => LinSysMode::Direct,
            Backend::Indirect { cg_tol } => LinSysMode::Indirect { cg_tol },
        }
    }

    /// `g = M⁻¹ (c, b)`.
    pub fn g(&self) -> &[f64] {
        &self.g
    }

    /// `1 + ⟨h, g⟩`.
    pub fn denominator(&self) -> f64 {
        self.denom
    }

    /// Number of matrix factorizations performed (one in direct mode).
    pub fn factorizations(&self) -> usize {
        self.factorizations
    }

    /// Nonzeros in the `L` factor (direct mode).
    pub fn factor_nnz(&self) -> Option<usize> {
        match &self.backend {
            Backend::Direct { factor, .. } => Some(factor.nnz()),
            Backend::Indirect { .. } => None,
        }
    }

    /// CG tolerance for outer iteration `iter`; `None` in direct mode.
    pub fn cg_tolerance(&self, iter: usize) -> Option<f64> {
        match self.backend {
            Backend::Direct { .. } => None,
            Backend::Indirect { cg_tol } => Some(CG_TOL_FLOOR.max(cg_tol / ((iter + 1) as f64).powf(1.5))),
        }
    }

    /// Solves `M z = r`.
    pub fn solve_m(&self, r: &[f64]) -> Result<Vec<f64>, LinSysError> {
        self.solve_m_tol(r, CG_TOL_FLOOR, None).map(|(z, _)| z)
    }

    /// Solves `M z = r` with an explicit CG tolerance and optional warm start
    /// for the `z₁` block, which is overwritten with the new solution.
    pub fn solve_m_tol(
        &self,
        r: &[f64],
        tol: f64,
        warm: Option<&mut Vec<f64>>,
    ) -> Result<(Vec<f64>, CgReport), LinSysError> {
        let (n, m) = (self.n, self.m);
        if r.len() != n + m {
            return Err(LinSysError::DimensionMismatch {
                expected: n + m,
                got: r.len(),
            });
        }
        match &self.backend {
            Backend::Direct { factor, perm } => {
                let mut rhs: Vec<f64> = r.to_vec();
                rhs[n..].iter_mut().for_each(|v| *v = -*v);
                let mut permuted: Vec<f64> = perm.iter().map(|&p| rhs[p]).collect();
                factor.solve_in_place(&mut permuted);
                let mut z = vec![0.0; n + m];
                for (k, &p) in perm.iter().enumerate() {
                    z[p] = permuted[k];
                }
                Ok((
                    z,
                    CgReport {
                        iterations: 0,
                        residual: 0.0,
                        converged: true,
                    },
                ))
            }
            Backend::Indirect { .. } => {
                let (r1, r2) = r.split_at(n);
                let mut rhs = r1.to_vec();
                self.a.gemv_t(-1.0, r2, &mut rhs);
                let mut z1 = match &warm {
                    Some(w) if w.len() == n => w.to_vec(),
                    _ => vec![0.0; n],
                };
                let max_iters = 2 * n + 50;
                let report = cg::solve_normal(&self.a, &rhs, &mut z1, tol, max_iters);
                let mut z2 = r2.to_vec();
                self.a.gemv(1.0, &z1, &mut z2);
                if let Some(w) = warm {
                    w.clone_from(&z1);
                }
                z1.extend_from_slice(&z2);
                if report.converged {
                    Ok((z1, report))
                } else {
                    Err(LinSysError::CgMaxIterations {
                        best: z1,
                        residual: report.residual,
                        iterations: report.iterations,
                    })
                }
            }
        }
    }

    /// Solves `(I + Q) ũ = u`.
    pub fn solve(&self, u: &EmbeddedPoint) -> Result<EmbeddedPoint, LinSysError> {
        self.solve_tol(u, CG_TOL_FLOOR, None)
    }

    /// As [`solve`](Self::solve) with an explicit CG tolerance and warm start.
    /// On CG failure the error carries the best full-length iterate.
    pub fn solve_tol(
        &self,
        u: &EmbeddedPoint,
        tol: f64,
        warm: Option<&mut Vec<f64>>,
    ) -> Result<EmbeddedPoint, LinSysError> {
        if u.n() != self.n || u.m() != self.m {
            return Err(LinSysError::DimensionMismatch {
                expected: self.n + self.m + 1,
                got: u.len(),
            });
        }
        // p = q − τ̃ g with q = M⁻¹ u_xy and τ̃ = (u_τ + ⟨h, q⟩)/(1 + ⟨h, g⟩).
        let (q, failed) = match self.solve_m_tol(u.xy(), tol, warm) {
            Ok((q, _)) => (q, None),
            Err(LinSysError::CgMaxIterations { best, residual, iterations }) => (best, Some((residual, iterations))),
            Err(e) => return Err(e),
        };
        let tau_tilde = (u.tau() + dot(&self.h, &q)) / self.denom;
        let mut p = q;
        axpy(-tau_tilde, &self.g, &mut p);
        p.push(tau_tilde);
        match failed {
            None => Ok(EmbeddedPoint::from_vec(self.n, p)),
            Some((residual, iterations)) => Err(LinSysError::CgMaxIterations {
                best: p,
                residual,
                iterations,
            }),
        }
    }
}

/// Factors `K = [[I, Aᵀ], [A, −I]]` after a minimum-degree permutation.
fn factor_kkt(a: &CscMatrix) -> Result<(LdlFactor, Vec<usize>), LinSysError> {
    let (m, n) = (a.nrows, a.ncols);
    let dim = n + m;
    let mut adj = vec![Vec::new(); dim];
    for (i, j, _) in a.iter() {
        adj[j].push(n + i);
        adj[n + i].push(j);
    }
    let perm = minimum_degree(&adj);
    let iperm = ordering::invert(&perm);

    let mut trip = Vec::with_capacity(dim + a.nnz());
    for k in 0..n {
        let p = iperm[k];
        trip.push((p, p, 1.0));
    }
    for k in n..dim {
        let p = iperm[k];
        trip.push((p, p, -1.0));
    }
    for (i, j, v) in a.iter() {
        let (pi, pj) = (iperm[j], iperm[n + i]);
        trip.push((pi.min(pj), pi.max(pj), v));
    }
    let upper = UpperCsc::from_triplets(dim, trip);
    let factor = LdlFactor::factor(&upper)?;
    let (pos, neg) = factor.inertia();
    if pos != n || neg != m {
        return Err(LinSysError::FactorizationFailure(format!(
            "inertia ({pos}, {neg}) does not match quasi-definite structure ({n}, {m})"
        )));
    }
    Ok((factor, perm))
}
