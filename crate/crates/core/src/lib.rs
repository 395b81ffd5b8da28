//! First-order solver for convex conic programs.
//!
//! The solver applies Douglas–Rachford splitting to the homogeneous
//! self-dual embedding of
//!
//! ```text
//! minimize ⟨c, x⟩  subject to  b − A x = s,  s ∈ K
//! ```
//!
//! and accelerates the resulting fixed-point iteration with the SuperMann
//! scheme, driven by restarted Broyden or Anderson directions. A plain
//! Krasnosel'skii–Mann mode serves as the unaccelerated baseline.
//!
//! ```
//! use superscs::{ConeSpec, ConicProblem, CscMatrix, SolverParams, Status};
//!
//! // minimize x subject to x ≥ 1
//! let p = ConicProblem::new(
//!     CscMatrix::from_dense(&[vec![-1.0]]),
//!     vec![-1.0],
//!     vec![1.0],
//!     ConeSpec { l: 1, ..Default::default() },
//! )
//! .unwrap();
//! let out = superscs::solve(&p, &SolverParams::anderson(5), None).unwrap();
//! assert_eq!(out.status, Status::Solved);
//! assert!((out.x().unwrap()[0] - 1.0).abs() < 1e-4);
//! ```

pub mod bench;
pub mod cones;
pub mod directions;
pub mod linalg;
pub mod linsys;
pub mod operator;
pub mod problem;
pub mod sparse;
pub mod supermann;
pub mod termination;

pub use cones::{project_cone, project_dual_cone, project_embedding, smat, svec, ConeError, ConeKind};
pub use directions::{theta, AaState, RbState, SecantPair};
pub use linsys::{LinSolveCache, LinSysError, LinSysMode};
pub use operator::{Candidate, IterateBundle, Operator};
pub use problem::{ConeSpec, ConicProblem, EmbeddedPoint, PrimalDualTriple, ProblemError};
pub use sparse::CscMatrix;
pub use supermann::{
    km_solve, solve, solve_with_progress, DirectionKind, IterationRecord, Solution, SolveOutcome, SolverError,
    SolverParams, SolverStats, Status, StepKind,
};
pub use termination::{Classification, Metrics};
