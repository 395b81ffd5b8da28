//! Conic problem data, the embedded iterate, and the skew-symmetric embedding
//! operator `Q`.
//!
//! A problem is
//!
//! ```text
//! minimize ⟨c, x⟩  subject to  b − A x = s,  s ∈ K
//! ```
//!
//! with `K` a product of cones stacked in the fixed order zero, nonnegative,
//! second-order, PSD, primal exponential, dual exponential.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cones::ConeKind;
use crate::linalg::dot;
use crate::sparse::CscMatrix;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProblemError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("non-finite data in {0}")]
    NonFiniteData(&'static str),
    #[error("empty problem (n = {n}, m = {m})")]
    EmptyProblem { n: usize, m: usize },
    #[error("invalid cone specification: {0}")]
    InvalidCone(String),
    #[error("malformed constraint matrix: {0}")]
    MalformedMatrix(String),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
}

/// Cone specification. Rows of `A` are assigned to cones in field order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConeSpec {
    /// Zero cone rows.
    #[serde(default)]
    pub f: usize,
    /// Nonnegative orthant rows.
    #[serde(default)]
    pub l: usize,
    /// Second-order cone sizes. Each block is stored as `(x, t)` with `t` last.
    #[serde(default)]
    pub q: Vec<usize>,
    /// PSD cone orders; order `d` occupies `d(d+1)/2` rows.
    #[serde(default)]
    pub s: Vec<usize>,
    /// Primal exponential cones, three rows each.
    #[serde(default)]
    pub ep: usize,
    /// Dual exponential cones, three rows each.
    #[serde(default)]
    pub ed: usize,
}

impl ConeSpec {
    pub fn total_rows(&self) -> usize {
        self.f
            + self.l
            + self.q.iter().sum::<usize>()
            + self.s.iter().map(|d| d * (d + 1) / 2).sum::<usize>()
            + 3 * self.ep
            + 3 * self.ed
    }

    pub fn check(&self) -> Result<(), ProblemError> {
        if let Some(&0) = self.q.iter().find(|&&k| k == 0) {
            return Err(ProblemError::InvalidCone("second-order cone of size 0".into()));
        }
        if self.s.iter().any(|&d| d == 0) {
            return Err(ProblemError::InvalidCone("PSD cone of order 0".into()));
        }
        Ok(())
    }

    /// The cone blocks in canonical order as `(kind, row offset)`.
    /// Zero and nonnegative rows form one block each.
    pub fn blocks(&self) -> Vec<(ConeKind, usize)> {
        let mut out = Vec::new();
        let mut off = 0;
        if self.f > 0 {
            out.push((ConeKind::Zero(self.f), off));
            off += self.f;
        }
        if self.l > 0 {
            out.push((ConeKind::Nonneg(self.l), off));
            off += self.l;
        }
        for &k in &self.q {
            out.push((ConeKind::SecondOrder(k), off));
            off += k;
        }
        for &d in &self.s {
            out.push((ConeKind::Psd(d), off));
            off += d * (d + 1) / 2;
        }
        for _ in 0..self.ep {
            out.push((ConeKind::ExpPrimal, off));
            off += 3;
        }
        for _ in 0..self.ed {
            out.push((ConeKind::ExpDual, off));
            off += 3;
        }
        out
    }
}

/// A conic program in standard form. Immutable once validated.
#[derive(Debug, Clone, PartialEq)]
pub struct ConicProblem {
    pub a: CscMatrix,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub cones: ConeSpec,
}

impl ConicProblem {
    /// Assembles and validates a problem.
    pub fn new(a: CscMatrix, b: Vec<f64>, c: Vec<f64>, cones: ConeSpec) -> Result<Self, ProblemError> {
        Self { a, b, c, cones }.validate()
    }

    pub fn n(&self) -> usize {
        self.c.len()
    }

    pub fn m(&self) -> usize {
        self.b.len()
    }

    /// Length of the embedded iterate `(χ, ψ, τ)`.
    pub fn embedded_dim(&self) -> usize {
        self.n() + self.m() + 1
    }

    /// Returns the problem unchanged if every invariant holds.
    pub fn validate(self) -> Result<Self, ProblemError> {
        let (n, m) = (self.c.len(), self.b.len());
        if n == 0 || m == 0 {
            return Err(ProblemError::EmptyProblem { n, m });
        }
        self.cones.check()?;
        let rows = self.cones.total_rows();
        if rows != m {
            return Err(ProblemError::DimensionMismatch(format!(
                "cones cover {rows} rows but m = {m}"
            )));
        }
        if self.a.nrows != m || self.a.ncols != n {
            return Err(ProblemError::DimensionMismatch(format!(
                "A is {}x{}, expected {m}x{n}",
                self.a.nrows, self.a.ncols
            )));
        }
        self.a.check_structure().map_err(ProblemError::MalformedMatrix)?;
        if !self.a.vals.iter().all(|v| v.is_finite()) {
            return Err(ProblemError::NonFiniteData("A"));
        }
        if !self.b.iter().all(|v| v.is_finite()) {
            return Err(ProblemError::NonFiniteData("b"));
        }
        if !self.c.iter().all(|v| v.is_finite()) {
            return Err(ProblemError::NonFiniteData("c"));
        }
        Ok(self)
    }

    /// Matrix-free product `Q u` with
    ///
    /// ```text
    ///     [  0   Aᵀ  c ]
    /// Q = [ -A   0   b ]
    ///     [ -cᵀ -bᵀ  0 ]
    /// ```
    pub fn apply_q(&self, u: &EmbeddedPoint) -> Vec<f64> {
        assert_eq!(u.n(), self.n(), "embedded point has wrong χ length");
        assert_eq!(u.m(), self.m(), "embedded point has wrong ψ length");
        let (n, m) = (self.n(), self.m());
        let (chi, psi, tau) = (u.chi(), u.psi(), u.tau());
        let mut out = vec![0.0; n + m + 1];
        {
            let (top, rest) = out.split_at_mut(n);
            let mid = &mut rest[..m];
            self.a.gemv_t(1.0, psi, top);
            for (t, ci) in top.iter_mut().zip(&self.c) {
                *t += ci * tau;
            }
            self.a.gemv(-1.0, chi, mid);
            for (s, bi) in mid.iter_mut().zip(&self.b) {
                *s += bi * tau;
            }
        }
        out[n + m] = -dot(&self.c, chi) - dot(&self.b, psi);
        out
    }

    /// Objective `⟨c, x⟩`.
    pub fn objective(&self, x: &[f64]) -> f64 {
        dot(&self.c, x)
    }

    pub fn from_json(text: &str) -> Result<Self, ProblemError> {
        let file: ProblemFile = serde_json::from_str(text).map_err(|e| ProblemError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        file.into_problem()
    }

    pub fn load(bytes: &[u8]) -> Result<Self, ProblemError> {
        let text = std::str::from_utf8(bytes).map_err(|e| ProblemError::Parse {
            line: 0,
            column: 0,
            message: format!("invalid UTF-8: {e}"),
        })?;
        Self::from_json(text)
    }

    /// Serializes to the JSON problem format. Floats use the shortest
    /// decimal representation that round-trips.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&ProblemFile::from(self)).expect("problem data is always serializable")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(&ProblemFile::from(self)).expect("problem data is always serializable")
    }
}

/// On-disk layout of a problem document.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemFile {
    n: usize,
    m: usize,
    #[serde(rename = "A")]
    a: MatrixFile,
    b: Vec<f64>,
    c: Vec<f64>,
    cones: ConeSpec,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixFile {
    colptr: Vec<usize>,
    rowind: Vec<usize>,
    vals: Vec<f64>,
}

impl ProblemFile {
    fn into_problem(self) -> Result<ConicProblem, ProblemError> {
        if self.b.len() != self.m {
            return Err(ProblemError::DimensionMismatch(format!(
                "b has length {}, m = {}",
                self.b.len(),
                self.m
            )));
        }
        if self.c.len() != self.n {
            return Err(ProblemError::DimensionMismatch(format!(
                "c has length {}, n = {}",
                self.c.len(),
                self.n
            )));
        }
        let a = CscMatrix {
            nrows: self.m,
            ncols: self.n,
            colptr: self.a.colptr,
            rowind: self.a.rowind,
            vals: self.a.vals,
        };
        ConicProblem {
            a,
            b: self.b,
            c: self.c,
            cones: self.cones,
        }
        .validate()
    }
}

impl From<&ConicProblem> for ProblemFile {
    fn from(p: &ConicProblem) -> Self {
        Self {
            n: p.n(),
            m: p.m(),
            a: MatrixFile {
                colptr: p.a.colptr.clone(),
                rowind: p.a.rowind.clone(),
                vals: p.a.vals.clone(),
            },
            b: p.b.clone(),
            c: p.c.clone(),
            cones: p.cones.clone(),
        }
    }
}

/// Iterate `u = (χ, ψ, τ)` of the homogeneous self-dual embedding, stored
/// contiguously.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedPoint {
    n: usize,
    data: Vec<f64>,
}

impl EmbeddedPoint {
    pub fn zeros(n: usize, m: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n + m + 1],
        }
    }

    /// The default starting point `(0, 0, 1)`.
    pub fn initial(n: usize, m: usize) -> Self {
        let mut u = Self::zeros(n, m);
        u.data[n + m] = 1.0;
        u
    }

    pub fn from_parts(chi: &[f64], psi: &[f64], tau: f64) -> Self {
        let mut data = Vec::with_capacity(chi.len() + psi.len() + 1);
        data.extend_from_slice(chi);
        data.extend_from_slice(psi);
        data.push(tau);
        Self { n: chi.len(), data }
    }

    pub fn from_vec(n: usize, data: Vec<f64>) -> Self {
        assert!(data.len() > n, "embedded vector too short");
        Self { n, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.data.len() - self.n - 1
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn chi(&self) -> &[f64] {
        &self.data[..self.n]
    }

    pub fn psi(&self) -> &[f64] {
        &self.data[self.n..self.data.len() - 1]
    }

    pub fn psi_mut(&mut self) -> &mut [f64] {
        let end = self.data.len() - 1;
        &mut self.data[self.n..end]
    }

    pub fn tau(&self) -> f64 {
        self.data[self.data.len() - 1]
    }

    pub fn set_tau(&mut self, tau: f64) {
        let last = self.data.len() - 1;
        self.data[last] = tau;
    }

    /// The stacked `(χ, ψ)` part.
    pub fn xy(&self) -> &[f64] {
        &self.data[..self.data.len() - 1]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Primal-dual triple `(x, y, s)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrimalDualTriple {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub s: Vec<f64>,
}
