//! Quasi-Newton direction engines for the fixed-point residual `R`.
//!
//! Both engines consume secant pairs `z = w − u`, `ξ = Rw − Ru` and return
//! `d ≈ −H Ru` for an implicitly maintained inverse-Jacobian estimate `H`.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};

use crate::linalg::{axpy, dot, norm};

/// Secant information from one trial point.
#[derive(Debug, Clone, PartialEq)]
pub struct SecantPair {
    pub z: Vec<f64>,
    pub xi: Vec<f64>,
}

impl SecantPair {
    pub fn new(z: Vec<f64>, xi: Vec<f64>) -> Self {
        debug_assert_eq!(z.len(), xi.len());
        Self { z, xi }
    }
}

/// Powell's modification parameter with `sgn(0) = 1`.
pub fn theta(gamma: f64, theta_bar: f64) -> f64 {
    if gamma.abs() >= theta_bar {
        1.0
    } else {
        let sgn = if gamma >= 0.0 { 1.0 } else { -1.0 };
        (1.0 - sgn * theta_bar) / (1.0 - gamma)
    }
}

/// What happened to the secant update on the last call.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpdateEvent {
    /// No pair was supplied.
    NoPair,
    Appended,
    /// Buffers were full; they were emptied and refilled with the new pair.
    Restarted,
    /// `⟨z, Hξ̃⟩` was too small; the update was skipped and `d = −Ru`.
    Breakdown,
}

/// Limited-memory restarted Broyden state.
///
/// Stores `H = (I + z̃ₖ zₖᵀ) ⋯ (I + z̃₁ z₁ᵀ)` through the buffers `Z`, `Z̃`.
#[derive(Debug, Clone, PartialEq)]
pub struct RbState {
    mem: usize,
    theta_bar: f64,
    z: Vec<Vec<f64>>,
    z_tilde: Vec<Vec<f64>>,
    last_gamma_theta: Option<f64>,
}

const BREAKDOWN_TOL: f64 = 1e-14;

impl RbState {
    pub fn new(mem: usize, theta_bar: f64) -> Self {
        assert!(mem >= 1, "memory must be positive");
        assert!(theta_bar > 0.0 && theta_bar < 1.0, "theta_bar must lie in (0, 1)");
        Self {
            mem,
            theta_bar,
            z: Vec::with_capacity(mem),
            z_tilde: Vec::with_capacity(mem),
            last_gamma_theta: None,
        }
    }

    /// Number of stored pairs (the cursor `m′`).
    pub fn cursor(&self) -> usize {
        self.z.len()
    }

    pub fn mem(&self) -> usize {
        self.mem
    }

    /// `γθ + (1 − θ)` from the last applied update.
    pub fn last_powell_factor(&self) -> Option<f64> {
        self.last_gamma_theta
    }

    /// Applies the stored operator `H` to `v`.
    pub fn apply_h(&self, v: &[f64]) -> Vec<f64> {
        let mut out = v.to_vec();
        for (zi, zti) in self.z.iter().zip(&self.z_tilde) {
            let c = dot(zi, &out);
            axpy(c, zti, &mut out);
        }
        out
    }

    /// Computes `d = −H⁺ Ru` after folding `pair` into `H`.
    pub fn direction(&mut self, pair: Option<&SecantPair>, ru: &[f64]) -> (Vec<f64>, UpdateEvent) {
        let mut d: Vec<f64> = ru.iter().map(|v| -v).collect();
        let Some(pair) = pair else {
            for (zi, zti) in self.z.iter().zip(&self.z_tilde) {
                let c = dot(zi, &d);
                axpy(c, zti, &mut d);
            }
            return (d, UpdateEvent::NoPair);
        };
        let z = &pair.z;
        let mut zt = pair.xi.clone();
        for (zi, zti) in self.z.iter().zip(&self.z_tilde) {
            let c = dot(zi, &zt);
            axpy(c, zti, &mut zt);
            let c = dot(zi, &d);
            axpy(c, zti, &mut d);
        }
        let zz = dot(z, z);
        if zz == 0.0 {
            return (ru.iter().map(|v| -v).collect(), UpdateEvent::Breakdown);
        }
        let gamma = dot(&zt, z) / zz;
        let th = theta(gamma, self.theta_bar);
        // z̃ ← (1 − θ) z + θ z̃  (= H ξ̃)
        for (t, zi) in zt.iter_mut().zip(z) {
            *t = (1.0 - th) * zi + th * *t;
        }
        let denom = dot(z, &zt);
        if denom.abs() < BREAKDOWN_TOL * norm(z) * norm(&zt) || denom == 0.0 {
            return (ru.iter().map(|v| -v).collect(), UpdateEvent::Breakdown);
        }
        // z̃ ← (z − z̃) / ⟨z, z̃⟩
        for (t, zi) in zt.iter_mut().zip(z) {
            *t = (zi - *t) / denom;
        }
        let c = dot(z, &d);
        axpy(c, &zt, &mut d);
        self.last_gamma_theta = Some(gamma * th + (1.0 - th));

        let event = if self.z.len() == self.mem {
            self.z.clear();
            self.z_tilde.clear();
            UpdateEvent::Restarted
        } else {
            UpdateEvent::Appended
        };
        self.z.push(z.clone());
        self.z_tilde.push(zt);
        (d, event)
    }
}

/// Anderson acceleration state: the most recent `mem` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct AaState {
    mem: usize,
    z: VecDeque<Vec<f64>>,
    xi: VecDeque<Vec<f64>>,
    last_t: Vec<f64>,
}

/// Relative singular-value cutoff for the minimum-norm fallback.
const AA_RCOND: f64 = 1e-12;

impl AaState {
    pub fn new(mem: usize) -> Self {
        assert!(mem >= 1, "memory must be positive");
        Self {
            mem,
            z: VecDeque::with_capacity(mem),
            xi: VecDeque::with_capacity(mem),
            last_t: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    pub fn mem(&self) -> usize {
        self.mem
    }

    /// Least-squares coefficients from the last call.
    pub fn coefficients(&self) -> &[f64] {
        &self.last_t
    }

    /// Pushes `pair` (evicting the oldest when full) and returns
    /// `d = −Ru − (Z − Ξ) t` with `t = argmin ‖Ξt − Ru‖`.
    pub fn direction(&mut self, pair: Option<&SecantPair>, ru: &[f64]) -> Vec<f64> {
        if let Some(p) = pair {
            if self.z.len() == self.mem {
                self.z.pop_front();
                self.xi.pop_front();
            }
            self.z.push_back(p.z.clone());
            self.xi.push_back(p.xi.clone());
        }
        let mut d: Vec<f64> = ru.iter().map(|v| -v).collect();
        if self.z.is_empty() {
            self.last_t.clear();
            return d;
        }
        let cols: Vec<&[f64]> = self.xi.iter().map(Vec::as_slice).collect();
        let t = least_squares(&cols, ru);
        for ((zi, xii), &ti) in self.z.iter().zip(&self.xi).zip(&t) {
            for ((dk, zk), xk) in d.iter_mut().zip(zi).zip(xii) {
                *dk -= ti * (zk - xk);
            }
        }
        self.last_t = t;
        d
    }
}

/// Minimizes `‖X t − r‖` for the matrix with the given columns. Uses a QR
/// factorization, falling back to a truncated SVD minimum-norm solution when
/// `R` is numerically singular.
pub fn least_squares(cols: &[&[f64]], r: &[f64]) -> Vec<f64> {
    let k = cols.len();
    let n = r.len();
    let x = DMatrix::from_fn(n, k, |i, j| cols[j][i]);
    let rhs = DVector::from_column_slice(r);
    if n >= k {
        let qr = x.clone().qr();
        let rmat = qr.r();
        let diag_max = (0..k).map(|i| rmat[(i, i)].abs()).fold(0.0, f64::max);
        let well_posed = diag_max > 0.0 && (0..k).all(|i| rmat[(i, i)].abs() > AA_RCOND * diag_max * 1e2);
        if well_posed {
            let qtr = qr.q().transpose() * &rhs;
            if let Some(t) = rmat.solve_upper_triangular(&qtr) {
                if t.iter().all(|v| v.is_finite()) {
                    return t.iter().copied().collect();
                }
            }
        }
    }
    let svd = x.svd(true, true);
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    match svd.solve(&rhs, smax * AA_RCOND) {
        Ok(t) => t.iter().copied().collect(),
        Err(_) => vec![0.0; k],
    }
}

/// Direction strategy selected for a solve.
#[derive(Debug, Clone, PartialEq)]
pub enum DirectionEngine {
    /// Plain residual step `d = −Ru`.
    Residual,
    Broyden(RbState),
    Anderson(AaState),
}

impl DirectionEngine {
    pub fn direction(&mut self, pair: Option<&SecantPair>, ru: &[f64]) -> Vec<f64> {
        match self {
            DirectionEngine::Residual => ru.iter().map(|v| -v).collect(),
            DirectionEngine::Broyden(s) => s.direction(pair, ru).0,
            DirectionEngine::Anderson(s) => s.direction(pair, ru),
        }
    }
}
