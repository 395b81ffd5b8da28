//! Euclidean projections onto the supported cones, their duals, and the
//! embedding cone `C = Rⁿ × K* × R₊`.
//!
//! Conventions:
//! - second-order blocks are `(x, t)` with `t` last: `‖x‖ ≤ t`;
//! - PSD blocks hold the scaled lower-triangular vectorization of a symmetric
//!   matrix, column-major, off-diagonals multiplied by `√2`, so that
//!   `⟨svec(X), svec(Y)⟩ = trace(XY)`;
//! - the primal exponential cone is `cl{(x1, x2, x3) : x2 > 0, x2·exp(x3/x2) ≤ x1}`.

use nalgebra::DMatrix;
use thiserror::Error;

use crate::linalg::{norm, sym_eig};
use crate::problem::{ConeSpec, EmbeddedPoint};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConeError {
    #[error("dimension mismatch: cone expects {expected} entries, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("length {0} is not a triangular number")]
    NotTriangularLength(usize),
}

/// One cone block. Sizes are row counts except for `Psd`, which carries the
/// matrix order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConeKind {
    Zero(usize),
    Nonneg(usize),
    SecondOrder(usize),
    Psd(usize),
    ExpPrimal,
    ExpDual,
}

impl ConeKind {
    /// Number of rows occupied by the block.
    pub fn dim(&self) -> usize {
        match *self {
            ConeKind::Zero(k) | ConeKind::Nonneg(k) | ConeKind::SecondOrder(k) => k,
            ConeKind::Psd(d) => d * (d + 1) / 2,
            ConeKind::ExpPrimal | ConeKind::ExpDual => 3,
        }
    }

    pub fn is_self_dual(&self) -> bool {
        matches!(self, ConeKind::Nonneg(_) | ConeKind::SecondOrder(_) | ConeKind::Psd(_))
    }

    fn check(&self, len: usize) -> Result<(), ConeError> {
        if len != self.dim() {
            return Err(ConeError::DimensionMismatch {
                expected: self.dim(),
                got: len,
            });
        }
        Ok(())
    }
}

/// `Π_K(x)`.
pub fn project_cone(x: &[f64], kind: ConeKind) -> Result<Vec<f64>, ConeError> {
    kind.check(x.len())?;
    let mut out = x.to_vec();
    project_cone_in_place(&mut out, kind);
    Ok(out)
}

/// `Π_{K*}(x)`, via the Moreau identity `Π_{K*}(x) = x + Π_K(−x)`.
pub fn project_dual_cone(x: &[f64], kind: ConeKind) -> Result<Vec<f64>, ConeError> {
    kind.check(x.len())?;
    let mut out = x.to_vec();
    project_dual_cone_in_place(&mut out, kind);
    Ok(out)
}

pub(crate) fn project_cone_in_place(x: &mut [f64], kind: ConeKind) {
    match kind {
        ConeKind::Zero(_) => x.fill(0.0),
        ConeKind::Nonneg(_) => x.iter_mut().for_each(|v| *v = v.max(0.0)),
        ConeKind::SecondOrder(_) => project_soc(x),
        ConeKind::Psd(d) => project_psd(x, d),
        ConeKind::ExpPrimal => {
            let p = project_exp([x[0], x[1], x[2]]);
            x.copy_from_slice(&p);
        }
        ConeKind::ExpDual => {
            let p = project_exp([-x[0], -x[1], -x[2]]);
            for (xi, pi) in x.iter_mut().zip(p) {
                *xi += pi;
            }
        }
    }
}

pub(crate) fn project_dual_cone_in_place(x: &mut [f64], kind: ConeKind) {
    match kind {
        ConeKind::Zero(_) => {}
        ConeKind::ExpPrimal => project_cone_in_place(x, ConeKind::ExpDual),
        ConeKind::ExpDual => project_cone_in_place(x, ConeKind::ExpPrimal),
        _ => project_cone_in_place(x, kind),
    }
}

fn project_soc(x: &mut [f64]) {
    let k = x.len();
    let t = x[k - 1];
    let nx = norm(&x[..k - 1]);
    if nx <= t {
        return;
    }
    if nx <= -t {
        x.fill(0.0);
        return;
    }
    let alpha = 0.5 * (t + nx);
    let scale = alpha / nx;
    x[..k - 1].iter_mut().for_each(|v| *v *= scale);
    x[k - 1] = alpha;
}

fn project_psd(x: &mut [f64], d: usize) {
    if d == 1 {
        x[0] = x[0].max(0.0);
        return;
    }
    let m = smat_unchecked(x, d);
    let (vals, vecs) = sym_eig(&m);
    if vals.iter().all(|&l| l >= 0.0) {
        // Already PSD; re-vectorize the symmetrized matrix.
        x.copy_from_slice(&svec(&m));
        return;
    }
    let mut out = DMatrix::<f64>::zeros(d, d);
    for (i, &lam) in vals.iter().enumerate() {
        if lam > 0.0 {
            let v = vecs.column(i);
            out += lam * v * v.transpose();
        }
    }
    x.copy_from_slice(&svec(&out));
}

/// Order `d` with `d(d+1)/2 = len`, if it exists.
pub fn triangular_order(len: usize) -> Option<usize> {
    let d = (((8 * len + 1) as f64).sqrt() as usize).saturating_sub(1) / 2;
    (d.saturating_sub(1)..=d + 1).find(|&k| k * (k + 1) / 2 == len && k > 0)
}

/// Symmetric matrix from its scaled lower-triangular vectorization.
pub fn smat(x: &[f64]) -> Result<DMatrix<f64>, ConeError> {
    let d = triangular_order(x.len()).ok_or(ConeError::NotTriangularLength(x.len()))?;
    Ok(smat_unchecked(x, d))
}

fn smat_unchecked(x: &[f64], d: usize) -> DMatrix<f64> {
    let mut m = DMatrix::<f64>::zeros(d, d);
    let mut k = 0;
    for j in 0..d {
        m[(j, j)] = x[k];
        k += 1;
        for i in j + 1..d {
            let v = x[k] * std::f64::consts::FRAC_1_SQRT_2;
            m[(i, j)] = v;
            m[(j, i)] = v;
            k += 1;
        }
    }
    m
}

/// Scaled lower-triangular vectorization. Reads the lower triangle only.
pub fn svec(m: &DMatrix<f64>) -> Vec<f64> {
    let d = m.nrows();
    let mut out = Vec::with_capacity(d * (d + 1) / 2);
    for j in 0..d {
        out.push(m[(j, j)]);
        for i in j + 1..d {
            out.push(m[(i, j)] * std::f64::consts::SQRT_2);
        }
    }
    out
}

/// Projects `u = (χ, ψ, τ)` onto `Rⁿ × K* × R₊`.
pub fn project_embedding(u: &EmbeddedPoint, cones: &ConeSpec) -> Result<EmbeddedPoint, ConeError> {
    if u.m() != cones.total_rows() {
        return Err(ConeError::DimensionMismatch {
            expected: cones.total_rows(),
            got: u.m(),
        });
    }
    let mut out = u.clone();
    project_embedding_in_place(&mut out, &cones.blocks());
    Ok(out)
}

pub(crate) fn project_embedding_in_place(u: &mut EmbeddedPoint, blocks: &[(ConeKind, usize)]) {
    let psi = u.psi_mut();
    for &(kind, off) in blocks {
        project_dual_cone_in_place(&mut psi[off..off + kind.dim()], kind);
    }
    let tau = u.tau().max(0.0);
    u.set_tau(tau);
}

const EXP_MAX_ITERS: usize = 2200;
/// Limit for growing an open end of the root bracket.
const RHO_CAP: f64 = 1e6;

/// Which end of the root bracket, if any, zeroes a multiplier.
#[derive(Clone, Copy, PartialEq)]
enum Vanish {
    Lo,
    Hi,
    Neither,
}

/// Projection onto the primal exponential cone.
///
/// Outside the analytic regions the projection is `s·(e^ρ, 1, ρ)` on the
/// curved boundary, where `ρ` is the unique root of
///
/// ```text
/// a(ρ)e^ρ − b(ρ)e^{−ρ} − (ρ² − ρ + 1)t₀,   a = (ρ−1)r₀ + s₀,   b = r₀ − ρs₀
/// ```
///
/// on the interval where both multipliers `a` and `b` are positive. The root
/// is bracketed, then bisected in the distance from the nearer bracket end so
/// that a multiplier vanishing at that end keeps full relative precision.
fn project_exp(v: [f64; 3]) -> [f64; 3] {
    // Work with (r, s, t) = (x3, x2, x1): cone is s·exp(r/s) ≤ t.
    let (t0, s0, r0) = (v[0], v[1], v[2]);

    if (s0 > 0.0 && s0 * (r0 / s0).exp() <= t0) || (r0 <= 0.0 && s0 == 0.0 && t0 >= 0.0) {
        return v;
    }
    // Polar cone.
    if (r0 > 0.0 && r0 * (s0 / r0).exp() <= -std::f64::consts::E * t0) || (r0 == 0.0 && s0 <= 0.0 && t0 <= 0.0) {
        return [0.0; 3];
    }
    if r0 <= 0.0 && s0 <= 0.0 {
        return [t0.max(0.0), 0.0, r0];
    }

    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    let (mut a_end, mut b_end) = (Vanish::Neither, Vanish::Neither);
    if r0 > 0.0 {
        lo = 1.0 - s0 / r0;
        a_end = Vanish::Lo;
    } else if r0 < 0.0 {
        hi = 1.0 - s0 / r0;
        a_end = Vanish::Hi;
    }
    if s0 > 0.0 && r0 / s0 < hi {
        hi = r0 / s0;
        b_end = Vanish::Hi;
        if a_end == Vanish::Hi {
            a_end = Vanish::Neither;
        }
    } else if s0 < 0.0 && r0 / s0 > lo {
        lo = r0 / s0;
        b_end = Vanish::Lo;
        if a_end == Vanish::Lo {
            a_end = Vanish::Neither;
        }
    }

    // Multipliers and the rescaled root function at the point `delta` away
    // from one end of [lo, hi].
    let eval = |delta: f64, from_lo: bool, lo: f64, hi: f64| -> (f64, f64, f64) {
        let rho = if from_lo { lo + delta } else { hi - delta };
        let (d_lo, d_hi) = if from_lo {
            (delta, (hi - lo) - delta)
        } else {
            ((hi - lo) - delta, delta)
        };
        let a = match a_end {
            Vanish::Lo => r0 * d_lo,
            Vanish::Hi => -r0 * d_hi,
            Vanish::Neither => (rho - 1.0) * r0 + s0,
        };
        let b = match b_end {
            Vanish::Lo => -s0 * d_lo,
            Vanish::Hi => s0 * d_hi,
            Vanish::Neither => r0 - rho * s0,
        };
        let c = (rho * rho - rho + 1.0) * t0;
        let e = (-rho.abs()).exp();
        let f = if rho >= 0.0 { a - b * e * e - c * e } else { a * e * e - b - c * e };
        (rho, a, f)
    };
    let sign_at = |rho: f64| {
        let (a, b) = ((rho - 1.0) * r0 + s0, r0 - rho * s0);
        let c = (rho * rho - rho + 1.0) * t0;
        let e = (-rho.abs()).exp();
        if rho >= 0.0 {
            a - b * e * e - c * e
        } else {
            a * e * e - b - c * e
        }
    };

    if lo == f64::NEG_INFINITY {
        let mut step = 1.0;
        lo = hi - step;
        while sign_at(lo) > 0.0 && lo > -RHO_CAP {
            step *= 2.0;
            lo = (hi - step).max(-RHO_CAP);
        }
    }
    if hi == f64::INFINITY {
        let mut step = 1.0;
        hi = lo + step;
        while sign_at(hi) < 0.0 && hi < RHO_CAP {
            step *= 2.0;
            hi = (lo + step).min(RHO_CAP);
        }
    }

    // Near the edge {s = 0} the boundary point competes against the nearest
    // point of that edge.
    let edge = [t0.max(0.0), 0.0, r0.min(0.0)];
    let dist = |q: &[f64; 3]| (q[0] - t0).powi(2) + (q[1] - s0).powi(2) + (q[2] - r0).powi(2);
    let closer = |rho: f64, a: f64| {
        let p = exp_boundary_point(rho, a);
        if dist(&p) <= dist(&edge) {
            p
        } else {
            edge
        }
    };
    if lo >= hi {
        let rho = 0.5 * (lo + hi);
        return closer(rho, ((rho - 1.0) * r0 + s0).max(0.0));
    }

    let width = hi - lo;
    let from_lo = eval(0.5 * width, true, lo, hi).2 >= 0.0;
    // f < 0 toward lo, f > 0 toward hi.
    let (mut near, mut far) = (0.0, 0.5 * width);
    for _ in 0..EXP_MAX_ITERS {
        let mid = 0.5 * (near + far);
        if mid <= near || mid >= far {
            break;
        }
        let f = eval(mid, from_lo, lo, hi).2;
        let toward_near = if from_lo { f >= 0.0 } else { f < 0.0 };
        if toward_near {
            far = mid;
        } else {
            near = mid;
        }
    }
    let (rho, a, _) = eval(0.5 * (near + far), from_lo, lo, hi);
    closer(rho, a.max(0.0))
}

/// `s·(e^ρ, 1, ρ)` in `(x1, x2, x3)` order with `s = a/(ρ² − ρ + 1)`.
fn exp_boundary_point(rho: f64, a: f64) -> [f64; 3] {
    let s = a / (rho * rho - rho + 1.0);
    let t = if s > 0.0 { (s.ln() + rho).exp() } else { 0.0 };
    [t, s, s * rho]
}
