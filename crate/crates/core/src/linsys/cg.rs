//! Matrix-free conjugate gradient for `(I + AᵀA) z = r`.

use crate::linalg::{axpy, dot, norm};
use crate::sparse::CscMatrix;

#[derive(Debug, Clone, Copy)]
pub struct CgReport {
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

fn apply_normal(a: &CscMatrix, x: &[f64], tmp: &mut [f64], out: &mut [f64]) {
    tmp.fill(0.0);
    a.gemv(1.0, x, tmp);
    out.copy_from_slice(x);
    a.gemv_t(1.0, tmp, out);
}

/// Solves `(I + AᵀA) x = rhs` starting from the contents of `x`. Stops once
/// `‖rhs − (I + AᵀA)x‖ ≤ tol·(1 + ‖rhs‖)`.
pub fn solve_normal(a: &CscMatrix, rhs: &[f64], x: &mut [f64], tol: f64, max_iters: usize) -> CgReport {
    let n = rhs.len();
    let mut tmp = vec![0.0; a.nrows];
    let mut ap = vec![0.0; n];
    apply_normal(a, x, &mut tmp, &mut ap);
    let mut r: Vec<f64> = rhs.iter().zip(&ap).map(|(b, v)| b - v).collect();
    let threshold = tol * (1.0 + norm(rhs));
    let mut rr = dot(&r, &r);
    if rr.sqrt() <= threshold {
        return CgReport {
            iterations: 0,
            residual: rr.sqrt(),
            converged: true,
        };
    }
    let mut p = r.clone();
    for it in 1..=max_iters {
        apply_normal(a, &p, &mut tmp, &mut ap);
        let alpha = rr / dot(&p, &ap);
        axpy(alpha, &p, x);
        axpy(-alpha, &ap, &mut r);
        let rr_new = dot(&r, &r);
        if rr_new.sqrt() <= threshold {
            return CgReport {
                iterations: it,
                residual: rr_new.sqrt(),
                converged: true,
            };
        }
        let beta = rr_new / rr;
        for (pi, ri) in p.iter_mut().zip(&r) {
            *pi = ri + beta * *pi;
        }
        rr = rr_new;
    }
    CgReport {
        iterations: max_iters,
        residual: rr.sqrt(),
        converged: false,
    }
}
