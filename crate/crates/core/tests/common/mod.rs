//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use rand_distr::{Distribution, StandardNormal, StandardUniform};
use rand_pcg::Pcg64;
use rand_pcg::rand_core::SeedableRng;
use superscs::{ConeSpec, ConicProblem, CscMatrix};

pub struct TestRng(Pcg64);

impl TestRng {
    pub fn new(seed: u64) -> Self {
        TestRng(Pcg64::seed_from_u64(seed))
    }

    pub fn normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.0)
    }

    pub fn uniform(&mut self) -> f64 {
        StandardUniform.sample(&mut self.0)
    }

    pub fn below(&mut self, k: usize) -> usize {
        ((self.uniform() * k as f64) as usize).min(k - 1)
    }

    pub fn vec(&mut self, len: usize, scale: f64) -> Vec<f64> {
        (0..len).map(|_| scale * self.normal()).collect()
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub type Dense = Vec<Vec<f64>>;

pub fn matvec(a: &Dense, x: &[f64]) -> Vec<f64> {
    a.iter().map(|row| dot(row, x)).collect()
}

pub fn transpose(a: &Dense) -> Dense {
    let cols = a.first().map_or(0, Vec::len);
    (0..cols).map(|j| a.iter().map(|r| r[j]).collect()).collect()
}

/// Gaussian elimination with partial pivoting. `None` if singular.
pub fn gauss_solve(a: &Dense, b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut m: Dense = a.iter().zip(b).map(|(r, &v)| r.iter().copied().chain([v]).collect()).collect();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| m[i][k].abs().total_cmp(&m[j][k].abs()))?;
        if m[p][k].abs() < 1e-13 {
            return None;
        }
        m.swap(k, p);
        for i in k + 1..n {
            let f = m[i][k] / m[k][k];
            for j in k..=n {
                m[i][j] -= f * m[k][j];
            }
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| m[k][j] * x[j]).sum();
        x[k] = (m[k][n] - s) / m[k][k];
    }
    Some(x)
}

/// Cyclic Jacobi eigenvalues of a symmetric matrix, ascending.
pub fn jacobi_eigenvalues(a: &Dense) -> Vec<f64> {
    let n = a.len();
    let mut m = a.clone();
    for _ in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| m[i][j] * m[i][j]).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[p][q].abs() < 1e-300 {
                    continue;
                }
                let th = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = th.signum() / (th.abs() + (th * th + 1.0).sqrt());
                let t = if th == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[k][p], m[k][q]);
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[p][k], m[q][k]);
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| m[i][i]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Symmetric matrix from the scaled lower-triangular column-major packing.
pub fn unpack_sym(x: &[f64], d: usize) -> Dense {
    let mut m = vec![vec![0.0; d]; d];
    let mut k = 0;
    for j in 0..d {
        for i in j..d {
            let v = if i == j { x[k] } else { x[k] / 2f64.sqrt() };
            m[i][j] = v;
            m[j][i] = v;
            k += 1;
        }
    }
    m
}

/// Membership up to distance `√3·tol`, written from the cone definitions in
/// perspective form: the point shifted by `tol·(1, 1, −1)`, an interior
/// direction of both cones, must satisfy the defining inequality.
/// Exponential cones use the `x₁ ≥ x₂ exp(x₃/x₂)` ordering.
pub fn in_exp_primal(x: &[f64], tol: f64) -> bool {
    let (a, b, c) = (x[0] + tol, x[1] + tol, x[2] - tol);
    a > 0.0 && b > 0.0 && b * (a / b).ln() >= c
}

pub fn in_exp_dual(x: &[f64], tol: f64) -> bool {
    let (u, v, w) = (x[0] + tol, x[1] + tol, x[2] - tol);
    u > 0.0 && w < 0.0 && v >= w * (1.0 + (u / -w).ln())
}

pub fn in_soc(x: &[f64], tol: f64) -> bool {
    let (head, t) = x.split_at(x.len() - 1);
    norm(head) <= t[0] + tol
}

pub fn lp(a: &Dense, b: Vec<f64>, c: Vec<f64>, cones: ConeSpec) -> ConicProblem {
    ConicProblem::new(CscMatrix::from_dense(a), b, c, cones).unwrap()
}

pub fn lp_1d() -> ConicProblem {
    lp(&vec![vec![-1.0]], vec![-1.0], vec![1.0], ConeSpec { l: 1, ..Default::default() })
}

/// Random sparse problem with the given cones; `density` of nonzeros.
pub fn random_problem(rng: &mut TestRng, n: usize, cones: ConeSpec, density: f64) -> ConicProblem {
    let m = cones.total_rows();
    let mut trip = Vec::new();
    for j in 0..n {
        for i in 0..m {
            if rng.uniform() < density {
                trip.push((i, j, rng.normal()));
            }
        }
    }
    let a = CscMatrix::from_triplets(m, n, &trip);
    ConicProblem::new(a, rng.vec(m, 1.0), rng.vec(n, 1.0), cones).unwrap()
}

/// Minimum of `cᵀx` over `{x : G x ≤ h}` by enumerating every basis of
/// `dim` active constraints.
pub fn vertex_enumeration_lp(g: &Dense, h: &[f64], c: &[f64]) -> Option<f64> {
    let dim = c.len();
    let rows = g.len();
    let mut best: Option<f64> = None;
    let mut idx: Vec<usize> = (0..dim).collect();
    loop {
        let sub: Dense = idx.iter().map(|&i| g[i].clone()).collect();
        let rhs: Vec<f64> = idx.iter().map(|&i| h[i]).collect();
        if let Some(x) = gauss_solve(&sub, &rhs) {
            if g.iter().zip(h).all(|(r, &hi)| dot(r, &x) <= hi + 1e-9) {
                let v = dot(c, &x);
                best = Some(best.map_or(v, |b: f64| b.min(v)));
            }
        }
        let mut k = dim;
        loop {
            if k == 0 {
                return best;
            }
            k -= 1;
            if idx[k] < rows - dim + k {
                break;
            }
        }
        idx[k] += 1;
        for j in k + 1..dim {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// `½‖Ax − b‖² + μ‖x‖₁` minimized by FISTA with the exact Lipschitz
/// constant from power iteration.
pub fn lasso_fista(a: &Dense, b: &[f64], mu: f64, iters: usize) -> f64 {
    let at = transpose(a);
    let n = at.len();
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + i as f64 * 1e-3).collect();
    let mut lip = 0.0;
    for _ in 0..500 {
        let w = matvec(&at, &matvec(a, &v));
        lip = norm(&w) / norm(&v);
        v = w;
    }
    let step = 1.0 / (lip * 1.0001);
    let obj = |x: &[f64]| {
        let r: Vec<f64> = matvec(a, x).iter().zip(b).map(|(p, q)| p - q).collect();
        0.5 * dot(&r, &r) + mu * x.iter().map(|v| v.abs()).sum::<f64>()
    };
    let mut x = vec![0.0; n];
    let mut y = x.clone();
    let mut t = 1.0f64;
    for _ in 0..iters {
        let r: Vec<f64> = matvec(a, &y).iter().zip(b).map(|(p, q)| p - q).collect();
        let g = matvec(&at, &r);
        let xn: Vec<f64> = y
            .iter()
            .zip(&g)
            .map(|(yi, gi)| {
                let z = yi - step * gi;
                z.signum() * (z.abs() - step * mu).max(0.0)
            })
            .collect();
        let tn = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        y = xn.iter().zip(&x).map(|(a, b)| a + (t - 1.0) / tn * (a - b)).collect();
        x = xn;
        t = tn;
    }
    obj(&x)
}

pub fn rel_err(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs().max(1e-12)
}
