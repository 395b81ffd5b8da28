//! Random instances of the three benchmark families.
//!
//! All randomness comes from `Pcg64` (the 128-bit LCG with XSL-RR output,
//! O'Neill 2014) seeded through `seed_from_u64`, so a `(spec, seed)` pair
//! always produces the same bytes.

use nalgebra::DMatrix;
use rand_distr::{Distribution, StandardNormal, StandardUniform};
use rand_pcg::rand_core::SeedableRng;
use rand_pcg::Pcg64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cones::svec;
use crate::problem::{ConeSpec, ConicProblem};
use crate::sparse::CscMatrix;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeneratorError {
    #[error("invalid generator parameters: {0}")]
    InvalidSpec(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    /// `min ½‖Ax − b‖² + μ‖x‖₁` with `A ∈ R^{m×n}` of condition number `cond`.
    Lasso { n: usize, m: usize, cond: f64, mu: f64 },
    /// `max trace(SZ) − λ‖Z‖₁` over unit-trace PSD matrices of order `d`.
    L1Pca { d: usize, lambda: f64 },
    /// `min λ‖w‖₁ + Σ log(1 + exp(aᵢᵀw))` with `w ∈ Rᵖ` and `q` samples.
    #[serde(rename = "logreg")]
    LogReg { p: usize, q: usize, lambda: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    #[serde(flatten)]
    pub family: Family,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn new(family: Family, seed: u64) -> Self {
        Self { family, seed }
    }

    pub fn validate(&self) -> Result<(), GeneratorError> {
        let bad = |m: &str| Err(GeneratorError::InvalidSpec(m.to_string()));
        let positive = |v: f64| v > 0.0 && v.is_finite();
        match self.family {
            Family::Lasso { n, m, cond, mu } => {
                if n == 0 || m == 0 {
                    return bad("lasso sizes must be positive");
                }
                if !(cond >= 1.0 && cond.is_finite()) {
                    return bad("lasso condition number must be at least 1");
                }
                if !positive(mu) {
                    return bad("lasso mu must be positive");
                }
            }
            Family::L1Pca { d, lambda } => {
                if d == 0 {
                    return bad("l1-pca order must be positive");
                }
                if !(lambda >= 0.0 && lambda.is_finite()) {
                    return bad("l1-pca lambda must be nonnegative");
                }
            }
            Family::LogReg { p, q, lambda } => {
                if p == 0 || q == 0 {
                    return bad("logreg sizes must be positive");
                }
                if !positive(lambda) {
                    return bad("logreg lambda must be positive");
                }
            }
        }
        Ok(())
    }

    /// Short identifier such as `lasso-n50-m10-k100-mu0.1-s3`.
    pub fn id(&self) -> String {
        let body = match self.family {
            Family::Lasso { n, m, cond, mu } => format!("lasso-n{n}-m{m}-k{cond}-mu{mu}"),
            Family::L1Pca { d, lambda } => format!("l1pca-d{d}-l{lambda}"),
            Family::LogReg { p, q, lambda } => format!("logreg-p{p}-q{q}-l{lambda}"),
        };
        format!("{body}-s{}", self.seed)
    }

    pub fn generate(&self) -> Result<ConicProblem, GeneratorError> {
        match self.family {
            Family::Lasso { .. } => gen_lasso(self),
            Family::L1Pca { .. } => gen_l1_pca(self),
            Family::LogReg { .. } => gen_logreg(self),
        }
    }
}

struct Sampler(Pcg64);

impl Sampler {
    fn new(seed: u64) -> Self {
        Self(Pcg64::seed_from_u64(seed))
    }

    fn normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.0)
    }

    fn uniform(&mut self) -> f64 {
        StandardUniform.sample(&mut self.0)
    }

    fn normal_matrix(&mut self, rows: usize, cols: usize) -> DMatrix<f64> {
        // Fill row by row so the draw order does not depend on storage layout.
        let mut m = DMatrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = self.normal();
            }
        }
        m
    }

    /// Orthonormal basis of the column space of a Gaussian matrix.
    fn orthonormal(&mut self, rows: usize, cols: usize) -> DMatrix<f64> {
        self.normal_matrix(rows, cols).qr().q()
    }

    /// `k` nonzeros at distinct random positions, Gaussian values.
    fn sparse_vector(&mut self, len: usize, k: usize) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..len).collect();
        for i in 0..k.min(len) {
            let j = i + ((self.uniform() * (len - i) as f64) as usize).min(len - i - 1);
            idx.swap(i, j);
        }
        let mut v = vec![0.0; len];
        for &i in idx.iter().take(k) {
            v[i] = self.normal();
        }
        v
    }
}

/// Dense `A ∈ R^{m×n}` with singular values log-spaced from 1 down to `1/cond`.
pub fn conditioned_matrix(rows: usize, cols: usize, cond: f64, seed: u64) -> DMatrix<f64> {
    let mut rng = Sampler::new(seed);
    conditioned_from(&mut rng, rows, cols, cond)
}

fn conditioned_from(rng: &mut Sampler, rows: usize, cols: usize, cond: f64) -> DMatrix<f64> {
    let r = rows.min(cols);
    let u = rng.orthonormal(rows, r);
    let v = rng.orthonormal(cols, r);
    let sigma: Vec<f64> = (0..r)
        .map(|i| {
            let frac = if r == 1 { 0.0 } else { i as f64 / (r - 1) as f64 };
            cond.powf(-frac)
        })
        .collect();
    let mut us = u;
    for (j, s) in sigma.iter().enumerate() {
        us.column_mut(j).scale_mut(*s);
    }
    us * v.transpose()
}

/// The LASSO data `(A, b)` used by [`gen_lasso`] for the same spec.
pub fn lasso_data(spec: &GeneratorSpec) -> Result<(DMatrix<f64>, Vec<f64>), GeneratorError> {
    spec.validate()?;
    let Family::Lasso { n, m, cond, .. } = spec.family else {
        return Err(GeneratorError::InvalidSpec("not a lasso spec".into()));
    };
    let mut rng = Sampler::new(spec.seed);
    let a = conditioned_from(&mut rng, m, n, cond);
    // Nonzeros of x_true ~ N(0, 100), noise ~ N(0, 1).
    let x_true: Vec<f64> = rng.sparse_vector(n, n.div_ceil(10)).iter().map(|v| 10.0 * v).collect();
    let ax = &a * nalgebra::DVector::from_vec(x_true);
    let b = (0..m).map(|i| ax[i] + rng.normal()).collect();
    Ok((a, b))
}

/// LASSO as a second-order cone program over `(x, u, t) ∈ Rⁿ × Rⁿ × R`:
///
/// ```text
/// minimize    μ Σ uᵢ + t
/// subject to  u − x ≥ 0,  u + x ≥ 0,
///             (Ax − b, (t − 1)/√2, (t + 1)/√2) ∈ SOC(m + 2)
/// ```
///
/// where the cone row group says `‖Ax − b‖² ≤ 2t`.
pub fn gen_lasso(spec: &GeneratorSpec) -> Result<ConicProblem, GeneratorError> {
    let Family::Lasso { n, m, mu, .. } = spec.family else {
        return Err(GeneratorError::InvalidSpec("not a lasso spec".into()));
    };
    let (data, bd) = lasso_data(spec)?;
    let nv = 2 * n + 1;
    let t_col = 2 * n;
    let mut trip = Vec::new();
    let mut b = Vec::new();
    // u − x ≥ 0 and u + x ≥ 0
    for i in 0..n {
        trip.push((i, i, 1.0));
        trip.push((i, n + i, -1.0));
        b.push(0.0);
    }
    for i in 0..n {
        trip.push((n + i, i, -1.0));
        trip.push((n + i, n + i, -1.0));
        b.push(0.0);
    }
    let r0 = 2 * n;
    for i in 0..m {
        for j in 0..n {
            trip.push((r0 + i, j, -data[(i, j)]));
        }
        b.push(-bd[i]);
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    trip.push((r0 + m, t_col, -h));
    b.push(-h);
    trip.push((r0 + m + 1, t_col, -h));
    b.push(h);

    let mut c = vec![0.0; nv];
    c[n..2 * n].iter_mut().for_each(|v| *v = mu);
    c[t_col] = 1.0;
    let rows = 2 * n + m + 2;
    let cones = ConeSpec {
        l: 2 * n,
        q: vec![m + 2],
        ..Default::default()
    };
    Ok(ConicProblem::new(CscMatrix::from_triplets(rows, nv, &trip), b, c, cones).expect("lasso encoding is consistent"))
}

/// Sample covariance `S = (1/k) Σ gᵢgᵢᵀ` of `k = 2d` standard normal draws,
/// as used by [`gen_l1_pca`] for the same spec.
pub fn l1_pca_covariance(spec: &GeneratorSpec) -> Result<DMatrix<f64>, GeneratorError> {
    spec.validate()?;
    let Family::L1Pca { d, .. } = spec.family else {
        return Err(GeneratorError::InvalidSpec("not an l1-pca spec".into()));
    };
    let mut rng = Sampler::new(spec.seed);
    let k = 2 * d;
    let g = rng.normal_matrix(d, k);
    Ok((&g * g.transpose()) / k as f64)
}

/// ℓ1-regularized PCA as a minimization over `(z, w)` with `z = svec(Z)`:
///
/// ```text
/// minimize    −⟨svec S, z⟩ + λ Σ ωⱼ wⱼ
/// subject to  Σ diag(Z) = 1,  w − z ≥ 0,  w + z ≥ 0,  Z ⪰ 0
/// ```
///
/// with weights `ω = 1` on diagonal entries and `√2` off the diagonal, so
/// that `Σ ωⱼ|zⱼ| = Σᵢⱼ |Zᵢⱼ|`. The optimal value is minus the maximum.
pub fn gen_l1_pca(spec: &GeneratorSpec) -> Result<ConicProblem, GeneratorError> {
    let Family::L1Pca { d, lambda } = spec.family else {
        return Err(GeneratorError::InvalidSpec("not an l1-pca spec".into()));
    };
    let s = l1_pca_covariance(spec)?;
    let k = d * (d + 1) / 2;
    let s_vec = svec(&s);
    // Diagonal positions in column-major lower-triangular order.
    let mut is_diag = vec![false; k];
    let mut pos = 0;
    for j in 0..d {
        is_diag[pos] = true;
        pos += d - j;
    }

    let mut trip = Vec::new();
    let mut b = Vec::new();
    for (j, &dg) in is_diag.iter().enumerate() {
        if dg {
            trip.push((0, j, 1.0));
        }
    }
    b.push(1.0);
    for j in 0..k {
        trip.push((1 + j, j, 1.0));
        trip.push((1 + j, k + j, -1.0));
        b.push(0.0);
    }
    for j in 0..k {
        trip.push((1 + k + j, j, -1.0));
        trip.push((1 + k + j, k + j, -1.0));
        b.push(0.0);
    }
    for j in 0..k {
        trip.push((1 + 2 * k + j, j, -1.0));
        b.push(0.0);
    }
    let mut c: Vec<f64> = s_vec.iter().map(|v| -v).collect();
    c.extend(is_diag.iter().map(|&dg| lambda * if dg { 1.0 } else { std::f64::consts::SQRT_2 }));
    let cones = ConeSpec {
        f: 1,
        l: 2 * k,
        s: vec![d],
        ..Default::default()
    };
    Ok(
        ConicProblem::new(CscMatrix::from_triplets(1 + 3 * k, 2 * k, &trip), b, c, cones)
            .expect("l1-pca encoding is consistent"),
    )
}

/// Rows `aᵢ = −yᵢxᵢ` of the logistic data used by [`gen_logreg`].
pub fn logreg_data(spec: &GeneratorSpec) -> Result<DMatrix<f64>, GeneratorError> {
    spec.validate()?;
    let Family::LogReg { p, q, .. } = spec.family else {
        return Err(GeneratorError::InvalidSpec("not a logreg spec".into()));
    };
    let mut rng = Sampler::new(spec.seed);
    let w_true = rng.sparse_vector(p, p.div_ceil(5));
    let x = rng.normal_matrix(q, p);
    let mut a = DMatrix::zeros(q, p);
    for i in 0..q {
        let score: f64 = (0..p).map(|j| x[(i, j)] * w_true[j]).sum::<f64>() + 0.5 * rng.normal();
        let y = if score >= 0.0 { 1.0 } else { -1.0 };
        for j in 0..p {
            a[(i, j)] = -y * x[(i, j)];
        }
    }
    Ok(a)
}

/// ℓ1-regularized logistic regression over `(w, v, t, u¹, u²)`:
///
/// ```text
/// minimize    λ Σ vⱼ + Σ tᵢ
/// subject to  v − w ≥ 0,  v + w ≥ 0,  1 − u¹ᵢ − u²ᵢ ≥ 0,
///             (u¹ᵢ, 1, aᵢᵀw − tᵢ) ∈ K_exp,  (u²ᵢ, 1, −tᵢ) ∈ K_exp
/// ```
///
/// The two cones give `e^{aᵢᵀw − tᵢ} + e^{−tᵢ} ≤ 1`, i.e.
/// `log(1 + e^{aᵢᵀw}) ≤ tᵢ`.
pub fn gen_logreg(spec: &GeneratorSpec) -> Result<ConicProblem, GeneratorError> {
    let Family::LogReg { p, q, lambda } = spec.family else {
        return Err(GeneratorError::InvalidSpec("not a logreg spec".into()));
    };
    let a = logreg_data(spec)?;
    let (w0, v0, t0, u1, u2) = (0, p, 2 * p, 2 * p + q, 2 * p + 2 * q);
    let nv = 2 * p + 3 * q;
    let mut trip = Vec::new();
    let mut b = Vec::new();
    let mut row = 0;
    for j in 0..p {
        trip.push((row, w0 + j, 1.0));
        trip.push((row, v0 + j, -1.0));
        b.push(0.0);
        row += 1;
    }
    for j in 0..p {
        trip.push((row, w0 + j, -1.0));
        trip.push((row, v0 + j, -1.0));
        b.push(0.0);
        row += 1;
    }
    for i in 0..q {
        trip.push((row, u1 + i, 1.0));
        trip.push((row, u2 + i, 1.0));
        b.push(1.0);
        row += 1;
    }
    for i in 0..q {
        trip.push((row, u1 + i, -1.0));
        b.push(0.0);
        b.push(1.0);
        for j in 0..p {
            trip.push((row + 2, w0 + j, -a[(i, j)]));
        }
        trip.push((row + 2, t0 + i, 1.0));
        b.push(0.0);
        row += 3;

        trip.push((row, u2 + i, -1.0));
        b.push(0.0);
        b.push(1.0);
        trip.push((row + 2, t0 + i, 1.0));
        b.push(0.0);
        row += 3;
    }
    let mut c = vec![0.0; nv];
    c[v0..v0 + p].iter_mut().for_each(|x| *x = lambda);
    c[t0..t0 + q].iter_mut().for_each(|x| *x = 1.0);
    let cones = ConeSpec {
        l: 2 * p + q,
        ep: 2 * q,
        ..Default::default()
    };
    Ok(ConicProblem::new(CscMatrix::from_triplets(row, nv, &trip), b, c, cones).expect("logreg encoding is consistent"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lasso_shapes_and_conditioning() {
        let spec = GeneratorSpec::new(Family::Lasso { n: 10, m: 4, cond: 100.0, mu: 0.1 }, 7);
        let p = gen_lasso(&spec).unwrap();
        assert_eq!((p.m(), p.n()), (2 * 10 + 4 + 2, 21));
        let a = conditioned_matrix(4, 10, 100.0, 7);
        let sv = a.singular_values();
        let (hi, lo) = (sv.max(), sv.min());
        assert!((hi - 1.0).abs() < 1e-12 && (hi / lo - 100.0).abs() < 1e-9);
    }

    #[test]
    fn specs_are_validated() {
        let bad = [
            Family::Lasso { n: 0, m: 1, cond: 10.0, mu: 0.1 },
            Family::Lasso { n: 3, m: 1, cond: 0.5, mu: 0.1 },
            Family::Lasso { n: 3, m: 1, cond: 10.0, mu: 0.0 },
            Family::L1Pca { d: 0, lambda: 1.0 },
            Family::LogReg { p: 2, q: 2, lambda: -1.0 },
        ];
        for f in bad {
            assert!(GeneratorSpec::new(f, 0).generate().is_err());
        }
    }

    #[test]
    fn spec_json_shape() {
        let s: GeneratorSpec = serde_json::from_str(r#"{"family":"logreg","p":3,"q":4,"lambda":0.5,"seed":9}"#).unwrap();
        assert_eq!(s.family, Family::LogReg { p: 3, q: 4, lambda: 0.5 });
        assert_eq!(s.id(), "logreg-p3-q4-l0.5-s9");
    }

    #[test]
    fn pca_and_logreg_shapes() {
        let p = gen_l1_pca(&GeneratorSpec::new(Family::L1Pca { d: 4, lambda: 0.5 }, 1)).unwrap();
        assert_eq!((p.m(), p.n()), (1 + 30, 20));
        let p = gen_logreg(&GeneratorSpec::new(Family::LogReg { p: 3, q: 5, lambda: 0.5 }, 1)).unwrap();
        assert_eq!((p.m(), p.n()), (6 + 5 + 30, 6 + 15));
        assert_eq!(p.cones.ep, 10);
    }
}
