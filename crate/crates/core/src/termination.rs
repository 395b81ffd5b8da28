//! Relative optimality residuals, certificates, and status classification.

use crate::linalg::{dot, norm};
use crate::operator::IterateBundle;
use crate::problem::{ConicProblem, PrimalDualTriple};

/// Below this `τ̄` no primal-dual candidate is formed.
pub const TAU_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub pr: f64,
    pub dr: f64,
    pub gap: f64,
    pub ic: f64,
    pub uc: f64,
}

impl Metrics {
    pub fn unavailable() -> Self {
        Self {
            pr: f64::INFINITY,
            dr: f64::INFINITY,
            gap: f64::INFINITY,
            ic: f64::INFINITY,
            uc: f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    Continue,
    Solved,
    Infeasible,
    Unbounded,
}

/// `(χ̄, ψ̄, ς̄)` with `ς̄ = ψ̄ − 2ψ̃ + ψ`, before division by `τ̄`.
pub fn unnormalized_triple(bundle: &IterateBundle) -> (PrimalDualTriple, f64) {
    let sigma: Vec<f64> = bundle
        .u_bar
        .psi()
        .iter()
        .zip(bundle.u_tilde.psi())
        .zip(bundle.u.psi())
        .map(|((b, t), p)| b - 2.0 * t + p)
        .collect();
    (
        PrimalDualTriple {
            x: bundle.u_bar.chi().to_vec(),
            y: bundle.u_bar.psi().to_vec(),
            s: sigma,
        },
        bundle.u_bar.tau(),
    )
}

/// `(x̄, ȳ, s̄) = (χ̄, ψ̄, ς̄)/τ̄`, or `None` when `τ̄ ≤ TAU_FLOOR`.
pub fn candidate_triple(bundle: &IterateBundle) -> Option<PrimalDualTriple> {
    let (raw, tau) = unnormalized_triple(bundle);
    normalize(raw, tau)
}

fn normalize(raw: PrimalDualTriple, tau: f64) -> Option<PrimalDualTriple> {
    if tau <= TAU_FLOOR {
        return None;
    }
    let inv = 1.0 / tau;
    let scale = |v: Vec<f64>| v.into_iter().map(|x| x * inv).collect();
    Some(PrimalDualTriple {
        x: scale(raw.x),
        y: scale(raw.y),
        s: scale(raw.s),
    })
}

/// `(pr, dr, gap)`.
pub fn optimality_metrics(t: &PrimalDualTriple, p: &ConicProblem) -> (f64, f64, f64) {
    let mut prim = t.s.clone();
    p.a.gemv(1.0, &t.x, &mut prim);
    prim.iter_mut().zip(&p.b).for_each(|(v, b)| *v -= b);
    let pr = norm(&prim) / (1.0 + norm(&p.b));

    let mut dual = p.c.clone();
    p.a.gemv_t(1.0, &t.y, &mut dual);
    let dr = norm(&dual) / (1.0 + norm(&p.c));

    let cx = dot(&p.c, &t.x);
    let by = dot(&p.b, &t.y);
    let gap = (cx + by).abs() / (1.0 + cx.abs() + by.abs());
    (pr, dr, gap)
}

/// `(ic, uc)`. The ratios are taken with `|⟨b, y⟩|` and `|⟨c, x⟩|` in the
/// denominator, and are `+∞` unless the inner product is negative.
pub fn certificate_metrics(t: &PrimalDualTriple, p: &ConicProblem) -> (f64, f64) {
    let by = dot(&p.b, &t.y);
    let ic = if by < 0.0 {
        norm(&p.b) * norm(&p.a.mul_t_vec(&t.y)) / by.abs()
    } else {
        f64::INFINITY
    };
    let cx = dot(&p.c, &t.x);
    let uc = if cx < 0.0 {
        let mut r = t.s.clone();
        p.a.gemv(1.0, &t.x, &mut r);
        norm(&p.c) * norm(&r) / cx.abs()
    } else {
        f64::INFINITY
    };
    (ic, uc)
}

/// All five metrics for the current iterate, plus the normalized candidate.
pub fn evaluate(bundle: &IterateBundle, p: &ConicProblem) -> (Metrics, Option<PrimalDualTriple>) {
    let (raw, tau) = unnormalized_triple(bundle);
    let (ic, uc) = certificate_metrics(&raw, p);
    let cand = normalize(raw, tau);
    let (pr, dr, gap) = match &cand {
        Some(t) => optimality_metrics(t, p),
        None => (f64::INFINITY, f64::INFINITY, f64::INFINITY),
    };
    (Metrics { pr, dr, gap, ic, uc }, cand)
}

/// Solved takes priority, then unbounded, then infeasible.
pub fn classify(m: &Metrics, eps: f64) -> Classification {
    if m.pr < eps && m.dr < eps && m.gap < eps {
        Classification::Solved
    } else if m.uc < eps {
        Classification::Unbounded
    } else if m.ic < eps {
        Classification::Infeasible
    } else {
        Classification::Continue
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{ConeSpec, EmbeddedPoint};
    use crate::sparse::CscMatrix;

    fn lp_1d() -> ConicProblem {
        ConicProblem::new(
            CscMatrix::from_dense(&[vec![-1.0]]),
            vec![-1.0],
            vec![1.0],
            ConeSpec { l: 1, ..Default::default() },
        )
        .unwrap()
    }

    fn bundle(u: EmbeddedPoint, ut: EmbeddedPoint, ub: EmbeddedPoint) -> IterateBundle {
        IterateBundle {
            ru: vec![0.0; u.len()],
            ru_norm: 0.0,
            u,
            u_tilde: ut,
            u_bar: ub,
        }
    }

    #[test]
    fn candidate_arithmetic() {
        let u = EmbeddedPoint::from_parts(&[2.0], &[3.0], 1.0);
        let b = bundle(u.clone(), u.clone(), u);
        let t = candidate_triple(&b).unwrap();
        assert_eq!(t.x, vec![2.0]);
        assert_eq!(t.y, vec![3.0]);
        assert_eq!(t.s, vec![0.0]);
        let zero_tau = EmbeddedPoint::from_parts(&[2.0], &[3.0], 0.0);
        assert!(candidate_triple(&bundle(zero_tau.clone(), zero_tau.clone(), zero_tau)).is_none());
    }

    #[test]
    fn exact_kkt_point_has_zero_metrics() {
        // x = 1, s = 0, y = 1: Ax + s = −1 = b, Aᵀy + c = 0, ⟨c,x⟩ + ⟨b,y⟩ = 0
        let t = PrimalDualTriple { x: vec![1.0], y: vec![1.0], s: vec![0.0] };
        assert_eq!(optimality_metrics(&t, &lp_1d()), (0.0, 0.0, 0.0));
    }

    #[test]
    fn primal_residual_at_zero() {
        let p = lp_1d();
        let t = PrimalDualTriple { x: vec![0.0], y: vec![0.0], s: vec![0.0] };
        let (pr, _, _) = optimality_metrics(&t, &p);
        assert!((pr - 0.5).abs() < 1e-15);
    }

    #[test]
    fn certificate_branches() {
        let p = lp_1d();
        let t = PrimalDualTriple { x: vec![0.0], y: vec![0.0], s: vec![0.0] };
        assert_eq!(certificate_metrics(&t, &p), (f64::INFINITY, f64::INFINITY));
        // x ≤ −1, x ≥ 1: y = (1, 1) is a Farkas certificate
        let inf = ConicProblem::new(
            CscMatrix::from_dense(&[vec![1.0], vec![-1.0]]),
            vec![-1.0, -1.0],
            vec![0.0],
            ConeSpec { l: 2, ..Default::default() },
        )
        .unwrap();
        let y = PrimalDualTriple { x: vec![0.0], y: vec![1.0, 1.0], s: vec![0.0, 0.0] };
        assert_eq!(certificate_metrics(&y, &inf).0, 0.0);
        let y2 = PrimalDualTriple { x: vec![0.0], y: vec![10.0, 10.5], s: vec![0.0, 0.0] };
        let y1 = PrimalDualTriple { x: vec![0.0], y: vec![1.0, 1.05], s: vec![0.0, 0.0] };
        let (a, b) = (certificate_metrics(&y1, &inf).0, certificate_metrics(&y2, &inf).0);
        assert!((a - 2f64.sqrt() * 0.05 / 2.05).abs() <= 1e-14);
        assert!((a - b).abs() <= 1e-12 * a);
    }

    #[test]
    fn classify_order() {
        let mut m = Metrics { pr: 1e-5, dr: 1e-5, gap: 1e-5, ic: f64::INFINITY, uc: f64::INFINITY };
        assert_eq!(classify(&m, 1e-4), Classification::Solved);
        m.ic = 1e-6;
        assert_eq!(classify(&m, 1e-4), Classification::Solved);
        m.pr = 1.0;
        assert_eq!(classify(&m, 1e-4), Classification::Infeasible);
        m.uc = 1e-6;
        assert_eq!(classify(&m, 1e-4), Classification::Unbounded);
        assert_eq!(classify(&Metrics::unavailable(), 1e-4), Classification::Continue);
    }
}
