mod common;

use approx::assert_abs_diff_eq;
use common::*;
use superscs::bench::generators::{lasso_data, logreg_data};
use superscs::bench::{Family, GeneratorSpec};
use superscs::termination::{certificate_metrics, optimality_metrics};
use superscs::{
    project_cone, ConeKind, ConeSpec, EmbeddedPoint, LinSolveCache, LinSysMode, Operator, PrimalDualTriple,
    SolverParams, Status, StepKind,
};

#[test]
fn second_order_projection_matches_boundary_search() {
    let y = [3.0, 4.0, 0.0];
    let got = project_cone(&y, ConeKind::SecondOrder(3)).unwrap();
    // nearest point on the rays t(cos φ, sin φ, 1), by grid refinement in φ
    let nearest = |phi: f64| {
        let dir = [phi.cos(), phi.sin(), 1.0];
        let t = (dot(&y, &dir) / 2.0).max(0.0);
        let z: Vec<f64> = dir.iter().map(|d| t * d).collect();
        (dist(&z, &y), z)
    };
    let (mut lo, mut hi) = (-std::f64::consts::PI, std::f64::consts::PI);
    for _ in 0..30 {
        let step = (hi - lo) / 100.0;
        let k = (0..=100)
            .min_by(|&i, &j| nearest(lo + step * i as f64).0.total_cmp(&nearest(lo + step * j as f64).0))
            .unwrap();
        let phi = lo + step * k as f64;
        (lo, hi) = (phi - step, phi + step);
    }
    let want = nearest((lo + hi) / 2.0).1;
    // a flat minimum limits the search to about √ε in φ
    assert!(dist(&got, &want) < 1e-7, "{got:?} vs {want:?}");
    assert!(dist(&got, &[1.5, 2.0, 2.5]) < 1e-12);
}

#[test]
fn psd_projection_clamps_eigenvalues() {
    let got = project_cone(&[1.0, 0.0, -1.0], ConeKind::Psd(2)).unwrap();
    assert!(dist(&got, &[1.0, 0.0, 0.0]) < 1e-12);

    let mut rng = TestRng::new(8);
    for _ in 0..50 {
        let x = rng.vec(10, 2.0);
        let got = project_cone(&x, ConeKind::Psd(4)).unwrap();
        let ev_in = jacobi_eigenvalues(&unpack_sym(&x, 4));
        let ev_out = jacobi_eigenvalues(&unpack_sym(&got, 4));
        for (a, b) in ev_in.iter().zip(&ev_out) {
            assert_abs_diff_eq!(a.max(0.0), b, epsilon = 1e-9);
        }
    }
}

#[test]
fn apply_q_hand_case() {
    let p = lp(&vec![vec![2.0]], vec![3.0], vec![5.0], ConeSpec { l: 1, ..Default::default() });
    let q = p.apply_q(&EmbeddedPoint::from_parts(&[1.0], &[1.0], 1.0));
    assert_eq!(q, vec![7.0, 1.0, -8.0]);
}

#[test]
fn linsys_hand_cases() {
    let p = lp(&vec![vec![1.0]], vec![1.0], vec![1.0], ConeSpec { l: 1, ..Default::default() });
    let cache = LinSolveCache::init(&p, LinSysMode::Direct).unwrap();
    assert!(dist(cache.g(), &[0.0, 1.0]) < 1e-14);
    assert_abs_diff_eq!(cache.denominator(), 2.0, epsilon = 1e-14);

    let p = lp(&vec![vec![2.0]], vec![0.0], vec![0.0], ConeSpec { l: 1, ..Default::default() });
    for mode in [LinSysMode::Direct, LinSysMode::Indirect { cg_tol: 1e-12 }] {
        let cache = LinSolveCache::init(&p, mode).unwrap();
        let z = cache.solve_m(&[1.0, 0.0]).unwrap();
        assert!(dist(&z, &[0.2, 0.4]) < 1e-10, "{mode:?}: {z:?}");
    }
}

#[test]
fn plain_drs_recovers_lp_optimum() {
    let p = lp_1d();
    let cache = LinSolveCache::init(&p, LinSysMode::Direct).unwrap();
    let op = Operator::new(&p, &cache);
    let mut b = op.evaluate(EmbeddedPoint::initial(1, 1)).unwrap();
    let mut k = 0;
    while b.ru_norm > 1e-9 {
        b = op.evaluate(EmbeddedPoint::from_vec(1, b.tu())).unwrap();
        k += 1;
        assert!(k < 100_000);
    }
    let fixed = b.u.as_slice();
    assert!(b.ru_norm <= 1e-9 * (1.0 + norm(fixed)));
    assert_abs_diff_eq!(b.u_bar.chi()[0] / b.u_bar.tau(), 1.0, epsilon = 1e-6);
}

#[test]
fn candidate_triple_on_lp() {
    let out = superscs::solve(&lp_1d(), &SolverParams { eps: 1e-9, ..SolverParams::default() }, None).unwrap();
    let superscs::Solution::Optimal(t) = out.solution else { panic!("{:?}", out.status) };
    // x = 1, dual y = 1, slack s = b − Ax = 0
    assert_abs_diff_eq!(t.x[0], 1.0, epsilon = 1e-6);
    assert_abs_diff_eq!(t.y[0], 1.0, epsilon = 1e-6);
    assert_abs_diff_eq!(t.s[0], 0.0, epsilon = 1e-6);
}

#[test]
fn metrics_match_direct_formulas() {
    let mut rng = TestRng::new(12);
    for _ in 0..20 {
        let p = random_problem(&mut rng, 5, ConeSpec { l: 4, q: vec![3], ..Default::default() }, 0.5);
        let a: Dense = p.a.to_dense();
        let t = PrimalDualTriple {
            x: rng.vec(5, 1.0),
            y: rng.vec(7, 1.0),
            s: rng.vec(7, 1.0),
        };
        let ax = matvec(&a, &t.x);
        let aty = matvec(&transpose(&a), &t.y);
        let prim: Vec<f64> = (0..7).map(|i| ax[i] + t.s[i] - p.b[i]).collect();
        let dual: Vec<f64> = (0..5).map(|j| aty[j] + p.c[j]).collect();
        let (cx, by) = (dot(&p.c, &t.x), dot(&p.b, &t.y));
        let want = (
            norm(&prim) / (1.0 + norm(&p.b)),
            norm(&dual) / (1.0 + norm(&p.c)),
            (cx + by).abs() / (1.0 + cx.abs() + by.abs()),
        );
        let got = optimality_metrics(&t, &p);
        assert_abs_diff_eq!(got.0, want.0, epsilon = 1e-13);
        assert_abs_diff_eq!(got.1, want.1, epsilon = 1e-13);
        assert_abs_diff_eq!(got.2, want.2, epsilon = 1e-13);

        let (ic, uc) = certificate_metrics(&t, &p);
        let ic_want = if by < 0.0 { norm(&p.b) * norm(&aty) / -by } else { f64::INFINITY };
        let axs: Vec<f64> = (0..7).map(|i| ax[i] + t.s[i]).collect();
        let uc_want = if cx < 0.0 { norm(&p.c) * norm(&axs) / -cx } else { f64::INFINITY };
        assert!(ic == ic_want || (ic - ic_want).abs() <= 1e-12 * ic_want);
        assert!(uc == uc_want || (uc - uc_want).abs() <= 1e-12 * uc_want);
    }
}

#[test]
fn lasso_with_dominant_penalty_gives_zero() {
    // x = 0 is optimal once μ ≥ ‖Aᵀb‖∞
    let base = GeneratorSpec::new(Family::Lasso { n: 15, m: 5, cond: 10.0, mu: 1.0 }, 4);
    let (a, b) = lasso_data(&base).unwrap();
    let atb = (0..15).map(|j| (0..5).map(|i| a[(i, j)] * b[i]).sum::<f64>().abs()).fold(0.0, f64::max);
    let mu = 10.0 * atb;
    let p = GeneratorSpec::new(Family::Lasso { n: 15, m: 5, cond: 10.0, mu }, 4).generate().unwrap();
    let out = superscs::solve(&p, &SolverParams::default(), None).unwrap();
    assert_eq!(out.status, Status::Solved);
    let x = out.x().unwrap();
    assert!(x[..15].iter().all(|v| v.abs() < 1e-4), "{:?}", &x[..15]);
    let half_b2 = 0.5 * dot(&b, &b);
    assert!(rel_err(out.objective(&p).unwrap(), half_b2) < 1e-3);
}

#[test]
fn l1_pca_solution_has_unit_trace() {
    let p = GeneratorSpec::new(Family::L1Pca { d: 4, lambda: 0.2 }, 9).generate().unwrap();
    let out = superscs::solve(&p, &SolverParams::default(), None).unwrap();
    assert_eq!(out.status, Status::Solved);
    let z = unpack_sym(&out.x().unwrap()[..10], 4);
    let tr: f64 = (0..4).map(|i| z[i][i]).sum();
    assert_abs_diff_eq!(tr, 1.0, epsilon = 1e-4);
}

/// Proximal gradient on `Σ log(1 + exp(aᵢᵀw)) + λ‖w‖₁`.
fn logreg_prox_gradient(a: &Dense, lambda: f64, iters: usize) -> f64 {
    let p = a[0].len();
    let lip: f64 = a.iter().map(|r| dot(r, r)).sum::<f64>() / 4.0;
    let step = 1.0 / lip;
    let obj = |w: &[f64]| {
        a.iter().map(|r| dot(r, w).exp().ln_1p()).sum::<f64>() + lambda * w.iter().map(|v| v.abs()).sum::<f64>()
    };
    let mut w = vec![0.0; p];
    for _ in 0..iters {
        let mut g = vec![0.0; p];
        for r in a {
            let s = 1.0 / (1.0 + (-dot(r, &w)).exp());
            for (gj, rj) in g.iter_mut().zip(r) {
                *gj += s * rj;
            }
        }
        for (wj, gj) in w.iter_mut().zip(&g) {
            let z = *wj - step * gj;
            *wj = z.signum() * (z.abs() - step * lambda).max(0.0);
        }
    }
    obj(&w)
}

#[test]
fn logreg_matches_proximal_gradient() {
    let spec = GeneratorSpec::new(Family::LogReg { p: 5, q: 10, lambda: 0.1 }, 3);
    let data = logreg_data(&spec).unwrap();
    let a: Dense = (0..10).map(|i| (0..5).map(|j| data[(i, j)]).collect()).collect();
    let want = logreg_prox_gradient(&a, 0.1, 200_000);
    let p = spec.generate().unwrap();
    let out = superscs::solve(&p, &SolverParams { eps: 1e-6, ..SolverParams::default() }, None).unwrap();
    assert_eq!(out.status, Status::Solved);
    let got = out.objective(&p).unwrap();
    assert!(rel_err(got, want) < 1e-3, "{got} vs {want}");
}

#[test]
fn logreg_with_large_lambda_costs_log_two_per_sample() {
    let spec = GeneratorSpec::new(Family::LogReg { p: 3, q: 6, lambda: 1e3 }, 5);
    let p = spec.generate().unwrap();
    let out = superscs::solve(&p, &SolverParams::default(), None).unwrap();
    assert_eq!(out.status, Status::Solved);
    assert!(rel_err(out.objective(&p).unwrap(), 6.0 * 2f64.ln()) < 1e-3);
}

#[test]
fn km_with_unit_relaxation_is_plain_drs() {
    let p = GeneratorSpec::new(Family::Lasso { n: 6, m: 3, cond: 10.0, mu: 0.1 }, 2).generate().unwrap();
    let params = SolverParams {
        lambda: 1.0,
        max_iters: Some(30),
        record_iterates: true,
        ..SolverParams::km()
    };
    let out = superscs::solve(&p, &params, None).unwrap();
    let cache = LinSolveCache::init(&p, LinSysMode::Direct).unwrap();
    let op = Operator::new(&p, &cache);
    let mut u = EmbeddedPoint::initial(p.n(), p.m());
    for rec in &out.stats.iterates {
        assert!(dist(rec, u.as_slice()) <= 1e-12 * (1.0 + norm(rec)));
        u = EmbeddedPoint::from_vec(p.n(), op.evaluate(u).unwrap().tu());
    }
    assert!(out.stats.iterates.len() >= 30);
}

#[test]
fn hyperplane_steps_are_fejer() {
    let p = GeneratorSpec::new(Family::Lasso { n: 30, m: 10, cond: 100.0, mu: 0.1 }, 6).generate().unwrap();
    let params = SolverParams {
        eps: 1e-8,
        record_iterates: true,
        ..SolverParams::broyden(50)
    };
    let out = superscs::solve(&p, &params, None).unwrap();
    assert_eq!(out.status, Status::Solved);
    let fixed = out.final_u.as_slice();
    let its = &out.stats.iterates;
    let mut k2 = 0;
    for (rec, pair) in out.stats.history.iter().zip(its.windows(2)) {
        if rec.step == StepKind::K2 {
            k2 += 1;
            let before = superscs::supermann::distance_to(&pair[0], fixed);
            let after = superscs::supermann::distance_to(&pair[1], fixed);
            assert!(after <= before + 1e-6 * (1.0 + before), "iteration {}: {before} -> {after}", rec.iter);
        }
    }
    assert!(k2 > 0);
}

#[test]
fn linear_solve_is_accurate_with_badly_scaled_costs() {
    let mut rng = TestRng::new(21);
    let mut p = random_problem(&mut rng, 12, ConeSpec { l: 8, q: vec![4], ..Default::default() }, 0.4);
    p.c.iter_mut().for_each(|v| *v *= 1e6);
    for mode in [LinSysMode::Direct, LinSysMode::Indirect { cg_tol: 1e-9 }] {
        let cache = LinSolveCache::init(&p, mode).unwrap();
        for _ in 0..10 {
            let u = EmbeddedPoint::from_vec(p.n(), rng.vec(p.embedded_dim(), 1.0));
            let ut = cache.solve(&u).unwrap();
            let q = p.apply_q(&ut);
            let lhs: Vec<f64> = ut.as_slice().iter().zip(&q).map(|(a, b)| a + b).collect();
            let scale = norm(&p.c) * norm(ut.as_slice());
            assert!(dist(&lhs, u.as_slice()) <= 1e-12 * (1.0 + scale), "{mode:?}");
        }
        assert_eq!(cache.factorizations(), usize::from(mode == LinSysMode::Direct));
    }
}
