use proptest::prelude::*;
use robust_dpg::dpg::{solve, Problem};
use robust_dpg::field::{ExpPoly, Poly, VecExp};
use robust_dpg::linalg::Cholesky;
use robust_dpg::polyspace::integrate_poly;
use robust_dpg::{criss_cross_mesh, exp_moment, reference_simplex, simplex_rule, FortinOperator, FortinVariant, Mat, Probe, TestChoice};

fn poly_from(coeffs: &[f64], deg: usize) -> Poly {
    let mut p = Poly::zero();
    let mut i = 0;
    for a in 0..=deg {
        for b in 0..=deg - a {
            p = p.add(&Poly::monomial([a as u8, b as u8, 0, 0], coeffs[i % coeffs.len()]));
            i += 1;
        }
    }
    p
}

fn lam_strategy() -> impl Strategy<Value = [f64; 4]> {
    (0.0..1.0f64, 0.0..1.0f64).prop_map(|(a, b)| {
        let (a, b) = if a + b > 1.0 { (1.0 - a, 1.0 - b) } else { (a, b) };
        [a, b, 1.0 - a - b, 0.0]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn product_evaluates_pointwise(c1 in prop::collection::vec(-2.0..2.0f64, 6), c2 in prop::collection::vec(-2.0..2.0f64, 6), lam in lam_strategy()) {
        let (p, q) = (poly_from(&c1, 2), poly_from(&c2, 2));
        let lhs = p.mul(&q).eval(&lam);
        prop_assert!((lhs - p.eval(&lam) * q.eval(&lam)).abs() < 1e-12);
    }

    #[test]
    fn closed_form_integrals_match_quadrature(c in prop::collection::vec(-1.0..1.0f64, 15)) {
        let t = reference_simplex(2).unwrap();
        let p = poly_from(&c, 4);
        let rule = simplex_rule(2, 4).unwrap();
        let q: f64 = rule.points().iter().zip(rule.weights()).map(|(l, w)| w * p.eval(l)).sum::<f64>() * t.volume();
        prop_assert!((q - integrate_poly(&p, &t)).abs() < 1e-13);
    }

    #[test]
    fn exp_moments_decrease_in_the_power(k in 0usize..8, logk in -8.0..1.0f64) {
        let kappa = 10f64.powf(logk);
        let (a, b) = (exp_moment(k, kappa), exp_moment(k + 1, kappa));
        prop_assert!(b > 0.0 && b <= a);
        prop_assert!(a <= kappa * (1.0 - (-1.0 / kappa).exp()) * (1.0 + 1e-12));
    }

    #[test]
    fn cholesky_solves_spd_systems(entries in prop::collection::vec(-1.0..1.0f64, 25), rhs in prop::collection::vec(-1.0..1.0f64, 5)) {
        let a = Mat::from_fn(5, 5, |i, j| entries[5 * i + j]);
        let spd = a.transpose().matmul(&a).add(&Mat::identity(5));
        let x = Cholesky::new(&spd).unwrap().solve(&rhs);
        let r = spd.matvec(&x);
        for (u, v) in r.iter().zip(&rhs) {
            prop_assert!((u - v).abs() < 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn scalar_operators_keep_moments(c in prop::collection::vec(-1.0..1.0f64, 15), alpha in 1e-5..1e-1f64) {
        let t = reference_simplex(2).unwrap();
        let v = ExpPoly::poly(poly_from(&c, 4));
        for variant in [FortinVariant::H1Hp, FortinVariant::H1HpAlpha, FortinVariant::H1TildeHp] {
            let op = FortinOperator::new(variant, &t, 1, alpha).unwrap();
            let app = op.apply(&Probe::Scalar(v.clone())).unwrap();
            prop_assert!(op.residuals(&app).claimed_max(op.claims()) < 1e-10);
        }
    }

    #[test]
    fn vector_operators_keep_moments(c in prop::collection::vec(-1.0..1.0f64, 10), d in prop::collection::vec(-1.0..1.0f64, 10)) {
        let t = reference_simplex(2).unwrap();
        let tau = VecExp::new(vec![(ExpPoly::poly(poly_from(&c, 3)), [1.0, 0.0, 0.0]), (ExpPoly::poly(poly_from(&d, 3)), [0.0, 1.0, 0.0])]);
        for variant in [FortinVariant::DivHp, FortinVariant::DivTildeHp, FortinVariant::Div1, FortinVariant::DivAlphaLowest] {
            let op = FortinOperator::new(variant, &t, 1, 1e-3).unwrap();
            let app = op.apply(&Probe::Vector(tau.clone())).unwrap();
            prop_assert!(op.residuals(&app).claimed_max(op.claims()) < 1e-10);
        }
    }

    #[test]
    fn estimator_is_homogeneous_in_the_load(scale in -5.0..5.0f64) {
        prop_assume!(scale.abs() > 1e-3);
        let mesh = criss_cross_mesh();
        let one = Poly::constant(1.0);
        let scaled = Poly::constant(scale);
        let base = solve(&mesh, &Problem { eps: 1e-2, f: &one, layer_width: None }, TestChoice::Eps).unwrap();
        let sol = solve(&mesh, &Problem { eps: 1e-2, f: &scaled, layer_width: None }, TestChoice::Eps).unwrap();
        prop_assert!((sol.est - scale.abs() * base.est).abs() < 1e-10 * base.est.max(1e-300));
        for (u, v) in sol.u.iter().zip(&base.u) {
            prop_assert!((u - scale * v).abs() < 1e-10);
        }
    }
}
