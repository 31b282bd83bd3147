use robust_dpg::dpg::{convergence, solve, test_space, Problem};
use robust_dpg::field::Poly;
use robust_dpg::{criss_cross_mesh, reference_simplex, unit_square_mesh, Manufactured, TestChoice};

#[test]
fn smooth_problem_converges_at_first_order() {
    for choice in [TestChoice::Pol, TestChoice::Eps, TestChoice::Tilde] {
        let rows = convergence(1.0, choice, 3).unwrap();
        for w in rows.windows(2) {
            assert!(w[1].err_u < w[0].err_u && w[1].est < w[0].est, "{choice}");
        }
        let (a, b) = (&rows[2], &rows[3]);
        let rate = (a.err_sigma / b.err_sigma).ln() / (a.h / b.h).ln();
        assert!((rate - 1.0).abs() < 0.15, "{choice}: {rate}");
    }
}

#[test]
fn zero_load_gives_zero_solution() {
    let zero = Poly::zero();
    let problem = Problem { eps: 1e-2, f: &zero, layer_width: None };
    let sol = solve(&unit_square_mesh(2).unwrap(), &problem, TestChoice::Eps).unwrap();
    assert!(sol.u.iter().chain(&sol.u_hat).chain(&sol.sigma_hat).all(|x| x.abs() < 1e-14));
    assert_eq!(sol.est, 0.0);
}

#[test]
fn smaller_test_space_gives_smaller_estimator() {
    let t = reference_simplex(2).unwrap();
    let tilde = test_space(&t, 1e-3, TestChoice::Tilde).unwrap();
    assert!(tilde.scalars.iter().all(|f| f.poly_degree() <= 3));
    assert!(tilde.vectors.iter().all(|f| f.poly_degree() <= 2));
    let exact = Manufactured::new(1e-3).unwrap();
    let load = exact.load();
    let mesh = criss_cross_mesh();
    let pol = solve(&mesh, &exact.problem(&load), TestChoice::Pol).unwrap();
    let sub = solve(&mesh, &exact.problem(&load), TestChoice::Tilde).unwrap();
    assert!(sub.est <= pol.est * (1.0 + 1e-10), "{} > {}", sub.est, pol.est);
}

#[test]
fn modified_test_space_controls_the_coarse_ratio() {
    for eps in [1e-3, 1e-5] {
        let pol = convergence(eps, TestChoice::Pol, 0).unwrap()[0].rho();
        let modified = convergence(eps, TestChoice::Eps, 0).unwrap()[0].rho();
        assert!(modified < 3.0 && pol > 3.0, "ε={eps:e}: pol {pol} eps {modified}");
    }
}

#[test]
fn manufactured_solution_satisfies_the_equation() {
    for eps in [1.0, 1e-1] {
        let m = Manufactured::new(eps).unwrap();
        let d = 1e-4;
        for x in [[0.3, 0.6, 0.0], [0.2, 0.8, 0.0], [0.5, 0.5, 0.0]] {
            let at = |dx: f64, dy: f64| m.u(&[x[0] + dx, x[1] + dy, 0.0]);
            let lap = (at(d, 0.0) + at(-d, 0.0) + at(0.0, d) + at(0.0, -d) - 4.0 * at(0.0, 0.0)) / (d * d);
            assert!((lap - m.laplacian_u(&x)).abs() < 1e-5 * (1.0 + lap.abs()), "ε={eps}: {lap}");
            let residual = -eps * eps * m.laplacian_u(&x) + m.u(&x) - m.f(&x);
            assert!(residual.abs() < 1e-12);
        }
        assert_eq!(m.u(&[0.0, 0.4, 0.0]), 0.0);
        assert_eq!(m.u(&[0.7, 1.0, 0.0]), 0.0);
    }
}
