use robust_dpg::field::{dot3, ExpPoly, Poly, Pt, VecExp};
use robust_dpg::helmholtz_split;
use robust_dpg::quadrature::lattice_volume_rule;
use robust_dpg::stability::{eigen_pair, schur_matrix, trace_norm_matrix, u_gram};
use robust_dpg::{reference_simplex, Simplex, TestChoice};

#[test]
fn moderate_eps_eigenvalues_are_well_separated() {
    let t = reference_simplex(2).unwrap();
    let tn = trace_norm_matrix(&t, 1e-1).unwrap();
    assert!(tn.matrix.asymmetry() < 1e-12);
    let tilde = eigen_pair(1e-1, TestChoice::Tilde, &tn.matrix).unwrap();
    let modified = eigen_pair(1e-1, TestChoice::Eps, &tn.matrix).unwrap();
    for e in [tilde, modified] {
        assert!(e.lambda_min > 0.2 && e.lambda_max < 2.0, "{e:?}");
    }
}

#[test]
fn trial_gram_is_positive_definite() {
    let t = reference_simplex(2).unwrap();
    let tn = trace_norm_matrix(&t, 1e-1).unwrap();
    let m = u_gram(&t, &tn.matrix);
    assert!(robust_dpg::linalg::Cholesky::new(&m).is_ok());
    let s = schur_matrix(&t, 1e-1, TestChoice::Pol).unwrap();
    assert_eq!((s.rows(), s.cols()), (6, 6));
}

fn lattice_norm2(t: &Simplex, m: usize, f: impl Fn(&Pt) -> [f64; 3]) -> f64 {
    let rule = lattice_volume_rule(m, 6);
    let s: f64 = rule.points().iter().zip(rule.weights()).map(|(lam, w)| {
        let v = f(&Pt::new(t, *lam));
        w * dot3(&v, &v)
    }).sum();
    s * t.volume()
}

#[test]
fn discrete_split_is_orthogonal() {
    let t = Simplex::new(2, &[[0.0, 0.0, 0.0], [1.0, 0.1, 0.0], [0.2, 0.8, 0.0]]).unwrap();
    let x = ExpPoly::poly((0..3).fold(Poly::zero(), |acc, k| acc.add(&Poly::lambda(k).scale(t.vertex(k)[0]))));
    let y = ExpPoly::poly((0..3).fold(Poly::zero(), |acc, k| acc.add(&Poly::lambda(k).scale(t.vertex(k)[1]))));
    let tau = VecExp::new(vec![(x, [1.0, 0.0, 0.0]), (y, [0.0, 1.0, 0.0])]);
    let split = helmholtz_split(&tau, &t).unwrap();
    let m = 32;
    let whole = lattice_norm2(&t, m, |p| tau.value(&p.lam));
    let grad = lattice_norm2(&t, m, |p| split.grad_r.eval(p).0);
    let curl = lattice_norm2(&t, m, |p| split.curl_q.eval(p).0);
    assert!(grad > 0.1 * whole);
    assert!((whole - grad - curl).abs() < 1e-10 * whole, "{whole} {grad} {curl}");
    for lam in [[0.0, 0.3, 0.7, 0.0], [0.5, 0.0, 0.5, 0.0]] {
        assert!(split.r.eval(&Pt::new(&t, lam)).0.abs() < 1e-14);
    }
}
