use robust_dpg::bubbles::{
    all_families, bernardi_raugel, face_bubble, modified_face_bubble, nu, rt0, scaling_exponents, sigma_edge,
};
use robust_dpg::field::dot3;
use robust_dpg::fortin::constructed_dim_report;
use robust_dpg::polyspace::integrate_poly_face;
use robust_dpg::{dim_report, reference_simplex, Simplex};

fn skewed(n: usize) -> Simplex {
    if n == 2 {
        Simplex::new(2, &[[0.3, -0.2, 0.0], [2.1, 0.4, 0.0], [0.9, 1.7, 0.0]]).unwrap()
    } else {
        Simplex::new(3, &[[0.1, 0.0, 0.2], [1.3, 0.2, -0.1], [0.4, 1.1, 0.3], [0.2, 0.5, 1.6]]).unwrap()
    }
}

#[test]
fn pairings_hold_on_physical_elements() {
    for n in [2, 3] {
        let t = skewed(n);
        for p in 0..=2 {
            for fam in all_families(&t, p, None).unwrap() {
                let r = fam.residual(&t);
                assert!(r < 1e-11, "{} n={n} p={p}: {r:e}", fam.name);
            }
        }
    }
}

#[test]
fn modified_pairings_survive_thin_layers() {
    let t = skewed(2);
    for a in [1e-2, 1e-4, 1e-6] {
        for fam in all_families(&t, 2, Some(a * t.diameter())).unwrap() {
            let r = fam.residual(&t);
            assert!(r < 1e-10, "{} α/h={a:e}: {r:e}", fam.name);
        }
    }
}

#[test]
fn face_bubbles_vanish_on_other_faces() {
    let t = reference_simplex(3).unwrap();
    for k in 0..=3 {
        let b = face_bubble(3, k);
        for j in (0..=3).filter(|&j| j != k) {
            assert!(b.on_face(j).is_zero(), "face {k} on face {j}");
        }
        assert!(integrate_poly_face(&b, &t, k) > 0.0);
    }
}

#[test]
fn rt0_normal_traces_are_unit_on_their_face() {
    let t = skewed(2);
    for k in 0..=2 {
        let psi = rt0(&t, k);
        for j in 0..=2 {
            let mut lam = [0.2, 0.3, 0.5, 0.0];
            lam[j] = 0.0;
            let s: f64 = lam.iter().sum();
            lam.iter_mut().for_each(|l| *l /= s);
            let flux = dot3(&psi.value(&lam), &t.normal(j));
            let want = if j == k { 1.0 } else { 0.0 };
            assert!((flux - want).abs() < 1e-13, "k={k} j={j}: {flux}");
        }
    }
}

#[test]
fn modified_bubbles_carry_the_layer_factor() {
    let t = reference_simplex(2).unwrap();
    let lam = [0.25, 0.35, 0.4, 0.0];
    for k in 0..=2 {
        let plain = face_bubble(2, k).eval(&lam);
        assert_eq!(modified_face_bubble(&t, k, f64::INFINITY).value(&lam), plain);
        for alpha in [1e-1, 1e-3] {
            let want = plain * (-t.diameter() * lam[k] / alpha).exp();
            let got = modified_face_bubble(&t, k, alpha).value(&lam);
            assert!((got - want).abs() <= 1e-14 * plain.abs());
            let br = bernardi_raugel(&t, k, alpha).value(&lam);
            assert!((dot3(&br, &t.normal(k)) - want).abs() <= 1e-14 * plain.abs());
        }
    }
}

#[test]
fn dimension_formulas_match_constructed_ranks() {
    assert_eq!(
        (dim_report(0, 2).unwrap().full_h1, dim_report(0, 2).unwrap().v_grad, dim_report(0, 2).unwrap().v_grad0),
        (10, 5, 4)
    );
    for n in [2, 3] {
        let t = reference_simplex(n).unwrap();
        for p in 0..=1 {
            assert_eq!(dim_report(p, n).unwrap(), constructed_dim_report(p, &t).unwrap(), "n={n} p={p}");
        }
    }
    let d = dim_report(0, 3).unwrap();
    assert_eq!((d.full_div, d.rt, d.v_div), (30, 15, 7));
}

#[test]
fn modified_bubble_norms_follow_square_root_laws() {
    let grid = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6];
    for n in [2, 3] {
        let t = skewed(n);
        for fit in scaling_exponents(&t, 0, &grid) {
            assert!((fit.value_slope - 0.5).abs() < 0.05, "{fit:?}");
            assert!((fit.derivative_slope + 0.5).abs() < 0.05, "{fit:?}");
        }
    }
}

#[test]
fn normal_traces_of_modified_fields_match_the_plain_ones() {
    let t = skewed(2);
    for k in 0..=2 {
        let plain = bernardi_raugel(&t, k, f64::INFINITY);
        let thin = bernardi_raugel(&t, k, 1e-5);
        for j in 0..=2 {
            for s in [0.1, 0.45, 0.8] {
                let mut lam = [0.0; 4];
                let others: Vec<usize> = (0..=2).filter(|&i| i != j).collect();
                lam[others[0]] = s;
                lam[others[1]] = 1.0 - s;
                let n = t.normal(j);
                let (a, b) = (dot3(&plain.value(&lam), &n), dot3(&thin.value(&lam), &n));
                assert!((a - b).abs() < 1e-14, "k={k} face {j}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn edge_fields_are_dual_to_tangents() {
    for n in [2, 3] {
        let t = skewed(n);
        for j in 1..=n {
            let s = sigma_edge(&t, j).value(&[0.25; 4]);
            for i in 1..=n {
                let tangent = t.tangent((0, i));
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((dot3(&s, &tangent) - want).abs() < 1e-13);
            }
        }
    }
}

#[test]
fn face_functions_nu_are_one_on_their_face() {
    for n in [2, 3] {
        for k in 0..=n {
            let mut lam = [0.0; 4];
            for i in (0..=n).filter(|&i| i != k) {
                lam[i] = 1.0 / n as f64;
            }
            assert!((nu(n, k).eval(&lam) - 1.0).abs() < 1e-14);
        }
    }
}
