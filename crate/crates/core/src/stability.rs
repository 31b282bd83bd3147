//! Discrete stability on the reference triangle: the extreme eigenvalues of
//! `b(u_h, Θ_h u_h)` against `‖u_h‖²_U` for the trial space of the DPG
//! method, with the ε-weighted `H^{-1/2}` norm of `σ̂` computed by an RT⁰
//! finite element method on a boundary-graded submesh.

use crate::dpg::{assemble_element, Problem, TestChoice, LOCAL_TRIAL};
use crate::error::{Error, Result};
use crate::field::Poly;
use crate::fortin::loglog_slope;
use crate::geometry::{graded_boundary_submesh_capped, reference_simplex, simplex_mesh, Mesh, Simplex, DEFAULT_ELEMENT_CAP};
use crate::linalg::{cg_solve, sym_gen_eig, Cholesky, Csr, Mat};
use rayon::prelude::*;

/// Columns of the local trial layout present on a single element whose
/// vertices all lie on the boundary: `u`, `σ` and the three `σ̂`.
const TRIAL_COLUMNS: [usize; 6] = [0, 1, 2, 6, 7, 8];

fn rt0_mass(t: &Simplex) -> [[f64; 3]; 3] {
    let area = t.volume();
    let c: Vec<f64> = (0..3).map(|k| t.face_measure(k) / (2.0 * area)).collect();
    let z: Vec<[f64; 3]> = (0..3).map(|k| t.vertex(k)).collect();
    let mids: Vec<[f64; 3]> = [(1, 2), (0, 2), (0, 1)]
        .iter()
        .map(|&(a, b)| [0.5 * (z[a][0] + z[b][0]), 0.5 * (z[a][1] + z[b][1]), 0.0])
        .collect();
    let mut m = [[0.0; 3]; 3];
    for x in &mids {
        for a in 0..3 {
            for b in 0..3 {
                let da = [x[0] - z[a][0], x[1] - z[a][1]];
                let db = [x[0] - z[b][0], x[1] - z[b][1]];
                m[a][b] += area / 3.0 * c[a] * c[b] * (da[0] * db[0] + da[1] * db[1]);
            }
        }
    }
    m
}

/// Ties each boundary facet of `sub` to the face of `t` it lies on.
fn boundary_face_of(sub: &Mesh, t: &Simplex, facet: usize) -> Option<usize> {
    let f = &sub.facets()[facet];
    if !f.is_boundary() {
        return None;
    }
    (0..3).find(|&k| {
        f.vertices.iter().all(|&v| crate::geometry::barycentric(t, &sub.vertices()[v])[k].abs() < 1e-10)
    })
}

/// Quadratic form `M_σ̂` of `‖σ̂‖²_{-1/2,ε}` for facet-constant normal traces
/// on `∂T` (one datum per face of `t`, unit flux density along the outward
/// normal).
#[derive(Clone, Debug)]
pub struct TraceNorm {
    pub matrix: Mat,
    pub elements: usize,
    pub iterations: usize,
}

pub fn trace_norm_matrix(t: &Simplex, eps: f64) -> Result<TraceNorm> {
    trace_norm_matrix_graded(t, eps, eps, DEFAULT_ELEMENT_CAP)
}

/// As [`trace_norm_matrix`], grading the submesh for the width `grading`
/// (boundary elements of diameter at most `grading/2`).
pub fn trace_norm_matrix_graded(t: &Simplex, eps: f64, grading: f64, cap: usize) -> Result<TraceNorm> {
    if t.dim() != 2 {
        return Err(Error::UnsupportedDimension(t.dim()));
    }
    let sub = graded_boundary_submesh_capped(&simplex_mesh(t), grading, cap)?;
    let nf = sub.facets().len();
    let e2 = eps * eps;
    let face_of: Vec<Option<usize>> = (0..nf).map(|f| boundary_face_of(&sub, t, f)).collect();
    let mut free = vec![usize::MAX; nf];
    let mut nfree = 0;
    for f in 0..nf {
        if !sub.facets()[f].is_boundary() {
            free[f] = nfree;
            nfree += 1;
        }
    }
    let locals: Vec<([usize; 3], [f64; 3], [[f64; 3]; 3])> = (0..sub.num_elements())
        .into_par_iter()
        .map(|e| {
            let s = sub.simplex(e);
            let m = rt0_mass(&s);
            let div: Vec<f64> = (0..3).map(|k| s.face_measure(k) / s.volume()).collect();
            let mut k = [[0.0; 3]; 3];
            for a in 0..3 {
                for b in 0..3 {
                    k[a][b] = m[a][b] + e2 * div[a] * div[b] * s.volume();
                }
            }
            let facets = [0, 1, 2].map(|j| sub.element_facet(e, j));
            let signs = [0, 1, 2].map(|j| sub.facet_sign(e, j));
            (facets, signs, k)
        })
        .collect();
    let mut trip = Vec::new();
    let mut rhs = vec![vec![0.0; nfree]; 3];
    for (facets, signs, k) in &locals {
        for a in 0..3 {
            let fa = facets[a];
            if free[fa] == usize::MAX {
                continue;
            }
            for b in 0..3 {
                let fb = facets[b];
                let v = signs[a] * signs[b] * k[a][b];
                if free[fb] != usize::MAX {
                    trip.push((free[fa], free[fb], v));
                } else if let Some(face) = face_of[fb] {
                    rhs[face][free[fa]] -= v;
                }
            }
        }
    }
    let a = Csr::from_triplets(nfree, trip, true);
    let sols: Vec<(Vec<f64>, usize)> = (0..3)
        .into_par_iter()
        .map(|i| {
            if nfree == 0 {
                return Ok((Vec::new(), 0));
            }
            let r = cg_solve(&a, &rhs[i], 1e-12, 20 * nfree + 100)?;
            Ok((r.x, r.iterations))
        })
        .collect::<Result<_>>()?;
    let full: Vec<Vec<f64>> = (0..3)
        .map(|i| {
            (0..nf)
                .map(|f| match (free[f], face_of[f]) {
                    (u, _) if u != usize::MAX => sols[i].0[u],
                    (_, Some(face)) if face == i => 1.0,
                    _ => 0.0,
                })
                .collect()
        })
        .collect();
    let mut matrix = Mat::zeros(3, 3);
    for (facets, signs, k) in &locals {
        for i in 0..3 {
            for j in 0..=i {
                let mut s = 0.0;
                for a in 0..3 {
                    for b in 0..3 {
                        s += signs[a] * full[i][facets[a]] * k[a][b] * signs[b] * full[j][facets[b]];
                    }
                }
                matrix[(i, j)] += s;
            }
        }
    }
    for i in 0..3 {
        for j in 0..i {
            matrix[(j, i)] = matrix[(i, j)];
        }
    }
    let iterations = sols.iter().map(|s| s.1).max().unwrap_or(0);
    Ok(TraceNorm { matrix, elements: sub.num_elements(), iterations })
}

/// `‖u_h‖²_U` on `U_h` of the single-element mesh: `|T|` for `u`, `|T| I`
/// for `σ` and `M_σ̂` for the traces.
pub fn u_gram(t: &Simplex, trace: &Mat) -> Mat {
    let mut m = Mat::zeros(6, 6);
    for i in 0..3 {
        m[(i, i)] = t.volume();
    }
    for i in 0..3 {
        for j in 0..3 {
            m[(3 + i, 3 + j)] = trace[(i, j)];
        }
    }
    m
}

/// `S` with `xᵀSx = b(u_h, Θ_h u_h)`, where `Θ_h` is the trial-to-test map.
pub fn schur_matrix(t: &Simplex, eps: f64, choice: TestChoice) -> Result<Mat> {
    let zero = Poly::zero();
    let sys = assemble_element(t, &Problem { eps, f: &zero, layer_width: None }, choice)?;
    let all: Vec<usize> = (0..sys.b.rows()).collect();
    let b = sys.b.submatrix(&all, &TRIAL_COLUMNS);
    debug_assert_eq!(sys.b.cols(), LOCAL_TRIAL);
    let g = Cholesky::new(&sys.gram)?;
    let mut s = b.transpose().matmul(&g.solve_mat(&b));
    s.symmetrize();
    Ok(s)
}

#[derive(Clone, Copy, Debug)]
pub struct EigenPair {
    pub eps: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
}

/// Extreme eigenvalues of `S x = λ M x` on the reference triangle.
pub fn eigen_pair(eps: f64, choice: TestChoice, trace: &Mat) -> Result<EigenPair> {
    let t = reference_simplex(2)?;
    let s = schur_matrix(&t, eps, choice)?;
    let m = u_gram(&t, trace);
    let (ev, _) = sym_gen_eig(&s, &m)?;
    let lambda_min = ev[0];
    let lambda_max = ev[ev.len() - 1];
    if !(lambda_min > 0.0) {
        return Err(Error::NotPositiveDefinite { pivot: 0, value: lambda_min });
    }
    Ok(EigenPair { eps, lambda_min, lambda_max })
}

#[derive(Clone, Debug)]
pub struct EigenSweepRow {
    pub eps: f64,
    pub tilde: EigenPair,
    pub modified: EigenPair,
    pub submesh_elements: usize,
}

/// Both test spaces for each ε; the trace norm is shared.
pub fn eigen_sweep(eps: &[f64]) -> Result<Vec<EigenSweepRow>> {
    let t = reference_simplex(2)?;
    eps.par_iter()
        .map(|&e| {
            let tn = trace_norm_matrix(&t, e)?;
            Ok(EigenSweepRow {
                eps: e,
                tilde: eigen_pair(e, TestChoice::Tilde, &tn.matrix)?,
                modified: eigen_pair(e, TestChoice::Eps, &tn.matrix)?,
                submesh_elements: tn.elements,
            })
        })
        .collect()
}

/// Fitted log-log slope of `λ_min` of the plain test space against ε.
pub fn tilde_min_slope(rows: &[EigenSweepRow]) -> f64 {
    let e: Vec<f64> = rows.iter().map(|r| r.eps).collect();
    let l: Vec<f64> = rows.iter().map(|r| r.tilde.lambda_min).collect();
    loglog_slope(&e, &l)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bubbles::rt0;
    use crate::field::vector_norms;

    #[test]
    fn trace_norm_is_below_the_rt0_lifting() {
        let t = reference_simplex(2).unwrap();
        let tn = trace_norm_matrix(&t, 1.0).unwrap();
        assert!(tn.matrix.asymmetry() < 1e-12);
        for k in 0..3 {
            let (a, d) = vector_norms(&t, &rt0(&t, k));
            assert!(tn.matrix[(k, k)] <= a * a + d * d + 1e-12);
            assert!(tn.matrix[(k, k)] > 0.0);
        }
    }

    #[test]
    fn u_gram_blocks() {
        let t = reference_simplex(2).unwrap();
        let tn = trace_norm_matrix(&t, 0.1).unwrap();
        let m = u_gram(&t, &tn.matrix);
        assert_eq!(m[(0, 0)], 0.5);
        assert_eq!(m[(1, 1)], 0.5);
        assert_eq!(m[(1, 2)], 0.0);
        let (ev, _) = crate::linalg::sym_eig(&m);
        assert!(ev[0] > 0.0);
    }

    #[test]
    fn schur_form_matches_explicit_trial_to_test_map() {
        let t = reference_simplex(2).unwrap();
        let eps = 1e-2;
        let s = schur_matrix(&t, eps, TestChoice::Eps).unwrap();
        let zero = Poly::zero();
        let sys = assemble_element(&t, &Problem { eps, f: &zero, layer_width: None }, TestChoice::Eps).unwrap();
        for r in 0..20 {
            let x: Vec<f64> = (0..6).map(|i| ((r * 7 + i) as f64 * 1.3).sin()).collect();
            let mut full = vec![0.0; LOCAL_TRIAL];
            for (i, &c) in TRIAL_COLUMNS.iter().enumerate() {
                full[c] = x[i];
            }
            let bx = sys.b.matvec(&full);
            let theta = crate::linalg::lu_solve(&sys.gram, &bx).unwrap();
            let b_theta: f64 = bx.iter().zip(&theta).map(|(a, b)| a * b).sum();
            let sx = s.bilinear(&x, &x);
            assert!((sx - b_theta).abs() <= 1e-10 * sx.abs(), "{sx} {b_theta}");
        }
    }

    #[test]
    fn eigenvalues_ignore_trace_orientation() {
        let t = reference_simplex(2).unwrap();
        let tn = trace_norm_matrix(&t, 0.1).unwrap();
        let s = schur_matrix(&t, 0.1, TestChoice::Eps).unwrap();
        let m = u_gram(&t, &tn.matrix);
        let flip = Mat::diag(&[1.0, 1.0, 1.0, -1.0, 1.0, -1.0]);
        let (a, _) = sym_gen_eig(&s, &m).unwrap();
        let (b, _) = sym_gen_eig(&flip.matmul(&s).matmul(&flip), &flip.matmul(&m).matmul(&flip)).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12 * x.abs().max(1.0));
        }
    }
}
