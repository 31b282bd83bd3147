//! Polynomial spaces on simplices in Bernstein form, exact integration of
//! barycentric monomials, L² projections and the trace complement
//! `P̃^{p+1}(T)` of the bubble space.

use crate::error::{Error, Result};
use crate::field::{integrate_volume, Poly, ScalarField};
use crate::geometry::Simplex;
use crate::linalg::{Cholesky, Mat};

pub(crate) fn factorial(k: usize) -> f64 {
    (1..=k).fold(1.0, |a, b| a * b as f64)
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let mut r: usize = 1;
    for i in 0..k {
        r = r * (n - i) / (i + 1);
    }
    r
}

/// `dim P^q` in `n` variables.
pub fn dim_p(n: usize, q: usize) -> usize {
    binomial(q + n, n)
}

/// `∫_T λ^a = |T| n! a! / (|a| + n)!`.
pub fn integrate_poly(p: &Poly, t: &Simplex) -> f64 {
    let n = t.dim();
    let s: f64 = p
        .terms()
        .iter()
        .map(|(e, c)| {
            let deg: usize = e.iter().map(|&x| x as usize).sum();
            c * e.iter().map(|&x| factorial(x as usize)).product::<f64>() / factorial(deg + n)
        })
        .sum();
    t.volume() * factorial(n) * s
}

/// `∫_{F_k} p`, where `F_k` is the face opposite vertex `k`.
pub fn integrate_poly_face(p: &Poly, t: &Simplex, k: usize) -> f64 {
    let m = t.dim() - 1;
    let s: f64 = p
        .terms()
        .iter()
        .filter(|(e, _)| e[k] == 0)
        .map(|(e, c)| {
            let deg: usize = e.iter().map(|&x| x as usize).sum();
            c * e.iter().map(|&x| factorial(x as usize)).product::<f64>() / factorial(deg + m)
        })
        .sum();
    t.face_measure(k) * factorial(m) * s
}

/// `Σ_F ∫_F p`.
pub fn integrate_poly_boundary(p: &Poly, t: &Simplex) -> f64 {
    (0..=t.dim()).map(|k| integrate_poly_face(p, t, k)).sum()
}

/// All multi-indices of length `m` with sum `q`, in lexicographically
/// descending order.
pub fn multi_indices(m: usize, q: usize) -> Vec<Vec<usize>> {
    fn rec(m: usize, q: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() + 1 == m {
            cur.push(q);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for a in (0..=q).rev() {
            cur.push(a);
            rec(m, q - a, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if m == 0 {
        return out;
    }
    rec(m, q, &mut Vec::with_capacity(m), &mut out);
    out
}

/// Bernstein polynomial `q!/β! Π λ_{v_i}^{β_i}` in the coordinates listed in
/// `vertices`.
pub fn bernstein(vertices: &[usize], beta: &[usize]) -> Poly {
    let q: usize = beta.iter().sum();
    let mut e = [0u8; 4];
    let mut c = factorial(q);
    for (&v, &b) in vertices.iter().zip(beta) {
        e[v] = b as u8;
        c /= factorial(b);
    }
    Poly::monomial(e, c)
}

/// Bernstein polynomial scaled to unit maximum on the simplex spanned by
/// `vertices`. The maximum is attained at `λ = β/q`.
pub fn bernstein_sup(vertices: &[usize], beta: &[usize]) -> Poly {
    let q: usize = beta.iter().sum();
    let mut e = [0u8; 4];
    let mut c = 1.0;
    for (&v, &b) in vertices.iter().zip(beta) {
        e[v] = b as u8;
        if b > 0 {
            c *= (q as f64 / b as f64).powi(b as i32);
        }
    }
    Poly::monomial(e, c)
}

/// `η_T = Π_z λ_z`.
pub fn element_bubble(n: usize) -> Poly {
    let mut e = [0u8; 4];
    for x in e.iter_mut().take(n + 1) {
        *x = 1;
    }
    Poly::monomial(e, 1.0)
}

/// `P^q(T)` with the Bernstein basis.
#[derive(Clone, Debug)]
pub struct PolySpace {
    n: usize,
    q: usize,
    indices: Vec<Vec<usize>>,
    basis: Vec<Poly>,
}

impl PolySpace {
    pub fn new(n: usize, q: usize) -> Result<Self> {
        if !(1..=3).contains(&n) {
            return Err(Error::UnsupportedDimension(n));
        }
        let verts: Vec<usize> = (0..=n).collect();
        let indices = multi_indices(n + 1, q);
        let basis = indices.iter().map(|b| bernstein(&verts, b)).collect();
        Ok(PolySpace { n, q, indices, basis })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.q
    }

    pub fn basis(&self) -> &[Poly] {
        &self.basis
    }

    pub fn indices(&self) -> &[Vec<usize>] {
        &self.indices
    }

    /// `Σ c_i B_i`.
    pub fn combine(&self, coeffs: &[f64]) -> Poly {
        Poly::combination(coeffs, &self.basis)
    }

    pub fn gram(&self, t: &Simplex) -> Mat {
        gram_of(&self.basis, t)
    }

    /// Numerical rank of the Gram matrix.
    pub fn rank(&self, t: &Simplex) -> usize {
        poly_rank(&self.basis, t)
    }
}

/// L² Gram matrix of a polynomial list.
pub fn gram_of(polys: &[Poly], t: &Simplex) -> Mat {
    let m = polys.len();
    let mut g = Mat::zeros(m, m);
    for i in 0..m {
        for j in 0..=i {
            let v = integrate_poly(&polys[i].mul(&polys[j]), t);
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    g
}

/// Rank of the span of `polys`, from a pivoted Cholesky of the scaled Gram
/// matrix.
pub fn poly_rank(polys: &[Poly], t: &Simplex) -> usize {
    gram_rank(&gram_of(polys, t))
}

pub(crate) fn gram_rank(g: &Mat) -> usize {
    let m = g.rows();
    let d: Vec<f64> = (0..m).map(|i| g[(i, i)].max(f64::MIN_POSITIVE).sqrt()).collect();
    let mut s = Mat::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            s[(i, j)] = g[(i, j)] / (d[i] * d[j]);
        }
    }
    crate::linalg::pivoted_cholesky_rank(&s, 1e-10)
}

/// Bernstein coefficients of `Π_T^q f`.
pub fn l2_project(q: usize, f: &dyn ScalarField, t: &Simplex) -> Result<Vec<f64>> {
    let space = PolySpace::new(t.dim(), q)?;
    let g = space.gram(t);
    let order = q + f.degree();
    let rhs: Vec<f64> = space
        .basis()
        .iter()
        .map(|b| integrate_volume(t, f.layers(), order, |p| b.eval(&p.lam) * f.eval(p).0))
        .collect();
    let ch = Cholesky::new(&g).map_err(|_| Error::Singular("projection Gram matrix".into()))?;
    Ok(ch.solve(&rhs))
}

/// Subspace spanned by the columns of `coeffs` in the basis of `parent`.
#[derive(Clone, Debug)]
pub struct SubspaceBasis {
    pub parent: PolySpace,
    pub coeffs: Mat,
}

impl SubspaceBasis {
    pub fn dim(&self) -> usize {
        self.coeffs.cols()
    }

    pub fn functions(&self) -> Vec<Poly> {
        (0..self.coeffs.cols())
            .map(|j| {
                let c: Vec<f64> = (0..self.coeffs.rows()).map(|i| self.coeffs[(i, j)]).collect();
                self.parent.combine(&c)
            })
            .collect()
    }
}

/// Multi-indices of `P^q(T)` whose Bernstein polynomial has a nonzero trace.
fn boundary_index_mask(space: &PolySpace) -> Vec<bool> {
    space.indices().iter().map(|b| b.contains(&0)).collect()
}

/// Boundary Bernstein polynomials of degree `p+1` minus their L² projection
/// onto the bubbles `η_T P^{p−n}`. Columns are coefficients in the parent
/// Bernstein basis; the result is not normalized.
fn trace_complement_raw(p: usize, t: &Simplex) -> Result<(PolySpace, Mat)> {
    let space = PolySpace::new(t.dim(), p + 1)?;
    let mask = boundary_index_mask(&space);
    let bnd: Vec<usize> = (0..space.dim()).filter(|&i| mask[i]).collect();
    let int: Vec<usize> = (0..space.dim()).filter(|&i| !mask[i]).collect();
    let g = space.gram(t);
    let mut c = Mat::zeros(space.dim(), bnd.len());
    for (j, &b) in bnd.iter().enumerate() {
        c[(b, j)] = 1.0;
    }
    if !int.is_empty() {
        let gii = Mat::from_fn(int.len(), int.len(), |a, b| g[(int[a], int[b])]);
        let ch = Cholesky::new(&gii).map_err(|_| Error::Singular("bubble Gram matrix".into()))?;
        for (j, &b) in bnd.iter().enumerate() {
            let rhs: Vec<f64> = int.iter().map(|&i| g[(i, b)]).collect();
            let x = ch.solve(&rhs);
            for (a, &i) in int.iter().enumerate() {
                c[(i, j)] = -x[a];
            }
        }
    }
    Ok((space, c))
}

/// An L²(T)-orthonormal basis of `P̃^{p+1}(T)`.
pub fn trace_complement(p: usize, t: &Simplex) -> Result<SubspaceBasis> {
    let (space, c) = trace_complement_raw(p, t)?;
    let g = space.gram(t);
    let gs = c.transpose().matmul(&g).matmul(&c);
    let ch = Cholesky::new(&gs).map_err(|_| Error::Singular("trace complement Gram".into()))?;
    let mut coeffs = Mat::zeros(c.rows(), c.cols());
    for r in 0..c.rows() {
        let y = ch.forward(c.row(r));
        coeffs.row_mut(r).copy_from_slice(&y);
    }
    Ok(SubspaceBasis { parent: space, coeffs })
}

/// Sup-normalized seeds `ν̃_{∂T,j}` of `P̃^{p+1}(T)`, one per boundary
/// Bernstein index.
pub fn trace_complement_seeds(p: usize, t: &Simplex) -> Result<Vec<Poly>> {
    let (space, c) = trace_complement_raw(p, t)?;
    let lattice = multi_indices(t.dim() + 1, 4 * (p + 2));
    let m = (4 * (p + 2)) as f64;
    let pts: Vec<[f64; 4]> = lattice
        .iter()
        .map(|b| {
            let mut l = [0.0; 4];
            for (i, &x) in b.iter().enumerate() {
                l[i] = x as f64 / m;
            }
            l
        })
        .collect();
    Ok((0..c.cols())
        .map(|j| {
            let coeffs: Vec<f64> = (0..c.rows()).map(|i| c[(i, j)]).collect();
            let f = space.combine(&coeffs);
            let sup = pts.iter().map(|l| f.eval(l).abs()).fold(0.0, f64::max);
            f.scale(1.0 / sup)
        })
        .collect())
}

/// Closed-form dimensions of the spaces compared against the
/// full-polynomial test spaces.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DimReport {
    pub p: usize,
    pub n: usize,
    /// `dim P^{p+1+n}(T)`
    pub full_h1: usize,
    /// `dim V_hp^∇(T)`
    pub v_grad: usize,
    /// `dim V_h^{∇,0}(T)`
    pub v_grad0: usize,
    /// `dim 𝐏^{p+2}(T)`
    pub full_div: usize,
    /// `dim RT^{p+1}(T)`
    pub rt: usize,
    /// `dim V_hp^div(T)`
    pub v_div: usize,
}

fn falling(start: i64, n: usize) -> i64 {
    (1..=n as i64).map(|j| start + j).product()
}

pub fn dim_report(p: usize, n: usize) -> Result<DimReport> {
    if !(2..=3).contains(&n) {
        return Err(Error::UnsupportedDimension(n));
    }
    let nf = factorial(n) as i64;
    let nf1 = factorial(n - 1) as i64;
    let pi = p as i64;
    let ni = n as i64;
    let full_h1 = (falling(pi + 1 + ni, n) / nf) as usize;
    let v_grad = (1 + (n as i64 + 1) * falling(pi, n - 1) / nf1 + falling(pi, n) / nf) as usize;
    let v_grad0 = n + 2;
    let full_div = (ni * falling(pi + 2, n) / nf) as usize;
    let rt = (ni * falling(pi, n) / nf + (ni + 1) * falling(pi + 1, n - 1) / nf1) as usize;
    let v_div = (falling(pi + 1, n) / nf - falling(pi - ni, n) / nf + ni * falling(pi, n) / nf) as usize;
    Ok(DimReport { p, n, full_h1, v_grad, v_grad0, full_div, rt, v_div })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FnScalar;
    use crate::geometry::reference_simplex;
    use crate::quadrature::Layers;

    #[test]
    fn exact_integrals() {
        let t = reference_simplex(2).unwrap();
        // η_F for the face y = 0 is λ0 λ1 = (1−x−y)x
        let eta = Poly::lambda(0).mul(&Poly::lambda(1));
        assert!((integrate_poly(&eta, &t) - 1.0 / 24.0).abs() < 1e-16);
        assert!((integrate_poly_face(&eta, &t, 2) - 1.0 / 6.0).abs() < 1e-16);
        let t3 = reference_simplex(3).unwrap();
        assert!((integrate_poly(&Poly::constant(1.0), &t3) - 1.0 / 6.0).abs() < 1e-16);
    }

    #[test]
    fn dimensions() {
        for n in 1..=3 {
            for q in 0..5 {
                let s = PolySpace::new(n, q).unwrap();
                assert_eq!(s.dim(), dim_p(n, q));
                let t = reference_simplex(n.max(2)).unwrap();
                if n >= 2 {
                    assert_eq!(s.rank(&t), s.dim());
                }
            }
        }
    }

    #[test]
    fn projection_examples() {
        let t = reference_simplex(2).unwrap();
        let c = l2_project(0, &Poly::constant(2.5), &t).unwrap();
        assert!((c[0] - 2.5).abs() < 1e-14);
        let x = FnScalar::new(|x: &[f64; 3]| (x[0], [1.0, 0.0, 0.0]), Layers::none(), 1);
        let c = l2_project(0, &x, &t).unwrap();
        assert!((c[0] - 1.0 / 3.0).abs() < 1e-14);
        let f = Poly::lambda(1).scale(3.0).add(&Poly::constant(-1.0));
        let c = l2_project(1, &f, &t).unwrap();
        let g = PolySpace::new(2, 1).unwrap().combine(&c);
        for lam in [[0.2, 0.3, 0.5, 0.0], [1.0, 0.0, 0.0, 0.0]] {
            assert!((g.eval(&lam) - f.eval(&lam)).abs() < 1e-13);
        }
    }

    #[test]
    fn trace_complement_dims() {
        let t2 = reference_simplex(2).unwrap();
        let t3 = reference_simplex(3).unwrap();
        assert_eq!(trace_complement(0, &t2).unwrap().dim(), 3);
        assert_eq!(trace_complement(2, &t2).unwrap().dim(), 9);
        assert_eq!(trace_complement(3, &t3).unwrap().dim(), 34);
        let b = trace_complement(3, &t2).unwrap();
        let f = b.functions();
        let g = gram_of(&f, &t2);
        for i in 0..f.len() {
            for j in 0..f.len() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((g[(i, j)] - want).abs() < 1e-12);
            }
        }
        let bubbles: Vec<Poly> = PolySpace::new(2, 1).unwrap().basis().iter().map(|q| q.mul(&element_bubble(2))).collect();
        for u in &f {
            for b in &bubbles {
                assert!(integrate_poly(&u.mul(b), &t2).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn closed_form_dimensions() {
        let r2 = dim_report(0, 2).unwrap();
        assert_eq!((r2.full_h1, r2.v_grad, r2.v_grad0), (10, 5, 4));
        assert_eq!((r2.full_div, r2.rt, r2.v_div), (12, 8, 5));
        let r3 = dim_report(0, 3).unwrap();
        assert_eq!((r3.full_h1, r3.v_grad, r3.v_grad0), (35, 6, 5));
        assert_eq!((r3.full_div, r3.rt, r3.v_div), (30, 15, 7));
    }
}
