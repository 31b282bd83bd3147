//! Helmholtz splits `τ = ∇r + curl q` with `r ∈ H¹₀(T)` on a triangle,
//! either given exactly or computed with a P² finite element method on a
//! uniform subdivision of the element.

use crate::error::{Error, Result};
use crate::field::{dot3, ExpPoly, Pt, ScalarField, VectorField};
use crate::geometry::Simplex;
use crate::linalg::{cg_solve, Csr};
use crate::quadrature::{simplex_rule, Layers};
use std::sync::Arc;

/// Subdivisions per edge (five levels of red refinement).
pub const SPLIT_LATTICE: usize = 32;

pub struct HelmholtzSplit<'a> {
    pub r: Box<dyn ScalarField + 'a>,
    pub grad_r: Box<dyn VectorField + 'a>,
    pub curl_q: Box<dyn VectorField + 'a>,
}

impl HelmholtzSplit<'static> {
    /// Split from an explicit potential `r` (vanishing on `∂T`) and stream
    /// function `q`.
    pub fn exact(t: &Simplex, r: ExpPoly, q: ExpPoly) -> Result<Self> {
        if t.dim() != 2 {
            return Err(Error::UnsupportedDimension(t.dim()));
        }
        let grad_r = r.gradient(t);
        let curl_q = q.curl2d(t);
        Ok(HelmholtzSplit { r: Box::new(r), grad_r: Box::new(grad_r), curl_q: Box::new(curl_q) })
    }
}

/// Continuous piecewise quadratic function on the uniform `m`-lattice of a
/// triangle.
#[derive(Clone, Debug)]
pub struct P2LatticeField {
    gl: [[f64; 3]; 4],
    m: usize,
    coeffs: Vec<f64>,
}

const LOCAL_EDGES: [(usize, usize); 3] = [(1, 2), (0, 2), (0, 1)];

fn node_index(m: usize, a: usize, b: usize) -> usize {
    let n = 2 * m;
    b * (n + 1) - b * b.saturating_sub(1) / 2 + a
}

/// Fine-lattice coordinates of the six local nodes of a cell.
fn cell_nodes(v: &[[usize; 2]; 3]) -> [[usize; 2]; 6] {
    let mut out = [[0; 2]; 6];
    for i in 0..3 {
        out[i] = [2 * v[i][0], 2 * v[i][1]];
    }
    for (e, &(i, j)) in LOCAL_EDGES.iter().enumerate() {
        out[3 + e] = [v[i][0] + v[j][0], v[i][1] + v[j][1]];
    }
    out
}

fn cells(m: usize) -> Vec<([[usize; 2]; 3], bool)> {
    let mut out = Vec::with_capacity(m * m);
    for j in 0..m {
        for i in 0..m - j {
            out.push(([[i, j], [i + 1, j], [i, j + 1]], true));
            if i + j + 1 < m {
                out.push(([[i + 1, j + 1], [i, j + 1], [i + 1, j]], false));
            }
        }
    }
    out
}

/// Values and `μ`-derivatives of the local P² basis.
fn p2_basis(mu: &[f64; 3]) -> ([f64; 6], [[f64; 3]; 6]) {
    let mut v = [0.0; 6];
    let mut d = [[0.0; 3]; 6];
    for i in 0..3 {
        v[i] = mu[i] * (2.0 * mu[i] - 1.0);
        d[i][i] = 4.0 * mu[i] - 1.0;
    }
    for (e, &(i, j)) in LOCAL_EDGES.iter().enumerate() {
        v[3 + e] = 4.0 * mu[i] * mu[j];
        d[3 + e][i] = 4.0 * mu[j];
        d[3 + e][j] = 4.0 * mu[i];
    }
    (v, d)
}

fn p2_laplacian_weights() -> [[[f64; 3]; 3]; 6] {
    let mut h = [[[0.0; 3]; 3]; 6];
    for (i, hi) in h.iter_mut().enumerate().take(3) {
        hi[i][i] = 4.0;
    }
    for (e, &(i, j)) in LOCAL_EDGES.iter().enumerate() {
        h[3 + e][i][j] = 4.0;
        h[3 + e][j][i] = 4.0;
    }
    h
}

impl P2LatticeField {
    fn node(&self, a: usize, b: usize) -> usize {
        node_index(self.m, a, b)
    }

    /// Cell vertices, local coordinates and orientation sign of a point.
    fn locate(&self, lam: &[f64; 4]) -> ([[usize; 2]; 3], [f64; 3], f64) {
        let m = self.m;
        let a = m as f64 * lam[1];
        let b = m as f64 * lam[2];
        let j = (b.floor().max(0.0) as usize).min(m - 1);
        let i = (a.floor().max(0.0) as usize).min(m - 1 - j);
        let fa = a - i as f64;
        let fb = b - j as f64;
        if fa + fb <= 1.0 || i + j + 1 >= m {
            ([[i, j], [i + 1, j], [i, j + 1]], [1.0 - fa - fb, fa, fb], 1.0)
        } else {
            let m1 = (i + 1) as f64 - a;
            let m2 = (j + 1) as f64 - b;
            ([[i + 1, j + 1], [i, j + 1], [i + 1, j]], [1.0 - m1 - m2, m1, m2], -1.0)
        }
    }

    fn grad_mu(&self, sign: f64) -> [[f64; 3]; 3] {
        let m = self.m as f64 * sign;
        let g1 = self.gl[1].map(|x| m * x);
        let g2 = self.gl[2].map(|x| m * x);
        [[-g1[0] - g2[0], -g1[1] - g2[1], 0.0], g1, g2]
    }

    fn local(&self, lam: &[f64; 4]) -> ([usize; 6], [f64; 6], [[f64; 3]; 6], [[f64; 3]; 3]) {
        let (v, mu, sign) = self.locate(lam);
        let nodes = cell_nodes(&v);
        let idx = nodes.map(|x| self.node(x[0], x[1]));
        let (val, d) = p2_basis(&mu);
        (idx, val, d, self.grad_mu(sign))
    }

    pub fn value_grad(&self, lam: &[f64; 4]) -> (f64, [f64; 3]) {
        let (idx, val, d, gm) = self.local(lam);
        let mut v = 0.0;
        let mut g = [0.0; 3];
        for a in 0..6 {
            let c = self.coeffs[idx[a]];
            v += c * val[a];
            for i in 0..3 {
                for x in 0..3 {
                    g[x] += c * d[a][i] * gm[i][x];
                }
            }
        }
        (v, g)
    }

    pub fn laplacian(&self, lam: &[f64; 4]) -> f64 {
        let (idx, _, _, gm) = self.local(lam);
        let h = p2_laplacian_weights();
        let mut s = 0.0;
        for a in 0..6 {
            let c = self.coeffs[idx[a]];
            for i in 0..3 {
                for j in 0..3 {
                    if h[a][i][j] != 0.0 {
                        s += c * h[a][i][j] * dot3(&gm[i], &gm[j]);
                    }
                }
            }
        }
        s
    }
}

impl ScalarField for P2LatticeField {
    fn eval(&self, p: &Pt) -> (f64, [f64; 3]) {
        self.value_grad(&p.lam)
    }

    fn degree(&self) -> usize {
        2
    }

    fn lattice(&self) -> usize {
        self.m
    }
}

struct LatticeGradient(Arc<P2LatticeField>);

impl VectorField for LatticeGradient {
    fn eval(&self, p: &Pt) -> ([f64; 3], f64) {
        (self.0.value_grad(&p.lam).1, self.0.laplacian(&p.lam))
    }

    fn degree(&self) -> usize {
        1
    }

    fn lattice(&self) -> usize {
        self.0.m
    }
}

struct Remainder<'a> {
    tau: &'a dyn VectorField,
    r: Arc<P2LatticeField>,
}

impl VectorField for Remainder<'_> {
    fn eval(&self, p: &Pt) -> ([f64; 3], f64) {
        let (v, d) = self.tau.eval(p);
        let g = self.r.value_grad(&p.lam).1;
        ([v[0] - g[0], v[1] - g[1], v[2] - g[2]], d - self.r.laplacian(&p.lam))
    }

    fn layers(&self) -> Layers {
        self.tau.layers()
    }

    fn degree(&self) -> usize {
        self.tau.degree()
    }

    fn lattice(&self) -> usize {
        self.r.m
    }
}

/// Solves `(∇r_h, ∇w) = (τ, ∇w)` for all `w` in the P² space with zero
/// boundary values, and returns `r_h`, `∇r_h` and the remainder `τ − ∇r_h`.
pub fn helmholtz_split<'a>(tau: &'a dyn VectorField, t: &Simplex) -> Result<HelmholtzSplit<'a>> {
    helmholtz_split_on(tau, t, SPLIT_LATTICE)
}

pub fn helmholtz_split_on<'a>(tau: &'a dyn VectorField, t: &Simplex, m: usize) -> Result<HelmholtzSplit<'a>> {
    if t.dim() != 2 {
        return Err(Error::UnsupportedDimension(t.dim()));
    }
    if m == 0 {
        return Err(Error::OutOfRange("lattice needs at least one subdivision".into()));
    }
    let n = 2 * m;
    let nnodes = (n + 1) * (n + 2) / 2;
    let proto = P2LatticeField { gl: *t.grad_lambdas(), m, coeffs: vec![0.0; nnodes] };
    let interior = |a: usize, b: usize| a > 0 && b > 0 && a + b < n;
    let mut unknown = vec![usize::MAX; nnodes];
    let mut count = 0;
    for b in 0..=n {
        for a in 0..=n - b {
            if interior(a, b) {
                unknown[proto.node(a, b)] = count;
                count += 1;
            }
        }
    }
    let area = t.volume() / (m * m) as f64;
    let rule = simplex_rule(2, (tau.degree() + 1).clamp(4, 30))?;
    let mut trip = Vec::new();
    let mut rhs = vec![0.0; count];
    for (v, up) in cells(m) {
        let gm = proto.grad_mu(if up { 1.0 } else { -1.0 });
        let nodes = cell_nodes(&v).map(|x| proto.node(x[0], x[1]));
        let mut k = [[0.0; 6]; 6];
        let mut f = [0.0; 6];
        for (mu, w) in rule.points().iter().zip(rule.weights()) {
            let mu3 = [mu[0], mu[1], mu[2]];
            let (_, d) = p2_basis(&mu3);
            let grads: Vec<[f64; 3]> = (0..6)
                .map(|a| {
                    let mut g = [0.0; 3];
                    for i in 0..3 {
                        for x in 0..3 {
                            g[x] += d[a][i] * gm[i][x];
                        }
                    }
                    g
                })
                .collect();
            let l1 = (mu3[0] * v[0][0] as f64 + mu3[1] * v[1][0] as f64 + mu3[2] * v[2][0] as f64) / m as f64;
            let l2 = (mu3[0] * v[0][1] as f64 + mu3[1] * v[1][1] as f64 + mu3[2] * v[2][1] as f64) / m as f64;
            let pt = Pt::new(t, [1.0 - l1 - l2, l1, l2, 0.0]);
            let tv = tau.eval(&pt).0;
            for a in 0..6 {
                f[a] += w * area * dot3(&tv, &grads[a]);
                for b in 0..6 {
                    k[a][b] += w * area * dot3(&grads[a], &grads[b]);
                }
            }
        }
        for a in 0..6 {
            let ua = unknown[nodes[a]];
            if ua == usize::MAX {
                continue;
            }
            rhs[ua] += f[a];
            for b in 0..6 {
                let ub = unknown[nodes[b]];
                if ub != usize::MAX {
                    trip.push((ua, ub, k[a][b]));
                }
            }
        }
    }
    let mut coeffs = vec![0.0; nnodes];
    if count > 0 && rhs.iter().any(|x| *x != 0.0) {
        let a = Csr::from_triplets(count, trip, true);
        let rep = cg_solve(&a, &rhs, 1e-13, 20 * count + 100)?;
        for (node, &u) in unknown.iter().enumerate() {
            if u != usize::MAX {
                coeffs[node] = rep.x[u];
            }
        }
    }
    let r = Arc::new(P2LatticeField { coeffs, ..proto });
    Ok(HelmholtzSplit {
        r: Box::new((*r).clone()),
        grad_r: Box::new(LatticeGradient(r.clone())),
        curl_q: Box::new(Remainder { tau, r }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Poly, VecExp};
    use crate::geometry::reference_simplex;
    use crate::polyspace::element_bubble;

    #[test]
    fn node_numbering_is_a_bijection() {
        let m = 4;
        let n = 2 * m;
        let mut seen = vec![false; (n + 1) * (n + 2) / 2];
        for b in 0..=n {
            for a in 0..=n - b {
                let i = node_index(m, a, b);
                assert!(!seen[i]);
                seen[i] = true;
            }
        }
        assert!(seen.iter().all(|x| *x));
    }

    fn gradient_error(t: &Simplex, exact: &VecExp, split: &HelmholtzSplit, m: usize) -> (f64, f64) {
        let rule = crate::quadrature::lattice_volume_rule(m, 8);
        let (mut err, mut norm) = (0.0, 0.0);
        for (lam, w) in rule.points().iter().zip(rule.weights()) {
            let p = Pt::new(t, *lam);
            let e = exact.value(lam);
            let g = split.grad_r.eval(&p).0;
            err += w * ((e[0] - g[0]).powi(2) + (e[1] - g[1]).powi(2));
            norm += w * dot3(&e, &e);
        }
        (err.sqrt(), norm.sqrt())
    }

    #[test]
    fn gradient_fields_are_recovered_at_second_order() {
        let t = Simplex::new(2, &[[0.1, 0.0, 0.0], [1.0, 0.2, 0.0], [0.3, 0.9, 0.0]]).unwrap();
        let r = ExpPoly::poly(element_bubble(2).mul(&Poly::lambda(1).add(&Poly::constant(0.5))));
        let g = r.gradient(&t);
        let errs: Vec<f64> = [8, 16, 32]
            .iter()
            .map(|&m| {
                let split = helmholtz_split_on(&g, &t, m).unwrap();
                let (err, norm) = gradient_error(&t, &g, &split, m);
                err / norm
            })
            .collect();
        assert!(errs[2] < 2e-3, "{errs:?}");
        for w in errs.windows(2) {
            let rate = (w[0] / w[1]).log2();
            assert!((rate - 2.0).abs() < 0.2, "{errs:?}");
        }
    }

    #[test]
    fn curls_have_no_gradient_part() {
        let t = reference_simplex(2).unwrap();
        let q = ExpPoly::poly(element_bubble(2).add(&Poly::lambda(0).mul(&Poly::lambda(0))));
        let c = q.curl2d(&t);
        let split = helmholtz_split_on(&c, &t, 8).unwrap();
        let zero = VecExp::default();
        let (err, _) = gradient_error(&t, &zero, &split, 8);
        assert!(err < 1e-10, "{err}");
    }

    #[test]
    fn split_sums_to_the_input() {
        let t = reference_simplex(2).unwrap();
        let tau = VecExp::new(vec![(ExpPoly::poly(Poly::lambda(1)), [1.0, 0.0, 0.0]), (ExpPoly::poly(Poly::lambda(0)), [0.0, 1.0, 0.0])]);
        let split = helmholtz_split_on(&tau, &t, 4).unwrap();
        for lam in [[0.2, 0.3, 0.5, 0.0], [0.6, 0.1, 0.3, 0.0]] {
            let p = Pt::new(&t, lam);
            let a = split.grad_r.eval(&p);
            let b = split.curl_q.eval(&p);
            let v = tau.value(&lam);
            for d in 0..2 {
                assert!((a.0[d] + b.0[d] - v[d]).abs() < 1e-14);
            }
            assert!((a.1 + b.1 - tau.divergence(&t).value(&lam)).abs() < 1e-12);
        }
    }
}

