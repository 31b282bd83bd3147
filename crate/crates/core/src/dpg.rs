//! Ultraweak DPG method for `−ε²Δu + u = f` on the unit square with
//! `u = 0` on the boundary.
//!
//! Trial space: piecewise constant `u` and `σ = ε∇u`, the trace of the
//! continuous P¹ space with zero boundary values for `û`, and facet-constant
//! normal traces for `σ̂`.

use crate::bubbles::{bernardi_raugel, eta_edge, face_bubble, modified_face_bubble};
use crate::error::{Error, Result};
use crate::field::{dot3, ExpPoly, Poly, Pt, ScalarField, VecExp};
use crate::fortin::loglog_slope;
use crate::geometry::{criss_cross_mesh, Mesh, Simplex};
use crate::linalg::{cg_solve, Cholesky, Csr, Mat};
use crate::polyspace::{bernstein, element_bubble, multi_indices};
use crate::quadrature::{face_rule, volume_rule, Layers, QuadratureRule};
use rayon::prelude::*;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

/// Global systems up to this size are factored densely.
pub const DENSE_LIMIT: usize = 4000;

/// Local trial layout: `[u, σ₁, σ₂, û₀, û₁, û₂, σ̂₀, σ̂₁, σ̂₂]`.
pub const LOCAL_TRIAL: usize = 9;
const FIELD_DOFS: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TestChoice {
    /// `P³ × 𝐏²`
    Pol,
    /// Lowest-order spaces with exponentially modified bubbles for `ε ≤ h_T`.
    Eps,
    /// Lowest-order spaces with plain bubbles.
    Tilde,
}

impl TestChoice {
    pub fn name(self) -> &'static str {
        match self {
            TestChoice::Pol => "pol",
            TestChoice::Eps => "eps",
            TestChoice::Tilde => "tilde",
        }
    }
}

impl fmt::Display for TestChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TestChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pol" => Ok(TestChoice::Pol),
            "eps" => Ok(TestChoice::Eps),
            "tilde" => Ok(TestChoice::Tilde),
            _ => Err(Error::Parse(format!("unknown test space '{s}'"))),
        }
    }
}

/// Local test basis: scalar part, then vector part.
#[derive(Clone, Debug)]
pub struct LocalTestSpace {
    pub scalars: Vec<ExpPoly>,
    pub vectors: Vec<VecExp>,
}

impl LocalTestSpace {
    pub fn dim(&self) -> usize {
        self.scalars.len() + self.vectors.len()
    }

    fn layers(&self) -> Layers {
        let s = self.scalars.iter().fold(Layers::none(), |a, f| a.union(f.layer_info()));
        self.vectors.iter().fold(s, |a, f| a.union(f.layer_info()))
    }

    fn degree(&self) -> usize {
        let s = self.scalars.iter().map(|f| f.poly_degree()).max().unwrap_or(0);
        self.vectors.iter().map(|f| f.poly_degree()).max().unwrap_or(0).max(s)
    }
}

fn unit(d: usize) -> [f64; 3] {
    let mut e = [0.0; 3];
    e[d] = 1.0;
    e
}

pub fn test_space(t: &Simplex, eps: f64, choice: TestChoice) -> Result<LocalTestSpace> {
    let n = t.dim();
    if n != 2 {
        return Err(Error::UnsupportedDimension(n));
    }
    let all: Vec<usize> = (0..=n).collect();
    Ok(match choice {
        TestChoice::Pol => {
            let scalars = multi_indices(n + 1, 3).iter().map(|b| ExpPoly::poly(bernstein(&all, b))).collect();
            let vectors = multi_indices(n + 1, 2)
                .iter()
                .flat_map(|b| {
                    let f = ExpPoly::poly(bernstein(&all, b));
                    (0..n).map(move |d| VecExp::single(f.clone(), unit(d)))
                })
                .collect();
            LocalTestSpace { scalars, vectors }
        }
        TestChoice::Eps | TestChoice::Tilde => {
            let alpha = if choice == TestChoice::Eps && eps <= t.diameter() { eps } else { f64::INFINITY };
            let mut scalars = vec![ExpPoly::poly(Poly::constant(1.0))];
            for k in 0..=n {
                scalars.push(if alpha.is_finite() {
                    modified_face_bubble(t, k, alpha)
                } else {
                    ExpPoly::poly(face_bubble(n, k))
                });
            }
            scalars.push(ExpPoly::poly(element_bubble(n)));
            let mut vectors: Vec<VecExp> = (0..n).map(|d| VecExp::constant(unit(d))).collect();
            vectors.extend((0..=n).map(|k| bernardi_raugel(t, k, alpha)));
            vectors.extend((1..=n).map(|j| eta_edge(t, j)));
            LocalTestSpace { scalars, vectors }
        }
    })
}

/// Element matrices: Gram matrix of the test norm, the ultraweak coupling
/// (rows = test functions, columns = local trial layout) and the load.
#[derive(Clone, Debug)]
pub struct ElementSystem {
    pub gram: Mat,
    pub b: Mat,
    pub load: Vec<f64>,
}

/// Right-hand side with an optional boundary layer of width `w`, which
/// refines quadrature on elements touching `∂Ω`.
pub struct Problem<'a> {
    pub eps: f64,
    pub f: &'a dyn ScalarField,
    pub layer_width: Option<f64>,
}

fn on_boundary(x: &[f64; 3]) -> bool {
    let tol = 1e-12;
    x[0].abs() < tol || (x[0] - 1.0).abs() < tol || x[1].abs() < tol || (x[1] - 1.0).abs() < tol
}

/// Layers of a boundary layer of width `w` seen from `t`: every face
/// containing a vertex on `∂Ω`.
pub fn domain_layers(t: &Simplex, width: Option<f64>) -> Layers {
    let Some(w) = width else { return Layers::none() };
    let n = t.dim();
    let mut mask = 0u8;
    for v in 0..=n {
        if on_boundary(&t.vertex(v)) {
            for k in (0..=n).filter(|&k| k != v) {
                mask |= 1 << k;
            }
        }
    }
    Layers::faces(mask, w / t.diameter())
}

fn element_rules(t: &Simplex, layers: Layers, order: usize) -> (Arc<QuadratureRule>, Vec<Arc<QuadratureRule>>) {
    let n = t.dim();
    (volume_rule(n, layers, order), (0..=n).map(|k| face_rule(n, k, layers, order)).collect())
}

pub fn assemble_element(t: &Simplex, problem: &Problem, choice: TestChoice) -> Result<ElementSystem> {
    let eps = problem.eps;
    let space = test_space(t, eps, choice)?;
    let layers = space.layers().union(problem.f.layers()).union(domain_layers(t, problem.layer_width));
    let order = 2 * space.degree() + 4;
    let (vrule, frules) = element_rules(t, layers, order);
    let ns = space.scalars.len();
    let m = space.dim();
    let n = t.dim();
    let mut gram = Mat::zeros(m, m);
    let mut b = Mat::zeros(m, LOCAL_TRIAL);
    let mut load = vec![0.0; m];
    let vol = t.volume();
    let e2 = eps * eps;
    let mut vals = vec![0.0; m];
    let mut ders = vec![[0.0; 3]; m];
    let mut divs = vec![0.0; m];
    for (lam, w) in vrule.points().iter().zip(vrule.weights()) {
        let p = Pt::new(t, *lam);
        let wv = w * vol;
        for (i, s) in space.scalars.iter().enumerate() {
            let (v, g) = s.eval(&p);
            vals[i] = v;
            ders[i] = g;
        }
        for (j, s) in space.vectors.iter().enumerate() {
            let (v, d) = crate::field::VectorField::eval(s, &p);
            ders[ns + j] = v;
            divs[ns + j] = d;
        }
        let f = problem.f.eval(&p).0;
        for i in 0..ns {
            for k in 0..=i {
                gram[(i, k)] += wv * (vals[i] * vals[k] + e2 * dot3(&ders[i], &ders[k]));
            }
            b[(i, 0)] += wv * vals[i];
            for d in 0..n {
                b[(i, 1 + d)] += wv * eps * ders[i][d];
            }
            load[i] += wv * f * vals[i];
        }
        for i in ns..m {
            for k in ns..=i {
                gram[(i, k)] += wv * (dot3(&ders[i], &ders[k]) + e2 * divs[i] * divs[k]);
            }
            b[(i, 0)] += wv * eps * divs[i];
            for d in 0..n {
                b[(i, 1 + d)] += wv * ders[i][d];
            }
        }
    }
    for k in 0..=n {
        let nk = t.normal(k);
        let fm = t.face_measure(k);
        for (lam, w) in frules[k].points().iter().zip(frules[k].weights()) {
            let wf = w * fm;
            for (i, s) in space.scalars.iter().enumerate() {
                b[(i, 6 + k)] -= wf * eps * s.value(lam);
            }
            for (j, s) in space.vectors.iter().enumerate() {
                let tn = dot3(&s.value(lam), &nk);
                for v in 0..=n {
                    b[(ns + j, 3 + v)] -= wf * eps * lam[v] * tn;
                }
            }
        }
    }
    for i in 0..m {
        for k in 0..i {
            gram[(k, i)] = gram[(i, k)];
        }
    }
    Ok(ElementSystem { gram, b, load })
}

/// Residual norm `rᵀG⁻¹r`, the squared dual norm of the residual functional.
pub fn residual_norm2(gram: &Cholesky, r: &[f64]) -> f64 {
    let y = gram.forward(r);
    y.iter().map(|x| x * x).sum()
}

#[derive(Clone, Debug)]
pub struct DpgSolution {
    /// `û` at the vertices (zero on `∂Ω`).
    pub u_hat: Vec<f64>,
    /// `σ̂` per facet with respect to the facet orientation.
    pub sigma_hat: Vec<f64>,
    pub u: Vec<f64>,
    pub sigma: Vec<[f64; 2]>,
    pub est_elements: Vec<f64>,
    pub est: f64,
    pub dofs: usize,
}

struct Condensed {
    schur: Mat,
    rhs: Vec<f64>,
    a_ii: Cholesky,
    a_it: Mat,
    l_i: Vec<f64>,
    gram: Cholesky,
    b: Mat,
    load: Vec<f64>,
}

fn condense(sys: ElementSystem) -> Result<Condensed> {
    let gram = Cholesky::new(&sys.gram)?;
    let w = gram.solve_mat(&sys.b);
    let a = sys.b.transpose().matmul(&w);
    let l = sys.b.tmatvec(&gram.solve(&sys.load));
    let fi: Vec<usize> = (0..FIELD_DOFS).collect();
    let tr: Vec<usize> = (FIELD_DOFS..LOCAL_TRIAL).collect();
    let a_ii = Cholesky::new(&a.submatrix(&fi, &fi))?;
    let a_it = a.submatrix(&fi, &tr);
    let a_tt = a.submatrix(&tr, &tr);
    let x = a_ii.solve_mat(&a_it);
    let schur = a_tt.sub(&a_it.transpose().matmul(&x));
    let l_i: Vec<f64> = fi.iter().map(|&i| l[i]).collect();
    let y = a_ii.solve(&l_i);
    let corr = a_it.tmatvec(&y);
    let rhs = tr.iter().enumerate().map(|(k, &i)| l[i] - corr[k]).collect();
    Ok(Condensed { schur, rhs, a_ii, a_it, l_i, gram, b: sys.b, load: sys.load })
}

/// Trace dofs of element `e`: global index (if free) and sign.
fn trace_map(mesh: &Mesh, e: usize, vertex_dof: &[Option<usize>], nv: usize) -> [(Option<usize>, f64); 6] {
    let el = &mesh.elements()[e];
    let mut out = [(None, 1.0); 6];
    for k in 0..3 {
        out[k] = (vertex_dof[el[k]], 1.0);
        out[3 + k] = (Some(nv + mesh.element_facet(e, k)), mesh.facet_sign(e, k));
    }
    out
}

pub fn solve(mesh: &Mesh, problem: &Problem, choice: TestChoice) -> Result<DpgSolution> {
    if mesh.dim() != 2 {
        return Err(Error::UnsupportedDimension(mesh.dim()));
    }
    let bnd = mesh.boundary_vertices();
    let mut vertex_dof = vec![None; mesh.num_vertices()];
    let mut nv = 0;
    for (v, b) in bnd.iter().enumerate() {
        if !b {
            vertex_dof[v] = Some(nv);
            nv += 1;
        }
    }
    let ntrace = nv + mesh.facets().len();
    let locals: Vec<Condensed> = (0..mesh.num_elements())
        .into_par_iter()
        .map(|e| condense(assemble_element(&mesh.simplex(e), problem, choice)?))
        .collect::<Result<_>>()?;
    let mut trip = Vec::new();
    let mut rhs = vec![0.0; ntrace];
    for (e, c) in locals.iter().enumerate() {
        let map = trace_map(mesh, e, &vertex_dof, nv);
        for a in 0..6 {
            let (Some(ga), sa) = map[a] else { continue };
            rhs[ga] += sa * c.rhs[a];
            for bb in 0..6 {
                let (Some(gb), sb) = map[bb] else { continue };
                trip.push((ga, gb, sa * sb * c.schur[(a, bb)]));
            }
        }
    }
    let x = if ntrace <= DENSE_LIMIT {
        let mut a = Mat::zeros(ntrace, ntrace);
        for (i, j, v) in trip {
            a[(i, j)] += v;
        }
        a.symmetrize();
        Cholesky::new(&a)?.solve(&rhs)
    } else {
        let a = Csr::from_triplets(ntrace, trip, true);
        cg_solve(&a, &rhs, 1e-12, 20 * ntrace)?.x
    };
    let mut u = Vec::with_capacity(locals.len());
    let mut sigma = Vec::with_capacity(locals.len());
    let mut est_elements = Vec::with_capacity(locals.len());
    for (e, c) in locals.iter().enumerate() {
        let map = trace_map(mesh, e, &vertex_dof, nv);
        let xt: Vec<f64> = map.iter().map(|(g, s)| g.map_or(0.0, |g| s * x[g])).collect();
        let corr = c.a_it.matvec(&xt);
        let xi = c.a_ii.solve(&c.l_i.iter().zip(&corr).map(|(a, b)| a - b).collect::<Vec<_>>());
        let local: Vec<f64> = xi.iter().chain(xt.iter()).copied().collect();
        let bx = c.b.matvec(&local);
        let r: Vec<f64> = c.load.iter().zip(&bx).map(|(a, b)| a - b).collect();
        est_elements.push(residual_norm2(&c.gram, &r).max(0.0).sqrt());
        u.push(xi[0]);
        sigma.push([xi[1], xi[2]]);
    }
    let est = est_elements.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut u_hat = vec![0.0; mesh.num_vertices()];
    for (v, d) in vertex_dof.iter().enumerate() {
        if let Some(d) = d {
            u_hat[v] = x[*d];
        }
    }
    Ok(DpgSolution {
        u_hat,
        sigma_hat: x[nv..].to_vec(),
        u,
        sigma,
        est_elements,
        est,
        dofs: FIELD_DOFS * mesh.num_elements() + ntrace,
    })
}

/// `u(x, y) = v(x) v(y)` with `v'' = (v − 1)/(2ε²)`, `v(0) = v(1) = 0`.
#[derive(Clone, Copy, Debug)]
pub struct Manufactured {
    pub eps: f64,
}

impl Manufactured {
    pub fn new(eps: f64) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(Error::OutOfRange(format!("eps must be positive, got {eps}")));
        }
        Ok(Manufactured { eps })
    }

    fn s(&self) -> f64 {
        1.0 / (std::f64::consts::SQRT_2 * self.eps)
    }

    /// `v(x) = 1 − (e^{−(1−x)s} + e^{−xs}) / (1 + e^{−s})`, `s = 1/(√2ε)`.
    pub fn v(&self, x: f64) -> f64 {
        let s = self.s();
        1.0 - ((-(1.0 - x) * s).exp() + (-x * s).exp()) / (1.0 + (-s).exp())
    }

    /// Unsimplified form `1 − (1 − e^{−s})(…)/(1 − e^{−2s})`, evaluated with
    /// `expm1`.
    pub fn v_direct(&self, x: f64) -> f64 {
        let s = self.s();
        1.0 - (-(-s).exp_m1()) * ((-(1.0 - x) * s).exp() + (-x * s).exp()) / (-(-2.0 * s).exp_m1())
    }

    pub fn dv(&self, x: f64) -> f64 {
        let s = self.s();
        -s * ((-(1.0 - x) * s).exp() - (-x * s).exp()) / (1.0 + (-s).exp())
    }

    pub fn d2v(&self, x: f64) -> f64 {
        let s = self.s();
        -s * s * ((-(1.0 - x) * s).exp() + (-x * s).exp()) / (1.0 + (-s).exp())
    }

    pub fn u(&self, x: &[f64; 3]) -> f64 {
        self.v(x[0]) * self.v(x[1])
    }

    pub fn grad_u(&self, x: &[f64; 3]) -> [f64; 2] {
        [self.dv(x[0]) * self.v(x[1]), self.v(x[0]) * self.dv(x[1])]
    }

    pub fn sigma(&self, x: &[f64; 3]) -> [f64; 2] {
        let g = self.grad_u(x);
        [self.eps * g[0], self.eps * g[1]]
    }

    pub fn laplacian_u(&self, x: &[f64; 3]) -> f64 {
        self.d2v(x[0]) * self.v(x[1]) + self.v(x[0]) * self.d2v(x[1])
    }

    /// `f = (v(x) + v(y))/2`.
    pub fn f(&self, x: &[f64; 3]) -> f64 {
        0.5 * (self.v(x[0]) + self.v(x[1]))
    }

    /// Width of the boundary layer, `None` when the solution is smooth.
    pub fn layer_width(&self) -> Option<f64> {
        let w = std::f64::consts::SQRT_2 * self.eps;
        (w < 1.0).then_some(w)
    }

    pub fn load(&self) -> ManufacturedLoad {
        ManufacturedLoad(*self)
    }

    pub fn problem<'a>(&self, f: &'a ManufacturedLoad) -> Problem<'a> {
        Problem { eps: self.eps, f, layer_width: self.layer_width() }
    }
}

/// `f` of a [`Manufactured`] solution as a scalar field.
#[derive(Clone, Copy, Debug)]
pub struct ManufacturedLoad(pub Manufactured);

impl ScalarField for ManufacturedLoad {
    fn eval(&self, p: &Pt) -> (f64, [f64; 3]) {
        let m = &self.0;
        let x = p.x;
        (m.f(&x), [0.5 * m.dv(x[0]), 0.5 * m.dv(x[1]), 0.0])
    }
}

/// `‖u − u_h‖_Ω` and `‖σ − σ_h‖_Ω`.
pub fn field_errors(mesh: &Mesh, sol: &DpgSolution, exact: &Manufactured) -> (f64, f64) {
    let (eu, es) = (0..mesh.num_elements())
        .into_par_iter()
        .map(|e| {
            let t = mesh.simplex(e);
            let rule = volume_rule(2, domain_layers(&t, exact.layer_width()), 12);
            let (mut a, mut b) = (0.0, 0.0);
            for (lam, w) in rule.points().iter().zip(rule.weights()) {
                let x = t.point(lam);
                let du = exact.u(&x) - sol.u[e];
                let s = exact.sigma(&x);
                let ds = [s[0] - sol.sigma[e][0], s[1] - sol.sigma[e][1]];
                a += w * du * du;
                b += w * (ds[0] * ds[0] + ds[1] * ds[1]);
            }
            (a * t.volume(), b * t.volume())
        })
        .reduce(|| (0.0, 0.0), |x, y| (x.0 + y.0, x.1 + y.1));
    (eu.sqrt(), es.sqrt())
}

#[derive(Clone, Copy, Debug)]
pub struct ConvergenceRow {
    pub dofs: usize,
    pub h: f64,
    pub err_u: f64,
    pub err_sigma: f64,
    pub est: f64,
}

impl ConvergenceRow {
    /// `‖u − u_h‖ / est`.
    pub fn rho(&self) -> f64 {
        self.err_u / self.est
    }
}

/// Solves the manufactured problem on the criss-cross mesh and `levels`
/// uniform refinements of it.
pub fn convergence(eps: f64, choice: TestChoice, levels: usize) -> Result<Vec<ConvergenceRow>> {
    let exact = Manufactured::new(eps)?;
    let load = exact.load();
    let problem = exact.problem(&load);
    let mut mesh = criss_cross_mesh();
    let mut rows = Vec::with_capacity(levels + 1);
    for level in 0..=levels {
        if level > 0 {
            mesh = mesh.refine_uniform()?;
        }
        let sol = solve(&mesh, &problem, choice)?;
        let (err_u, err_sigma) = field_errors(&mesh, &sol, &exact);
        rows.push(ConvergenceRow { dofs: sol.dofs, h: mesh.max_diameter(), err_u, err_sigma, est: sol.est });
    }
    Ok(rows)
}

/// `ρ = ‖u − u_h‖ / est` on the four-element criss-cross mesh.
pub fn ratio(eps: f64, choice: TestChoice) -> Result<f64> {
    Ok(convergence(eps, choice, 0)?[0].rho())
}

#[derive(Clone, Debug)]
pub struct RatioSweep {
    pub eps: Vec<f64>,
    pub rho_pol: Vec<f64>,
    pub rho_eps: Vec<f64>,
    pub slope_pol: f64,
    pub slope_eps: f64,
}

pub fn ratio_sweep(eps: &[f64]) -> Result<RatioSweep> {
    let rho = |c: TestChoice| -> Result<Vec<f64>> { eps.par_iter().map(|&e| ratio(e, c)).collect() };
    let rho_pol = rho(TestChoice::Pol)?;
    let rho_eps = rho(TestChoice::Eps)?;
    Ok(RatioSweep {
        eps: eps.to_vec(),
        slope_pol: loglog_slope(eps, &rho_pol),
        slope_eps: loglog_slope(eps, &rho_eps),
        rho_pol,
        rho_eps,
    })
}
