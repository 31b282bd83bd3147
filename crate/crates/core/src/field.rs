//! Evaluable scalar and vector fields on a simplex.
//!
//! Fields are written in the barycentric coordinates of their element. A
//! [`Pt`] carries the coordinates together with the physical point and the
//! constant gradients `∇λ_k`, so gradients and divergences follow from the
//! chain rule.

use crate::geometry::Simplex;
use crate::quadrature::{face_rule, volume_rule, Layers};
use std::fmt;

/// An evaluation point inside (or on the boundary of) a simplex.
#[derive(Clone, Copy, Debug)]
pub struct Pt {
    pub lam: [f64; 4],
    pub x: [f64; 3],
    pub gl: [[f64; 3]; 4],
}

impl Pt {
    pub fn new(t: &Simplex, lam: [f64; 4]) -> Self {
        let x = t.point(&lam);
        Pt { lam, x, gl: *t.grad_lambdas() }
    }

    fn chain(&self, dlam: &[f64; 4]) -> [f64; 3] {
        let mut g = [0.0; 3];
        for k in 0..4 {
            if dlam[k] != 0.0 {
                for d in 0..3 {
                    g[d] += dlam[k] * self.gl[k][d];
                }
            }
        }
        g
    }
}

pub trait ScalarField: Send + Sync {
    /// Value and gradient.
    fn eval(&self, p: &Pt) -> (f64, [f64; 3]);

    fn layers(&self) -> Layers {
        Layers::none()
    }

    /// Polynomial degree used to pick quadrature orders.
    fn degree(&self) -> usize {
        8
    }

    /// Number of subdivisions per edge of a uniform lattice on which the
    /// field is only piecewise smooth; `1` for smooth fields.
    fn lattice(&self) -> usize {
        1
    }
}

pub trait VectorField: Send + Sync {
    /// Value and divergence.
    fn eval(&self, p: &Pt) -> ([f64; 3], f64);

    fn layers(&self) -> Layers {
        Layers::none()
    }

    fn degree(&self) -> usize {
        8
    }

    fn lattice(&self) -> usize {
        1
    }
}

/// `Σ c_a λ^a` with exponent tuples `a`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Poly {
    terms: Vec<([u8; 4], f64)>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly { terms: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        Poly::monomial([0; 4], c)
    }

    pub fn lambda(k: usize) -> Self {
        let mut e = [0; 4];
        e[k] = 1;
        Poly::monomial(e, 1.0)
    }

    pub fn monomial(e: [u8; 4], c: f64) -> Self {
        let mut p = Poly { terms: vec![(e, c)] };
        p.simplify();
        p
    }

    pub fn terms(&self) -> &[([u8; 4], f64)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.terms.iter().map(|(e, _)| e.iter().map(|&x| x as usize).sum()).max().unwrap_or(0)
    }

    fn simplify(&mut self) {
        self.terms.sort_by_key(|a| a.0);
        let mut out: Vec<([u8; 4], f64)> = Vec::with_capacity(self.terms.len());
        for (e, c) in self.terms.drain(..) {
            match out.last_mut() {
                Some(last) if last.0 == e => last.1 += c,
                _ => out.push((e, c)),
            }
        }
        out.retain(|t| t.1 != 0.0);
        self.terms = out;
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let mut p = Poly { terms: self.terms.iter().chain(&o.terms).copied().collect() };
        p.simplify();
        p
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        self.add(&o.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> Poly {
        let mut p = Poly { terms: self.terms.iter().map(|&(e, c)| (e, c * s)).collect() };
        p.simplify();
        p
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        let mut terms = Vec::with_capacity(self.terms.len() * o.terms.len());
        for (ea, ca) in &self.terms {
            for (eb, cb) in &o.terms {
                let e = [ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2], ea[3] + eb[3]];
                terms.push((e, ca * cb));
            }
        }
        let mut p = Poly { terms };
        p.simplify();
        p
    }

    /// `Σ_i c_i p_i`.
    pub fn combination(coeffs: &[f64], polys: &[Poly]) -> Poly {
        let mut terms = Vec::new();
        for (c, p) in coeffs.iter().zip(polys) {
            terms.extend(p.terms.iter().map(|&(e, pc)| (e, pc * c)));
        }
        let mut p = Poly { terms };
        p.simplify();
        p
    }

    /// Partial derivative with respect to `λ_k`, treating the coordinates as
    /// independent.
    pub fn partial(&self, k: usize) -> Poly {
        let mut terms = Vec::new();
        for &(mut e, c) in &self.terms {
            if e[k] > 0 {
                let f = e[k] as f64;
                e[k] -= 1;
                terms.push((e, c * f));
            }
        }
        let mut p = Poly { terms };
        p.simplify();
        p
    }

    pub fn eval(&self, lam: &[f64; 4]) -> f64 {
        self.terms.iter().map(|(e, c)| c * mono(lam, e)).sum()
    }

    /// Value and the partials `∂p/∂λ_k`.
    pub fn eval_partials(&self, lam: &[f64; 4]) -> (f64, [f64; 4]) {
        let mut v = 0.0;
        let mut d = [0.0; 4];
        for (e, c) in &self.terms {
            v += c * mono(lam, e);
            for k in 0..4 {
                if e[k] > 0 {
                    let mut ek = *e;
                    ek[k] -= 1;
                    d[k] += c * e[k] as f64 * mono(lam, &ek);
                }
            }
        }
        (v, d)
    }

    /// Restriction to face `k` (sets `λ_k = 0`).
    pub fn on_face(&self, k: usize) -> Poly {
        let mut p = Poly { terms: self.terms.iter().filter(|(e, _)| e[k] == 0).copied().collect() };
        p.simplify();
        p
    }
}

#[inline]
fn mono(lam: &[f64; 4], e: &[u8; 4]) -> f64 {
    let mut m = 1.0;
    for k in 0..4 {
        match e[k] {
            0 => {}
            1 => m *= lam[k],
            2 => m *= lam[k] * lam[k],
            n => m *= lam[k].powi(n as i32),
        }
    }
    m
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (e, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}")?;
            for (k, &ek) in e.iter().enumerate() {
                if ek > 0 {
                    write!(f, "·λ{k}^{ek}")?;
                }
            }
        }
        Ok(())
    }
}

impl ScalarField for Poly {
    fn eval(&self, p: &Pt) -> (f64, [f64; 3]) {
        let (v, d) = self.eval_partials(&p.lam);
        (v, p.chain(&d))
    }

    fn degree(&self) -> usize {
        Poly::degree(self)
    }
}

/// Exponential factor `e^{-rate·λ_face}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Decay {
    pub face: usize,
    pub rate: f64,
}

/// `Σ_g p_g e^{-rate_g λ_{k_g}}`; groups without a decay are polynomial.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ExpPoly {
    groups: Vec<(Poly, Option<Decay>)>,
}

impl From<Poly> for ExpPoly {
    fn from(p: Poly) -> Self {
        ExpPoly::poly(p)
    }
}

impl ExpPoly {
    pub fn poly(p: Poly) -> Self {
        if p.is_zero() {
            return ExpPoly::default();
        }
        ExpPoly { groups: vec![(p, None)] }
    }

    pub fn with_decay(p: Poly, d: Decay) -> Self {
        if p.is_zero() {
            return ExpPoly::default();
        }
        ExpPoly { groups: vec![(p, Some(d))] }
    }

    pub fn groups(&self) -> &[(Poly, Option<Decay>)] {
        &self.groups
    }

    pub fn is_polynomial(&self) -> bool {
        self.groups.iter().all(|g| g.1.is_none())
    }

    fn push(&mut self, p: Poly, d: Option<Decay>) {
        if p.is_zero() {
            return;
        }
        if let Some(g) = self.groups.iter_mut().find(|g| g.1 == d) {
            g.0 = g.0.add(&p);
        } else {
            self.groups.push((p, d));
        }
        self.groups.retain(|g| !g.0.is_zero());
    }

    pub fn add(&self, o: &ExpPoly) -> ExpPoly {
        let mut r = self.clone();
        for (p, d) in &o.groups {
            r.push(p.clone(), *d);
        }
        r
    }

    pub fn scale(&self, s: f64) -> ExpPoly {
        let mut r = ExpPoly::default();
        for (p, d) in &self.groups {
            r.push(p.scale(s), *d);
        }
        r
    }

    pub fn mul_poly(&self, q: &Poly) -> ExpPoly {
        let mut r = ExpPoly::default();
        for (p, d) in &self.groups {
            r.push(p.mul(q), *d);
        }
        r
    }

    pub fn partial(&self, k: usize) -> ExpPoly {
        let mut r = ExpPoly::default();
        for (p, d) in &self.groups {
            r.push(p.partial(k), *d);
            if let Some(dd) = d {
                if dd.face == k {
                    r.push(p.scale(-dd.rate), *d);
                }
            }
        }
        r
    }

    pub fn eval_partials(&self, lam: &[f64; 4]) -> (f64, [f64; 4]) {
        let mut v = 0.0;
        let mut dl = [0.0; 4];
        for (p, d) in &self.groups {
            let (pv, pd) = p.eval_partials(lam);
            match d {
                None => {
                    v += pv;
                    for k in 0..4 {
                        dl[k] += pd[k];
                    }
                }
                Some(dd) => {
                    let e = (-dd.rate * lam[dd.face]).exp();
                    v += pv * e;
                    for k in 0..4 {
                        dl[k] += pd[k] * e;
                    }
                    dl[dd.face] -= dd.rate * pv * e;
                }
            }
        }
        (v, dl)
    }

    pub fn value(&self, lam: &[f64; 4]) -> f64 {
        let mut v = 0.0;
        for (p, d) in &self.groups {
            let pv = p.eval(lam);
            v += match d {
                None => pv,
                Some(dd) => pv * (-dd.rate * lam[dd.face]).exp(),
            };
        }
        v
    }

    pub fn poly_degree(&self) -> usize {
        self.groups.iter().map(|g| g.0.degree()).max().unwrap_or(0)
    }

    pub fn layer_info(&self) -> Layers {
        self.groups
            .iter()
            .filter_map(|g| g.1)
            .fold(Layers::none(), |acc, d| acc.union(Layers::face(d.face, d.rate)))
    }

    /// Physical gradient as a vector field.
    pub fn gradient(&self, t: &Simplex) -> VecExp {
        let mut v = VecExp::default();
        for k in 0..=t.dim() {
            v.push(self.partial(k), t.grad_lambda(k));
        }
        v
    }

    /// `curl q = (∂_y q, −∂_x q)` in two dimensions.
    pub fn curl2d(&self, t: &Simplex) -> VecExp {
        let mut v = VecExp::default();
        for k in 0..=t.dim() {
            let g = t.grad_lambda(k);
            v.push(self.partial(k), [g[1], -g[0], 0.0]);
        }
        v
    }
}

impl ScalarField for ExpPoly {
    fn eval(&self, p: &Pt) -> (f64, [f64; 3]) {
        let (v, d) = self.eval_partials(&p.lam);
        (v, p.chain(&d))
    }

    fn layers(&self) -> Layers {
        self.layer_info()
    }

    fn degree(&self) -> usize {
        self.poly_degree()
    }
}

/// `Σ_i f_i c_i` with scalar factors `f_i` and constant vectors `c_i`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct VecExp {
    terms: Vec<(ExpPoly, [f64; 3])>,
}

impl VecExp {
    pub fn new(terms: Vec<(ExpPoly, [f64; 3])>) -> Self {
        let mut v = VecExp::default();
        for (f, c) in terms {
            v.push(f, c);
        }
        v
    }

    pub fn terms(&self) -> &[(ExpPoly, [f64; 3])] {
        &self.terms
    }

    pub fn push(&mut self, f: ExpPoly, c: [f64; 3]) {
        if f.groups.is_empty() || c == [0.0; 3] {
            return;
        }
        self.terms.push((f, c));
    }

    /// `f · c` for a single scalar factor.
    pub fn single(f: ExpPoly, c: [f64; 3]) -> Self {
        let mut v = VecExp::default();
        v.push(f, c);
        v
    }

    /// Constant field.
    pub fn constant(c: [f64; 3]) -> Self {
        VecExp::single(ExpPoly::poly(Poly::constant(1.0)), c)
    }

    pub fn add(&self, o: &VecExp) -> VecExp {
        let mut v = self.clone();
        for (f, c) in &o.terms {
            v.push(f.clone(), *c);
        }
        v
    }

    pub fn scale(&self, s: f64) -> VecExp {
        VecExp { terms: self.terms.iter().map(|(f, c)| (f.scale(s), *c)).collect() }
    }

    pub fn mul_poly(&self, q: &Poly) -> VecExp {
        let mut v = VecExp::default();
        for (f, c) in &self.terms {
            v.push(f.mul_poly(q), *c);
        }
        v
    }

    pub fn value(&self, lam: &[f64; 4]) -> [f64; 3] {
        let mut r = [0.0; 3];
        for (f, c) in &self.terms {
            let v = f.value(lam);
            for d in 0..3 {
                r[d] += v * c[d];
            }
        }
        r
    }

    /// The component `τ·a` as a scalar function.
    pub fn dot_const(&self, a: &[f64; 3]) -> ExpPoly {
        let mut r = ExpPoly::default();
        for (f, c) in &self.terms {
            let s = c[0] * a[0] + c[1] * a[1] + c[2] * a[2];
            if s != 0.0 {
                r = r.add(&f.scale(s));
            }
        }
        r
    }

    pub fn divergence(&self, t: &Simplex) -> ExpPoly {
        let mut r = ExpPoly::default();
        for (f, c) in &self.terms {
            for k in 0..=t.dim() {
                let g = t.grad_lambda(k);
                let s = g[0] * c[0] + g[1] * c[1] + g[2] * c[2];
                if s != 0.0 {
                    r = r.add(&f.partial(k).scale(s));
                }
            }
        }
        r
    }

    pub fn poly_degree(&self) -> usize {
        self.terms.iter().map(|t| t.0.poly_degree()).max().unwrap_or(0)
    }

    pub fn layer_info(&self) -> Layers {
        self.terms.iter().fold(Layers::none(), |acc, t| acc.union(t.0.layer_info()))
    }
}

impl VectorField for VecExp {
    fn eval(&self, p: &Pt) -> ([f64; 3], f64) {
        let mut v = [0.0; 3];
        let mut div = 0.0;
        for (f, c) in &self.terms {
            let (fv, fd) = f.eval_partials(&p.lam);
            let g = p.chain(&fd);
            for d in 0..3 {
                v[d] += fv * c[d];
            }
            div += g[0] * c[0] + g[1] * c[1] + g[2] * c[2];
        }
        (v, div)
    }

    fn layers(&self) -> Layers {
        self.layer_info()
    }

    fn degree(&self) -> usize {
        self.poly_degree()
    }
}

/// Scalar field given by a closure of the physical point.
pub struct FnScalar<F> {
    f: F,
    layers: Layers,
    degree: usize,
}

impl<F> FnScalar<F>
where
    F: Fn(&[f64; 3]) -> (f64, [f64; 3]) + Send + Sync,
{
    pub fn new(f: F, layers: Layers, degree: usize) -> Self {
        FnScalar { f, layers, degree }
    }
}

impl<F> ScalarField for FnScalar<F>
where
    F: Fn(&[f64; 3]) -> (f64, [f64; 3]) + Send + Sync,
{
    fn eval(&self, p: &Pt) -> (f64, [f64; 3]) {
        (self.f)(&p.x)
    }

    fn layers(&self) -> Layers {
        self.layers
    }

    fn degree(&self) -> usize {
        self.degree
    }
}

/// Vector field given by a closure of the physical point.
pub struct FnVector<F> {
    f: F,
    layers: Layers,
    degree: usize,
}

impl<F> FnVector<F>
where
    F: Fn(&[f64; 3]) -> ([f64; 3], f64) + Send + Sync,
{
    pub fn new(f: F, layers: Layers, degree: usize) -> Self {
        FnVector { f, layers, degree }
    }
}

impl<F> VectorField for FnVector<F>
where
    F: Fn(&[f64; 3]) -> ([f64; 3], f64) + Send + Sync,
{
    fn eval(&self, p: &Pt) -> ([f64; 3], f64) {
        (self.f)(&p.x)
    }

    fn layers(&self) -> Layers {
        self.layers
    }

    fn degree(&self) -> usize {
        self.degree
    }
}

/// `a − b`.
pub struct DiffVector<'a> {
    pub a: &'a dyn VectorField,
    pub b: &'a dyn VectorField,
}

impl VectorField for DiffVector<'_> {
    fn eval(&self, p: &Pt) -> ([f64; 3], f64) {
        let (va, da) = self.a.eval(p);
        let (vb, db) = self.b.eval(p);
        ([va[0] - vb[0], va[1] - vb[1], va[2] - vb[2]], da - db)
    }

    fn layers(&self) -> Layers {
        self.a.layers().union(self.b.layers())
    }

    fn degree(&self) -> usize {
        self.a.degree().max(self.b.degree())
    }

    fn lattice(&self) -> usize {
        self.a.lattice().max(self.b.lattice())
    }
}

/// `a + b`.
pub struct SumVector<'a> {
    pub a: &'a dyn VectorField,
    pub b: &'a dyn VectorField,
}

impl VectorField for SumVector<'_> {
    fn eval(&self, p: &Pt) -> ([f64; 3], f64) {
        let (va, da) = self.a.eval(p);
        let (vb, db) = self.b.eval(p);
        ([va[0] + vb[0], va[1] + vb[1], va[2] + vb[2]], da + db)
    }

    fn layers(&self) -> Layers {
        self.a.layers().union(self.b.layers())
    }

    fn degree(&self) -> usize {
        self.a.degree().max(self.b.degree())
    }

    fn lattice(&self) -> usize {
        self.a.lattice().max(self.b.lattice())
    }
}

pub fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// `∫_T f` over a rule resolving `layers`.
pub fn integrate_volume<F: FnMut(&Pt) -> f64>(t: &Simplex, layers: Layers, order: usize, mut f: F) -> f64 {
    let rule = volume_rule(t.dim(), layers, order);
    let gl = *t.grad_lambdas();
    let mut s = 0.0;
    for (lam, w) in rule.points().iter().zip(rule.weights()) {
        let p = Pt { lam: *lam, x: t.point(lam), gl };
        s += w * f(&p);
    }
    t.volume() * s
}

/// `∫_{F_k} f`.
pub fn integrate_face<F: FnMut(&Pt) -> f64>(t: &Simplex, k: usize, layers: Layers, order: usize, mut f: F) -> f64 {
    let rule = face_rule(t.dim(), k, layers, order);
    let gl = *t.grad_lambdas();
    let mut s = 0.0;
    for (lam, w) in rule.points().iter().zip(rule.weights()) {
        let p = Pt { lam: *lam, x: t.point(lam), gl };
        s += w * f(&p);
    }
    t.face_measure(k) * s
}

/// `Σ_F ∫_F f(F, ·)`.
pub fn integrate_boundary<F: FnMut(usize, &Pt) -> f64>(t: &Simplex, layers: Layers, order: usize, mut f: F) -> f64 {
    (0..=t.dim()).map(|k| integrate_face(t, k, layers, order, |p| f(k, p))).sum()
}

/// `‖v‖_T` and `‖∇v‖_T`.
pub fn scalar_norms(t: &Simplex, v: &dyn ScalarField) -> (f64, f64) {
    let rule = volume_rule(t.dim(), v.layers(), 2 * v.degree());
    let gl = *t.grad_lambdas();
    let (mut v2, mut g2) = (0.0, 0.0);
    for (lam, w) in rule.points().iter().zip(rule.weights()) {
        let p = Pt { lam: *lam, x: t.point(lam), gl };
        let (x, g) = v.eval(&p);
        v2 += w * x * x;
        g2 += w * dot3(&g, &g);
    }
    ((t.volume() * v2).sqrt(), (t.volume() * g2).sqrt())
}

/// `‖τ‖_T` and `‖div τ‖_T`.
pub fn vector_norms(t: &Simplex, v: &dyn VectorField) -> (f64, f64) {
    let rule = volume_rule(t.dim(), v.layers(), 2 * v.degree());
    let gl = *t.grad_lambdas();
    let (mut v2, mut d2) = (0.0, 0.0);
    for (lam, w) in rule.points().iter().zip(rule.weights()) {
        let p = Pt { lam: *lam, x: t.point(lam), gl };
        let (x, d) = v.eval(&p);
        v2 += w * dot3(&x, &x);
        d2 += w * d * d;
    }
    ((t.volume() * v2).sqrt(), (t.volume() * d2).sqrt())
}
