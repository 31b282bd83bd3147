//! Element-local Fortin operators for `H¹` and `H(div)`.
//!
//! Every operator is a sequence of stages. A stage pairs functionals `ℓ_i`
//! with target functions `φ_i` and sets
//! `c_i = (ℓ_i(v) − Σ_{earlier} c_j ℓ_i(φ_j)) / ℓ_i(φ_i)`, which is the
//! quotient form `ℓ_i(v − Π_prev v) / ℓ_i(φ_i)` of the definitions.

use crate::bubbles::{
    bernardi_raugel, decay, edge_functions, eta_edge, face_functions, modified_trace_functions, nu, rt0,
    sigma_edge, trace_functions, volume_functions,
};
use crate::error::{Error, Result};
use crate::field::{dot3, Decay, ExpPoly, Poly, Pt, ScalarField, VecExp, VectorField};
use crate::geometry::Simplex;
use crate::helmholtz::{helmholtz_split, HelmholtzSplit};
use crate::linalg::Mat;
use crate::polyspace::{bernstein, bernstein_sup, element_bubble, gram_rank, multi_indices, DimReport, PolySpace};
use crate::quadrature::{face_rule, lattice_face_rule, lattice_volume_rule, volume_rule, Layers, QuadratureRule};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::fmt;
use std::ops::Range;
use std::str::FromStr;
use std::sync::Arc;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FortinVariant {
    H1TildeHp,
    H1Hp,
    H1TildeHpAlpha,
    H1HpAlpha,
    H1Lowest,
    DivTildeHp,
    DivHp,
    DivAux,
    DivHpAlpha,
    Div1,
    Div2,
    DivAlphaLowest,
}

/// Which moment conditions an operator preserves.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Claims {
    pub boundary: bool,
    pub volume: bool,
    pub derived: bool,
}

impl FortinVariant {
    pub const ALL: [FortinVariant; 12] = [
        FortinVariant::H1TildeHp,
        FortinVariant::H1Hp,
        FortinVariant::H1TildeHpAlpha,
        FortinVariant::H1HpAlpha,
        FortinVariant::H1Lowest,
        FortinVariant::DivTildeHp,
        FortinVariant::DivHp,
        FortinVariant::DivAux,
        FortinVariant::DivHpAlpha,
        FortinVariant::Div1,
        FortinVariant::Div2,
        FortinVariant::DivAlphaLowest,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FortinVariant::H1TildeHp => "h1-tilde-hp",
            FortinVariant::H1Hp => "h1-hp",
            FortinVariant::H1TildeHpAlpha => "h1-tilde-hp-alpha",
            FortinVariant::H1HpAlpha => "h1-hp-alpha",
            FortinVariant::H1Lowest => "h1-lowest",
            FortinVariant::DivTildeHp => "div-tilde-hp",
            FortinVariant::DivHp => "div-hp",
            FortinVariant::DivAux => "div-aux",
            FortinVariant::DivHpAlpha => "div-hp-alpha",
            FortinVariant::Div1 => "div-1",
            FortinVariant::Div2 => "div-2",
            FortinVariant::DivAlphaLowest => "div-alpha-lowest",
        }
    }

    pub fn is_h1(self) -> bool {
        matches!(
            self,
            FortinVariant::H1TildeHp
                | FortinVariant::H1Hp
                | FortinVariant::H1TildeHpAlpha
                | FortinVariant::H1HpAlpha
                | FortinVariant::H1Lowest
        )
    }

    /// Uses exponentially modified bubbles.
    pub fn is_modified(self) -> bool {
        matches!(
            self,
            FortinVariant::H1TildeHpAlpha
                | FortinVariant::H1HpAlpha
                | FortinVariant::DivAux
                | FortinVariant::DivHpAlpha
                | FortinVariant::DivAlphaLowest
        )
    }

    /// Lowest-order operators ignore `p`.
    pub fn is_lowest(self) -> bool {
        matches!(self, FortinVariant::H1Lowest | FortinVariant::Div1 | FortinVariant::Div2 | FortinVariant::DivAlphaLowest)
    }

    pub fn needs_split(self) -> bool {
        self == FortinVariant::DivHpAlpha
    }

    pub fn effective_p(self, p: usize) -> usize {
        if self.is_lowest() {
            0
        } else {
            p
        }
    }

    pub fn claims(self, p: usize) -> Claims {
        use FortinVariant::*;
        match self {
            H1TildeHp | H1TildeHpAlpha => Claims { boundary: true, volume: false, derived: self.effective_p(p) == 0 },
            DivTildeHp | DivAux => Claims { boundary: true, volume: false, derived: false },
            _ => Claims { boundary: true, volume: true, derived: true },
        }
    }
}

impl fmt::Display for FortinVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FortinVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FortinVariant::ALL
            .iter()
            .copied()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown variant '{s}'")))
    }
}

/// A linear functional of a scalar or vector field.
#[derive(Clone, Debug)]
pub enum Functional {
    /// `(g, v)_T`
    Mass(ExpPoly),
    /// `⟨g, v⟩_{F_k}`
    Face(usize, Poly),
    /// `(g, ∇v)_T`
    Grad(VecExp),
    /// `(g, τ)_T`
    VecMass(VecExp),
    /// `⟨g, τ·n⟩_{∂T}` with `g` given face by face.
    Normal(Vec<Poly>),
    /// `(g, div τ)_T`
    Div(ExpPoly),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Domain {
    Volume,
    Derivative,
    Face(usize),
    Boundary,
}

impl Functional {
    fn domain(&self) -> Domain {
        match self {
            Functional::Mass(_) | Functional::VecMass(_) => Domain::Volume,
            Functional::Grad(_) | Functional::Div(_) => Domain::Derivative,
            Functional::Face(k, _) => Domain::Face(*k),
            Functional::Normal(_) => Domain::Boundary,
        }
    }

    fn degree(&self) -> usize {
        match self {
            Functional::Mass(g) | Functional::Div(g) => g.poly_degree(),
            Functional::Grad(g) | Functional::VecMass(g) => g.poly_degree(),
            Functional::Face(_, g) => g.degree(),
            Functional::Normal(g) => g.iter().map(|x| x.degree()).max().unwrap_or(0),
        }
    }

    fn layers(&self) -> Layers {
        match self {
            Functional::Mass(g) | Functional::Div(g) => g.layer_info(),
            Functional::Grad(g) | Functional::VecMass(g) => g.layer_info(),
            _ => Layers::none(),
        }
    }

    /// `‖g‖` on the domain of integration.
    fn weight_norm(&self, t: &Simplex) -> f64 {
        let layers = self.layers();
        let order = 2 * self.degree();
        let n = t.dim();
        match self {
            Functional::Mass(g) | Functional::Div(g) => {
                crate::field::integrate_volume(t, layers, order, |p| g.value(&p.lam).powi(2)).sqrt()
            }
            Functional::Grad(g) | Functional::VecMass(g) => crate::field::integrate_volume(t, layers, order, |p| {
                let v = g.value(&p.lam);
                dot3(&v, &v)
            })
            .sqrt(),
            Functional::Face(k, g) => crate::field::integrate_face(t, *k, layers, order, |p| g.eval(&p.lam).powi(2)).sqrt(),
            Functional::Normal(g) => (0..=n)
                .map(|k| crate::field::integrate_face(t, k, layers, order, |p| g[k].eval(&p.lam).powi(2)))
                .sum::<f64>()
                .sqrt(),
        }
    }
}

/// A field to be measured: scalar with gradient or vector with divergence.
#[derive(Clone, Copy)]
pub enum FieldRef<'a> {
    Scalar(&'a dyn ScalarField),
    Vector(&'a dyn VectorField),
}

impl FieldRef<'_> {
    fn layers(&self) -> Layers {
        match self {
            FieldRef::Scalar(f) => f.layers(),
            FieldRef::Vector(f) => f.layers(),
        }
    }

    fn degree(&self) -> usize {
        match self {
            FieldRef::Scalar(f) => f.degree(),
            FieldRef::Vector(f) => f.degree(),
        }
    }

    fn lattice(&self) -> usize {
        match self {
            FieldRef::Scalar(f) => f.lattice(),
            FieldRef::Vector(f) => f.lattice(),
        }
    }

    /// Value (first component for scalars), and derivative data.
    fn eval(&self, p: &Pt) -> ([f64; 3], [f64; 3], bool) {
        match self {
            FieldRef::Scalar(f) => {
                let (v, g) = f.eval(p);
                ([v, 0.0, 0.0], g, true)
            }
            FieldRef::Vector(f) => {
                let (v, d) = f.eval(p);
                (v, [d, 0.0, 0.0], false)
            }
        }
    }
}

/// Functional values and squared norms of a measured field.
#[derive(Clone, Debug, Default)]
pub struct Measured {
    pub values: Vec<f64>,
    /// `‖v‖²_T`
    pub l2: f64,
    /// `‖∇v‖²_T` or `‖div τ‖²_T`
    pub d2: f64,
    /// `‖v‖²_F` or `‖τ·n‖²_F` per face.
    pub face_l2: [f64; 4],
}

fn rules(t: &Simplex, layers: Layers, order: usize, lattice: usize) -> (Arc<QuadratureRule>, Vec<Arc<QuadratureRule>>) {
    let n = t.dim();
    if lattice > 1 && n == 2 {
        let order = order.min(12);
        (lattice_volume_rule(lattice, order), (0..=n).map(|k| lattice_face_rule(k, lattice, order)).collect())
    } else {
        (volume_rule(n, layers, order), (0..=n).map(|k| face_rule(n, k, layers, order)).collect())
    }
}

/// Measures every field against every functional, using one rule that
/// resolves the union of all layers.
pub fn measure_many(t: &Simplex, fields: &[FieldRef], fs: &[&Functional]) -> Vec<Measured> {
    let n = t.dim();
    let flayers = fs.iter().fold(Layers::none(), |a, x| a.union(x.layers()));
    let fdeg = fs.iter().map(|x| x.degree()).max().unwrap_or(0);
    let layers = fields.iter().fold(flayers, |a, x| a.union(x.layers()));
    let deg = fields.iter().map(|f| f.degree()).max().unwrap_or(0);
    let lattice = fields.iter().map(|f| f.lattice()).max().unwrap_or(1);
    let order = (2 * deg).max(deg + fdeg).max(2);
    let (vrule, frules) = rules(t, layers, order, lattice);
    let gl = *t.grad_lambdas();
    let mut out: Vec<Measured> =
        fields.iter().map(|_| Measured { values: vec![0.0; fs.len()], ..Default::default() }).collect();
    let vol_idx: Vec<usize> = (0..fs.len()).filter(|&i| matches!(fs[i].domain(), Domain::Volume | Domain::Derivative)).collect();
    let vol = t.volume();
    let mut weights = vec![[0.0; 3]; fs.len()];
    for (lam, w) in vrule.points().iter().zip(vrule.weights()) {
        let p = Pt { lam: *lam, x: t.point(lam), gl };
        for &i in &vol_idx {
            weights[i] = match fs[i] {
                Functional::Mass(g) | Functional::Div(g) => [g.value(lam), 0.0, 0.0],
                Functional::Grad(g) | Functional::VecMass(g) => g.value(lam),
                _ => unreachable!(),
            };
        }
        let wv = w * vol;
        for (fi, f) in fields.iter().enumerate() {
            let (v, d, scalar) = f.eval(&p);
            let m = &mut out[fi];
            if scalar {
                m.l2 += wv * v[0] * v[0];
                m.d2 += wv * dot3(&d, &d);
            } else {
                m.l2 += wv * dot3(&v, &v);
                m.d2 += wv * d[0] * d[0];
            }
            for &i in &vol_idx {
                let g = &weights[i];
                m.values[i] += wv
                    * match (fs[i], scalar) {
                        (Functional::Mass(_), true) => g[0] * v[0],
                        (Functional::Grad(_), true) => dot3(g, &d),
                        (Functional::VecMass(_), false) => dot3(g, &v),
                        (Functional::Div(_), false) => g[0] * d[0],
                        _ => 0.0,
                    };
            }
        }
    }
    for k in 0..=n {
        let idx: Vec<usize> = (0..fs.len())
            .filter(|&i| match fs[i].domain() {
                Domain::Face(j) => j == k,
                Domain::Boundary => true,
                _ => false,
            })
            .collect();
        let nk = t.normal(k);
        let fm = t.face_measure(k);
        for (lam, w) in frules[k].points().iter().zip(frules[k].weights()) {
            let p = Pt { lam: *lam, x: t.point(lam), gl };
            let g: Vec<f64> = idx
                .iter()
                .map(|&i| match fs[i] {
                    Functional::Face(_, g) => g.eval(lam),
                    Functional::Normal(g) => g[k].eval(lam),
                    _ => unreachable!(),
                })
                .collect();
            let wf = w * fm;
            for (fi, f) in fields.iter().enumerate() {
                let (v, _, scalar) = f.eval(&p);
                let tr = if scalar { v[0] } else { dot3(&v, &nk) };
                let m = &mut out[fi];
                m.face_l2[k] += wf * tr * tr;
                for (a, &i) in idx.iter().enumerate() {
                    let ok = matches!((fs[i], scalar), (Functional::Face(..), true) | (Functional::Normal(_), false));
                    if ok {
                        m.values[i] += wf * g[a] * tr;
                    }
                }
            }
        }
    }
    out
}

#[derive(Clone, Debug)]
enum Basis {
    Scalar(Vec<ExpPoly>),
    Vector(Vec<VecExp>),
}

impl Basis {
    fn len(&self) -> usize {
        match self {
            Basis::Scalar(b) => b.len(),
            Basis::Vector(b) => b.len(),
        }
    }

    fn refs(&self) -> Vec<FieldRef<'_>> {
        match self {
            Basis::Scalar(b) => b.iter().map(|f| FieldRef::Scalar(f as &dyn ScalarField)).collect(),
            Basis::Vector(b) => b.iter().map(|f| FieldRef::Vector(f as &dyn VectorField)).collect(),
        }
    }
}

#[derive(Clone, Debug)]
struct Part {
    range: Range<usize>,
    stages: Vec<Range<usize>>,
}

#[derive(Default)]
struct Builder {
    scalars: Vec<ExpPoly>,
    vectors: Vec<VecExp>,
    functionals: Vec<Functional>,
    parts: Vec<Part>,
}

impl Builder {
    fn len(&self) -> usize {
        self.functionals.len()
    }

    fn part(&mut self) {
        let s = self.len();
        self.parts.push(Part { range: s..s, stages: Vec::new() });
    }

    fn scalar_stage(&mut self, items: Vec<(Functional, ExpPoly)>) {
        let s = self.len();
        for (f, b) in items {
            self.functionals.push(f);
            self.scalars.push(b);
        }
        self.close(s);
    }

    fn vector_stage(&mut self, items: Vec<(Functional, VecExp)>) {
        let s = self.len();
        for (f, b) in items {
            self.functionals.push(f);
            self.vectors.push(b);
        }
        self.close(s);
    }

    fn close(&mut self, s: usize) {
        let e = self.len();
        let part = self.parts.last_mut().expect("stage outside a part");
        part.stages.push(s..e);
        part.range.end = e;
    }
}

fn unit(d: usize) -> [f64; 3] {
    let mut e = [0.0; 3];
    e[d] = 1.0;
    e
}

fn one() -> ExpPoly {
    ExpPoly::poly(Poly::constant(1.0))
}

fn scalar_mean_stage(b: &mut Builder) {
    b.scalar_stage(vec![(Functional::Mass(one()), one())]);
}

fn vector_mean_stage(b: &mut Builder, n: usize) {
    b.vector_stage((0..n).map(|d| (Functional::VecMass(VecExp::constant(unit(d))), VecExp::constant(unit(d)))).collect());
}

fn face_stage(b: &mut Builder, t: &Simplex, p: usize, alpha: f64) -> Result<()> {
    let mut items = Vec::new();
    for f in face_functions(t, p)? {
        let d = decay(t, f.face, alpha);
        for (bub, dual) in f.bubbles.into_iter().zip(f.duals) {
            let field = match d {
                Some(d) => ExpPoly::with_decay(bub, d),
                None => ExpPoly::poly(bub),
            };
            items.push((Functional::Face(f.face, dual), field));
        }
    }
    b.scalar_stage(items);
    Ok(())
}

fn element_stage(b: &mut Builder, t: &Simplex, p: usize) -> Result<()> {
    let v = volume_functions(t, p)?;
    b.scalar_stage(
        v.duals.into_iter().zip(v.bubbles).map(|(d, bub)| (Functional::Mass(ExpPoly::poly(d)), ExpPoly::poly(bub))).collect(),
    );
    Ok(())
}

fn edge_stage(b: &mut Builder, t: &Simplex, p: usize) -> Result<()> {
    let mut items = Vec::new();
    for e in edge_functions(t, p)? {
        for (s, eta) in e.sigmas.into_iter().zip(e.etas) {
            items.push((Functional::VecMass(s), eta));
        }
    }
    b.vector_stage(items);
    Ok(())
}

fn lowest_edge_stage(b: &mut Builder, t: &Simplex) {
    b.vector_stage((1..=t.dim()).map(|j| (Functional::VecMass(sigma_edge(t, j)), eta_edge(t, j))).collect());
}

fn trace_stage(b: &mut Builder, t: &Simplex, p: usize) -> Result<()> {
    let n = t.dim();
    let tf = trace_functions(t, p)?;
    b.vector_stage(tf.duals.into_iter().zip(tf.fluxes).map(|(d, f)| (Functional::Normal(vec![d; n + 1]), f)).collect());
    Ok(())
}

fn aux_stages(b: &mut Builder, t: &Simplex, p: usize, alpha: f64) -> Result<()> {
    let n = t.dim();
    vector_mean_stage(b, n);
    let mf = modified_trace_functions(t, alpha, p)?;
    b.vector_stage(mf.duals.into_iter().zip(mf.fields).map(|(d, f)| (Functional::Normal(vec![d; n + 1]), f)).collect());
    Ok(())
}

fn lowest_face_div_stage(b: &mut Builder, t: &Simplex, alpha: Option<f64>) {
    let n = t.dim();
    b.vector_stage(
        (0..=n)
            .map(|k| {
                let g = Functional::Normal(vec![nu(n, k); n + 1]);
                let f = match alpha {
                    None => rt0(t, k),
                    Some(a) => bernardi_raugel(t, k, a),
                };
                (g, f)
            })
            .collect(),
    );
}

fn build(variant: FortinVariant, t: &Simplex, p: usize, alpha: f64) -> Result<Builder> {
    use FortinVariant::*;
    let n = t.dim();
    let inf = f64::INFINITY;
    let mut b = Builder::default();
    b.part();
    match variant {
        H1TildeHp | H1Hp | H1TildeHpAlpha | H1HpAlpha => {
            scalar_mean_stage(&mut b);
            face_stage(&mut b, t, p, if variant.is_modified() { alpha } else { inf })?;
            if matches!(variant, H1Hp | H1HpAlpha) {
                element_stage(&mut b, t, p)?;
            }
        }
        H1Lowest => {
            scalar_mean_stage(&mut b);
            b.scalar_stage((0..=n).map(|k| (Functional::Face(k, Poly::constant(1.0)), ExpPoly::poly(nu(n, k)))).collect());
            b.scalar_stage(vec![(Functional::Mass(one()), ExpPoly::poly(element_bubble(n)))]);
        }
        DivTildeHp | DivHp => {
            trace_stage(&mut b, t, p)?;
            if variant == DivHp {
                edge_stage(&mut b, t, p)?;
            }
        }
        DivAux => aux_stages(&mut b, t, p, alpha)?,
        DivHpAlpha => {
            if n != 2 {
                return Err(Error::Unsupported("the small-parameter H(div) operator is implemented for n = 2".into()));
            }
            trace_stage(&mut b, t, p)?;
            edge_stage(&mut b, t, p)?;
            b.part();
            aux_stages(&mut b, t, p, alpha)?;
            edge_stage(&mut b, t, p)?;
        }
        Div1 => {
            // ψ_F with the ν_F duals, then the edge correction
            lowest_face_div_stage(&mut b, t, None);
            lowest_edge_stage(&mut b, t);
        }
        Div2 | DivAlphaLowest => {
            vector_mean_stage(&mut b, n);
            let a = if variant == Div2 { inf } else { alpha };
            lowest_face_div_stage(&mut b, t, Some(a));
            lowest_edge_stage(&mut b, t);
        }
    }
    Ok(b)
}

/// Functionals testing the three moment conditions for an operator of
/// degree `p`.
fn check_functionals(t: &Simplex, h1: bool, p: usize) -> [Vec<Functional>; 3] {
    let n = t.dim();
    let all: Vec<usize> = (0..=n).collect();
    if h1 {
        let boundary = (0..=n)
            .flat_map(|k| {
                let verts = t.face_vertices(k);
                multi_indices(n, p).into_iter().map(move |b| Functional::Face(k, bernstein_sup(&verts, &b)))
            })
            .collect();
        let volume = multi_indices(n + 1, p).iter().map(|b| Functional::Mass(ExpPoly::poly(bernstein_sup(&all, b)))).collect();
        let derived = multi_indices(n + 1, p)
            .iter()
            .flat_map(|b| {
                let g = ExpPoly::poly(bernstein_sup(&all, b));
                (0..n).map(move |d| Functional::Grad(VecExp::single(g.clone(), unit(d))))
            })
            .collect();
        [boundary, volume, derived]
    } else {
        let boundary = multi_indices(n + 1, p + 1)
            .iter()
            .filter(|b| b.contains(&0))
            .map(|b| Functional::Normal(vec![bernstein_sup(&all, b); n + 1]))
            .collect();
        let volume = multi_indices(n + 1, p)
            .iter()
            .flat_map(|b| {
                let g = ExpPoly::poly(bernstein_sup(&all, b));
                (0..n).map(move |d| Functional::VecMass(VecExp::single(g.clone(), unit(d))))
            })
            .collect();
        let derived = multi_indices(n + 1, p + 1).iter().map(|b| Functional::Div(ExpPoly::poly(bernstein_sup(&all, b)))).collect();
        [boundary, volume, derived]
    }
}

/// Normalized moment residuals `|ℓ(v − Πv)| / (‖w‖ (‖v‖ + ‖Πv‖))`, maximized
/// over each dual set.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MomentResiduals {
    pub boundary: f64,
    pub volume: f64,
    pub derived: f64,
}

impl MomentResiduals {
    pub fn max(&self, o: &MomentResiduals) -> MomentResiduals {
        MomentResiduals {
            boundary: self.boundary.max(o.boundary),
            volume: self.volume.max(o.volume),
            derived: self.derived.max(o.derived),
        }
    }

    /// Largest residual among the claimed conditions.
    pub fn claimed_max(&self, c: Claims) -> f64 {
        let mut r: f64 = 0.0;
        if c.boundary {
            r = r.max(self.boundary);
        }
        if c.volume {
            r = r.max(self.volume);
        }
        if c.derived {
            r = r.max(self.derived);
        }
        r
    }
}

/// Result of applying an operator: coefficients in the target basis and
/// measurements of the argument.
#[derive(Clone, Debug)]
pub struct Application {
    pub coeffs: Vec<f64>,
    probe: Measured,
}

pub struct FortinOperator {
    variant: FortinVariant,
    p: usize,
    alpha: f64,
    t: Simplex,
    basis: Basis,
    functionals: Vec<Functional>,
    parts: Vec<Part>,
    cross: Mat,
    checks: [Vec<Functional>; 3],
    check_cross: [Mat; 3],
    check_norms: [Vec<f64>; 3],
    claims: Claims,
    gram_l2: Mat,
    gram_d: Mat,
    gram_face: Vec<Mat>,
}

fn grams(t: &Simplex, basis: &Basis) -> (Mat, Mat, Vec<Mat>) {
    let refs = basis.refs();
    let m = refs.len();
    let n = t.dim();
    let layers = refs.iter().fold(Layers::none(), |a, f| a.union(f.layers()));
    let deg = refs.iter().map(|f| f.degree()).max().unwrap_or(0);
    let (vrule, frules) = rules(t, layers, 2 * deg, 1);
    let gl = *t.grad_lambdas();
    let mut g0 = Mat::zeros(m, m);
    let mut g1 = Mat::zeros(m, m);
    let mut gf = vec![Mat::zeros(m, m); n + 1];
    let vol = t.volume();
    for (lam, w) in vrule.points().iter().zip(vrule.weights()) {
        let p = Pt { lam: *lam, x: t.point(lam), gl };
        let ev: Vec<_> = refs.iter().map(|f| f.eval(&p)).collect();
        for a in 0..m {
            for b in 0..=a {
                let (va, da, s) = ev[a];
                let (vb, db, _) = ev[b];
                let (x0, x1) = if s { (va[0] * vb[0], dot3(&da, &db)) } else { (dot3(&va, &vb), da[0] * db[0]) };
                g0[(a, b)] += w * vol * x0;
                g1[(a, b)] += w * vol * x1;
            }
        }
    }
    for k in 0..=n {
        let nk = t.normal(k);
        for (lam, w) in frules[k].points().iter().zip(frules[k].weights()) {
            let p = Pt { lam: *lam, x: t.point(lam), gl };
            let tr: Vec<f64> = refs
                .iter()
                .map(|f| {
                    let (v, _, s) = f.eval(&p);
                    if s {
                        v[0]
                    } else {
                        dot3(&v, &nk)
                    }
                })
                .collect();
            for a in 0..m {
                for b in 0..=a {
                    gf[k][(a, b)] += w * t.face_measure(k) * tr[a] * tr[b];
                }
            }
        }
    }
    for g in std::iter::once(&mut g0).chain(std::iter::once(&mut g1)).chain(gf.iter_mut()) {
        for a in 0..m {
            for b in 0..a {
                g[(b, a)] = g[(a, b)];
            }
        }
    }
    (g0, g1, gf)
}

fn values_matrix(ms: &[Measured], rows: Range<usize>) -> Mat {
    Mat::from_fn(rows.len(), ms.len(), |i, j| ms[j].values[rows.start + i])
}

impl FortinOperator {
    /// Operator on `t` of degree `p`; `alpha` is the physical parameter used
    /// by the modified variants and ignored otherwise.
    pub fn new(variant: FortinVariant, t: &Simplex, p: usize, alpha: f64) -> Result<Self> {
        if variant.is_modified() && !(alpha > 0.0) {
            return Err(Error::OutOfRange(format!("alpha must be positive, got {alpha}")));
        }
        let p = variant.effective_p(p);
        let alpha = if variant.is_modified() { alpha } else { f64::INFINITY };
        let b = build(variant, t, p, alpha)?;
        let basis = if variant.is_h1() { Basis::Scalar(b.scalars) } else { Basis::Vector(b.vectors) };
        let checks = check_functionals(t, variant.is_h1(), p);
        let mut all: Vec<&Functional> = b.functionals.iter().collect();
        let offs = [all.len(), all.len() + checks[0].len(), all.len() + checks[0].len() + checks[1].len()];
        for c in &checks {
            all.extend(c.iter());
        }
        let ms = measure_many(t, &basis.refs(), &all);
        let nf = b.functionals.len();
        let cross = values_matrix(&ms, 0..nf);
        let check_cross = [
            values_matrix(&ms, offs[0]..offs[0] + checks[0].len()),
            values_matrix(&ms, offs[1]..offs[1] + checks[1].len()),
            values_matrix(&ms, offs[2]..offs[2] + checks[2].len()),
        ];
        let check_norms = [0, 1, 2].map(|g| checks[g].iter().map(|f| f.weight_norm(t)).collect());
        let (gram_l2, gram_d, gram_face) = grams(t, &basis);
        for i in 0..nf {
            if cross[(i, i)].abs() < 1e-300 {
                return Err(Error::Singular(format!("{} has a vanishing denominator", variant.name())));
            }
        }
        Ok(FortinOperator {
            variant,
            p,
            alpha,
            t: t.clone(),
            basis,
            functionals: b.functionals,
            parts: b.parts,
            cross,
            checks,
            check_cross,
            check_norms,
            claims: variant.claims(p),
            gram_l2,
            gram_d,
            gram_face,
        })
    }

    /// Drops the element-bubble correction of `H¹` operators, which keeps
    /// only the boundary moments and the weaker volume condition.
    pub fn weak_volume(mut self) -> Self {
        if self.variant.is_h1() && matches!(self.variant, FortinVariant::H1Hp | FortinVariant::H1HpAlpha | FortinVariant::H1Lowest) {
            let part = &mut self.parts[0];
            if let Some(last) = part.stages.pop() {
                part.range.end = last.start;
                let keep = last.start;
                self.functionals.truncate(keep);
                self.basis = match self.basis {
                    Basis::Scalar(mut b) => {
                        b.truncate(keep);
                        Basis::Scalar(b)
                    }
                    Basis::Vector(mut b) => {
                        b.truncate(keep);
                        Basis::Vector(b)
                    }
                };
                let idx: Vec<usize> = (0..keep).collect();
                self.cross = self.cross.submatrix(&idx, &idx);
                self.check_cross = self.check_cross.clone().map(|m| {
                    let rows: Vec<usize> = (0..m.rows()).collect();
                    m.submatrix(&rows, &idx)
                });
                self.gram_l2 = self.gram_l2.submatrix(&idx, &idx);
                self.gram_d = self.gram_d.submatrix(&idx, &idx);
                self.gram_face = self.gram_face.iter().map(|g| g.submatrix(&idx, &idx)).collect();
                self.claims = Claims { boundary: true, volume: false, derived: self.p == 0 };
            }
        }
        self
    }

    pub fn variant(&self) -> FortinVariant {
        self.variant
    }

    pub fn degree(&self) -> usize {
        self.p
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn claims(&self) -> Claims {
        self.claims
    }

    pub fn simplex(&self) -> &Simplex {
        &self.t
    }

    /// Number of target functions (a spanning set of the target space).
    pub fn basis_len(&self) -> usize {
        self.basis.len()
    }

    /// Dimension of the target space.
    pub fn target_dim(&self) -> usize {
        gram_rank(&self.gram_l2)
    }

    fn stage_coefficients(&self, part: &Part, values: &[f64], c: &mut [f64]) {
        let mut done: Vec<usize> = Vec::new();
        for stage in &part.stages {
            for i in stage.clone() {
                let mut r = values[i];
                for &j in &done {
                    r -= c[j] * self.cross[(i, j)];
                }
                c[i] = r / self.cross[(i, i)];
            }
            done.extend(stage.clone());
        }
    }

    fn check_refs(&self) -> Vec<&Functional> {
        self.functionals.iter().chain(self.checks.iter().flatten()).collect()
    }

    pub fn apply_h1(&self, v: &dyn ScalarField) -> Result<Application> {
        if !self.variant.is_h1() {
            return Err(Error::Unsupported(format!("{} acts on vector fields", self.variant)));
        }
        let probe = measure_many(&self.t, &[FieldRef::Scalar(v)], &self.check_refs()).remove(0);
        let mut c = vec![0.0; self.functionals.len()];
        self.stage_coefficients(&self.parts[0], &probe.values, &mut c);
        Ok(Application { coeffs: c, probe })
    }

    /// Applies an `H(div)` operator. The split is required by
    /// [`FortinVariant::DivHpAlpha`]; without one it is computed numerically.
    pub fn apply_hdiv(&self, tau: &dyn VectorField, split: Option<&HelmholtzSplit>) -> Result<Application> {
        if self.variant.is_h1() {
            return Err(Error::Unsupported(format!("{} acts on scalar fields", self.variant)));
        }
        let fs = self.check_refs();
        let probe = measure_many(&self.t, &[FieldRef::Vector(tau)], &fs).remove(0);
        let mut c = vec![0.0; self.functionals.len()];
        if self.variant.needs_split() {
            let nf = self.functionals.len();
            let stage_fs: Vec<&Functional> = fs[..nf].to_vec();
            let (curl, grad) = match split {
                Some(s) => {
                    let ms = measure_many(
                        &self.t,
                        &[FieldRef::Vector(s.curl_q.as_ref()), FieldRef::Vector(s.grad_r.as_ref())],
                        &stage_fs,
                    );
                    (ms[0].values.clone(), ms[1].values.clone())
                }
                None => {
                    // curl part by linearity, so that τ keeps its graded rule
                    let s = helmholtz_split(tau, &self.t)?;
                    let g = measure_many(&self.t, &[FieldRef::Vector(s.grad_r.as_ref())], &stage_fs).remove(0).values;
                    let q: Vec<f64> = probe.values[..nf].iter().zip(&g).map(|(a, b)| a - b).collect();
                    (q, g)
                }
            };
            self.stage_coefficients(&self.parts[0], &curl, &mut c);
            self.stage_coefficients(&self.parts[1], &grad, &mut c);
        } else {
            self.stage_coefficients(&self.parts[0], &probe.values, &mut c);
        }
        Ok(Application { coeffs: c, probe })
    }

    /// Applies the operator to a probe.
    pub fn apply(&self, probe: &Probe) -> Result<Application> {
        match probe {
            Probe::Scalar(v) => self.apply_h1(v),
            Probe::Vector(v) => self.apply_hdiv(v, None),
            Probe::Split { r, q } => {
                let split = HelmholtzSplit::exact(&self.t, r.clone(), q.clone())?;
                let tau = split.grad_r.as_ref();
                let sum = crate::field::SumVector { a: tau, b: split.curl_q.as_ref() };
                if self.variant.needs_split() {
                    self.apply_hdiv(&sum, Some(&split))
                } else {
                    self.apply_hdiv(&sum, None)
                }
            }
        }
    }

    /// `Πv` as a scalar field.
    pub fn scalar_field(&self, c: &[f64]) -> Option<ExpPoly> {
        match &self.basis {
            Basis::Scalar(b) => Some(b.iter().zip(c).fold(ExpPoly::default(), |acc, (f, x)| acc.add(&f.scale(*x)))),
            Basis::Vector(_) => None,
        }
    }

    /// `Πτ` as a vector field.
    pub fn vector_field(&self, c: &[f64]) -> Option<VecExp> {
        match &self.basis {
            Basis::Vector(b) => Some(b.iter().zip(c).fold(VecExp::default(), |acc, (f, x)| acc.add(&f.scale(*x)))),
            Basis::Scalar(_) => None,
        }
    }

    fn image_norm(&self, c: &[f64], d: Domain) -> f64 {
        match d {
            Domain::Volume => self.gram_l2.bilinear(c, c),
            Domain::Derivative => self.gram_d.bilinear(c, c),
            Domain::Face(k) => self.gram_face[k].bilinear(c, c),
            Domain::Boundary => self.gram_face.iter().map(|g| g.bilinear(c, c)).sum(),
        }
        .max(0.0)
        .sqrt()
    }

    pub fn residuals(&self, app: &Application) -> MomentResiduals {
        let nf = self.functionals.len();
        let mut off = nf;
        let mut out = [0.0; 3];
        for g in 0..3 {
            let mut r: f64 = 0.0;
            for (i, f) in self.checks[g].iter().enumerate() {
                let lv = app.probe.values[off + i];
                let lp: f64 = (0..nf).map(|j| app.coeffs[j] * self.check_cross[g][(i, j)]).sum();
                let d = f.domain();
                let pv = match d {
                    Domain::Volume => app.probe.l2,
                    Domain::Derivative => app.probe.d2,
                    Domain::Face(k) => app.probe.face_l2[k],
                    Domain::Boundary => app.probe.face_l2.iter().sum(),
                }
                .sqrt();
                let scale = self.check_norms[g][i] * (pv + self.image_norm(&app.coeffs, d));
                if scale > 0.0 {
                    r = r.max((lv - lp).abs() / scale);
                }
            }
            out[g] = r;
            off += self.checks[g].len();
        }
        MomentResiduals { boundary: out[0], volume: out[1], derived: out[2] }
    }

    /// `‖Πv‖_{T,α} / ‖v‖_{T,α}` with `‖v‖²_{T,α} = ‖v‖² + α²‖Dv‖²`.
    pub fn ratio(&self, app: &Application, alpha: f64) -> f64 {
        let c = &app.coeffs;
        let a2 = alpha * alpha;
        let num = self.gram_l2.bilinear(c, c) + a2 * self.gram_d.bilinear(c, c);
        let den = app.probe.l2 + a2 * app.probe.d2;
        (num.max(0.0) / den).sqrt()
    }

    /// `‖v‖_T` and `‖Dv‖_T` of the argument.
    pub fn argument_norms(&self, app: &Application) -> (f64, f64) {
        (app.probe.l2.sqrt(), app.probe.d2.sqrt())
    }

    /// `‖Πv‖_T` and `‖DΠv‖_T`.
    pub fn image_norms(&self, app: &Application) -> (f64, f64) {
        (self.image_norm(&app.coeffs, Domain::Volume), self.image_norm(&app.coeffs, Domain::Derivative))
    }
}

/// A probe for an operator. Split probes carry `τ = ∇r + curl q` with
/// `r = 0` on `∂T`.
#[derive(Clone, Debug)]
pub enum Probe {
    Scalar(ExpPoly),
    Vector(VecExp),
    Split { r: ExpPoly, q: ExpPoly },
}

fn random_poly(rng: &mut ChaCha8Rng, n: usize, q: usize) -> Poly {
    let verts: Vec<usize> = (0..=n).collect();
    let idx = multi_indices(n + 1, q);
    let polys: Vec<Poly> = idx.iter().map(|b| bernstein(&verts, b)).collect();
    let c: Vec<f64> = (0..polys.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    Poly::combination(&c, &polys)
}

fn random_vector(rng: &mut ChaCha8Rng, n: usize, q: usize, d: Option<Decay>) -> VecExp {
    let mut v = VecExp::default();
    for k in 0..n {
        let p = random_poly(rng, n, q);
        let f = match d {
            Some(d) => ExpPoly::with_decay(p, d),
            None => ExpPoly::poly(p),
        };
        v.push(f, unit(k));
    }
    v
}

const LAYER_SCALES: [f64; 3] = [0.5, 1.0, 2.0];

/// Seeded probes: layer functions `e^{-λ_F h/(cα)}` for every face and
/// `c ∈ {0.5, 1, 2}`, then random polynomials of degree `p+3` alternating with
/// random polynomials times a random layer. `alpha` is physical; pass
/// infinity to use `α = h/100` for the layers.
pub fn probe_family(t: &Simplex, variant: FortinVariant, p: usize, alpha: f64, m: usize, seed: u64) -> Vec<Probe> {
    let n = t.dim();
    let p = variant.effective_p(p);
    let h = t.diameter();
    let alpha = if alpha.is_finite() { alpha } else { h / 100.0 };
    let layer = |k: usize, c: f64| Decay { face: k, rate: h / (c * alpha) };
    let mut rng0 = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(m);
    'det: for &c in &LAYER_SCALES {
        for k in 0..=n {
            if out.len() >= m {
                break 'det;
            }
            let d = layer(k, c);
            out.push(if variant.needs_split() {
                let r = ExpPoly::with_decay(element_bubble(n), d);
                Probe::Split { r, q: ExpPoly::poly(random_poly(&mut rng0, n, 1)) }
            } else if variant.is_h1() {
                Probe::Scalar(ExpPoly::with_decay(Poly::constant(1.0), d))
            } else {
                let dir: Vec<f64> = (0..n).map(|_| rng0.gen_range(-1.0..1.0)).collect();
                let mut v = VecExp::default();
                for (i, x) in dir.iter().enumerate() {
                    v.push(ExpPoly::with_decay(Poly::constant(*x), d), unit(i));
                }
                Probe::Vector(v)
            });
        }
    }
    let start = out.len();
    for i in start..m {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(i as u64));
        let layered = i % 2 == 1;
        let d = if layered {
            Some(layer(rng.gen_range(0..=n), LAYER_SCALES[rng.gen_range(0..3)]))
        } else {
            None
        };
        let q = if layered { p + 1 } else { p + 3 };
        out.push(if variant.needs_split() {
            let rp = random_poly(&mut rng, n, q.saturating_sub(n + 1).max(p)).mul(&element_bubble(n));
            let r = match d {
                Some(d) => ExpPoly::with_decay(rp, d),
                None => ExpPoly::poly(rp),
            };
            Probe::Split { r, q: ExpPoly::poly(random_poly(&mut rng, n, p + 3)) }
        } else if variant.is_h1() {
            let v = random_poly(&mut rng, n, q);
            Probe::Scalar(match d {
                Some(d) => ExpPoly::with_decay(v, d),
                None => ExpPoly::poly(v),
            })
        } else {
            Probe::Vector(random_vector(&mut rng, n, q, d))
        });
    }
    out
}

/// One row of a verification run.
#[derive(Clone, Copy, Debug)]
pub struct SweepRow {
    pub alpha_over_h: f64,
    pub residuals: MomentResiduals,
    pub max_ratio: f64,
}

/// Applies the operator to a probe family and reports the maximal moment
/// residuals and the maximal ratio `‖Πv‖_{T,α}/‖v‖_{T,α}`.
///
/// The ratio is an empirical lower bound for the operator norm, not an upper
/// bound.
pub fn verify_operator(variant: FortinVariant, t: &Simplex, p: usize, alpha_over_h: f64, m: usize, seed: u64) -> Result<SweepRow> {
    let alpha = alpha_over_h * t.diameter();
    let op = FortinOperator::new(variant, t, p, alpha)?;
    let probes = probe_family(t, variant, p, alpha, m, seed);
    let rows: Vec<(MomentResiduals, f64)> = probes
        .par_iter()
        .map(|pr| {
            let app = op.apply(pr)?;
            Ok((op.residuals(&app), op.ratio(&app, alpha)))
        })
        .collect::<Result<_>>()?;
    let residuals = rows.iter().fold(MomentResiduals::default(), |a, r| a.max(&r.0));
    let max_ratio = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    Ok(SweepRow { alpha_over_h, residuals, max_ratio })
}

pub fn boundedness_sweep(
    variant: FortinVariant,
    t: &Simplex,
    p: usize,
    alphas_over_h: &[f64],
    m: usize,
    seed: u64,
) -> Result<Vec<SweepRow>> {
    alphas_over_h.iter().map(|&a| verify_operator(variant, t, p, a, m, seed)).collect()
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

fn vector_rank(t: &Simplex, fields: Vec<VecExp>) -> usize {
    let (g, _, _) = grams(t, &Basis::Vector(fields));
    gram_rank(&g)
}

/// Dimensions of the constructed spaces, computed as ranks of Gram matrices.
pub fn constructed_dim_report(p: usize, t: &Simplex) -> Result<DimReport> {
    let n = t.dim();
    let full_h1 = PolySpace::new(n, p + 1 + n)?.rank(t);
    let v_grad = FortinOperator::new(FortinVariant::H1Hp, t, p, 1.0)?.target_dim();
    let v_grad0 = FortinOperator::new(FortinVariant::H1Lowest, t, p, 1.0)?.target_dim();
    let all: Vec<usize> = (0..=n).collect();
    let vec_space = |q: usize| -> Vec<VecExp> {
        multi_indices(n + 1, q)
            .iter()
            .flat_map(|b| {
                let f = ExpPoly::poly(bernstein(&all, b));
                (0..n).map(move |d| VecExp::single(f.clone(), unit(d)))
            })
            .collect()
    };
    let full_div = vector_rank(t, vec_space(p + 2));
    let mut rt = vec_space(p + 1);
    for b in multi_indices(n + 1, p + 1) {
        let f = bernstein(&all, &b);
        let mut x = VecExp::default();
        for k in 0..=n {
            x.push(ExpPoly::poly(f.mul(&Poly::lambda(k))), t.vertex(k));
        }
        rt.push(x);
    }
    let rt = vector_rank(t, rt);
    let v_div = FortinOperator::new(FortinVariant::DivHp, t, p, 1.0)?.target_dim();
    Ok(DimReport { p, n, full_h1, v_grad, v_grad0, full_div, rt, v_div })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::reference_simplex;
    use crate::polyspace::dim_report;

    #[test]
    fn constants_are_reproduced() {
        let t = reference_simplex(2).unwrap();
        for v in FortinVariant::ALL.iter().filter(|v| v.is_h1()) {
            let op = FortinOperator::new(*v, &t, 1, 0.01).unwrap();
            let app = op.apply_h1(&Poly::constant(2.0)).unwrap();
            let f = op.scalar_field(&app.coeffs).unwrap();
            for lam in [[0.2, 0.3, 0.5, 0.0], [0.0, 1.0, 0.0, 0.0]] {
                assert!((f.value(&lam) - 2.0).abs() < 1e-13, "{v}");
            }
        }
    }

    #[test]
    fn constructed_dims_match_formulas() {
        for n in [2, 3] {
            let t = reference_simplex(n).unwrap();
            for p in 0..=1 {
                assert_eq!(constructed_dim_report(p, &t).unwrap(), dim_report(p, n).unwrap(), "n={n} p={p}");
            }
        }
    }

    #[test]
    fn variant_names_roundtrip() {
        for v in FortinVariant::ALL {
            assert_eq!(v.name().parse::<FortinVariant>().unwrap(), v);
        }
    }

    #[test]
    fn divergence_commutes_with_projection() {
        let t = Simplex::new(2, &[[0.0, 0.0, 0.0], [1.0, 0.1, 0.0], [0.2, 0.7, 0.0]]).unwrap();
        let p = 1;
        let op = FortinOperator::new(FortinVariant::DivHp, &t, p, 1.0).unwrap();
        let probes = probe_family(&t, FortinVariant::DivHp, p, 0.05, 12, 7);
        for pr in &probes {
            let Probe::Vector(tau) = pr else { unreachable!() };
            let app = op.apply_hdiv(tau, None).unwrap();
            let div_pi = op.vector_field(&app.coeffs).unwrap().divergence(&t);
            let div = tau.divergence(&t);
            let space = PolySpace::new(2, p + 1).unwrap();
            let proj = space.combine(&crate::polyspace::l2_project(p + 1, &div, &t).unwrap());
            let scale = crate::field::scalar_norms(&t, &div).0.max(1e-300);
            let err = crate::field::integrate_volume(&t, Layers::none(), 12, |q| (div_pi.value(&q.lam) - proj.eval(&q.lam)).powi(2)).sqrt();
            assert!(err < 1e-9 * scale, "{err} {scale}");
        }
    }

    #[test]
    fn numeric_split_keeps_moments() {
        let t = reference_simplex(2).unwrap();
        let op = FortinOperator::new(FortinVariant::DivHpAlpha, &t, 1, 1e-2).unwrap();
        let d = Decay { face: 1, rate: 50.0 };
        let tau = VecExp::new(vec![
            (ExpPoly::with_decay(Poly::lambda(2), d), [1.0, 0.0, 0.0]),
            (ExpPoly::poly(Poly::lambda(0).mul(&Poly::lambda(1))), [0.0, 1.0, 0.0]),
        ]);
        let app = op.apply_hdiv(&tau, None).unwrap();
        let r = op.residuals(&app);
        assert!(r.claimed_max(op.claims()) < 1e-10, "{r:?}");
        assert!(op.ratio(&app, 1e-2) < 10.0);
    }

    #[test]
    fn weak_volume_drops_element_bubbles() {
        let t = reference_simplex(2).unwrap();
        let full = FortinOperator::new(FortinVariant::H1Hp, &t, 1, 1.0).unwrap();
        let n = full.basis_len();
        let weak = FortinOperator::new(FortinVariant::H1Hp, &t, 1, 1.0).unwrap().weak_volume();
        assert_eq!(weak.basis_len(), n - 3);
        assert!(!weak.claims().volume);
        let v = ExpPoly::poly(Poly::lambda(0).mul(&Poly::lambda(1)).mul(&Poly::lambda(2)));
        let app = weak.apply_h1(&v).unwrap();
        assert!(weak.residuals(&app).boundary < 1e-12);
    }

    #[test]
    fn wrong_field_kind_is_rejected() {
        let t = reference_simplex(2).unwrap();
        let op = FortinOperator::new(FortinVariant::H1Hp, &t, 0, 1.0).unwrap();
        assert!(op.apply_hdiv(&VecExp::constant([1.0, 0.0, 0.0]), None).is_err());
        assert!(FortinOperator::new(FortinVariant::DivHpAlpha, &reference_simplex(3).unwrap(), 0, 1.0).is_err());
        assert!(FortinOperator::new(FortinVariant::H1HpAlpha, &t, 0, 0.0).is_err());
    }
}

