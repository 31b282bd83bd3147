//! Special functions on a simplex: hat and bubble functions, the lowest-order
//! Raviart–Thomas and Bernardi–Raugel fields, the higher-order biorthogonal
//! families and their exponentially modified counterparts.
//!
//! Local face `k` is opposite vertex `k`, and the edges anchored at the
//! distinguished vertex are `E_j = (z_0, z_j)`.

use crate::error::{Error, Result};
use crate::field::{dot3, integrate_boundary, scalar_norms, vector_norms, Decay, ExpPoly, Poly, VecExp};
use crate::fortin::loglog_slope;
use crate::geometry::Simplex;
use crate::linalg::{sym_eig, Cholesky, Mat};
use crate::polyspace::{
    bernstein_sup, element_bubble, integrate_poly, integrate_poly_boundary, integrate_poly_face, multi_indices,
    trace_complement_seeds,
};
use crate::quadrature::Layers;

const MAX_P: usize = 4;
const MAX_CONDITION: f64 = 1e12;

/// `η_F = Π_{z∈F} λ_z` for face `k`.
pub fn face_bubble(n: usize, k: usize) -> Poly {
    let mut e = [0u8; 4];
    for (i, x) in e.iter_mut().enumerate().take(n + 1) {
        if i != k {
            *x = 1;
        }
    }
    Poly::monomial(e, 1.0)
}

/// `ν_F = 1 − n λ_F`.
pub fn nu(n: usize, k: usize) -> Poly {
    Poly::constant(1.0).sub(&Poly::lambda(k).scale(n as f64))
}

/// `ψ_F(x) = |F| / (n|T|) (x − z_F)`.
pub fn rt0(t: &Simplex, k: usize) -> VecExp {
    let n = t.dim();
    let s = t.face_measure(k) / (n as f64 * t.volume());
    let zk = t.vertex(k);
    let mut v = VecExp::default();
    for i in (0..=n).filter(|&i| i != k) {
        let zi = t.vertex(i);
        v.push(ExpPoly::poly(Poly::lambda(i)), [s * (zi[0] - zk[0]), s * (zi[1] - zk[1]), s * (zi[2] - zk[2])]);
    }
    v
}

/// `ψ_∂T = Σ_F ψ_F`, whose normal trace is one on all of `∂T`.
pub fn rt0_sum(t: &Simplex) -> VecExp {
    (0..=t.dim()).fold(VecExp::default(), |acc, k| acc.add(&rt0(t, k)))
}

/// Decay `e^{-(h_T/α) λ_F}`, absent for `α = ∞`.
pub fn decay(t: &Simplex, k: usize, alpha: f64) -> Option<Decay> {
    if alpha.is_finite() {
        Some(Decay { face: k, rate: t.diameter() / alpha })
    } else {
        None
    }
}

fn with_decay(p: Poly, d: Option<Decay>) -> ExpPoly {
    match d {
        Some(d) => ExpPoly::with_decay(p, d),
        None => ExpPoly::poly(p),
    }
}

/// `η_{α,F} = e^{-h_T λ_F/α} η_F`.
pub fn modified_face_bubble(t: &Simplex, k: usize, alpha: f64) -> ExpPoly {
    with_decay(face_bubble(t.dim(), k), decay(t, k, alpha))
}

/// Bernardi–Raugel field `𝛈_{α,F} = η_{α,F} n_F` (`α = ∞` gives `𝛈_F`).
pub fn bernardi_raugel(t: &Simplex, k: usize, alpha: f64) -> VecExp {
    VecExp::single(modified_face_bubble(t, k, alpha), t.normal(k))
}

/// `σ_E = ∇λ_j` for `E = (z_0, z_j)`.
pub fn sigma_edge(t: &Simplex, j: usize) -> VecExp {
    VecExp::constant(t.grad_lambda(j))
}

/// `η_E = λ_0 λ_j`.
pub fn edge_bubble(j: usize) -> Poly {
    Poly::lambda(0).mul(&Poly::lambda(j))
}

/// `𝛈_E = λ_0 λ_j t_E`.
pub fn eta_edge(t: &Simplex, j: usize) -> VecExp {
    VecExp::single(ExpPoly::poly(edge_bubble(j)), t.tangent((0, j)))
}

/// `C = measure · G⁻¹` after a conditioning check.
fn dual_coefficients(g: &Mat, measure: f64) -> Result<Mat> {
    let (ev, _) = sym_eig(g);
    let lo = ev.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = ev.iter().cloned().fold(0.0, f64::max);
    if !(lo > 0.0) || hi / lo > MAX_CONDITION {
        return Err(Error::IllConditioned(if lo > 0.0 { hi / lo } else { f64::INFINITY }));
    }
    if hi / lo > 1e8 {
        log::warn!("pairing Gram matrix condition {:.2e}", hi / lo);
    }
    let ch = Cholesky::new(g)?;
    Ok(ch.inverse().scale(measure))
}

fn combine_columns(c: &Mat, seeds: &[Poly]) -> Vec<Poly> {
    (0..c.cols()).map(|j| Poly::combination(&c.col(j), seeds)).collect()
}

fn check_p(p: usize) -> Result<()> {
    if p > MAX_P {
        return Err(Error::OutOfRange(format!("polynomial degree {p} exceeds {MAX_P}")));
    }
    Ok(())
}

/// Face seeds `χ̃_{F,j}`, bubbles `η_{F,j} = η_F χ̃_{F,j}` and duals `χ_{F,j}`
/// with `⟨χ_{F,j}, η_{F,k}⟩_F = |F| δ_{jk}`.
#[derive(Clone, Debug)]
pub struct FaceFunctions {
    pub face: usize,
    pub seeds: Vec<Poly>,
    pub bubbles: Vec<Poly>,
    pub duals: Vec<Poly>,
}

pub fn face_functions(t: &Simplex, p: usize) -> Result<Vec<FaceFunctions>> {
    check_p(p)?;
    let n = t.dim();
    (0..=n)
        .map(|k| {
            let verts = t.face_vertices(k);
            let seeds: Vec<Poly> = multi_indices(n, p).iter().map(|b| bernstein_sup(&verts, b)).collect();
            let eta = face_bubble(n, k);
            let bubbles: Vec<Poly> = seeds.iter().map(|s| s.mul(&eta)).collect();
            let m = seeds.len();
            let g = Mat::from_fn(m, m, |a, b| integrate_poly_face(&seeds[a].mul(&bubbles[b]), t, k));
            let c = dual_coefficients(&g, t.face_measure(k))?;
            let duals = combine_columns(&c, &seeds);
            Ok(FaceFunctions { face: k, seeds, bubbles, duals })
        })
        .collect()
}

/// Volume seeds `χ̃_{T,j}`, bubbles `η_{T,j}` and duals `χ_{T,j} ∈ P^p(T)`.
#[derive(Clone, Debug)]
pub struct VolumeFunctions {
    pub seeds: Vec<Poly>,
    pub bubbles: Vec<Poly>,
    pub duals: Vec<Poly>,
}

pub fn volume_seeds(n: usize, p: usize) -> Vec<Poly> {
    let verts: Vec<usize> = (0..=n).collect();
    multi_indices(n + 1, p).iter().map(|b| bernstein_sup(&verts, b)).collect()
}

pub fn volume_functions(t: &Simplex, p: usize) -> Result<VolumeFunctions> {
    check_p(p)?;
    let n = t.dim();
    let seeds = volume_seeds(n, p);
    let eta = element_bubble(n);
    let bubbles: Vec<Poly> = seeds.iter().map(|s| s.mul(&eta)).collect();
    let m = seeds.len();
    let g = Mat::from_fn(m, m, |a, b| integrate_poly(&seeds[a].mul(&bubbles[b]), t));
    let c = dual_coefficients(&g, t.volume())?;
    let duals = combine_columns(&c, &seeds);
    Ok(VolumeFunctions { seeds, bubbles, duals })
}

/// Trace seeds `ν̃_{∂T,j}`, their boundary duals `ν_{∂T,j}` and the fluxes
/// `ψ_{∂T,j} = ψ_∂T ν̃_{∂T,j}`.
#[derive(Clone, Debug)]
pub struct TraceFunctions {
    pub seeds: Vec<Poly>,
    pub duals: Vec<Poly>,
    pub fluxes: Vec<VecExp>,
}

pub fn trace_functions(t: &Simplex, p: usize) -> Result<TraceFunctions> {
    check_p(p)?;
    let seeds = trace_complement_seeds(p, t)?;
    let m = seeds.len();
    let g = Mat::from_fn(m, m, |a, b| integrate_poly_boundary(&seeds[a].mul(&seeds[b]), t));
    let c = dual_coefficients(&g, t.boundary_measure())?;
    let duals = combine_columns(&c, &seeds);
    let psi = rt0_sum(t);
    let fluxes = seeds.iter().map(|s| psi.mul_poly(s)).collect();
    Ok(TraceFunctions { seeds, duals, fluxes })
}

/// For the edge `E_j = (z_0, z_j)`: duals `χ_{E,j}` with
/// `⟨χ_{E,j}, χ̃_{T,k} η_E⟩_T = |T| δ_{jk}`, the fields `σ_{E,j} = σ_E χ_{E,j}`
/// and `𝛈_{E,j} = 𝛈_E χ̃_{T,j}`.
#[derive(Clone, Debug)]
pub struct EdgeFunctions {
    pub edge: (usize, usize),
    pub seeds: Vec<Poly>,
    pub duals: Vec<Poly>,
    pub sigmas: Vec<VecExp>,
    pub etas: Vec<VecExp>,
}

pub fn edge_functions(t: &Simplex, p: usize) -> Result<Vec<EdgeFunctions>> {
    check_p(p)?;
    let n = t.dim();
    let seeds = volume_seeds(n, p);
    t.anchored_edges()
        .into_iter()
        .map(|(_, j)| {
            let eta = edge_bubble(j);
            let m = seeds.len();
            let g = Mat::from_fn(m, m, |a, b| integrate_poly(&seeds[a].mul(&seeds[b]).mul(&eta), t));
            let c = dual_coefficients(&g, t.volume())?;
            let duals = combine_columns(&c, &seeds);
            let sigma = sigma_edge(t, j);
            let sigmas = duals.iter().map(|d| sigma.mul_poly(d)).collect();
            let etae = eta_edge(t, j);
            let etas = seeds.iter().map(|s| etae.mul_poly(s)).collect();
            Ok(EdgeFunctions { edge: (0, j), seeds: seeds.clone(), duals, sigmas, etas })
        })
        .collect()
}

/// Modified boundary fields `𝛈_{α,∂T,j} = Σ_F η_{α,F} ν̃_{∂T,j} n_F` and
/// their duals `χ_{∂T,j} ∈ P_c^{p+1}(𝓕_T)`.
#[derive(Clone, Debug)]
pub struct ModifiedTraceFunctions {
    pub seeds: Vec<Poly>,
    pub fields: Vec<VecExp>,
    pub duals: Vec<Poly>,
}

pub fn modified_trace_functions(t: &Simplex, alpha: f64, p: usize) -> Result<ModifiedTraceFunctions> {
    check_p(p)?;
    let n = t.dim();
    let seeds = trace_complement_seeds(p, t)?;
    let m = seeds.len();
    let g = Mat::from_fn(m, m, |a, b| {
        let ab = seeds[a].mul(&seeds[b]);
        (0..=n).map(|k| integrate_poly_face(&ab.mul(&face_bubble(n, k)), t, k)).sum()
    });
    let c = dual_coefficients(&g, t.boundary_measure())?;
    let duals = combine_columns(&c, &seeds);
    let fields = seeds
        .iter()
        .map(|s| {
            let mut v = VecExp::default();
            for k in 0..=n {
                v.push(with_decay(face_bubble(n, k).mul(s), decay(t, k, alpha)), t.normal(k));
            }
            v
        })
        .collect();
    Ok(ModifiedTraceFunctions { seeds, fields, duals })
}

/// A member of a basis family.
#[derive(Clone, Debug)]
pub enum Member {
    Scalar(ExpPoly),
    Vector(VecExp),
    /// Boundary function given face by face.
    Trace(Vec<Poly>),
}

impl Member {
    fn degree(&self) -> usize {
        match self {
            Member::Scalar(f) => f.poly_degree(),
            Member::Vector(f) => f.poly_degree(),
            Member::Trace(f) => f.iter().map(|p| p.degree()).max().unwrap_or(0),
        }
    }

    fn layers(&self) -> Layers {
        match self {
            Member::Scalar(f) => f.layer_info(),
            Member::Vector(f) => f.layer_info(),
            Member::Trace(_) => Layers::none(),
        }
    }

    fn volume_values(&self, lam: &[f64; 4]) -> [f64; 3] {
        match self {
            Member::Scalar(f) => [f.value(lam), 0.0, 0.0],
            Member::Vector(f) => f.value(lam),
            Member::Trace(_) => [f64::NAN; 3],
        }
    }

    fn boundary_value(&self, t: &Simplex, k: usize, lam: &[f64; 4]) -> f64 {
        match self {
            Member::Scalar(f) => f.value(lam),
            Member::Vector(f) => dot3(&f.value(lam), &t.normal(k)),
            Member::Trace(f) => f[k].eval(lam),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pairing {
    /// `(a, b)_T`
    Volume,
    /// `⟨a, b⟩_{∂T}` with normal traces of vector members.
    Boundary,
    /// Point evaluation of the primal members at the vertices.
    Nodal,
}

/// Primal members, their dual family and the pairing
/// `pairing(dual_j, primal_k) = measure_k δ_{jk}`.
#[derive(Clone, Debug)]
pub struct BasisFamily {
    pub name: String,
    pub primal: Vec<Member>,
    pub dual: Vec<Member>,
    pub pairing: Pairing,
    pub measures: Vec<f64>,
}

impl BasisFamily {
    pub fn len(&self) -> usize {
        self.primal.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primal.is_empty()
    }

    /// Rows are dual members, columns primal members.
    pub fn pairing_matrix(&self, t: &Simplex) -> Mat {
        let (nd, np) = (self.dual.len(), self.primal.len());
        let mut m = Mat::zeros(nd, np);
        let all = || self.primal.iter().chain(&self.dual);
        let order = all().map(Member::degree).max().unwrap_or(0) * 2;
        let layers = all().fold(Layers::none(), |a, x| a.union(x.layers()));
        match self.pairing {
            Pairing::Nodal => {
                for j in 0..nd {
                    let mut lam = [0.0; 4];
                    lam[j] = 1.0;
                    for k in 0..np {
                        m[(j, k)] = self.primal[k].volume_values(&lam)[0];
                    }
                }
            }
            Pairing::Volume => m = volume_pairing(t, &self.dual, &self.primal, layers, order),
            Pairing::Boundary => {
                for k in 0..=t.dim() {
                    let rule = crate::quadrature::face_rule(t.dim(), k, layers, order);
                    let fm = t.face_measure(k);
                    for (lam, w) in rule.points().iter().zip(rule.weights()) {
                        let dv: Vec<f64> = self.dual.iter().map(|d| d.boundary_value(t, k, lam)).collect();
                        let pv: Vec<f64> = self.primal.iter().map(|d| d.boundary_value(t, k, lam)).collect();
                        for a in 0..nd {
                            if dv[a] == 0.0 {
                                continue;
                            }
                            for b in 0..np {
                                m[(a, b)] += fm * w * dv[a] * pv[b];
                            }
                        }
                    }
                }
            }
        }
        m
    }

    /// `max_{j,k} |pairing(j,k)/measure_k − δ_{jk}|`.
    pub fn residual(&self, t: &Simplex) -> f64 {
        let m = self.pairing_matrix(t);
        let mut r: f64 = 0.0;
        for j in 0..m.rows() {
            for k in 0..m.cols() {
                let want = if j == k { 1.0 } else { 0.0 };
                r = r.max((m[(j, k)] / self.measures[k] - want).abs());
            }
        }
        r
    }
}

fn volume_pairing(t: &Simplex, dual: &[Member], primal: &[Member], layers: Layers, order: usize) -> Mat {
    let (nd, np) = (dual.len(), primal.len());
    let rule = crate::quadrature::volume_rule(t.dim(), layers, order);
    let mut m = Mat::zeros(nd, np);
    let vol = t.volume();
    for (lam, w) in rule.points().iter().zip(rule.weights()) {
        let dv: Vec<[f64; 3]> = dual.iter().map(|d| d.volume_values(lam)).collect();
        let pv: Vec<[f64; 3]> = primal.iter().map(|d| d.volume_values(lam)).collect();
        for a in 0..nd {
            for b in 0..np {
                m[(a, b)] += vol * w * dot3(&dv[a], &pv[b]);
            }
        }
    }
    m
}

fn scalars(v: impl IntoIterator<Item = Poly>) -> Vec<Member> {
    v.into_iter().map(|p| Member::Scalar(ExpPoly::poly(p))).collect()
}

fn face_indicator(n: usize, k: usize) -> Member {
    Member::Trace((0..=n).map(|i| if i == k { Poly::constant(1.0) } else { Poly::zero() }).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LowOrderKind {
    Hat,
    FaceBubble,
    ElemBubble,
    Nu,
    Chi,
    Rt0,
    BernardiRaugel,
    SigmaEdge,
    EtaEdge,
}

pub fn low_order_family(t: &Simplex, kind: LowOrderKind) -> Result<BasisFamily> {
    let n = t.dim();
    let faces = 0..=n;
    let face_int = |k: usize| integrate_poly_face(&face_bubble(n, k), t, k);
    let fam = |name: &str, primal, dual, pairing, measures| BasisFamily {
        name: name.to_string(),
        primal,
        dual,
        pairing,
        measures,
    };
    Ok(match kind {
        LowOrderKind::Hat => fam(
            "hat",
            scalars((0..=n).map(Poly::lambda)),
            vec![],
            Pairing::Nodal,
            vec![1.0; n + 1],
        ),
        LowOrderKind::FaceBubble => fam(
            "face_bubble",
            scalars(faces.clone().map(|k| face_bubble(n, k))),
            faces.clone().map(|k| face_indicator(n, k)).collect(),
            Pairing::Boundary,
            faces.clone().map(face_int).collect(),
        ),
        LowOrderKind::ElemBubble => fam(
            "elem_bubble",
            scalars([element_bubble(n)]),
            scalars([Poly::constant(1.0)]),
            Pairing::Volume,
            vec![integrate_poly(&element_bubble(n), t)],
        ),
        LowOrderKind::Nu => fam(
            "nu",
            scalars(faces.clone().map(|k| nu(n, k))),
            faces.clone().map(|k| face_indicator(n, k)).collect(),
            Pairing::Boundary,
            faces.clone().map(|k| t.face_measure(k)).collect(),
        ),
        LowOrderKind::Chi => fam(
            "chi",
            faces.clone().map(|k| face_indicator(n, k)).collect(),
            scalars(faces.clone().map(|k| nu(n, k))),
            Pairing::Boundary,
            faces.clone().map(|k| t.face_measure(k)).collect(),
        ),
        LowOrderKind::Rt0 => fam(
            "rt0",
            faces.clone().map(|k| Member::Vector(rt0(t, k))).collect(),
            scalars(faces.clone().map(|k| nu(n, k))),
            Pairing::Boundary,
            faces.clone().map(|k| t.face_measure(k)).collect(),
        ),
        LowOrderKind::BernardiRaugel => fam(
            "bernardi_raugel",
            faces.clone().map(|k| Member::Vector(bernardi_raugel(t, k, f64::INFINITY))).collect(),
            scalars(faces.clone().map(|k| nu(n, k))),
            Pairing::Boundary,
            faces.clone().map(face_int).collect(),
        ),
        LowOrderKind::SigmaEdge | LowOrderKind::EtaEdge => {
            let sig: Vec<Member> = (1..=n).map(|j| Member::Vector(sigma_edge(t, j))).collect();
            let eta: Vec<Member> = (1..=n).map(|j| Member::Vector(eta_edge(t, j))).collect();
            let meas = (1..=n).map(|j| integrate_poly(&edge_bubble(j), t)).collect();
            if kind == LowOrderKind::SigmaEdge {
                fam("sigma_edge", sig, eta, Pairing::Volume, meas)
            } else {
                fam("eta_edge", eta, sig, Pairing::Volume, meas)
            }
        }
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HigherOrderKind {
    Face,
    Volume,
    BoundaryTrace,
    Edge,
}

/// The identities of the requested kind. Kinds with several identities
/// (boundary trace, edge) return one family per identity.
pub fn higher_order_family(t: &Simplex, p: usize, kind: HigherOrderKind) -> Result<Vec<BasisFamily>> {
    let n = t.dim();
    Ok(match kind {
        HigherOrderKind::Face => {
            let ff = face_functions(t, p)?;
            let mut primal = Vec::new();
            let mut dual = Vec::new();
            let mut measures = Vec::new();
            for f in &ff {
                for (b, d) in f.bubbles.iter().zip(&f.duals) {
                    primal.push(Member::Scalar(ExpPoly::poly(b.clone())));
                    dual.push(Member::Trace(
                        (0..=n).map(|i| if i == f.face { d.clone() } else { Poly::zero() }).collect(),
                    ));
                    measures.push(t.face_measure(f.face));
                }
            }
            vec![BasisFamily { name: "face".into(), primal, dual, pairing: Pairing::Boundary, measures }]
        }
        HigherOrderKind::Volume => {
            let v = volume_functions(t, p)?;
            let m = v.bubbles.len();
            vec![BasisFamily {
                name: "volume".into(),
                primal: scalars(v.bubbles),
                dual: scalars(v.duals),
                pairing: Pairing::Volume,
                measures: vec![t.volume(); m],
            }]
        }
        HigherOrderKind::BoundaryTrace => {
            let tf = trace_functions(t, p)?;
            let m = tf.seeds.len();
            let bm = t.boundary_measure();
            vec![
                BasisFamily {
                    name: "trace_seed".into(),
                    primal: scalars(tf.seeds.clone()),
                    dual: scalars(tf.duals.clone()),
                    pairing: Pairing::Boundary,
                    measures: vec![bm; m],
                },
                BasisFamily {
                    name: "trace_flux".into(),
                    primal: tf.fluxes.iter().cloned().map(Member::Vector).collect(),
                    dual: scalars(tf.duals),
                    pairing: Pairing::Boundary,
                    measures: vec![bm; m],
                },
            ]
        }
        HigherOrderKind::Edge => {
            let ef = edge_functions(t, p)?;
            let mut out = Vec::new();
            for e in &ef {
                let eta = edge_bubble(e.edge.1);
                let m = e.seeds.len();
                out.push(BasisFamily {
                    name: format!("edge_dual_{}", e.edge.1),
                    primal: scalars(e.seeds.iter().map(|s| s.mul(&eta))),
                    dual: scalars(e.duals.clone()),
                    pairing: Pairing::Volume,
                    measures: vec![t.volume(); m],
                });
            }
            let primal: Vec<Member> = ef.iter().flat_map(|e| e.etas.iter().cloned().map(Member::Vector)).collect();
            let dual: Vec<Member> = ef.iter().flat_map(|e| e.sigmas.iter().cloned().map(Member::Vector)).collect();
            let m = primal.len();
            out.push(BasisFamily {
                name: "edge_field".into(),
                primal,
                dual,
                pairing: Pairing::Volume,
                measures: vec![t.volume(); m],
            });
            out
        }
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModifiedKind {
    EtaAlphaF,
    EtaAlphaFj,
    BrAlpha,
    Boundary,
}

pub fn modified_family(t: &Simplex, alpha: f64, p: usize, kind: ModifiedKind) -> Result<BasisFamily> {
    if !(alpha > 0.0) {
        return Err(Error::OutOfRange(format!("alpha must be positive, got {alpha}")));
    }
    let n = t.dim();
    let faces = 0..=n;
    let face_int = |k: usize| integrate_poly_face(&face_bubble(n, k), t, k);
    Ok(match kind {
        ModifiedKind::EtaAlphaF => BasisFamily {
            name: "eta_alpha_F".into(),
            primal: faces.clone().map(|k| Member::Scalar(modified_face_bubble(t, k, alpha))).collect(),
            dual: faces.clone().map(|k| face_indicator(n, k)).collect(),
            pairing: Pairing::Boundary,
            measures: faces.map(face_int).collect(),
        },
        ModifiedKind::EtaAlphaFj => {
            let ff = face_functions(t, p)?;
            let mut primal = Vec::new();
            let mut dual = Vec::new();
            let mut measures = Vec::new();
            for f in &ff {
                for (b, d) in f.bubbles.iter().zip(&f.duals) {
                    primal.push(Member::Scalar(with_decay(b.clone(), decay(t, f.face, alpha))));
                    dual.push(Member::Trace(
                        (0..=n).map(|i| if i == f.face { d.clone() } else { Poly::zero() }).collect(),
                    ));
                    measures.push(t.face_measure(f.face));
                }
            }
            BasisFamily { name: "eta_alpha_F_j".into(), primal, dual, pairing: Pairing::Boundary, measures }
        }
        ModifiedKind::BrAlpha => BasisFamily {
            name: "br_alpha".into(),
            primal: faces.clone().map(|k| Member::Vector(bernardi_raugel(t, k, alpha))).collect(),
            dual: scalars(faces.clone().map(|k| nu(n, k))),
            pairing: Pairing::Boundary,
            measures: faces.map(face_int).collect(),
        },
        ModifiedKind::Boundary => {
            let mf = modified_trace_functions(t, alpha, p)?;
            let m = mf.fields.len();
            BasisFamily {
                name: "eta_alpha_boundary".into(),
                primal: mf.fields.into_iter().map(Member::Vector).collect(),
                dual: mf.duals.into_iter().map(|d| Member::Trace(vec![d; n + 1])).collect(),
                pairing: Pairing::Boundary,
                measures: vec![t.boundary_measure(); m],
            }
        }
    })
}

/// Every identity checked by the basis verification, for one element.
pub fn all_families(t: &Simplex, p: usize, alpha: Option<f64>) -> Result<Vec<BasisFamily>> {
    use LowOrderKind::*;
    let mut out = Vec::new();
    for k in [Hat, FaceBubble, ElemBubble, Nu, Chi, Rt0, BernardiRaugel, SigmaEdge, EtaEdge] {
        out.push(low_order_family(t, k)?);
    }
    for k in [HigherOrderKind::Face, HigherOrderKind::Volume, HigherOrderKind::BoundaryTrace, HigherOrderKind::Edge] {
        out.extend(higher_order_family(t, p, k)?);
    }
    if let Some(a) = alpha {
        for k in [ModifiedKind::EtaAlphaF, ModifiedKind::EtaAlphaFj, ModifiedKind::BrAlpha, ModifiedKind::Boundary] {
            out.push(modified_family(t, a, p, k)?);
        }
    }
    Ok(out)
}

/// Fitted log-log slopes of a modified bubble's norms against `α/h`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalingFit {
    pub name: &'static str,
    pub value_slope: f64,
    pub derivative_slope: f64,
}

/// Slopes of `‖η_{α,F}‖`, `‖∇η_{α,F}‖`, `‖𝛈_{α,F}‖` and `‖div 𝛈_{α,F}‖` on face
/// `k` over the given `α/h` values.
pub fn scaling_exponents(t: &Simplex, k: usize, alphas_over_h: &[f64]) -> Vec<ScalingFit> {
    let h = t.diameter();
    let (mut s, mut g, mut v, mut d) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for &a in alphas_over_h {
        let (x, y) = scalar_norms(t, &modified_face_bubble(t, k, a * h));
        s.push(x);
        g.push(y);
        let (x, y) = vector_norms(t, &bernardi_raugel(t, k, a * h));
        v.push(x);
        d.push(y);
    }
    vec![
        ScalingFit { name: "eta_alpha_F", value_slope: loglog_slope(alphas_over_h, &s), derivative_slope: loglog_slope(alphas_over_h, &g) },
        ScalingFit { name: "br_alpha", value_slope: loglog_slope(alphas_over_h, &v), derivative_slope: loglog_slope(alphas_over_h, &d) },
    ]
}

/// Integral of a boundary function given face by face, used in tests.
pub fn boundary_integral(t: &Simplex, f: &[Poly]) -> f64 {
    integrate_boundary(t, Layers::none(), f.iter().map(|p| p.degree()).max().unwrap_or(0), |k, pt| f[k].eval(&pt.lam))
}
