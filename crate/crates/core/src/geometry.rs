//! Simplices, affine maps and triangulations of the unit square.
//!
//! Local numbering: face `k` of a simplex is the facet opposite vertex `k`,
//! so the barycentric coordinate `λ_k` is the scaled distance to face `k`.

use crate::error::{Error, Result};
use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

pub type Point = [f64; 3];

/// A non-degenerate simplex in ℝⁿ, n ∈ {1, 2, 3}, with cached geometric data.
#[derive(Clone, Debug)]
pub struct Simplex {
    n: usize,
    vertices: Vec<Point>,
    volume: f64,
    diameter: f64,
    face_measures: Vec<f64>,
    normals: Vec<Point>,
    grad_lambda: [Point; 4],
    jac_inv: [[f64; 3]; 3],
}

impl Simplex {
    pub fn new(n: usize, vertices: &[Point]) -> Result<Self> {
        if !(1..=3).contains(&n) {
            return Err(Error::UnsupportedDimension(n));
        }
        if vertices.len() != n + 1 {
            return Err(Error::Shape(format!("{} vertices for an {n}-simplex", vertices.len())));
        }
        let v0 = vertices[0];
        // columns of B are v_i - v_0
        let mut b = [[0.0; 3]; 3];
        for j in 0..n {
            for i in 0..n {
                b[i][j] = vertices[j + 1][i] - v0[i];
            }
        }
        let det = det_n(&b, n);
        let mut fact = 1.0;
        for k in 2..=n {
            fact *= k as f64;
        }
        let volume = det.abs() / fact;
        let mut diameter: f64 = 0.0;
        for i in 0..=n {
            for j in 0..i {
                diameter = diameter.max(dist(&vertices[i], &vertices[j]));
            }
        }
        if !(volume > 1e-14 * diameter.powi(n as i32)) {
            return Err(Error::Degenerate(volume));
        }
        let binv = inv_n(&b, n, det);
        let mut grad_lambda = [[0.0; 3]; 4];
        for k in 1..=n {
            for d in 0..n {
                grad_lambda[k][d] = binv[k - 1][d];
            }
        }
        for d in 0..n {
            grad_lambda[0][d] = -(1..=n).map(|k| grad_lambda[k][d]).sum::<f64>();
        }
        let mut face_measures = Vec::with_capacity(n + 1);
        let mut normals = Vec::with_capacity(n + 1);
        for g in grad_lambda.iter().take(n + 1) {
            let gn = norm(g);
            face_measures.push(n as f64 * volume * gn);
            normals.push([-g[0] / gn, -g[1] / gn, -g[2] / gn]);
        }
        Ok(Simplex {
            n,
            vertices: vertices.to_vec(),
            volume,
            diameter,
            face_measures,
            normals,
            grad_lambda,
            jac_inv: binv,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn vertex(&self, k: usize) -> Point {
        self.vertices[k]
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    /// `h_T = diam(T)`.
    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn face_measure(&self, k: usize) -> f64 {
        self.face_measures[k]
    }

    pub fn boundary_measure(&self) -> f64 {
        self.face_measures.iter().sum()
    }

    /// Outward unit normal of face `k`.
    pub fn normal(&self, k: usize) -> Point {
        self.normals[k]
    }

    /// Constant gradient of `λ_k`.
    pub fn grad_lambda(&self, k: usize) -> Point {
        self.grad_lambda[k]
    }

    pub fn grad_lambdas(&self) -> &[Point; 4] {
        &self.grad_lambda
    }

    /// Local vertex ids of face `k` in increasing order.
    pub fn face_vertices(&self, k: usize) -> Vec<usize> {
        (0..=self.n).filter(|&i| i != k).collect()
    }

    /// Inradius `n|T| / |∂T|`.
    pub fn inradius(&self) -> f64 {
        self.n as f64 * self.volume / self.boundary_measure()
    }

    pub fn centroid(&self) -> Point {
        let mut c = [0.0; 3];
        for v in &self.vertices {
            for d in 0..3 {
                c[d] += v[d];
            }
        }
        c.map(|x| x / (self.n + 1) as f64)
    }

    /// Height of vertex `k` over face `k`.
    pub fn height(&self, k: usize) -> f64 {
        1.0 / norm(&self.grad_lambda[k])
    }

    /// Edges `E = (z_*, z_j)` anchored at local vertex 0, as `(0, j)` pairs.
    pub fn anchored_edges(&self) -> Vec<(usize, usize)> {
        (1..=self.n).map(|j| (0, j)).collect()
    }

    /// Tangent `t_E = z' − z` of an edge.
    pub fn tangent(&self, e: (usize, usize)) -> Point {
        let (a, b) = (self.vertices[e.0], self.vertices[e.1]);
        [b[0] - a[0], b[1] - a[1], b[2] - a[2]]
    }

    /// Maps barycentric coordinates to a physical point.
    pub fn point(&self, lam: &[f64]) -> Point {
        let mut x = [0.0; 3];
        for (k, v) in self.vertices.iter().enumerate() {
            for d in 0..self.n {
                x[d] += lam[k] * v[d];
            }
        }
        x
    }

    pub fn affine_map(&self) -> AffineMap {
        AffineMap::from_simplex(self)
    }
}

/// Barycentric coordinates of `x` with respect to `t`; `x` may lie outside.
pub fn barycentric(t: &Simplex, x: &[f64]) -> Vec<f64> {
    let n = t.dim();
    let v0 = t.vertex(0);
    let mut lam = vec![0.0; n + 1];
    for k in 1..=n {
        lam[k] = (0..n).map(|d| t.jac_inv[k - 1][d] * (x[d] - v0[d])).sum();
    }
    lam[0] = 1.0 - lam[1..].iter().sum::<f64>();
    lam
}

/// The reference simplex `conv{0, e_1, …, e_n}`.
pub fn reference_simplex(n: usize) -> Result<Simplex> {
    if !(2..=3).contains(&n) {
        return Err(Error::UnsupportedDimension(n));
    }
    let mut v = vec![[0.0; 3]; n + 1];
    for k in 1..=n {
        v[k][k - 1] = 1.0;
    }
    Simplex::new(n, &v)
}

/// `x ↦ B x + b` mapping the reference simplex onto a physical one.
#[derive(Clone, Debug)]
pub struct AffineMap {
    pub n: usize,
    pub b: [[f64; 3]; 3],
    pub offset: Point,
}

impl AffineMap {
    pub fn from_simplex(t: &Simplex) -> Self {
        let n = t.dim();
        let v0 = t.vertex(0);
        let mut b = [[0.0; 3]; 3];
        for j in 0..n {
            for i in 0..n {
                b[i][j] = t.vertex(j + 1)[i] - v0[i];
            }
        }
        AffineMap { n, b, offset: v0 }
    }

    pub fn det(&self) -> f64 {
        det_n(&self.b, self.n)
    }

    pub fn apply(&self, xh: &[f64]) -> Point {
        let mut x = self.offset;
        for i in 0..self.n {
            for j in 0..self.n {
                x[i] += self.b[i][j] * xh[j];
            }
        }
        x
    }

    /// `B⁻ᵀ`, which maps reference gradients to physical ones.
    pub fn inverse_transpose(&self) -> [[f64; 3]; 3] {
        let inv = inv_n(&self.b, self.n, self.det());
        let mut t = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                t[i][j] = inv[j][i];
            }
        }
        t
    }
}

fn det_n(b: &[[f64; 3]; 3], n: usize) -> f64 {
    match n {
        1 => b[0][0],
        2 => b[0][0] * b[1][1] - b[0][1] * b[1][0],
        _ => {
            b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1]) - b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0])
                + b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0])
        }
    }
}

fn inv_n(b: &[[f64; 3]; 3], n: usize, det: f64) -> [[f64; 3]; 3] {
    let mut r = [[0.0; 3]; 3];
    match n {
        1 => r[0][0] = 1.0 / b[0][0],
        2 => {
            r[0][0] = b[1][1] / det;
            r[0][1] = -b[0][1] / det;
            r[1][0] = -b[1][0] / det;
            r[1][1] = b[0][0] / det;
        }
        _ => {
            for i in 0..3 {
                for j in 0..3 {
                    let (i1, i2) = ((j + 1) % 3, (j + 2) % 3);
                    let (j1, j2) = ((i + 1) % 3, (i + 2) % 3);
                    r[i][j] = (b[i1][j1] * b[i2][j2] - b[i1][j2] * b[i2][j1]) / det;
                }
            }
        }
    }
    r
}

pub(crate) fn norm(v: &Point) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

fn dist(a: &Point, b: &Point) -> f64 {
    norm(&[a[0] - b[0], a[1] - b[1], a[2] - b[2]])
}

/// A mesh facet with its adjacent elements.
#[derive(Clone, Debug)]
pub struct Facet {
    /// Global vertex ids, sorted.
    pub vertices: Vec<usize>,
    /// `(element, local face)` of the lower-index neighbour.
    pub first: (usize, usize),
    /// The higher-index neighbour, `None` on the boundary.
    pub second: Option<(usize, usize)>,
}

impl Facet {
    pub fn is_boundary(&self) -> bool {
        self.second.is_none()
    }
}

/// Conforming simplicial mesh. Facet normals point from the lower to the
/// higher element index; on the boundary they point outward.
#[derive(Clone, Debug)]
pub struct Mesh {
    dim: usize,
    vertices: Vec<Point>,
    elements: Vec<Vec<usize>>,
    facets: Vec<Facet>,
    element_facets: Vec<Vec<usize>>,
}

impl Mesh {
    pub fn new(dim: usize, vertices: Vec<Point>, elements: Vec<Vec<usize>>) -> Result<Self> {
        let mut map: HashMap<Vec<usize>, usize> = HashMap::new();
        let mut facets: Vec<Facet> = Vec::new();
        let mut element_facets = Vec::with_capacity(elements.len());
        for (e, el) in elements.iter().enumerate() {
            if el.len() != dim + 1 {
                return Err(Error::Shape(format!("element {e} has {} vertices", el.len())));
            }
            let mut ef = Vec::with_capacity(dim + 1);
            for k in 0..=dim {
                let mut key: Vec<usize> = (0..=dim).filter(|&i| i != k).map(|i| el[i]).collect();
                key.sort_unstable();
                match map.get(&key) {
                    Some(&f) => {
                        if facets[f].second.is_some() {
                            return Err(Error::Shape(format!("facet {key:?} shared by more than two elements")));
                        }
                        facets[f].second = Some((e, k));
                        ef.push(f);
                    }
                    None => {
                        map.insert(key.clone(), facets.len());
                        ef.push(facets.len());
                        facets.push(Facet { vertices: key, first: (e, k), second: None });
                    }
                }
            }
            element_facets.push(ef);
        }
        Ok(Mesh { dim, vertices, elements, facets, element_facets })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn elements(&self) -> &[Vec<usize>] {
        &self.elements
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    /// Global facet id of local face `k` of element `e`.
    pub fn element_facet(&self, e: usize, k: usize) -> usize {
        self.element_facets[e][k]
    }

    /// `+1` if the outward normal of local face `k` of `e` equals the global
    /// facet normal, `−1` otherwise.
    pub fn facet_sign(&self, e: usize, k: usize) -> f64 {
        let f = &self.facets[self.element_facets[e][k]];
        if f.first == (e, k) {
            1.0
        } else {
            -1.0
        }
    }

    pub fn simplex(&self, e: usize) -> Simplex {
        let v: Vec<Point> = self.elements[e].iter().map(|&i| self.vertices[i]).collect();
        Simplex::new(self.dim, &v).expect("mesh elements are non-degenerate")
    }

    pub fn boundary_vertices(&self) -> Vec<bool> {
        let mut b = vec![false; self.vertices.len()];
        for f in self.facets.iter().filter(|f| f.is_boundary()) {
            for &v in &f.vertices {
                b[v] = true;
            }
        }
        b
    }

    pub fn max_diameter(&self) -> f64 {
        (0..self.num_elements()).map(|e| self.simplex(e).diameter()).fold(0.0, f64::max)
    }

    /// Largest `h_T / ρ_T` over all elements.
    pub fn shape_regularity(&self) -> f64 {
        (0..self.num_elements())
            .map(|e| {
                let t = self.simplex(e);
                t.diameter() / t.inradius()
            })
            .fold(0.0, f64::max)
    }

    /// Uniform red refinement (2D only).
    pub fn refine_uniform(&self) -> Result<Mesh> {
        if self.dim != 2 {
            return Err(Error::UnsupportedDimension(self.dim));
        }
        let mut verts = self.vertices.clone();
        let mut mids: HashMap<(usize, usize), usize> = HashMap::new();
        let mut mid = |a: usize, b: usize, verts: &mut Vec<Point>| -> usize {
            let key = (a.min(b), a.max(b));
            *mids.entry(key).or_insert_with(|| {
                let (p, q) = (verts[a], verts[b]);
                verts.push([(p[0] + q[0]) * 0.5, (p[1] + q[1]) * 0.5, 0.0]);
                verts.len() - 1
            })
        };
        let mut els = Vec::with_capacity(4 * self.elements.len());
        for el in &self.elements {
            let (a, b, c) = (el[0], el[1], el[2]);
            let ab = mid(a, b, &mut verts);
            let bc = mid(b, c, &mut verts);
            let ca = mid(c, a, &mut verts);
            els.push(vec![a, ab, ca]);
            els.push(vec![ab, b, bc]);
            els.push(vec![ca, bc, c]);
            els.push(vec![bc, ca, ab]);
        }
        Mesh::new(2, verts, els)
    }

    /// Plain-text serialization: vertex count, one coordinate line per
    /// vertex, element count, one 0-based vertex tuple per element.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{}", self.vertices.len());
        for v in &self.vertices {
            let coords: Vec<String> = v[..self.dim].iter().map(|c| format!("{c:.17e}")).collect();
            let _ = writeln!(s, "{}", coords.join(" "));
        }
        let _ = writeln!(s, "{}", self.elements.len());
        for el in &self.elements {
            let ids: Vec<String> = el.iter().map(|i| i.to_string()).collect();
            let _ = writeln!(s, "{}", ids.join(" "));
        }
        s
    }

    pub fn from_text(dim: usize, text: &str) -> Result<Mesh> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let mut next = || lines.next().ok_or_else(|| Error::Parse("unexpected end of mesh file".into()));
        let nv: usize = next()?.trim().parse().map_err(|e| Error::Parse(format!("vertex count: {e}")))?;
        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            let mut p = [0.0; 3];
            let vals: Vec<f64> = next()?
                .split_whitespace()
                .map(|t| t.parse::<f64>().map_err(|e| Error::Parse(format!("coordinate: {e}"))))
                .collect::<Result<_>>()?;
            if vals.len() != dim {
                return Err(Error::Parse(format!("expected {dim} coordinates, got {}", vals.len())));
            }
            p[..dim].copy_from_slice(&vals);
            vertices.push(p);
        }
        let ne: usize = next()?.trim().parse().map_err(|e| Error::Parse(format!("element count: {e}")))?;
        let mut elements = Vec::with_capacity(ne);
        for _ in 0..ne {
            let ids: Vec<usize> = next()?
                .split_whitespace()
                .map(|t| t.parse::<usize>().map_err(|e| Error::Parse(format!("vertex id: {e}"))))
                .collect::<Result<_>>()?;
            if ids.iter().any(|&i| i >= nv) {
                return Err(Error::Parse("vertex id out of range".into()));
            }
            elements.push(ids);
        }
        Mesh::new(dim, vertices, elements)
    }
}

/// `m × m` cells of the unit square, each split along the (0,0)–(1,1)
/// diagonal direction.
pub fn unit_square_mesh(m: usize) -> Result<Mesh> {
    if m == 0 {
        return Err(Error::OutOfRange("unit_square_mesh needs m >= 1".into()));
    }
    let id = |i: usize, j: usize| j * (m + 1) + i;
    let mut verts = Vec::with_capacity((m + 1) * (m + 1));
    for j in 0..=m {
        for i in 0..=m {
            verts.push([i as f64 / m as f64, j as f64 / m as f64, 0.0]);
        }
    }
    let mut els = Vec::with_capacity(2 * m * m);
    for j in 0..m {
        for i in 0..m {
            els.push(vec![id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            els.push(vec![id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    Mesh::new(2, verts, els)
}

/// The unit square cut by both diagonals into four triangles; local vertex 0
/// of every element is the centre.
pub fn criss_cross_mesh() -> Mesh {
    let verts = vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [0.0, 1.0, 0.0], [0.5, 0.5, 0.0]];
    let els = vec![vec![4, 0, 1], vec![4, 1, 2], vec![4, 2, 3], vec![4, 3, 0]];
    Mesh::new(2, verts, els).expect("static mesh")
}

/// Single-element mesh of a simplex.
pub fn simplex_mesh(t: &Simplex) -> Mesh {
    let n = t.dim();
    Mesh::new(n, t.vertices().to_vec(), vec![(0..=n).collect()]).expect("single element")
}

pub const DEFAULT_ELEMENT_CAP: usize = 1_000_000;

/// Refines `mesh` until every element with a facet on ∂Ω has diameter at
/// most `ε/2`. Boundary elements are red-refined level by level, a 2:1
/// balance between neighbours is kept by extra red refinements, and the
/// remaining hanging nodes are closed by bisection.
pub fn graded_boundary_submesh(mesh: &Mesh, eps: f64) -> Result<Mesh> {
    graded_boundary_submesh_capped(mesh, eps, DEFAULT_ELEMENT_CAP)
}

pub fn graded_boundary_submesh_capped(mesh: &Mesh, eps: f64, cap: usize) -> Result<Mesh> {
    if !(eps > 0.0) {
        return Err(Error::OutOfRange(format!("eps must be positive, got {eps}")));
    }
    if mesh.dim() != 2 {
        return Err(Error::UnsupportedDimension(mesh.dim()));
    }
    let target = 0.5 * eps;
    let mut g = Grader::new(mesh);
    loop {
        let marked: Vec<usize> = g
            .leaves
            .iter()
            .copied()
            .filter(|&t| g.touches_boundary(t) && g.diameter(t) > target)
            .collect();
        if marked.is_empty() {
            break;
        }
        // every red refinement adds three leaves; a boundary strip roughly
        // doubles its element count per level
        let projected = g.leaves.len() + 3 * marked.len() + 2 * marked.len();
        if projected > cap {
            return Err(Error::BudgetExceeded { elements: projected, cap });
        }
        for t in marked {
            g.red(t);
        }
        g.refresh_leaves();
        g.balance();
        if g.leaves.len() > cap {
            return Err(Error::BudgetExceeded { elements: g.leaves.len(), cap });
        }
    }
    let out = g.close()?;
    if out.num_elements() > cap {
        return Err(Error::BudgetExceeded { elements: out.num_elements(), cap });
    }
    Ok(out)
}

struct Grader {
    verts: Vec<Point>,
    tris: Vec<[usize; 3]>,
    alive: Vec<bool>,
    leaves: Vec<usize>,
    mids: HashMap<(usize, usize), usize>,
    bdry_edges: HashSet<(usize, usize)>,
}

fn ekey(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

impl Grader {
    fn new(mesh: &Mesh) -> Self {
        let mut bdry_edges = HashSet::new();
        for f in mesh.facets().iter().filter(|f| f.is_boundary()) {
            bdry_edges.insert(ekey(f.vertices[0], f.vertices[1]));
        }
        let tris: Vec<[usize; 3]> = mesh.elements().iter().map(|e| [e[0], e[1], e[2]]).collect();
        let n = tris.len();
        Grader {
            verts: mesh.vertices().to_vec(),
            tris,
            alive: vec![true; n],
            leaves: (0..n).collect(),
            mids: HashMap::new(),
            bdry_edges,
        }
    }

    fn diameter(&self, t: usize) -> f64 {
        let [a, b, c] = self.tris[t];
        let (p, q, r) = (self.verts[a], self.verts[b], self.verts[c]);
        dist(&p, &q).max(dist(&q, &r)).max(dist(&r, &p))
    }

    fn touches_boundary(&self, t: usize) -> bool {
        let [a, b, c] = self.tris[t];
        [(a, b), (b, c), (c, a)].iter().any(|&(x, y)| self.bdry_edges.contains(&ekey(x, y)))
    }

    fn mid(&mut self, a: usize, b: usize) -> usize {
        let key = ekey(a, b);
        if let Some(&m) = self.mids.get(&key) {
            return m;
        }
        let (p, q) = (self.verts[a], self.verts[b]);
        self.verts.push([(p[0] + q[0]) * 0.5, (p[1] + q[1]) * 0.5, 0.0]);
        let m = self.verts.len() - 1;
        self.mids.insert(key, m);
        if self.bdry_edges.contains(&key) {
            self.bdry_edges.insert(ekey(a, m));
            self.bdry_edges.insert(ekey(m, b));
        }
        m
    }

    fn red(&mut self, t: usize) {
        if !self.alive[t] {
            return;
        }
        let [a, b, c] = self.tris[t];
        let ab = self.mid(a, b);
        let bc = self.mid(b, c);
        let ca = self.mid(c, a);
        self.alive[t] = false;
        for tri in [[a, ab, ca], [ab, b, bc], [ca, bc, c], [bc, ca, ab]] {
            self.tris.push(tri);
            self.alive.push(true);
        }
    }

    fn refresh_leaves(&mut self) {
        self.leaves = (0..self.tris.len()).filter(|&t| self.alive[t]).collect();
    }

    /// An edge is over-refined if its midpoint has itself been split.
    fn over_refined(&self, a: usize, b: usize) -> bool {
        match self.mids.get(&ekey(a, b)) {
            Some(&m) => self.mids.contains_key(&ekey(a, m)) || self.mids.contains_key(&ekey(m, b)),
            None => false,
        }
    }

    fn balance(&mut self) {
        loop {
            let bad: Vec<usize> = self
                .leaves
                .iter()
                .copied()
                .filter(|&t| {
                    let [a, b, c] = self.tris[t];
                    self.over_refined(a, b) || self.over_refined(b, c) || self.over_refined(c, a)
                })
                .collect();
            if bad.is_empty() {
                return;
            }
            for t in bad {
                self.red(t);
            }
            self.refresh_leaves();
        }
    }

    fn close(self) -> Result<Mesh> {
        let mut els: Vec<Vec<usize>> = Vec::with_capacity(self.leaves.len() * 2);
        let mut leaves = self.leaves.clone();
        leaves.sort_unstable();
        for t in leaves {
            let [a, b, c] = self.tris[t];
            let m_ab = self.mids.get(&ekey(a, b)).copied();
            let m_bc = self.mids.get(&ekey(b, c)).copied();
            let m_ca = self.mids.get(&ekey(c, a)).copied();
            match (m_ab, m_bc, m_ca) {
                (None, None, None) => els.push(vec![a, b, c]),
                (Some(m), None, None) => {
                    els.push(vec![a, m, c]);
                    els.push(vec![m, b, c]);
                }
                (None, Some(m), None) => {
                    els.push(vec![b, m, a]);
                    els.push(vec![m, c, a]);
                }
                (None, None, Some(m)) => {
                    els.push(vec![c, m, b]);
                    els.push(vec![m, a, b]);
                }
                (Some(x), Some(y), None) => {
                    els.push(vec![x, b, y]);
                    els.push(vec![a, x, y]);
                    els.push(vec![a, y, c]);
                }
                (None, Some(x), Some(y)) => {
                    els.push(vec![x, c, y]);
                    els.push(vec![b, x, y]);
                    els.push(vec![b, y, a]);
                }
                (Some(y), None, Some(x)) => {
                    els.push(vec![x, a, y]);
                    els.push(vec![c, x, y]);
                    els.push(vec![c, y, b]);
                }
                (Some(ab), Some(bc), Some(ca)) => {
                    els.push(vec![a, ab, ca]);
                    els.push(vec![ab, b, bc]);
                    els.push(vec![ca, bc, c]);
                    els.push(vec![bc, ca, ab]);
                }
            }
        }
        // drop vertices only referenced by dead triangles (none in practice)
        Mesh::new(2, self.verts, els)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_triangle_data() {
        let t = reference_simplex(2).unwrap();
        assert!((t.volume() - 0.5).abs() < 1e-15);
        // face 0 is the hypotenuse
        assert!((t.face_measure(0) - 2f64.sqrt()).abs() < 1e-14);
        let nrm = t.normal(0);
        let s = 1.0 / 2f64.sqrt();
        assert!((nrm[0] - s).abs() < 1e-14 && (nrm[1] - s).abs() < 1e-14);
        let t3 = reference_simplex(3).unwrap();
        assert!((t3.volume() - 1.0 / 6.0).abs() < 1e-15);
        assert!(reference_simplex(4).is_err());
    }

    #[test]
    fn barycentric_examples() {
        let t = reference_simplex(2).unwrap();
        let l = barycentric(&t, &[0.2, 0.3]);
        assert!((l[0] - 0.5).abs() < 1e-15 && (l[1] - 0.2).abs() < 1e-15 && (l[2] - 0.3).abs() < 1e-15);
        let c = t.centroid();
        for v in barycentric(&t, &c) {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn mesh_counts() {
        let m1 = unit_square_mesh(1).unwrap();
        assert_eq!((m1.num_elements(), m1.num_vertices()), (2, 4));
        let m2 = unit_square_mesh(2).unwrap();
        assert_eq!((m2.num_elements(), m2.num_vertices()), (8, 9));
        assert_eq!(m1.refine_uniform().unwrap().num_elements(), 8);
    }

    #[test]
    fn text_roundtrip() {
        let m = criss_cross_mesh().refine_uniform().unwrap();
        let back = Mesh::from_text(2, &m.to_text()).unwrap();
        assert_eq!(back.elements(), m.elements());
        assert_eq!(back.vertices(), m.vertices());
    }

    #[test]
    fn graded_submesh_resolves_boundary() {
        let m = simplex_mesh(&reference_simplex(2).unwrap());
        let g = graded_boundary_submesh(&m, 0.25).unwrap();
        let total: f64 = (0..g.num_elements()).map(|e| g.simplex(e).volume()).sum();
        assert!((total - 0.5).abs() < 1e-13);
        for f in g.facets().iter().filter(|f| f.is_boundary()) {
            assert!(g.simplex(f.first.0).diameter() <= 0.125 + 1e-12);
        }
        assert!(g.shape_regularity() <= 3.0 * m.shape_regularity());
        for f in g.facets().iter().filter(|f| !f.is_boundary()) {
            let (e1, k1) = f.first;
            let (e2, k2) = f.second.unwrap();
            let n1 = g.simplex(e1).normal(k1);
            let n2 = g.simplex(e2).normal(k2);
            assert!((n1[0] + n2[0]).abs() < 1e-12 && (n1[1] + n2[1]).abs() < 1e-12);
            assert_eq!(g.facet_sign(e1, k1), 1.0);
            assert_eq!(g.facet_sign(e2, k2), -1.0);
        }
    }

    #[test]
    fn graded_submesh_trivial_and_capped() {
        let m = simplex_mesh(&reference_simplex(2).unwrap());
        assert_eq!(graded_boundary_submesh(&m, 4.0).unwrap().num_elements(), 1);
        assert!(matches!(
            graded_boundary_submesh_capped(&m, 1e-6, 10_000),
            Err(Error::BudgetExceeded { .. })
        ));
    }
}
