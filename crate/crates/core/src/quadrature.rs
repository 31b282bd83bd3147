//! Quadrature on simplices and faces, including rules graded toward faces
//! for integrands carrying an exponential layer `e^{-λ_k/κ}`.
//!
//! Rules store points in barycentric coordinates and weights normalized to
//! sum to one, so `∫_T f ≈ |T| Σ w_i f(x_i)`.

use crate::error::{Error, Result};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

pub const MAX_ORDER: usize = 30;
/// Above this `κ` the factor `e^{-t/κ}` is smooth on `[0, 1]`.
pub const KAPPA_SMOOTH: f64 = 10.0;
const MIN_LAYER_POINTS: usize = 12;

#[derive(Clone, Debug)]
pub struct QuadratureRule {
    dim: usize,
    points: Vec<[f64; 4]>,
    weights: Vec<f64>,
    order: usize,
}

impl QuadratureRule {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Barycentric coordinates; entries beyond `dim` are zero.
    pub fn points(&self) -> &[[f64; 4]] {
        &self.points
    }

    /// Normalized weights (they sum to one).
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Weights scaled to the reference simplex measure `1/dim!`.
    pub fn reference_weights(&self) -> Vec<f64> {
        let m = 1.0 / factorial(self.dim);
        self.weights.iter().map(|w| w * m).collect()
    }

    /// Declared polynomial exactness.
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `measure · Σ w_i f(λ_i)`.
    pub fn integrate<F: FnMut(&[f64; 4]) -> f64>(&self, measure: f64, mut f: F) -> f64 {
        let mut s = 0.0;
        for (p, w) in self.points.iter().zip(&self.weights) {
            s += w * f(p);
        }
        measure * s
    }
}

pub(crate) fn factorial(n: usize) -> f64 {
    (2..=n).map(|k| k as f64).product()
}

/// Gauss–Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre(q: usize) -> (Vec<f64>, Vec<f64>) {
    static CACHE: OnceLock<Mutex<HashMap<usize, (Vec<f64>, Vec<f64>)>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(r) = cache.lock().unwrap().get(&q) {
        return r.clone();
    }
    let mut x = vec![0.0; q];
    let mut w = vec![0.0; q];
    for i in 0..q.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (q as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=q {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if q == 0 { 1.0 } else if q == 1 { z } else { p1 };
            let pm1 = if q == 1 { 1.0 } else { p0 };
            dp = q as f64 * (z * p - pm1) / (z * z - 1.0);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let wt = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = 0.5 * (1.0 - z);
        x[q - 1 - i] = 0.5 * (1.0 + z);
        w[i] = 0.5 * wt;
        w[q - 1 - i] = 0.5 * wt;
    }
    cache.lock().unwrap().insert(q, (x.clone(), w.clone()));
    (x, w)
}

/// Rule exact for all polynomials of total degree `≤ order` on the
/// `n`-simplex, built as a collapsed (Duffy) tensor product of Gauss rules.
pub fn simplex_rule(n: usize, order: usize) -> Result<QuadratureRule> {
    if order > MAX_ORDER {
        return Err(Error::OutOfRange(format!("quadrature order {order} exceeds {MAX_ORDER}")));
    }
    if n > 3 {
        return Err(Error::UnsupportedDimension(n));
    }
    Ok(poly_rule(n, order))
}

fn poly_rule(n: usize, order: usize) -> QuadratureRule {
    if n == 0 {
        return QuadratureRule { dim: 0, points: vec![[1.0, 0.0, 0.0, 0.0]], weights: vec![1.0], order };
    }
    if order <= 1 {
        let c = 1.0 / (n + 1) as f64;
        let mut p = [0.0; 4];
        p[..=n].fill(c);
        return QuadratureRule { dim: n, points: vec![p], weights: vec![1.0], order };
    }
    let q = (order + n) / 2 + 1;
    let (x, w) = gauss_legendre(q);
    let mut points = Vec::new();
    let mut weights = Vec::new();
    match n {
        1 => {
            for i in 0..q {
                points.push([1.0 - x[i], x[i], 0.0, 0.0]);
                weights.push(w[i]);
            }
        }
        2 => {
            for i in 0..q {
                for j in 0..q {
                    let l1 = x[i];
                    let l2 = (1.0 - x[i]) * x[j];
                    points.push([1.0 - l1 - l2, l1, l2, 0.0]);
                    weights.push(2.0 * w[i] * w[j] * (1.0 - x[i]));
                }
            }
        }
        _ => {
            for i in 0..q {
                for j in 0..q {
                    for k in 0..q {
                        let l1 = x[i];
                        let l2 = (1.0 - x[i]) * x[j];
                        let l3 = (1.0 - x[i]) * (1.0 - x[j]) * x[k];
                        points.push([1.0 - l1 - l2 - l3, l1, l2, l3]);
                        weights.push(6.0 * w[i] * w[j] * w[k] * (1.0 - x[i]).powi(2) * (1.0 - x[j]));
                    }
                }
            }
        }
    }
    QuadratureRule { dim: n, points, weights, order }
}

/// `M_k(κ) = ∫₀¹ t^k e^{-t/κ} dt`.
///
/// For `κ ≥ 0.02` a positive-term series is summed; below, the forward
/// recursion `M_k = κ(k M_{k-1} − e^{-1/κ})` is stable because `kκ < 1`.
pub fn exp_moment(k: usize, kappa: f64) -> f64 {
    assert!(kappa > 0.0, "exp_moment needs κ > 0");
    if kappa >= 0.02 {
        // e^{-1/κ} Σ_m κ^{-m} k!/(k+m+1)!
        let inv = 1.0 / kappa;
        let mut term = 1.0 / (k + 1) as f64;
        let mut sum = term;
        let mut m = 0usize;
        loop {
            m += 1;
            term *= inv / (k + m + 1) as f64;
            sum += term;
            if term < 1e-18 * sum && m > 2 {
                break;
            }
        }
        (-inv).exp() * sum
    } else {
        let e = (-1.0 / kappa).exp();
        let mut mk = -kappa * (-1.0 / kappa).exp_m1();
        for j in 1..=k {
            mk = kappa * (j as f64 * mk - e);
        }
        mk
    }
}

/// Faces carrying an exponential layer and the finest layer width, measured
/// in the barycentric coordinate of the face.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Layers {
    pub mask: u8,
    pub kappa: f64,
}

impl Default for Layers {
    fn default() -> Self {
        Layers::none()
    }
}

impl Layers {
    pub const fn none() -> Self {
        Layers { mask: 0, kappa: f64::INFINITY }
    }

    /// Layer `e^{-rate·λ_k}`.
    pub fn face(k: usize, rate: f64) -> Self {
        if rate <= 1.0 / KAPPA_SMOOTH {
            return Layers::none();
        }
        Layers { mask: 1 << k, kappa: 1.0 / rate }
    }

    pub fn faces(mask: u8, kappa: f64) -> Self {
        if mask == 0 || kappa >= KAPPA_SMOOTH {
            Layers::none()
        } else {
            Layers { mask, kappa }
        }
    }

    pub fn union(self, o: Layers) -> Layers {
        Layers { mask: self.mask | o.mask, kappa: self.kappa.min(o.kappa) }
    }

    pub fn is_smooth(&self) -> bool {
        self.mask == 0
    }

    pub fn contains(&self, k: usize) -> bool {
        self.mask & (1 << k) != 0
    }
}

/// Breakpoints `0, κ/2, κ, 2κ, 4κ, …, 1`.
fn graded_breaks(kappa: f64) -> Vec<f64> {
    let mut b = vec![0.0];
    let mut t = 0.5 * kappa;
    while t < 1.0 {
        b.push(t);
        t *= 2.0;
    }
    b.push(1.0);
    b
}

fn composite(breaks: &[f64], q: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(q);
    let mut px = Vec::new();
    let mut pw = Vec::new();
    for iv in breaks.windows(2) {
        let (a, b) = (iv[0], iv[1]);
        for i in 0..q {
            px.push(a + (b - a) * x[i]);
            pw.push((b - a) * w[i]);
        }
    }
    (px, pw)
}

/// 1D rule on `[0, 1]` graded toward 0.
fn graded_1d(kappa: f64, q: usize) -> (Vec<f64>, Vec<f64>) {
    composite(&graded_breaks(kappa), q)
}

/// 1D rule on `[0, 1]` graded toward both ends.
fn graded_1d_both(kappa: f64, q: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = graded_1d(2.0 * kappa, q);
    let mut px = Vec::with_capacity(2 * x.len());
    let mut pw = Vec::with_capacity(2 * x.len());
    for i in 0..x.len() {
        px.push(0.5 * x[i]);
        pw.push(0.5 * w[i]);
        px.push(1.0 - 0.5 * x[i]);
        pw.push(0.5 * w[i]);
    }
    (px, pw)
}

fn layer_points(order: usize, n: usize) -> usize {
    MIN_LAYER_POINTS.max((order + n) / 2 + 2)
}

/// Single-face Duffy rule: `λ_k = r` graded toward 0, the remaining
/// coordinates `(1−r)μ` with `μ` from a polynomial rule on face `k`.
fn duffy_rule(n: usize, k: usize, kappa: f64, order: usize) -> QuadratureRule {
    let (r, wr) = graded_1d(kappa, layer_points(order, n));
    let face = poly_rule(n - 1, order);
    let mut points = Vec::with_capacity(r.len() * face.len());
    let mut weights = Vec::with_capacity(r.len() * face.len());
    for (ri, wri) in r.iter().zip(&wr) {
        let jac = n as f64 * (1.0 - ri).powi(n as i32 - 1);
        for (mu, wmu) in face.points.iter().zip(&face.weights) {
            let mut p = [0.0; 4];
            p[k] = *ri;
            for (pos, v) in (0..=n).filter(|&v| v != k).enumerate() {
                p[v] = (1.0 - ri) * mu[pos];
            }
            points.push(p);
            weights.push(wri * jac * wmu);
        }
    }
    QuadratureRule { dim: n, points, weights, order }
}

/// Cone rule from the centroid over all faces; face rules are graded
/// toward their sub-faces listed in `mask`, the radial direction toward ∂T.
fn cone_rule(n: usize, mask: u8, kappa: f64, order: usize) -> QuadratureRule {
    let q = layer_points(order, n);
    let (s, ws) = graded_1d(kappa, q);
    let c = 1.0 / (n + 1) as f64;
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for k in 0..=n {
        let fm = face_local_mask(n, k, mask);
        let face = graded_rule_uncached(n - 1, fm, kappa, order + n);
        for (si, wsi) in s.iter().zip(&ws) {
            let jac = n as f64 * (1.0 - si).powi(n as i32 - 1) / (n + 1) as f64;
            for (mu, wmu) in face.points.iter().zip(&face.weights) {
                let mut p = [0.0; 4];
                for (pos, v) in (0..=n).filter(|&v| v != k).enumerate() {
                    p[v] = (1.0 - si) * mu[pos] + si * c;
                }
                p[k] = si * c;
                points.push(p);
                weights.push(wsi * jac * wmu);
            }
        }
    }
    QuadratureRule { dim: n, points, weights, order }
}

/// Maps a mask over the faces of T to the faces of face `k` of T: face `m`
/// of T (m ≠ k) meets face `k` in the sub-face opposite local vertex `pos(m)`.
fn face_local_mask(n: usize, k: usize, mask: u8) -> u8 {
    let mut fm = 0u8;
    for (pos, v) in (0..=n).filter(|&v| v != k).enumerate() {
        if mask & (1 << v) != 0 {
            fm |= 1 << pos;
        }
    }
    fm & ((1u8 << n) - 1)
}

fn graded_rule_uncached(n: usize, mask: u8, kappa: f64, order: usize) -> QuadratureRule {
    let full = (1u8 << (n + 1)) - 1;
    let mask = mask & full;
    if mask == 0 || kappa >= KAPPA_SMOOTH || n == 0 {
        return poly_rule(n, (order + 8).min(MAX_ORDER + 12));
    }
    if n == 1 {
        let q = layer_points(order, 1);
        let (x, w) = match (mask & 1 != 0, mask & 2 != 0) {
            (true, true) => graded_1d_both(kappa, q),
            // face 0 is λ_0 = 0, i.e. t = λ_1 = 1
            (true, false) => {
                let (x, w) = graded_1d(kappa, q);
                (x.iter().map(|t| 1.0 - t).collect(), w)
            }
            _ => graded_1d(kappa, q),
        };
        let points = x.iter().map(|&t| [1.0 - t, t, 0.0, 0.0]).collect();
        return QuadratureRule { dim: 1, points, weights: w, order };
    }
    if mask.count_ones() == 1 {
        return duffy_rule(n, mask.trailing_zeros() as usize, kappa, order);
    }
    cone_rule(n, mask, kappa, order)
}

type RuleKey = (usize, u8, i32, usize, u8);

fn rule_cache() -> &'static Mutex<HashMap<RuleKey, Arc<QuadratureRule>>> {
    static CACHE: OnceLock<Mutex<HashMap<RuleKey, Arc<QuadratureRule>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn kappa_bucket(kappa: f64) -> (i32, f64) {
    let b = kappa.log2().floor().max(-60.0) as i32;
    (b, 2f64.powi(b))
}

/// Volume rule on the `n`-simplex resolving the given layers.
pub fn volume_rule(n: usize, layers: Layers, order: usize) -> Arc<QuadratureRule> {
    let order = order.min(MAX_ORDER + 10);
    let (mask, b, kb) = if layers.is_smooth() {
        (0, 0, f64::INFINITY)
    } else {
        let (b, kb) = kappa_bucket(layers.kappa);
        (layers.mask, b, kb)
    };
    let key = (n, mask, b, order, 255);
    if let Some(r) = rule_cache().lock().unwrap().get(&key) {
        return r.clone();
    }
    let r = Arc::new(graded_rule_uncached(n, mask, kb, order));
    rule_cache().lock().unwrap().insert(key, r.clone());
    r
}

/// Rule on face `k` of the `n`-simplex, returned in the barycentric
/// coordinates of the simplex (`λ_k = 0`) with normalized weights.
pub fn face_rule(n: usize, k: usize, layers: Layers, order: usize) -> Arc<QuadratureRule> {
    let order = order.min(MAX_ORDER + 10);
    let fm = face_local_mask(n, k, layers.mask);
    let (b, kb) = if fm == 0 { (0, f64::INFINITY) } else { kappa_bucket(layers.kappa) };
    let key = (n, fm, b, order, k as u8);
    if let Some(r) = rule_cache().lock().unwrap().get(&key) {
        return r.clone();
    }
    let local = graded_rule_uncached(n - 1, fm, kb, order);
    let points = local
        .points
        .iter()
        .map(|mu| {
            let mut p = [0.0; 4];
            for (pos, v) in (0..=n).filter(|&v| v != k).enumerate() {
                p[v] = mu[pos];
            }
            p
        })
        .collect();
    let r = Arc::new(QuadratureRule { dim: n - 1, points, weights: local.weights, order });
    rule_cache().lock().unwrap().insert(key, r.clone());
    r
}

/// Composite rule on the uniform `m`-subdivision of a triangle, exact for
/// piecewise polynomials of degree `≤ order` on that lattice.
pub fn lattice_volume_rule(m: usize, order: usize) -> Arc<QuadratureRule> {
    let key = (2, 0, -1000 - m as i32, order, 254);
    if let Some(r) = rule_cache().lock().unwrap().get(&key) {
        return r.clone();
    }
    let base = poly_rule(2, order);
    let h = 1.0 / m as f64;
    let cells = (m * m) as f64;
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for j in 0..m {
        for i in 0..m - j {
            let up = [[i as f64, j as f64], [(i + 1) as f64, j as f64], [i as f64, (j + 1) as f64]];
            let mut tris = vec![up];
            if i + j + 1 < m {
                tris.push([[(i + 1) as f64, (j + 1) as f64], [i as f64, (j + 1) as f64], [(i + 1) as f64, j as f64]]);
            }
            for v in tris {
                for (mu, w) in base.points.iter().zip(&base.weights) {
                    let a = h * (mu[0] * v[0][0] + mu[1] * v[1][0] + mu[2] * v[2][0]);
                    let b = h * (mu[0] * v[0][1] + mu[1] * v[1][1] + mu[2] * v[2][1]);
                    points.push([1.0 - a - b, a, b, 0.0]);
                    weights.push(w / cells);
                }
            }
        }
    }
    let r = Arc::new(QuadratureRule { dim: 2, points, weights, order });
    rule_cache().lock().unwrap().insert(key, r.clone());
    r
}

/// Composite Gauss rule on face `k` of a triangle split into `m` segments.
pub fn lattice_face_rule(k: usize, m: usize, order: usize) -> Arc<QuadratureRule> {
    let key = (2, 0, -1000 - m as i32, order, k as u8);
    if let Some(r) = rule_cache().lock().unwrap().get(&key) {
        return r.clone();
    }
    let (x, w) = gauss_legendre(order / 2 + 1);
    let verts: Vec<usize> = (0..3).filter(|&v| v != k).collect();
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for s in 0..m {
        for (xi, wi) in x.iter().zip(&w) {
            let u = (s as f64 + xi) / m as f64;
            let mut p = [0.0; 4];
            p[verts[0]] = 1.0 - u;
            p[verts[1]] = u;
            points.push(p);
            weights.push(wi / m as f64);
        }
    }
    let r = Arc::new(QuadratureRule { dim: 1, points, weights, order });
    rule_cache().lock().unwrap().insert(key, r.clone());
    r
}

/// Composite rule on the reference simplex graded toward face `face` for
/// integrands `q · e^{-λ_face/κ}` with `q` of degree `≤ order`.
pub fn layer_rule(n: usize, face: usize, kappa: f64, order: usize) -> Result<QuadratureRule> {
    if !(kappa > 0.0 && kappa <= KAPPA_SMOOTH) {
        return Err(Error::OutOfRange(format!("layer rule needs 0 < κ ≤ {KAPPA_SMOOTH}, got {kappa}")));
    }
    if !(2..=3).contains(&n) || face > n {
        return Err(Error::UnsupportedDimension(n));
    }
    Ok(duffy_rule(n, face, kappa, order))
}

/// Same as [`layer_rule`] with a chosen number of Gauss points per layer.
pub fn layer_rule_with_points(n: usize, face: usize, kappa: f64, order: usize, q: usize) -> Result<QuadratureRule> {
    let mut r = layer_rule(n, face, kappa, order)?;
    let (rr, wr) = graded_1d(kappa, q);
    let face_rule = poly_rule(n - 1, order);
    r.points.clear();
    r.weights.clear();
    for (ri, wri) in rr.iter().zip(&wr) {
        let jac = n as f64 * (1.0 - ri).powi(n as i32 - 1);
        for (mu, wmu) in face_rule.points.iter().zip(&face_rule.weights) {
            let mut p = [0.0; 4];
            p[face] = *ri;
            for (pos, v) in (0..=n).filter(|&v| v != face).enumerate() {
                p[v] = (1.0 - ri) * mu[pos];
            }
            r.points.push(p);
            r.weights.push(wri * jac * wmu);
        }
    }
    Ok(r)
}

/// Adaptive Gauss–Kronrod style 1D integration on `[a, b]` by recursive
/// bisection of a 10-point Gauss rule; a test oracle only.
pub fn adaptive_1d<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn gauss<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
        let (x, w) = gauss_legendre(10);
        (0..10).map(|i| w[i] * f(a + (b - a) * x[i])).sum::<f64>() * (b - a)
    }
    fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, whole: f64, tol: f64, depth: usize) -> f64 {
        let m = 0.5 * (a + b);
        let l = gauss(f, a, m);
        let r = gauss(f, m, b);
        if depth > 60 || (l + r - whole).abs() <= tol {
            return l + r;
        }
        rec(f, a, m, l, 0.5 * tol, depth + 1) + rec(f, m, b, r, 0.5 * tol, depth + 1)
    }
    let whole = gauss(f, a, b);
    rec(f, a, b, whole, tol, 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn monomial_exact(n: usize, a: &[usize]) -> f64 {
        // ∫_{T̂} λ^a = n! Π a_i! / (n + Σa)! · |T̂|, normalized by |T̂|
        let s: usize = a.iter().sum();
        factorial(n) * a.iter().map(|&k| factorial(k)).product::<f64>() / factorial(n + s)
    }

    #[test]
    fn gauss_weights_sum_to_one() {
        for q in 1..20 {
            let (_, w) = gauss_legendre(q);
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn centroid_rule() {
        let r = simplex_rule(2, 1).unwrap();
        assert_eq!(r.len(), 1);
        assert!((r.reference_weights()[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn face_bubble_integral() {
        // η_F = x(1−x−y) for F = {y = 0}
        let r = simplex_rule(2, 2).unwrap();
        let v = r.integrate(0.5, |l| l[1] * l[0]);
        assert!((v - 1.0 / 24.0).abs() < 1e-15);
    }

    #[test]
    fn monomials_exact() {
        for n in 1..=3 {
            for order in [2, 5, 9, 14] {
                let r = simplex_rule(n, order).unwrap();
                for a0 in 0..=order {
                    for a1 in 0..=order - a0 {
                        let a2max = if n >= 2 { order - a0 - a1 } else { 0 };
                        for a2 in 0..=a2max {
                            let a = [a0, a1, a2, 0];
                            let v = r.integrate(1.0, |l| (0..=n).map(|i| l[i].powi(a[i] as i32)).product());
                            let e = monomial_exact(n, &a[..=n]);
                            assert!((v - e).abs() <= 1e-13 * e, "n={n} order={order} a={a:?}");
                        }
                    }
                }
            }
        }
        assert!(simplex_rule(2, 31).is_err());
    }

    #[test]
    fn exp_moment_closed_forms() {
        assert!((exp_moment(0, 1.0) - (1.0 - (-1f64).exp())).abs() < 1e-15);
        assert!((exp_moment(0, 0.5) - 0.4323323583816936).abs() < 1e-15);
        for &k in &[1e-8f64, 1e-4, 0.01, 0.019, 0.021, 0.3, 1.0, 10.0] {
            let closed: f64 = 0.5 * k * (1.0 - (-2.0 / k).exp());
            assert!((exp_moment(0, k / 2.0) - closed).abs() <= 1e-13 * closed);
        }
    }

    #[test]
    fn exp_moment_recursion_identity() {
        for &k in &[1e-8f64, 1e-5, 1e-3, 0.019, 0.02, 0.1, 1.0, 10.0] {
            for j in 1..=40 {
                let lhs = exp_moment(j, k);
                let rhs = k * (j as f64 * exp_moment(j - 1, k) - (-1.0 / k).exp());
                assert!((lhs - rhs).abs() <= 1e-13 * lhs.abs().max(1e-300) + 1e-300, "κ={k} k={j}");
            }
        }
    }

    #[test]
    fn layer_rule_against_moments() {
        // ∫_{T̂} e^{-y/κ} x(1−x−y) = ∫₀¹ e^{-y/κ}(1−y)³/6 dy
        for &kappa in &[1.0, 0.1, 1e-3, 1e-6] {
            let r = layer_rule(2, 2, kappa, 4).unwrap();
            let v = r.integrate(0.5, |l| (-l[2] / kappa).exp() * l[1] * l[0]);
            let m = |k| exp_moment(k, kappa);
            let exact = (m(0) - 3.0 * m(1) + 3.0 * m(2) - m(3)) / 6.0;
            assert!((v - exact).abs() <= 1e-12 * exact, "κ={kappa}");
        }
    }

    #[test]
    fn graded_volume_rules_integrate_layers() {
        for &kappa in &[0.3, 1e-3, 1e-6] {
            // two-face layer against a separable oracle on T̂
            let r = volume_rule(2, Layers::faces(0b110, kappa), 6);
            let v = r.integrate(0.5, |l| (-l[1] / kappa).exp() + (-l[2] / kappa).exp());
            // ∫_{T̂} e^{-x/κ} = ∫₀¹ e^{-x/κ}(1−x) dx
            let one = exp_moment(0, kappa) - exp_moment(1, kappa);
            assert!((v - 2.0 * one).abs() <= 1e-12 * one, "κ={kappa}");
            let f = face_rule(2, 0, Layers::faces(0b110, kappa), 4);
            let s = f.integrate(2f64.sqrt(), |l| (-l[1] / kappa).exp());
            let exact = 2f64.sqrt() * exp_moment(0, kappa);
            assert!((s - exact).abs() <= 1e-12 * exact);
        }
    }
}
