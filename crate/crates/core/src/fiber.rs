//! Convex fibers on `C ≅ R²`.
//!
//! A [`Fiber`] is the pointwise maximum of finitely many pieces, each piece a
//! sum of smooth convex [`Term`]s. Smooth fibers have a single piece; squared
//! polyhedral norms are a maximum of ridge powers. The solver consumes this
//! structure directly (epigraph form for multi-piece fibers).

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::linalg::{to_vec, Mat2, Vec2};

/// Convex function of one real variable.
pub trait ScalarConvex: Send + Sync + fmt::Debug {
    fn value(&self, x: f64) -> f64;

    fn derivative(&self, x: f64) -> f64 {
        let h = 1e-6 * (1.0 + x.abs());
        (self.value(x + h) - self.value(x - h)) / (2.0 * h)
    }

    fn second_derivative(&self, x: f64) -> f64 {
        let h = 1e-4 * (1.0 + x.abs());
        ((self.value(x + h) - 2.0 * self.value(x) + self.value(x - h)) / (h * h)).max(0.0)
    }

    /// Closed-form Legendre transform, when one is known.
    fn closed_form_conjugate(&self) -> Option<Arc<dyn ScalarConvex>> {
        None
    }
}

/// Legendre transform of a scalar convex function, closed form when available.
pub fn scalar_conjugate(f: &Arc<dyn ScalarConvex>) -> Arc<dyn ScalarConvex> {
    f.closed_form_conjugate().unwrap_or_else(|| Arc::new(NumericConjugate { inner: f.clone() }))
}

/// `alpha·x² + beta·x + gamma` with `alpha > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadratic1D {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl ScalarConvex for Quadratic1D {
    fn value(&self, x: f64) -> f64 {
        (self.alpha * x + self.beta) * x + self.gamma
    }

    fn derivative(&self, x: f64) -> f64 {
        2.0 * self.alpha * x + self.beta
    }

    fn second_derivative(&self, _x: f64) -> f64 {
        2.0 * self.alpha
    }

    fn closed_form_conjugate(&self) -> Option<Arc<dyn ScalarConvex>> {
        // sup_x ξx − αx² − βx − γ = (ξ − β)²/(4α) − γ
        let a = 1.0 / (4.0 * self.alpha);
        Some(Arc::new(Quadratic1D {
            alpha: a,
            beta: -2.0 * a * self.beta,
            gamma: a * self.beta * self.beta - self.gamma,
        }))
    }
}

/// User-supplied scalar function; derivatives by central differences.
pub struct ScalarFn {
    f: Box<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl ScalarFn {
    pub fn new(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self { f: Box::new(f) }
    }
}

impl fmt::Debug for ScalarFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("ScalarFn")
    }
}

impl ScalarConvex for ScalarFn {
    fn value(&self, x: f64) -> f64 {
        (self.f)(x)
    }
}

/// Numerical Legendre transform: the maximiser solves `f'(x) = ξ`, found by
/// bracketing and bisection on the monotone derivative.
#[derive(Debug)]
struct NumericConjugate {
    inner: Arc<dyn ScalarConvex>,
}

impl NumericConjugate {
    fn maximiser(&self, xi: f64) -> f64 {
        let d = |x: f64| self.inner.derivative(x) - xi;
        let (mut lo, mut hi) = (-1.0, 1.0);
        let mut guard = 0;
        while d(lo) > 0.0 && guard < 200 {
            lo *= 2.0;
            guard += 1;
        }
        while d(hi) < 0.0 && guard < 400 {
            hi *= 2.0;
            guard += 1;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if d(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-14 * (1.0 + mid.abs()) {
                break;
            }
        }
        0.5 * (lo + hi)
    }
}

impl ScalarConvex for NumericConjugate {
    fn value(&self, xi: f64) -> f64 {
        let x = self.maximiser(xi);
        xi * x - self.inner.value(x)
    }

    fn derivative(&self, xi: f64) -> f64 {
        self.maximiser(xi)
    }

    fn second_derivative(&self, xi: f64) -> f64 {
        let x = self.maximiser(xi);
        1.0 / self.inner.second_derivative(x).max(1e-12)
    }

    fn closed_form_conjugate(&self) -> Option<Arc<dyn ScalarConvex>> {
        Some(self.inner.clone())
    }
}

/// One smooth convex summand of a fiber piece.
#[derive(Debug, Clone)]
pub enum Term {
    /// `slope·v + offset`
    Affine { slope: [f64; 2], offset: f64 },
    /// `½ vᵀ H v + lin·v + constant`, `H` symmetric positive semidefinite.
    Quadratic { hess: [[f64; 2]; 2], lin: [f64; 2], constant: f64 },
    /// `scale · N(L v)^p / p` with `N(u) = (a|u₁|^α + b|u₂|^α)^{1/α}`.
    NormPower { map: [[f64; 2]; 2], alpha: f64, weights: [f64; 2], p: f64, scale: f64 },
    /// `scale · |dir·v|^p / p`
    Ridge { dir: [f64; 2], p: f64, scale: f64 },
    /// `scale · f(dir·v)`
    Scalar { f: Arc<dyn ScalarConvex>, dir: [f64; 2], scale: f64 },
}

fn mat(m: &[[f64; 2]; 2]) -> Mat2 {
    Mat2::new(m[0][0], m[0][1], m[1][0], m[1][1])
}

fn arr(m: &Mat2) -> [[f64; 2]; 2] {
    [[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]]
}

// Floor applied to |u| when forming curvature of non-C² powers at the origin.
const CURVATURE_FLOOR: f64 = 1e-9;

impl Term {
    pub fn norm_power(map: [[f64; 2]; 2], alpha: f64, weights: [f64; 2], p: f64) -> Self {
        Term::NormPower { map, alpha, weights, p, scale: 1.0 }
    }

    pub fn euclidean_power(p: f64, scale: f64) -> Self {
        Term::NormPower { map: [[1.0, 0.0], [0.0, 1.0]], alpha: 2.0, weights: [1.0, 1.0], p, scale }
    }

    pub(crate) fn value_at(&self, v: &Vec2) -> f64 {
        match self {
            Term::Affine { slope, offset } => slope[0] * v[0] + slope[1] * v[1] + offset,
            Term::Quadratic { hess, lin, constant } => {
                let h = mat(hess);
                0.5 * v.dot(&(h * v)) + lin[0] * v[0] + lin[1] * v[1] + constant
            }
            Term::NormPower { map, alpha, weights, p, scale } => {
                let u = mat(map) * v;
                scale * weighted_norm(&u, *alpha, weights).powf(*p) / p
            }
            Term::Ridge { dir, p, scale } => {
                let y = dir[0] * v[0] + dir[1] * v[1];
                scale * y.abs().powf(*p) / p
            }
            Term::Scalar { f, dir, scale } => scale * f.value(dir[0] * v[0] + dir[1] * v[1]),
        }
    }

    /// Value, gradient and Hessian at `v`.
    pub(crate) fn second_order(&self, v: &Vec2) -> (f64, Vec2, Mat2) {
        match self {
            Term::Affine { slope, .. } => (self.value_at(v), Vec2::new(slope[0], slope[1]), Mat2::zeros()),
            Term::Quadratic { hess, lin, .. } => {
                let h = mat(hess);
                (self.value_at(v), h * v + Vec2::new(lin[0], lin[1]), h)
            }
            Term::NormPower { map, alpha, weights, p, scale } => {
                let l = mat(map);
                let u = l * v;
                let (val, g, h) = norm_power_local(&u, *alpha, weights, *p);
                (scale * val, l.transpose() * g * *scale, l.transpose() * h * l * *scale)
            }
            Term::Ridge { dir, p, scale } => {
                let d = Vec2::new(dir[0], dir[1]);
                let y = d.dot(v);
                let a = y.abs();
                let val = scale * a.powf(*p) / p;
                let g = d * (scale * a.powf(p - 1.0) * y.signum());
                let curv = scale * (p - 1.0) * a.max(CURVATURE_FLOOR * d.norm()).powf(p - 2.0);
                (val, g, d * d.transpose() * curv)
            }
            Term::Scalar { f, dir, scale } => {
                let d = Vec2::new(dir[0], dir[1]);
                let y = d.dot(v);
                (
                    scale * f.value(y),
                    d * (scale * f.derivative(y)),
                    d * d.transpose() * (scale * f.second_derivative(y)),
                )
            }
        }
    }

    /// `r · term(v)`.
    pub fn scaled(&self, r: f64) -> Term {
        match self {
            Term::Affine { slope, offset } => Term::Affine { slope: [slope[0] * r, slope[1] * r], offset: offset * r },
            Term::Quadratic { hess, lin, constant } => {
                Term::Quadratic { hess: arr(&(mat(hess) * r)), lin: [lin[0] * r, lin[1] * r], constant: constant * r }
            }
            Term::NormPower { map, alpha, weights, p, scale } => {
                Term::NormPower { map: *map, alpha: *alpha, weights: *weights, p: *p, scale: scale * r }
            }
            Term::Ridge { dir, p, scale } => Term::Ridge { dir: *dir, p: *p, scale: scale * r },
            Term::Scalar { f, dir, scale } => Term::Scalar { f: f.clone(), dir: *dir, scale: scale * r },
        }
    }

    /// `v ↦ term(a·v)`.
    pub fn dilated(&self, a: f64) -> Term {
        match self {
            Term::Affine { slope, offset } => Term::Affine { slope: [slope[0] * a, slope[1] * a], offset: *offset },
            Term::Quadratic { hess, lin, constant } => Term::Quadratic {
                hess: arr(&(mat(hess) * (a * a))),
                lin: [lin[0] * a, lin[1] * a],
                constant: *constant,
            },
            Term::NormPower { map, alpha, weights, p, scale } => {
                Term::NormPower { map: arr(&(mat(map) * a)), alpha: *alpha, weights: *weights, p: *p, scale: *scale }
            }
            Term::Ridge { dir, p, scale } => Term::Ridge { dir: [dir[0] * a, dir[1] * a], p: *p, scale: *scale },
            Term::Scalar { f, dir, scale } => {
                Term::Scalar { f: f.clone(), dir: [dir[0] * a, dir[1] * a], scale: *scale }
            }
        }
    }
}

pub(crate) fn weighted_norm(u: &Vec2, alpha: f64, weights: &[f64; 2]) -> f64 {
    if alpha == 2.0 {
        (weights[0] * u[0] * u[0] + weights[1] * u[1] * u[1]).sqrt()
    } else {
        (weights[0] * u[0].abs().powf(alpha) + weights[1] * u[1].abs().powf(alpha)).powf(1.0 / alpha)
    }
}

/// `N(u)^p / p` with gradient and Hessian in `u`.
fn norm_power_local(u: &Vec2, alpha: f64, weights: &[f64; 2], p: f64) -> (f64, Vec2, Mat2) {
    let n = weighted_norm(u, alpha, weights);
    let val = n.powf(p) / p;
    if alpha == 2.0 {
        let du = Vec2::new(weights[0] * u[0], weights[1] * u[1]);
        let g = if n > 0.0 { du * n.powf(p - 2.0) } else { Vec2::zeros() };
        let nf = n.max(CURVATURE_FLOOR);
        let diag = Mat2::new(weights[0], 0.0, 0.0, weights[1]);
        let h = diag * nf.powf(p - 2.0) + du * du.transpose() * ((p - 2.0) * nf.powf(p - 4.0));
        return (val, g, h);
    }
    if n == 0.0 {
        let nf = CURVATURE_FLOOR;
        let h = Mat2::new(weights[0], 0.0, 0.0, weights[1]) * nf.powf(p - 2.0);
        return (val, Vec2::zeros(), h);
    }
    let gi = |i: usize| weights[i] * u[i].abs().powf(alpha - 1.0) * u[i].signum();
    let gvec = Vec2::new(gi(0), gi(1));
    let g = gvec * n.powf(p - alpha);
    let floor = CURVATURE_FLOOR * n;
    let di = |i: usize| weights[i] * (alpha - 1.0) * u[i].abs().max(floor).powf(alpha - 2.0);
    let h = gvec * gvec.transpose() * ((p - alpha) * n.powf(p - 2.0 * alpha))
        + Mat2::new(di(0), 0.0, 0.0, di(1)) * n.powf(p - alpha);
    (val, g, h)
}

/// A sum of terms; fibers are maxima of pieces.
pub type Piece = Vec<Term>;

/// Convex function on `C ≅ R²`: the maximum of its pieces.
#[derive(Debug, Clone)]
pub struct Fiber {
    pieces: Vec<Piece>,
}

impl Fiber {
    pub fn smooth(terms: Vec<Term>) -> Self {
        Self { pieces: vec![terms] }
    }

    pub fn max_of(pieces: Vec<Piece>) -> Self {
        assert!(!pieces.is_empty(), "a fiber needs at least one piece");
        Self { pieces }
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn is_smooth(&self) -> bool {
        self.pieces.len() == 1
    }

    pub fn value(&self, w: Complex64) -> f64 {
        self.value_vec(&to_vec(w))
    }

    pub(crate) fn value_vec(&self, v: &Vec2) -> f64 {
        self.pieces
            .iter()
            .map(|piece| piece.iter().map(|t| t.value_at(v)).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// A (sub)gradient in real coordinates, taken from the first active piece.
    pub fn gradient(&self, w: Complex64) -> [f64; 2] {
        let v = to_vec(w);
        let (_, g, _) = self.active_second_order(&v);
        [g[0], g[1]]
    }

    pub(crate) fn active_second_order(&self, v: &Vec2) -> (f64, Vec2, Mat2) {
        let mut best: Option<(f64, Vec2, Mat2)> = None;
        for piece in &self.pieces {
            let cur = piece_second_order(piece, v);
            if best.as_ref().is_none_or(|b| cur.0 > b.0) {
                best = Some(cur);
            }
        }
        best.expect("non-empty fiber")
    }

    pub fn scaled(&self, r: f64) -> Fiber {
        self.map_terms(|t| t.scaled(r))
    }

    pub fn dilated(&self, a: f64) -> Fiber {
        self.map_terms(|t| t.dilated(a))
    }

    fn map_terms(&self, f: impl Fn(&Term) -> Term) -> Fiber {
        Fiber { pieces: self.pieces.iter().map(|p| p.iter().map(&f).collect()).collect() }
    }
}

pub(crate) fn piece_second_order(piece: &Piece, v: &Vec2) -> (f64, Vec2, Mat2) {
    let mut acc = (0.0, Vec2::zeros(), Mat2::zeros());
    for t in piece {
        let (a, g, h) = t.second_order(v);
        acc.0 += a;
        acc.1 += g;
        acc.2 += h;
    }
    acc
}
