//! Boundary data: a convex fiber `φ_s` (and its Legendre transform `φ*_s`)
//! for every sample `s` of an equispaced circle grid.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fiber::{scalar_conjugate, weighted_norm, Fiber, ScalarConvex, Term};
use crate::linalg::{pairing, rotation, to_vec, Vec2};

/// `M` equispaced samples `s_j = exp(2πij/M)` with uniform weight `1/M`.
#[derive(Debug, Clone, PartialEq)]
pub struct CircleGrid {
    points: Vec<Complex64>,
}

impl CircleGrid {
    pub fn new(m: usize) -> Result<Self> {
        if m < 4 || !m.is_multiple_of(2) {
            return Err(invalid(format!("grid size must be even and at least 4, got {m}")));
        }
        let points = (0..m).map(|j| Complex64::from_polar(1.0, 2.0 * PI * j as f64 / m as f64)).collect();
        Ok(Self { points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn point(&self, j: usize) -> Complex64 {
        self.points[j]
    }

    pub fn weight(&self) -> f64 {
        1.0 / self.points.len() as f64
    }

    pub fn angle(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.points.len() as f64
    }
}

/// An R-norm on `C ≅ R²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Norm {
    /// `scale · |w|`
    Euclidean {
        #[serde(default = "one")]
        scale: f64,
    },
    /// `(a|u₁|^α + b|u₂|^α)^{1/α}` with `u = R_angle w`, `1 < α < ∞`.
    LAlpha {
        alpha: f64,
        #[serde(default = "unit_weights")]
        weights: [f64; 2],
        #[serde(default)]
        angle: f64,
    },
    /// `max_k |ℓ_k · w|`; the `ℓ_k` span the dual unit ball.
    Polygon { dual_vectors: Vec<[f64; 2]> },
}

fn one() -> f64 {
    1.0
}

fn unit_weights() -> [f64; 2] {
    [1.0, 1.0]
}

impl Norm {
    pub fn euclidean() -> Self {
        Norm::Euclidean { scale: 1.0 }
    }

    pub fn l1() -> Self {
        Norm::Polygon { dual_vectors: vec![[1.0, 1.0], [1.0, -1.0]] }
    }

    pub fn linf() -> Self {
        Norm::Polygon { dual_vectors: vec![[1.0, 0.0], [0.0, 1.0]] }
    }

    /// Unit ball is the square `[-1, 1]²` rotated by `angle`.
    pub fn rotated_square(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Norm::Polygon { dual_vectors: vec![[c, s], [-s, c]] }
    }

    /// `sqrt(a x² + b y²)` after rotation by `angle`.
    pub fn ellipse(a: f64, b: f64, angle: f64) -> Self {
        Norm::LAlpha { alpha: 2.0, weights: [a, b], angle }
    }

    pub fn eval(&self, w: Complex64) -> f64 {
        let v = to_vec(w);
        match self {
            Norm::Euclidean { scale } => scale * v.norm(),
            Norm::LAlpha { alpha, weights, angle } => weighted_norm(&(rotation(*angle) * v), *alpha, weights),
            Norm::Polygon { dual_vectors } => {
                dual_vectors.iter().map(|l| (l[0] * v[0] + l[1] * v[1]).abs()).fold(0.0, f64::max)
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match self {
            Norm::Euclidean { scale } => *scale > 0.0 && scale.is_finite(),
            Norm::LAlpha { alpha, weights, angle } => {
                *alpha > 1.0
                    && alpha.is_finite()
                    && weights.iter().all(|w| *w > 0.0 && w.is_finite())
                    && angle.is_finite()
            }
            Norm::Polygon { dual_vectors } => {
                let finite = dual_vectors.iter().flatten().all(|x| x.is_finite());
                let spans = dual_vectors
                    .iter()
                    .enumerate()
                    .any(|(i, a)| dual_vectors[i + 1..].iter().any(|b| (a[0] * b[1] - a[1] * b[0]).abs() > 1e-12));
                finite && spans
            }
        };
        if ok {
            Ok(())
        } else {
            Err(invalid(format!("degenerate norm {self:?}")))
        }
    }

    /// Dual norm for the pairing `Re(z·w)`: `‖z‖* = sup_{‖w‖≤1} Re(z·w)`.
    pub fn dual(&self) -> Norm {
        match self {
            Norm::Euclidean { scale } => Norm::Euclidean { scale: 1.0 / scale },
            Norm::LAlpha { alpha, weights, angle } => {
                let conj = alpha / (alpha - 1.0);
                let e = -1.0 / (alpha - 1.0);
                Norm::LAlpha { alpha: conj, weights: [weights[0].powf(e), weights[1].powf(e)], angle: -angle }
            }
            Norm::Polygon { dual_vectors } => {
                let j = pairing();
                let verts = polygon_ball_vertices(dual_vectors);
                Norm::Polygon {
                    dual_vectors: verts
                        .iter()
                        .map(|u| {
                            let z = j * u;
                            [z[0], z[1]]
                        })
                        .collect(),
                }
            }
        }
    }

    /// The fiber `‖·‖^p / p`.
    pub fn power_fiber(&self, p: f64) -> Fiber {
        match self {
            Norm::Euclidean { scale } => Fiber::smooth(vec![Term::euclidean_power(p, scale.powf(p))]),
            Norm::LAlpha { alpha, weights, angle } => {
                let r = rotation(*angle);
                Fiber::smooth(vec![Term::norm_power(
                    [[r[(0, 0)], r[(0, 1)]], [r[(1, 0)], r[(1, 1)]]],
                    *alpha,
                    *weights,
                    p,
                )])
            }
            Norm::Polygon { dual_vectors } => {
                Fiber::max_of(dual_vectors.iter().map(|l| vec![Term::Ridge { dir: *l, p, scale: 1.0 }]).collect())
            }
        }
    }

    /// Extremes of the norm over the Euclidean unit circle, by direction sweep.
    pub fn unit_circle_range(&self) -> (f64, f64) {
        let n = 4096;
        (0..n)
            .map(|k| self.eval(Complex64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64)))
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), x| (lo.min(x), hi.max(x)))
    }

    /// Largest `|‖e^{iθ}w‖ − ‖w‖|` over sampled `w` and `θ`.
    pub fn complex_homogeneity_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for a in 0..24 {
            let w = Complex64::from_polar(1.0, 2.0 * PI * a as f64 / 24.0 + 0.1);
            let base = self.eval(w);
            for b in 1..12 {
                let rot = Complex64::from_polar(1.0, 2.0 * PI * b as f64 / 12.0);
                worst = worst.max((self.eval(rot * w) - base).abs());
            }
        }
        worst
    }
}

/// Vertices (up to sign) of `{v : |ℓ_k·v| ≤ 1 ∀k}`.
fn polygon_ball_vertices(dual_vectors: &[[f64; 2]]) -> Vec<Vec2> {
    let ls: Vec<Vec2> = dual_vectors.iter().map(|l| Vec2::new(l[0], l[1])).collect();
    let mut verts: Vec<Vec2> = Vec::new();
    for a in 0..ls.len() {
        for b in a + 1..ls.len() {
            let det = ls[a][0] * ls[b][1] - ls[a][1] * ls[b][0];
            if det.abs() < 1e-14 {
                continue;
            }
            for sb in [1.0, -1.0] {
                // ℓ_a·v = 1, ℓ_b·v = sb
                let v = Vec2::new((ls[b][1] - sb * ls[a][1]) / det, (sb * ls[a][0] - ls[b][0]) / det);
                let inside = ls.iter().all(|l| l.dot(&v).abs() <= 1.0 + 1e-10);
                let dup = verts.iter().any(|u| (u - v).norm() < 1e-10 || (u + v).norm() < 1e-10);
                if inside && !dup {
                    verts.push(v);
                }
            }
        }
    }
    verts
}

/// One norm per grid sample.
#[derive(Debug, Clone, PartialEq)]
pub struct NormFamily {
    norms: Vec<Norm>,
}

impl NormFamily {
    pub fn new(norms: Vec<Norm>) -> Self {
        Self { norms }
    }

    pub fn constant(norm: Norm, grid: &CircleGrid) -> Self {
        Self { norms: vec![norm; grid.len()] }
    }

    pub fn from_fn(grid: &CircleGrid, f: impl Fn(Complex64) -> Norm) -> Self {
        Self { norms: grid.points().iter().map(|&s| f(s)).collect() }
    }

    /// `upper` on samples with angle in `[0, π)`, `lower` on the rest.
    pub fn semicircle(upper: Norm, lower: Norm, grid: &CircleGrid) -> Self {
        let half = grid.len() / 2;
        Self { norms: (0..grid.len()).map(|j| if j < half { upper.clone() } else { lower.clone() }).collect() }
    }

    pub fn norms(&self) -> &[Norm] {
        &self.norms
    }

    pub fn len(&self) -> usize {
        self.norms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.norms.is_empty()
    }

    pub fn dual(&self) -> NormFamily {
        Self { norms: self.norms.iter().map(Norm::dual).collect() }
    }

    pub fn complex_homogeneity_defect(&self) -> f64 {
        self.norms.iter().map(Norm::complex_homogeneity_defect).fold(0.0, f64::max)
    }
}

/// Two-sided growth constants: `c|w|^p − A ≤ φ_s(w) ≤ C|w|^p + A`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Growth {
    pub lower: f64,
    pub upper: f64,
    pub offset: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataKind {
    NormPower,
    HilbertWeight,
    RealOnly,
    Tabulated,
}

/// Maximum violations of the primal and dual growth inequalities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthReport {
    pub samples: usize,
    pub primal_lower: f64,
    pub primal_upper: f64,
    pub dual_lower: f64,
    pub dual_upper: f64,
}

impl GrowthReport {
    pub fn max_violation(&self) -> f64 {
        self.primal_lower.max(self.primal_upper).max(self.dual_lower).max(self.dual_upper)
    }
}

/// Fiberwise convex boundary data sampled on a circle grid.
///
/// Immutable after construction; evaluation is pure.
#[derive(Debug, Clone)]
pub struct BoundaryData {
    kind: DataKind,
    p: f64,
    grid: CircleGrid,
    growth: Growth,
    dual_growth: Growth,
    /// Radius within which the growth bounds are certified (`∞` for closed forms).
    range: f64,
    dual_range: f64,
    fibers: Vec<Arc<Fiber>>,
    dual_fibers: Vec<Arc<Fiber>>,
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(invalid(format!("growth exponent must lie in (1, ∞), got {p}")));
    }
    Ok(())
}

fn conjugate_exponent(p: f64) -> f64 {
    p / (p - 1.0)
}

impl BoundaryData {
    /// Fibers `‖·‖_s^p / p` for a family of R-norms.
    pub fn norm_power(family: &NormFamily, p: f64, grid: &CircleGrid) -> Result<Self> {
        check_p(p)?;
        if family.len() != grid.len() {
            return Err(invalid(format!("norm family has {} members for a grid of {}", family.len(), grid.len())));
        }
        let q = conjugate_exponent(p);
        let mut fibers: Vec<Arc<Fiber>> = Vec::with_capacity(grid.len());
        let mut dual_fibers: Vec<Arc<Fiber>> = Vec::with_capacity(grid.len());
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        let (mut dlo, mut dhi) = (f64::INFINITY, 0.0f64);
        for (j, norm) in family.norms().iter().enumerate() {
            if j > 0 && *norm == family.norms()[j - 1] {
                fibers.push(fibers[j - 1].clone());
                dual_fibers.push(dual_fibers[j - 1].clone());
                continue;
            }
            norm.validate()?;
            let (a, b) = norm.unit_circle_range();
            if a <= 1e-12 {
                return Err(invalid(format!("norm {norm:?} vanishes on a nonzero vector")));
            }
            let dual = norm.dual();
            let (da, db) = dual.unit_circle_range();
            lo = lo.min(a);
            hi = hi.max(b);
            dlo = dlo.min(da);
            dhi = dhi.max(db);
            fibers.push(Arc::new(norm.power_fiber(p)));
            dual_fibers.push(Arc::new(dual.power_fiber(q)));
        }
        // Direction sweeps under-estimate the maximum of a polygon norm by O(sweep²).
        let slack = 1.0 + 1e-6;
        Ok(Self {
            kind: DataKind::NormPower,
            p,
            grid: grid.clone(),
            growth: Growth { lower: lo.powf(p) / p / slack, upper: hi.powf(p) / p * slack, offset: 0.0 },
            dual_growth: Growth { lower: dlo.powf(q) / q / slack, upper: dhi.powf(q) / q * slack, offset: 0.0 },
            range: f64::INFINITY,
            dual_range: f64::INFINITY,
            fibers,
            dual_fibers,
        })
    }

    /// Hilbert-norm multiples `(|w| e^{−u(s)})^p / p`.
    pub fn hilbert_weight(u: &[f64], p: f64, grid: &CircleGrid) -> Result<Self> {
        check_p(p)?;
        if u.len() != grid.len() {
            return Err(invalid(format!("expected {} weight samples, got {}", grid.len(), u.len())));
        }
        if u.iter().any(|x| !x.is_finite()) {
            return Err(invalid("weight samples must be finite"));
        }
        let q = conjugate_exponent(p);
        let fibers =
            u.iter().map(|&x| Arc::new(Fiber::smooth(vec![Term::euclidean_power(p, (-p * x).exp())]))).collect();
        let dual_fibers =
            u.iter().map(|&x| Arc::new(Fiber::smooth(vec![Term::euclidean_power(q, (q * x).exp())]))).collect();
        let umax = u.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let umin = u.iter().cloned().fold(f64::INFINITY, f64::min);
        Ok(Self {
            kind: DataKind::HilbertWeight,
            p,
            grid: grid.clone(),
            growth: Growth { lower: (-p * umax).exp() / p, upper: (-p * umin).exp() / p, offset: 0.0 },
            dual_growth: Growth { lower: (q * umin).exp() / q, upper: (q * umax).exp() / q, offset: 0.0 },
            range: f64::INFINITY,
            dual_range: f64::INFINITY,
            fibers,
            dual_fibers,
        })
    }

    /// `ψ_s(Re w) + c0·|Im w|^p`; the imaginary term restores `p`-growth.
    pub fn real_only(psi: &[Arc<dyn ScalarConvex>], c0: f64, p: f64, grid: &CircleGrid) -> Result<Self> {
        check_p(p)?;
        if psi.len() != grid.len() {
            return Err(invalid(format!("expected {} ψ functions, got {}", grid.len(), psi.len())));
        }
        if !(c0 > 0.0 && c0.is_finite()) {
            return Err(invalid(format!("imaginary-direction coefficient must be positive, got {c0}")));
        }
        let q = conjugate_exponent(p);
        let im_scale = p * c0;
        let mut fibers: Vec<Arc<Fiber>> = Vec::with_capacity(psi.len());
        let mut dual_fibers: Vec<Arc<Fiber>> = Vec::with_capacity(psi.len());
        for (j, f) in psi.iter().enumerate() {
            if j > 0 && Arc::ptr_eq(f, &psi[j - 1]) {
                fibers.push(fibers[j - 1].clone());
                dual_fibers.push(dual_fibers[j - 1].clone());
                continue;
            }
            check_scalar_convex(f.as_ref())?;
            check_scalar_growth(f.as_ref(), p)?;
            fibers.push(Arc::new(Fiber::smooth(vec![
                Term::Scalar { f: f.clone(), dir: [1.0, 0.0], scale: 1.0 },
                Term::Ridge { dir: [0.0, 1.0], p, scale: im_scale },
            ])));
            dual_fibers.push(Arc::new(Fiber::smooth(vec![
                Term::Scalar { f: scalar_conjugate(f), dir: [1.0, 0.0], scale: 1.0 },
                Term::Ridge { dir: [0.0, 1.0], p: q, scale: im_scale.powf(1.0 - q) },
            ])));
        }
        let mut data = Self {
            kind: DataKind::RealOnly,
            p,
            grid: grid.clone(),
            growth: Growth { lower: 0.0, upper: 0.0, offset: 0.0 },
            dual_growth: Growth { lower: 0.0, upper: 0.0, offset: 0.0 },
            range: f64::INFINITY,
            dual_range: f64::INFINITY,
            fibers,
            dual_fibers,
        };
        data.growth = estimate_growth(&data.fibers, p);
        data.dual_growth = estimate_growth(&data.dual_fibers, q);
        Ok(data)
    }

    /// Tabulated fibers from `(j, w_x, w_y, value)` rows.
    ///
    /// Each fiber is the biconjugate of its samples through a dual grid of
    /// `dual_resolution²` slopes in `[-dual_radius, dual_radius]²`; the dual
    /// fiber is the discrete conjugate over the sample nodes. Both are maxima
    /// of affine pieces.
    pub fn tabulated(
        rows: &[(usize, f64, f64, f64)],
        p: f64,
        grid: &CircleGrid,
        dual_radius: f64,
        dual_resolution: usize,
    ) -> Result<Self> {
        check_p(p)?;
        if dual_resolution < 3 || !(dual_radius > 0.0) {
            return Err(invalid("tabulated data needs dual_resolution ≥ 3 and dual_radius > 0"));
        }
        let mut nodes: Vec<Vec<(Complex64, f64)>> = vec![Vec::new(); grid.len()];
        for &(j, x, y, v) in rows {
            if j >= grid.len() {
                return Err(invalid(format!("sample index {j} outside a grid of {}", grid.len())));
            }
            if !(x.is_finite() && y.is_finite() && v.is_finite()) {
                return Err(invalid("tabulated values must be finite"));
            }
            nodes[j].push((Complex64::new(x, y), v));
        }
        if let Some(j) = nodes.iter().position(|n| n.len() < 3) {
            return Err(invalid(format!("sample {j} has fewer than 3 tabulated nodes")));
        }
        let h = 2.0 * dual_radius / (dual_resolution - 1) as f64;
        let slopes: Vec<Complex64> = (0..dual_resolution)
            .flat_map(|a| {
                (0..dual_resolution)
                    .map(move |b| Complex64::new(-dual_radius + a as f64 * h, -dual_radius + b as f64 * h))
            })
            .collect();
        let affine = |z: Complex64, offset: f64| Term::Affine { slope: [z.re, -z.im], offset };
        let mut fibers = Vec::with_capacity(grid.len());
        let mut dual_fibers = Vec::with_capacity(grid.len());
        for n in &nodes {
            let primal: Vec<_> = slopes
                .iter()
                .map(|&z| {
                    let g = n.iter().map(|&(w, v)| (z * w).re - v).fold(f64::NEG_INFINITY, f64::max);
                    vec![affine(z, -g)]
                })
                .collect();
            let dual: Vec<_> = n.iter().map(|&(w, v)| vec![affine(w, -v)]).collect();
            fibers.push(Arc::new(Fiber::max_of(primal)));
            dual_fibers.push(Arc::new(Fiber::max_of(dual)));
        }
        let q = conjugate_exponent(p);
        let mut data = Self {
            kind: DataKind::Tabulated,
            p,
            grid: grid.clone(),
            growth: Growth { lower: 0.0, upper: 0.0, offset: 0.0 },
            dual_growth: Growth { lower: 0.0, upper: 0.0, offset: 0.0 },
            range: f64::INFINITY,
            dual_range: f64::INFINITY,
            fibers,
            dual_fibers,
        };
        let box_radius = nodes.iter().flatten().map(|(w, _)| w.re.abs().max(w.im.abs())).fold(0.0, f64::max);
        data.growth = estimate_growth_within(&data.fibers, p, box_radius);
        data.dual_growth = estimate_growth_within(&data.dual_fibers, q, dual_radius);
        data.range = box_radius;
        data.dual_range = dual_radius;
        Ok(data)
    }

    pub fn kind(&self) -> DataKind {
        self.kind
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        conjugate_exponent(self.p)
    }

    pub fn grid(&self) -> &CircleGrid {
        &self.grid
    }

    pub fn growth(&self) -> Growth {
        self.growth
    }

    pub fn dual_growth(&self) -> Growth {
        self.dual_growth
    }

    pub fn with_growth(mut self, growth: Growth) -> Self {
        self.growth = growth;
        self
    }

    pub fn fiber(&self, j: usize) -> &Fiber {
        &self.fibers[j]
    }

    pub fn dual_fiber(&self, j: usize) -> &Fiber {
        &self.dual_fibers[j]
    }

    /// `φ_{s_j}(w)`.
    pub fn eval(&self, j: usize, w: Complex64) -> f64 {
        self.fibers[j].value(w)
    }

    /// `φ*_{s_j}(z)`.
    pub fn eval_dual(&self, j: usize, z: Complex64) -> f64 {
        self.dual_fibers[j].value(z)
    }

    /// `μ(z) = max_j φ_{s_j}(z)`.
    pub fn mu(&self, z: Complex64) -> f64 {
        self.fibers.iter().map(|f| f.value(z)).fold(f64::NEG_INFINITY, f64::max)
    }

    /// The data `φ*`, whose dual is `φ` again.
    pub fn dual(&self) -> BoundaryData {
        Self {
            kind: self.kind,
            p: self.q(),
            grid: self.grid.clone(),
            growth: self.dual_growth,
            dual_growth: self.growth,
            range: self.dual_range,
            dual_range: self.range,
            fibers: self.dual_fibers.clone(),
            dual_fibers: self.fibers.clone(),
        }
    }

    /// The data `r·φ` (dual fibers `r·φ*(·/r)`).
    pub fn scaled(&self, r: f64) -> Result<BoundaryData> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(invalid(format!("scale must be positive, got {r}")));
        }
        let q = self.q();
        let scale_growth = |g: Growth, k: f64| Growth { lower: g.lower * k, upper: g.upper * k, offset: g.offset * r };
        Ok(Self {
            kind: self.kind,
            p: self.p,
            grid: self.grid.clone(),
            growth: scale_growth(self.growth, r),
            dual_growth: scale_growth(self.dual_growth, r.powf(1.0 - q)),
            range: self.range,
            dual_range: self.dual_range * r,
            fibers: self.fibers.iter().map(|f| Arc::new(f.scaled(r))).collect(),
            dual_fibers: self.dual_fibers.iter().map(|f| Arc::new(f.dilated(1.0 / r).scaled(r))).collect(),
        })
    }

    /// Radii within which the primal and dual growth bounds are certified.
    pub fn growth_range(&self) -> (f64, f64) {
        (self.range, self.dual_range)
    }

    /// Samples the growth inequalities at `budget` random `(s_j, w)` pairs,
    /// with `|w|` log-uniform in `[10⁻², min(10², range)]`.
    pub fn validate_growth(&self, budget: usize, seed: u64) -> GrowthReport {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = self.q();
        let mut rep = GrowthReport {
            samples: budget.max(1),
            primal_lower: 0.0,
            primal_upper: 0.0,
            dual_lower: 0.0,
            dual_upper: 0.0,
        };
        for _ in 0..rep.samples {
            let j = rng.gen_range(0..self.grid.len());
            let radius =
                |rng: &mut ChaCha8Rng, range: f64| 10f64.powf(rng.gen_range(-2.0..range.min(100.0).log10().max(-1.0)));
            let r = radius(&mut rng, self.range);
            let w = Complex64::from_polar(r, rng.gen_range(0.0..2.0 * PI));
            let tol = |v: f64| 1e-12 * (1.0 + v.abs());
            let v = self.eval(j, w);
            let g = self.growth;
            rep.primal_lower = rep.primal_lower.max(g.lower * r.powf(self.p) - g.offset - v - tol(v));
            rep.primal_upper = rep.primal_upper.max(v - g.upper * r.powf(self.p) - g.offset - tol(v));
            let r = radius(&mut rng, self.dual_range);
            let w = Complex64::from_polar(r, rng.gen_range(0.0..2.0 * PI));
            let d = self.eval_dual(j, w);
            let g = self.dual_growth;
            rep.dual_lower = rep.dual_lower.max(g.lower * r.powf(q) - g.offset - d - tol(d));
            rep.dual_upper = rep.dual_upper.max(d - g.upper * r.powf(q) - g.offset - tol(d));
        }
        rep
    }

    /// Largest midpoint-convexity violation over random segments in `[-radius, radius]²`.
    pub fn convexity_defect(&self, samples_per_fiber: usize, radius: f64, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = 0.0f64;
        for j in distinct_indices(&self.fibers) {
            for _ in 0..samples_per_fiber {
                let a = Complex64::new(rng.gen_range(-radius..radius), rng.gen_range(-radius..radius));
                let b = Complex64::new(rng.gen_range(-radius..radius), rng.gen_range(-radius..radius));
                let lam: f64 = rng.gen_range(0.0..1.0);
                let mid = a * lam + b * (1.0 - lam);
                let gap = self.eval(j, mid) - lam * self.eval(j, a) - (1.0 - lam) * self.eval(j, b);
                worst = worst.max(gap);
            }
        }
        worst
    }

    /// Smallest normalised strict-convexity margin
    /// `[(φ(a) + φ(b))/2 − φ((a+b)/2)] / |a − b|²` over random pairs, plus
    /// pairs along the level lines of every piece.
    pub fn strict_convexity_margin(&self, samples_per_fiber: usize, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = f64::INFINITY;
        for j in distinct_indices(&self.fibers) {
            let f = &self.fibers[j];
            let mut pairs: Vec<(Complex64, Complex64)> = (0..samples_per_fiber)
                .map(|_| {
                    let a = Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
                    let b = Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
                    (a, b)
                })
                .collect();
            if !f.is_smooth() {
                // a short segment through a point where each piece is active, along its level line
                for piece in f.pieces() {
                    for _ in 0..8 {
                        let c = Complex64::from_polar(1.0, rng.gen_range(0.0..2.0 * PI));
                        let (_, g, _) = crate::fiber::piece_second_order(piece, &to_vec(c));
                        if g.norm() == 0.0 {
                            continue;
                        }
                        let dir = Complex64::new(-g[1], g[0]) / g.norm() * 1e-3;
                        pairs.push((c - dir, c + dir));
                    }
                }
            }
            for (a, b) in pairs {
                let d2 = (a - b).norm_sqr();
                if d2 == 0.0 {
                    continue;
                }
                let m = 0.5 * (f.value(a) + f.value(b)) - f.value((a + b) * 0.5);
                worst = worst.min(m / d2);
            }
        }
        worst
    }
}

fn distinct_indices(fibers: &[Arc<Fiber>]) -> Vec<usize> {
    (0..fibers.len()).filter(|&j| j == 0 || !Arc::ptr_eq(&fibers[j], &fibers[j - 1])).collect()
}

fn check_scalar_convex(f: &dyn ScalarConvex) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..200 {
        let a: f64 = rng.gen_range(-10.0..10.0);
        let b: f64 = rng.gen_range(-10.0..10.0);
        let (fa, fb, fm) = (f.value(a), f.value(b), f.value(0.5 * (a + b)));
        if fm > 0.5 * (fa + fb) + 1e-9 * (1.0 + fa.abs() + fb.abs()) {
            return Err(Error::NotConvex(format!("midpoint of [{a:.3}, {b:.3}] lies above the chord")));
        }
    }
    Ok(())
}

/// Rejects scalar functions whose growth is slower than `|x|^p`.
fn check_scalar_growth(f: &dyn ScalarConvex, p: f64) -> Result<()> {
    let ratio = |r: f64| 0.5 * (f.value(r) + f.value(-r)) / r.powf(p);
    let (near, far) = (ratio(1e4), ratio(1e5));
    if !(far > 0.0 && far >= 0.5 * near) {
        return Err(Error::Growth(format!("ψ grows slower than |x|^{p} (ratio {near:.3e} at 1e4, {far:.3e} at 1e5)")));
    }
    Ok(())
}

/// Growth constants of fibers with genuine `p`-growth, from radial sweeps.
fn estimate_growth(fibers: &[Arc<Fiber>], p: f64) -> Growth {
    let far = 1e3;
    let dirs: Vec<Complex64> = (0..64).map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / 64.0)).collect();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for j in distinct_indices(fibers) {
        for &d in &dirs {
            let r = fibers[j].value(d * far) / far.powf(p);
            lo = lo.min(r);
            hi = hi.max(r);
        }
    }
    let (lower, upper) = (0.9 * lo, 1.1 * hi);
    offset_for(fibers, p, lower, upper, 100.0)
}

fn estimate_growth_within(fibers: &[Arc<Fiber>], p: f64, radius: f64) -> Growth {
    let dirs: Vec<Complex64> = (0..64).map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / 64.0)).collect();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for j in distinct_indices(fibers) {
        for &d in &dirs {
            let v = fibers[j].value(d * radius) - fibers[j].value(Complex64::new(0.0, 0.0));
            let r = v / radius.powf(p);
            lo = lo.min(r);
            hi = hi.max(r);
        }
    }
    // piecewise-affine fibers bend between the polar samples of offset_for
    let mut g = offset_for(fibers, p, 0.9 * lo.max(0.0), 1.1 * hi, radius);
    g.offset += 1e-3 * g.upper * radius.powf(p);
    g
}

fn offset_for(fibers: &[Arc<Fiber>], p: f64, lower: f64, upper: f64, radius: f64) -> Growth {
    let mut offset = 0.0f64;
    for j in distinct_indices(fibers) {
        for k in 0..=40 {
            let r = radius * k as f64 / 40.0;
            for a in 0..16 {
                let w = Complex64::from_polar(r, 2.0 * PI * a as f64 / 16.0);
                let v = fibers[j].value(w);
                let rp = r.powf(p);
                offset = offset.max(lower * rp - v).max(v - upper * rp);
            }
        }
    }
    Growth { lower, upper, offset: offset * 1.01 }
}

/// Samples of `u(s) = Re s`.
pub fn re_s(grid: &CircleGrid) -> Vec<f64> {
    grid.points().iter().map(|s| s.re).collect()
}

/// Samples of `u(s) = Re s²`.
pub fn re_s2(grid: &CircleGrid) -> Vec<f64> {
    grid.points().iter().map(|s| (s * s).re).collect()
}
