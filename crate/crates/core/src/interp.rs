//! Upper and lower programs for the interpolant, leaves and dual leaves.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boundary::{BoundaryData, CircleGrid, NormFamily};
use crate::convex::{legendre_point, legendre_radius};
use crate::disc::{poisson_extend, poisson_weights, DiscPoly};
use crate::error::{invalid, Error, Result};
use crate::fiber::Fiber;
use crate::linalg::Vec2;
use crate::solver::{Options, Problem};

/// Queries with `|t| ≥ 1 − INTERIOR_MARGIN` are rejected.
pub const INTERIOR_MARGIN: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverParams {
    /// Truncation degree of the discs.
    #[serde(rename = "K")]
    pub k: usize,
    /// Cap on Newton iterations per program.
    pub max_iters: usize,
    /// Target suboptimality, relative to `1 + |value|`.
    pub tolerance: f64,
    /// Growth factor of the barrier parameter between stages.
    pub barrier_factor: f64,
    /// Step of central differences in the fiber variable.
    pub fd_step: f64,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self { k: 16, max_iters: 2000, tolerance: 1e-10, barrier_factor: 20.0, fd_step: 1e-4 }
    }
}

impl SolverParams {
    pub fn with_k(k: usize) -> Self {
        Self { k, ..Self::default() }
    }

    fn validate(&self, grid: &CircleGrid) -> Result<()> {
        if grid.len() < 8 * self.k {
            return Err(invalid(format!(
                "grid of {} samples is too coarse for degree {} (need M ≥ 8K)",
                grid.len(),
                self.k
            )));
        }
        if !(self.tolerance > 0.0) || !(self.barrier_factor > 1.0) || !(self.fd_step > 0.0) || self.max_iters == 0 {
            return Err(invalid(format!("bad solver parameters {self:?}")));
        }
        Ok(())
    }

    fn options(&self) -> Options {
        Options { max_iters: self.max_iters, tolerance: self.tolerance, barrier_factor: self.barrier_factor }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolveDiagnostics {
    pub iterations: usize,
    pub barrier_stages: usize,
    pub newton_decrement: f64,
    pub barrier_gap: f64,
    pub converged: bool,
}

/// Optimal value and disc of one program.
#[derive(Debug, Clone, Serialize)]
pub struct ProgramSolution {
    pub value: f64,
    pub disc: DiscPoly,
    pub diagnostics: SolveDiagnostics,
}

/// Both programs at one `(t0, w0)`.
#[derive(Debug, Clone, Serialize)]
pub struct HullCertificate {
    pub t0: Complex64,
    pub w0: Complex64,
    pub lower: f64,
    pub upper: f64,
    pub gap: f64,
    pub f_opt: DiscPoly,
    pub g_opt: DiscPoly,
    pub upper_diagnostics: SolveDiagnostics,
    pub lower_diagnostics: SolveDiagnostics,
}

impl HullCertificate {
    /// Reported interpolant: the centre of the bracket `[lower, upper]`.
    pub fn value(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    pub fn error_bar(&self) -> f64 {
        0.5 * self.gap.max(0.0)
    }

    pub fn converged(&self) -> bool {
        self.upper_diagnostics.converged && self.lower_diagnostics.converged
    }
}

fn check_interior(t: Complex64) -> Result<()> {
    if !(t.norm() < 1.0 - INTERIOR_MARGIN) {
        return Err(Error::OutsideDisc(t));
    }
    Ok(())
}

fn check_finite(w: Complex64) -> Result<()> {
    if !(w.re.is_finite() && w.im.is_finite()) {
        return Err(invalid(format!("fiber point {w} is not finite")));
    }
    Ok(())
}

/// Columns `(Re c_k, Im c_k)` map to `c_k·e` in `R²`.
fn put_coefficient(a: &mut DMatrix<f64>, row: usize, col: usize, e: Complex64) {
    a[(row, col)] = e.re;
    a[(row + 1, col)] = e.im;
    a[(row, col + 1)] = -e.im;
    a[(row + 1, col + 1)] = e.re;
}

fn diagnostics(out: &crate::solver::Outcome) -> SolveDiagnostics {
    SolveDiagnostics {
        iterations: out.iterations,
        barrier_stages: out.stages,
        newton_decrement: out.newton_decrement,
        barrier_gap: out.barrier_gap,
        converged: out.converged,
    }
}

/// Minimises the Poisson average of `φ_s(F(s))` over discs of degree `K` with `F(t0) = w0`.
pub fn upper_value(
    data: &BoundaryData,
    t0: Complex64,
    w0: Complex64,
    params: &SolverParams,
) -> Result<ProgramSolution> {
    check_interior(t0)?;
    check_finite(w0)?;
    let grid = data.grid();
    params.validate(grid)?;
    let k = params.k;
    let m = grid.len();
    let weights = poisson_weights(grid, t0)?;
    let t0_pow: Vec<Complex64> = (0..=k).map(|i| t0.powu(i as u32)).collect();
    let mut a = DMatrix::zeros(2 * m, 2 * k);
    for (j, &s) in grid.points().iter().enumerate() {
        let mut sk = Complex64::new(1.0, 0.0);
        for i in 1..=k {
            sk *= s;
            put_coefficient(&mut a, 2 * j, 2 * (i - 1), sk - t0_pow[i]);
        }
    }
    let fibers: Vec<&Fiber> = (0..m).map(|j| data.fiber(j)).collect();
    let problem = Problem { fibers, weights, a, b: vec![Vec2::new(w0.re, w0.im); m], lin: DVector::zeros(2 * k) };
    let out = problem.solve(&params.options());
    let mut coeffs = vec![Complex64::new(0.0, 0.0); k + 1];
    for i in 1..=k {
        coeffs[i] = Complex64::new(out.x[2 * (i - 1)], out.x[2 * (i - 1) + 1]);
    }
    coeffs[0] = w0 - (1..=k).map(|i| coeffs[i] * t0_pow[i]).sum::<Complex64>();
    Ok(ProgramSolution { value: out.value, disc: DiscPoly::new(coeffs)?, diagnostics: diagnostics(&out) })
}

/// Maximises `Re(g(t0)·w0) − P[φ*_s(g(s))](t0)` over discs `g` of degree `K`.
pub fn lower_value(
    data: &BoundaryData,
    t0: Complex64,
    w0: Complex64,
    params: &SolverParams,
) -> Result<ProgramSolution> {
    check_interior(t0)?;
    check_finite(w0)?;
    let grid = data.grid();
    params.validate(grid)?;
    let k = params.k;
    let m = grid.len();
    let weights = poisson_weights(grid, t0)?;
    let mut a = DMatrix::zeros(2 * m, 2 * (k + 1));
    for (j, &s) in grid.points().iter().enumerate() {
        let mut sk = Complex64::new(1.0, 0.0);
        for i in 0..=k {
            put_coefficient(&mut a, 2 * j, 2 * i, sk);
            sk *= s;
        }
    }
    let mut lin = DVector::zeros(2 * (k + 1));
    let mut e = w0;
    for i in 0..=k {
        // −Re(c_i t0^i w0)
        lin[2 * i] = -e.re;
        lin[2 * i + 1] = e.im;
        e *= t0;
    }
    let fibers: Vec<&Fiber> = (0..m).map(|j| data.dual_fiber(j)).collect();
    let problem = Problem { fibers, weights, a, b: vec![Vec2::zeros(); m], lin };
    let out = problem.solve(&params.options());
    let coeffs = (0..=k).map(|i| Complex64::new(out.x[2 * i], out.x[2 * i + 1])).collect();
    Ok(ProgramSolution { value: -out.value, disc: DiscPoly::new(coeffs)?, diagnostics: diagnostics(&out) })
}

/// Runs both programs and packages the bracket.
pub fn interpolate(
    data: &BoundaryData,
    t0: Complex64,
    w0: Complex64,
    params: &SolverParams,
) -> Result<HullCertificate> {
    let up = upper_value(data, t0, w0, params)?;
    let lo = lower_value(data, t0, w0, params)?;
    Ok(HullCertificate {
        t0,
        w0,
        lower: lo.value,
        upper: up.value,
        gap: up.value - lo.value,
        f_opt: up.disc,
        g_opt: lo.disc,
        upper_diagnostics: up.diagnostics,
        lower_diagnostics: lo.diagnostics,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct LeafSample {
    pub t: Complex64,
    pub f: Complex64,
    /// Upper value at `(t, F(t))`.
    pub value: f64,
    /// Poisson average of `φ_s(F(s))` at `t`.
    pub poisson: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LeafReport {
    pub certificate: HullCertificate,
    pub samples: Vec<LeafSample>,
    pub max_residual: f64,
}

/// Optimal upper disc through `(t0, w0)` and the harmonicity residual of the
/// interpolant along it.
pub fn leaf(
    data: &BoundaryData,
    t0: Complex64,
    w0: Complex64,
    params: &SolverParams,
    test_points: &[Complex64],
) -> Result<LeafReport> {
    let certificate = interpolate(data, t0, w0, params)?;
    let f = &certificate.f_opt;
    let boundary: Vec<f64> = data.grid().points().iter().enumerate().map(|(j, &s)| data.eval(j, f.eval(s))).collect();
    let samples = test_points
        .par_iter()
        .map(|&t| {
            let ft = f.eval(t);
            let value = upper_value(data, t, ft, params)?.value;
            let poisson = poisson_extend(&boundary, data.grid(), t)?;
            Ok(LeafSample { t, f: ft, value, poisson, residual: value - poisson })
        })
        .collect::<Result<Vec<_>>>()?;
    let max_residual = samples.iter().map(|s| s.residual.abs()).fold(0.0, f64::max);
    Ok(LeafReport { certificate, samples, max_residual })
}

/// `∂[φ]/∂w` at `(t, w)` in pairing form: `G` with `d[φ] ≈ Re(G·dw)`.
pub fn interpolant_gradient(
    data: &BoundaryData,
    t: Complex64,
    w: Complex64,
    params: &SolverParams,
) -> Result<Complex64> {
    let h = params.fd_step * (1.0 + w.norm());
    let val = |dw: Complex64| upper_value(data, t, w + dw, params).map(|s| s.value);
    let gx = (val(Complex64::new(h, 0.0))? - val(Complex64::new(-h, 0.0))?) / (2.0 * h);
    let gy = (val(Complex64::new(0.0, h))? - val(Complex64::new(0.0, -h))?) / (2.0 * h);
    Ok(Complex64::new(gx, -gy))
}

#[derive(Debug, Clone, Serialize)]
pub struct DualLeafSample {
    pub t: Complex64,
    pub f: Complex64,
    pub g: Complex64,
    pub primal: f64,
    pub dual: f64,
    pub fenchel_defect: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DualLeafReport {
    pub samples: Vec<DualLeafSample>,
    pub max_fenchel_defect: f64,
    pub fit_degree: usize,
    pub holomorphy_residual: f64,
    pub strictness_margin: f64,
}

/// Smallest accepted strict-convexity margin.
pub const STRICTNESS_FLOOR: f64 = 1e-10;

/// Gradient image `G(t)` of the leaf `F` with Fenchel and holomorphy checks.
pub fn dual_leaf(
    data: &BoundaryData,
    f_opt: &DiscPoly,
    params: &SolverParams,
    test_points: &[Complex64],
    seed: u64,
) -> Result<DualLeafReport> {
    let strictness_margin = data.strict_convexity_margin(100, seed);
    if !(strictness_margin >= STRICTNESS_FLOOR) {
        return Err(Error::NotStrictlyConvex(strictness_margin));
    }
    if test_points.len() < 4 {
        return Err(invalid("dual leaf needs at least 4 test points"));
    }
    let dual = data.dual();
    let samples = test_points
        .par_iter()
        .map(|&t| {
            check_interior(t)?;
            let f = f_opt.eval(t);
            let g = interpolant_gradient(data, t, f, params)?;
            let primal = upper_value(data, t, f, params)?.value;
            let dual_value = upper_value(&dual, t, g, params)?.value;
            Ok(DualLeafSample {
                t,
                f,
                g,
                primal,
                dual: dual_value,
                fenchel_defect: (primal + dual_value - (f * g).re).abs(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let fit_degree = (test_points.len() / 2 - 1).min(params.k);
    let gs: Vec<Complex64> = samples.iter().map(|s| s.g).collect();
    let (_, holomorphy_residual) = DiscPoly::fit(test_points, &gs, fit_degree)?;
    let max_fenchel_defect = samples.iter().map(|s| s.fenchel_defect).fold(0.0, f64::max);
    Ok(DualLeafReport { samples, max_fenchel_defect, fit_degree, holomorphy_residual, strictness_margin })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub r: f64,
    pub deviation: f64,
}

/// `d(r) = max_w |[φ](r s, w) − φ_s(w)|` along the radius through sample `s_index`.
pub fn boundary_convergence(
    data: &BoundaryData,
    s_index: usize,
    radii: &[f64],
    w_grid: &[Complex64],
    params: &SolverParams,
) -> Result<Vec<ConvergenceRow>> {
    if s_index >= data.grid().len() {
        return Err(invalid(format!("sample index {s_index} out of range")));
    }
    if radii.windows(2).any(|p| p[1] <= p[0]) || radii.iter().any(|&r| !(r > 0.0 && r < 1.0)) {
        return Err(invalid("radii must increase within (0, 1)"));
    }
    let s = data.grid().point(s_index);
    radii
        .iter()
        .map(|&r| {
            let deviation = w_grid
                .par_iter()
                .map(|&w| Ok((upper_value(data, s * r, w, params)?.value - data.eval(s_index, w)).abs()))
                .collect::<Result<Vec<f64>>>()?
                .into_iter()
                .fold(0.0, f64::max);
            Ok(ConvergenceRow { r, deviation })
        })
        .collect()
}

/// `‖w0‖_{p,t0} = (p·[‖·‖^p/p](t0, w0))^{1/p}`.
pub fn p_interp_norm(
    family: &NormFamily,
    p: f64,
    grid: &CircleGrid,
    t0: Complex64,
    w0: Complex64,
    params: &SolverParams,
) -> Result<f64> {
    let data = BoundaryData::norm_power(family, p, grid)?;
    let v = interpolate(&data, t0, w0, params)?.value();
    Ok((p * v.max(0.0)).powf(1.0 / p))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DualityRow {
    pub z: Complex64,
    /// Legendre transform of `w ↦ [φ](t0, w)` at `z`.
    pub legendre: f64,
    /// `[φ*](t0, z)` from the dual data.
    pub direct: f64,
    pub defect: f64,
}

/// Compares the Legendre transform of the interpolant with the interpolant
/// of the dual data at each `z`.
pub fn duality_check(
    data: &BoundaryData,
    t0: Complex64,
    z_points: &[Complex64],
    params: &SolverParams,
    search_resolution: usize,
) -> Result<Vec<DualityRow>> {
    check_interior(t0)?;
    let dual = data.dual();
    z_points
        .par_iter()
        .map(|&z| {
            let f = |w: Complex64| interpolate(data, t0, w, params).map(|c| c.value()).unwrap_or(f64::INFINITY);
            let radius = legendre_radius(data.growth(), data.p(), z);
            let legendre = legendre_point(f, z, radius, search_resolution)?;
            let direct = interpolate(&dual, t0, z, params)?.value();
            Ok(DualityRow { z, legendre, direct, defect: (legendre - direct).abs() })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::{re_s, Norm};
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn grid() -> CircleGrid {
        CircleGrid::new(128).unwrap()
    }

    fn fixed_point(g: &CircleGrid) -> BoundaryData {
        BoundaryData::norm_power(&NormFamily::constant(Norm::euclidean(), g), 2.0, g).unwrap()
    }

    #[test]
    fn fixed_point_data_is_reproduced() {
        let g = grid();
        let d = fixed_point(&g);
        let p = SolverParams::with_k(8);
        for t0 in [c(0.0, 0.0), c(0.3, -0.5)] {
            let cert = interpolate(&d, t0, c(1.0, 0.0), &p).unwrap();
            assert_abs_diff_eq!(cert.upper, 0.5, epsilon = 1e-10);
            assert_abs_diff_eq!(cert.lower, 0.5, epsilon = 1e-10);
            for k in 1..=8 {
                assert!(cert.f_opt.coeffs()[k].norm() < 1e-6);
            }
            assert_abs_diff_eq!((cert.f_opt.eval(t0) - c(1.0, 0.0)).norm(), 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn constant_data_gives_fiber_value() {
        let g = grid();
        let d = BoundaryData::norm_power(&NormFamily::constant(Norm::l1(), &g), 3.0, &g).unwrap();
        let p = SolverParams::with_k(4);
        let w0 = c(0.7, -0.2);
        let cert = interpolate(&d, c(0.2, 0.1), w0, &p).unwrap();
        let exact = (0.9f64).powi(3) / 3.0;
        assert_abs_diff_eq!(cert.upper, exact, epsilon = 1e-8);
        assert_abs_diff_eq!(cert.lower, exact, epsilon = 1e-6);
    }

    #[test]
    fn hilbert_weight_upper_at_origin() {
        let g = grid();
        let d = BoundaryData::hilbert_weight(&re_s(&g), 2.0, &g).unwrap();
        let v = upper_value(&d, c(0.0, 0.0), c(1.0, 0.0), &SolverParams::with_k(12)).unwrap();
        assert_abs_diff_eq!(v.value, 0.5, epsilon = 1e-6);
        assert!(v.diagnostics.converged);
    }

    #[test]
    fn rejects_boundary_queries_and_coarse_grids() {
        let g = CircleGrid::new(64).unwrap();
        let d = fixed_point(&g);
        assert!(matches!(
            interpolate(&d, c(1.0, 0.0), c(1.0, 0.0), &SolverParams::with_k(4)),
            Err(Error::OutsideDisc(_))
        ));
        assert!(interpolate(&d, c(0.0, 0.0), c(1.0, 0.0), &SolverParams::with_k(9)).is_err());
    }

    #[test]
    fn barrier_bounds_upper_value() {
        let g = grid();
        let d = BoundaryData::norm_power(&NormFamily::semicircle(Norm::l1(), Norm::linf(), &g), 2.0, &g).unwrap();
        let t0 = c(0.3, 0.2);
        let w0 = c(0.6, -0.9);
        let barrier: Vec<f64> = (0..g.len()).map(|j| d.eval(j, w0)).collect();
        let u = poisson_extend(&barrier, &g, t0).unwrap();
        let v = upper_value(&d, t0, w0, &SolverParams::with_k(8)).unwrap();
        assert!(v.value <= u + 1e-10);
        assert!(v.value < u - 1e-3);
    }

    #[test]
    fn scaling_is_linear() {
        let g = grid();
        let d = BoundaryData::norm_power(&NormFamily::semicircle(Norm::l1(), Norm::linf(), &g), 2.0, &g).unwrap();
        let r = 2.5;
        let ds = d.scaled(r).unwrap();
        let p = SolverParams::with_k(6);
        let (t0, w0) = (c(-0.2, 0.3), c(0.5, 0.5));
        let a = interpolate(&d, t0, w0, &p).unwrap();
        let b = interpolate(&ds, t0, w0, &p).unwrap();
        assert_abs_diff_eq!(b.upper, r * a.upper, epsilon = 1e-7);
        assert_abs_diff_eq!(b.lower, r * a.lower, epsilon = 1e-7);
    }
}
