//! Truncated Hardy-space discs and Poisson quadrature on the unit circle.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::boundary::CircleGrid;
use crate::error::{invalid, Error, Result};

/// Polynomial disc `F(t) = Σ_{k=0..K} c_k t^k` with values in `C`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "DiscPolyRepr", try_from = "DiscPolyRepr")]
pub struct DiscPoly {
    coeffs: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct DiscPolyRepr {
    #[serde(rename = "K")]
    k: usize,
    coeffs: Vec<[f64; 2]>,
}

impl From<DiscPoly> for DiscPolyRepr {
    fn from(d: DiscPoly) -> Self {
        DiscPolyRepr { k: d.degree(), coeffs: d.coeffs.iter().map(|c| [c.re, c.im]).collect() }
    }
}

impl TryFrom<DiscPolyRepr> for DiscPoly {
    type Error = Error;

    fn try_from(r: DiscPolyRepr) -> Result<Self> {
        if r.coeffs.len() != r.k + 1 {
            return Err(invalid(format!(
                "disc of degree {} needs {} coefficients, got {}",
                r.k,
                r.k + 1,
                r.coeffs.len()
            )));
        }
        DiscPoly::new(r.coeffs.iter().map(|c| Complex64::new(c[0], c[1])).collect())
    }
}

impl DiscPoly {
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(invalid("a disc needs at least one coefficient"));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(invalid("disc coefficients must be finite"));
        }
        Ok(Self { coeffs })
    }

    pub fn constant(w: Complex64) -> Self {
        Self { coeffs: vec![w] }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Horner evaluation, no domain check.
    pub fn eval(&self, t: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * t + c)
    }

    pub fn derivative(&self) -> DiscPoly {
        if self.coeffs.len() == 1 {
            return DiscPoly::constant(Complex64::new(0.0, 0.0));
        }
        DiscPoly { coeffs: self.coeffs[1..].iter().enumerate().map(|(k, c)| c * (k + 1) as f64).collect() }
    }

    /// Least-squares fit of a degree-`degree` polynomial to `(t_i, v_i)`.
    /// Returns the disc and the relative residual `‖Ac − v‖ / ‖v‖`.
    pub fn fit(points: &[Complex64], values: &[Complex64], degree: usize) -> Result<(DiscPoly, f64)> {
        if points.len() != values.len() || points.is_empty() {
            return Err(invalid("fit needs matching, non-empty point and value lists"));
        }
        let rows = 2 * points.len();
        let cols = 2 * (degree + 1);
        let mut a = DMatrix::<f64>::zeros(rows, cols);
        let mut b = DVector::<f64>::zeros(rows);
        for (i, (&t, &v)) in points.iter().zip(values).enumerate() {
            let mut tk = Complex64::new(1.0, 0.0);
            for k in 0..=degree {
                // (a + ib)·t^k
                a[(2 * i, 2 * k)] = tk.re;
                a[(2 * i, 2 * k + 1)] = -tk.im;
                a[(2 * i + 1, 2 * k)] = tk.im;
                a[(2 * i + 1, 2 * k + 1)] = tk.re;
                tk *= t;
            }
            b[2 * i] = v.re;
            b[2 * i + 1] = v.im;
        }
        let svd = a.clone().svd(true, true);
        let x = svd.solve(&b, 1e-12).map_err(|e| invalid(format!("least-squares fit failed: {e}")))?;
        let resid = (&a * &x - &b).norm();
        let scale = b.norm().max(f64::MIN_POSITIVE);
        let coeffs = (0..=degree).map(|k| Complex64::new(x[2 * k], x[2 * k + 1])).collect();
        Ok((DiscPoly { coeffs }, resid / scale))
    }
}

const CLOSED_DISC_SLACK: f64 = 1e-12;

/// Evaluates `F(t)` for `|t| ≤ 1`.
pub fn eval_disc(f: &DiscPoly, t: Complex64) -> Result<Complex64> {
    if t.norm() > 1.0 + CLOSED_DISC_SLACK {
        return Err(Error::OutsideDisc(t));
    }
    Ok(f.eval(t))
}

/// Boundary values `F(s_j)` on the grid.
pub fn boundary_samples(f: &DiscPoly, grid: &CircleGrid) -> Vec<Complex64> {
    grid.points().iter().map(|&s| f.eval(s)).collect()
}

/// `P(t, s) = (1 − |t|²) / |s − t|²`.
pub fn poisson_kernel(t: Complex64, s: Complex64) -> Result<f64> {
    if t.norm() >= 1.0 {
        return Err(Error::OutsideDisc(t));
    }
    Ok((1.0 - t.norm_sqr()) / (s - t).norm_sqr())
}

/// Quadrature weights of the discrete Poisson integral at `t`.
///
/// Weights are `P(t, s_j)` normalised to sum to one, so constants extend
/// exactly; the raw trapezoid sum `(1/M) Σ P(t, s_j)` deviates from one by
/// `2 r^M / (1 − r^M)` at worst (`r = |t|`).
pub fn poisson_weights(grid: &CircleGrid, t: Complex64) -> Result<Vec<f64>> {
    if t.norm() >= 1.0 {
        return Err(Error::OutsideDisc(t));
    }
    let c = 1.0 - t.norm_sqr();
    let mut w: Vec<f64> = grid.points().iter().map(|&s| c / (s - t).norm_sqr()).collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    Ok(w)
}

/// Discrete Poisson extension `P[h](t)` of grid samples.
pub fn poisson_extend(h: &[f64], grid: &CircleGrid, t: Complex64) -> Result<f64> {
    if h.len() != grid.len() {
        return Err(invalid(format!("expected {} samples, got {}", grid.len(), h.len())));
    }
    let w = poisson_weights(grid, t)?;
    Ok(w.iter().zip(h).map(|(a, b)| a * b).sum())
}

/// Componentwise Poisson extension of complex samples.
pub fn poisson_extend_complex(h: &[Complex64], grid: &CircleGrid, t: Complex64) -> Result<Complex64> {
    if h.len() != grid.len() {
        return Err(invalid(format!("expected {} samples, got {}", grid.len(), h.len())));
    }
    let w = poisson_weights(grid, t)?;
    Ok(w.iter().zip(h).map(|(a, b)| b * *a).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn constant_disc_is_constant() {
        let w0 = c(0.3, -2.0);
        let f = DiscPoly::constant(w0);
        for t in [c(0.0, 0.0), c(0.5, 0.5), c(-1.0, 0.0)] {
            assert_eq!(eval_disc(&f, t).unwrap(), w0);
        }
    }

    #[test]
    fn identity_disc_at_i() {
        let f = DiscPoly::new(vec![c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        let v = eval_disc(&f, c(0.0, 1.0)).unwrap();
        assert_abs_diff_eq!(v.re, 0.0);
        assert_abs_diff_eq!(v.im, 1.0);
    }

    #[test]
    fn random_disc_at_origin_is_c0() {
        let coeffs: Vec<_> = (0..6).map(|k| c(k as f64 * 0.7 - 1.0, 1.0 / (k as f64 + 1.0))).collect();
        let f = DiscPoly::new(coeffs.clone()).unwrap();
        assert_eq!(f.eval(c(0.0, 0.0)), coeffs[0]);
    }

    #[test]
    fn eval_outside_disc_rejected() {
        let f = DiscPoly::constant(c(1.0, 0.0));
        assert!(matches!(eval_disc(&f, c(1.0, 0.1)), Err(Error::OutsideDisc(_))));
    }

    #[test]
    fn boundary_samples_of_identity_are_grid_points() {
        let grid = CircleGrid::new(8).unwrap();
        let f = DiscPoly::new(vec![c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        for (v, s) in boundary_samples(&f, &grid).iter().zip(grid.points()) {
            assert_abs_diff_eq!((v - s).norm(), 0.0);
        }
    }

    #[test]
    fn kernel_values() {
        assert_abs_diff_eq!(poisson_kernel(c(0.0, 0.0), c(0.6, 0.8)).unwrap(), 1.0);
        assert_abs_diff_eq!(poisson_kernel(c(0.5, 0.0), c(1.0, 0.0)).unwrap(), 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(poisson_kernel(c(0.5, 0.0), c(-1.0, 0.0)).unwrap(), 1.0 / 3.0, epsilon = 1e-15);
        assert!(poisson_kernel(c(1.0, 0.0), c(-1.0, 0.0)).is_err());
    }

    #[test]
    fn harmonic_polynomials_extend_exactly() {
        let grid = CircleGrid::new(256).unwrap();
        let ones = vec![1.0; grid.len()];
        let re_s: Vec<f64> = grid.points().iter().map(|s| s.re).collect();
        let re_s2: Vec<f64> = grid.points().iter().map(|s| (s * s).re).collect();
        assert_abs_diff_eq!(poisson_extend(&ones, &grid, c(0.4, -0.3)).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(poisson_extend(&re_s, &grid, c(0.3, 0.0)).unwrap(), 0.3, epsilon = 1e-10);
        assert_abs_diff_eq!(poisson_extend(&re_s2, &grid, c(0.0, 0.5)).unwrap(), -0.25, epsilon = 1e-10);
    }

    #[test]
    fn raw_trapezoid_sum_obeys_alias_formula() {
        // (1/M) Σ P(t, s_j) = (1 − r^{2M}) / (1 − 2 r^M cos(Mθ) + r^{2M})
        let grid = CircleGrid::new(256).unwrap();
        for &(r, theta) in &[(0.9, 0.0), (0.9, 0.01), (0.95, 0.3), (0.5, 1.0)] {
            let t = Complex64::from_polar(r, theta);
            let raw: f64 =
                grid.points().iter().map(|&s| poisson_kernel(t, s).unwrap()).sum::<f64>() / grid.len() as f64;
            let rm = f64::powi(r, 256);
            let exact = (1.0 - rm * rm) / (1.0 - 2.0 * rm * (256.0 * theta).cos() + rm * rm);
            assert_abs_diff_eq!(raw, exact, epsilon = 1e-13);
        }
    }

    #[test]
    fn mean_value_at_origin() {
        let grid = CircleGrid::new(64).unwrap();
        let h: Vec<f64> = (0..64).map(|j| ((j * 7919) % 13) as f64 - 4.0).collect();
        let mean = h.iter().sum::<f64>() / 64.0;
        assert_abs_diff_eq!(poisson_extend(&h, &grid, c(0.0, 0.0)).unwrap(), mean, epsilon = 1e-14);
    }

    #[test]
    fn json_round_trip() {
        let f = DiscPoly::new(vec![c(1.0, 2.0), c(-0.5, 0.25)]).unwrap();
        let s = serde_json::to_string(&f).unwrap();
        assert_eq!(s, r#"{"K":1,"coeffs":[[1.0,2.0],[-0.5,0.25]]}"#);
        assert_eq!(serde_json::from_str::<DiscPoly>(&s).unwrap(), f);
        assert!(serde_json::from_str::<DiscPoly>(r#"{"K":2,"coeffs":[[1.0,2.0]]}"#).is_err());
    }

    #[test]
    fn fit_recovers_polynomial() {
        let f = DiscPoly::new(vec![c(1.0, 0.0), c(0.0, 2.0), c(-0.3, 0.1)]).unwrap();
        let pts: Vec<_> = (0..12).map(|k| Complex64::from_polar(0.5, k as f64 * 0.5)).collect();
        let vals: Vec<_> = pts.iter().map(|&t| f.eval(t)).collect();
        let (g, resid) = DiscPoly::fit(&pts, &vals, 2).unwrap();
        assert!(resid < 1e-12);
        for (a, b) in g.coeffs().iter().zip(f.coeffs()) {
            assert_abs_diff_eq!((a - b).norm(), 0.0, epsilon = 1e-12);
        }
        // conjugates are not holomorphic
        let conj: Vec<_> = vals.iter().map(|v| v.conj()).collect();
        let (_, r) = DiscPoly::fit(&pts, &conj, 2).unwrap();
        assert!(r > 1e-2);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn kernel_positive_and_normalised(r in 0.0f64..0.9, theta in 0.0f64..6.3) {
            let grid = CircleGrid::new(256).unwrap();
            let t = Complex64::from_polar(r, theta);
            let w = poisson_weights(&grid, t).unwrap();
            prop_assert!(w.iter().all(|&x| x > 0.0));
            prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn pluriharmonic_competitors_extend(
            r in 0.0f64..0.9, theta in 0.0f64..6.3,
            coeffs in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..17),
            l in (-2.0f64..2.0, -2.0f64..2.0),
        ) {
            // Re ℓ(F(s)) for a linear functional ℓ(w) = λ·w
            let grid = CircleGrid::new(256).unwrap();
            let f = DiscPoly::new(coeffs.iter().map(|&(a, b)| c(a, b)).collect()).unwrap();
            let lam = c(l.0, l.1);
            let t = Complex64::from_polar(r, theta);
            let h: Vec<f64> = boundary_samples(&f, &grid).iter().map(|v| (lam * v).re).collect();
            let ext = poisson_extend(&h, &grid, t).unwrap();
            prop_assert!((ext - (lam * f.eval(t)).re).abs() < 1e-10);
        }
    }
}
