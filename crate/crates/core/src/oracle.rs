//! Reference values independent of the interpolation solver.

use num_complex::Complex64;
use serde::Serialize;

use crate::boundary::{BoundaryData, CircleGrid, NormFamily};
use crate::disc::poisson_extend;
use crate::error::{invalid, Error, Result};
use crate::interp::{interpolate, p_interp_norm, SolverParams};
use crate::lp::solve_equality_lp;

/// `(|w| e^{−P[u](t)})^p / p`.
pub fn hilbert_oracle(u: &[f64], grid: &CircleGrid, p: f64, t: Complex64, w: Complex64) -> Result<f64> {
    let pu = poisson_extend(u, grid, t)?;
    Ok((w.norm() * (-pu).exp()).powf(p) / p)
}

/// A point `(s, x, ψ_s(x))` of the epigraph of real boundary data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Atom {
    pub s: Complex64,
    pub x: f64,
    pub value: f64,
}

impl Atom {
    pub fn new(s: Complex64, x: f64, value: f64) -> Result<Self> {
        if !(value.is_finite() && x.is_finite()) {
            return Err(invalid("atom values must be finite"));
        }
        Ok(Self { s, x, value })
    }
}

/// Lower convex envelope of the atoms at `(t, x)`: the least `Σ λ_i value_i`
/// over probability weights with `Σ λ_i s_i = t` and `Σ λ_i x_i = x`.
pub fn real_hull_oracle(atoms: &[Atom], t: Complex64, x: f64) -> Result<f64> {
    if atoms.is_empty() {
        return Err(Error::Infeasible);
    }
    let a = vec![
        atoms.iter().map(|_| 1.0).collect(),
        atoms.iter().map(|a| a.s.re).collect(),
        atoms.iter().map(|a| a.s.im).collect(),
        atoms.iter().map(|a| a.x).collect::<Vec<f64>>(),
    ];
    let c: Vec<f64> = atoms.iter().map(|a| a.value).collect();
    solve_equality_lp(&a, &[1.0, t.re, t.im, x], &c).map(|(v, _)| v)
}

#[derive(Debug, Clone, Serialize)]
pub struct CNormReport {
    /// Largest `|‖w‖_{p,t} − ‖w‖_{p',t}|` over the points and exponent pairs.
    pub max_cross_p_deviation: f64,
    /// Largest `|‖F(τ)‖_{p,τ} − ‖w‖_{p,t}|` along the leaves through the points.
    pub max_leaf_oscillation: f64,
    /// `norms[i][k]`: point `i`, exponent `k`.
    pub norms: Vec<Vec<f64>>,
}

/// Tolerance of the sampled complex-homogeneity test.
pub const C_HOMOGENEITY_TOL: f64 = 1e-9;

/// `p`-independence of interpolated C-norms and their constancy along leaves.
///
/// `leaf_offsets` are added to each query `t` to obtain points on its leaf.
pub fn c_norm_invariance_check(
    family: &NormFamily,
    grid: &CircleGrid,
    p_list: &[f64],
    sample_points: &[(Complex64, Complex64)],
    leaf_offsets: &[Complex64],
    params: &SolverParams,
) -> Result<CNormReport> {
    let defect = family.complex_homogeneity_defect();
    if defect > C_HOMOGENEITY_TOL {
        return Err(Error::NotComplexHomogeneous(defect));
    }
    if p_list.is_empty() {
        return Err(invalid("need at least one exponent"));
    }
    let mut norms = Vec::with_capacity(sample_points.len());
    let mut max_cross = 0.0f64;
    let mut max_osc = 0.0f64;
    let datasets: Vec<BoundaryData> =
        p_list.iter().map(|&p| BoundaryData::norm_power(family, p, grid)).collect::<Result<_>>()?;
    for &(t, w) in sample_points {
        let mut row = Vec::with_capacity(p_list.len());
        for (data, &p) in datasets.iter().zip(p_list) {
            let cert = interpolate(data, t, w, params)?;
            let base = (p * cert.value().max(0.0)).powf(1.0 / p);
            for &off in leaf_offsets {
                let tau = t + off;
                let v = p_interp_norm(family, p, grid, tau, cert.f_opt.eval(tau), params)?;
                max_osc = max_osc.max((v - base).abs());
            }
            row.push(base);
        }
        for a in 0..row.len() {
            for b in a + 1..row.len() {
                max_cross = max_cross.max((row[a] - row[b]).abs());
            }
        }
        norms.push(row);
    }
    Ok(CNormReport { max_cross_p_deviation: max_cross, max_leaf_oscillation: max_osc, norms })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::{re_s, re_s2, Norm};
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn hilbert_closed_forms() {
        let g = CircleGrid::new(256).unwrap();
        let w = c(0.6, -0.8);
        let zero = vec![0.0; 256];
        assert_abs_diff_eq!(hilbert_oracle(&zero, &g, 3.0, c(0.2, 0.1), w).unwrap(), 1.0 / 3.0, epsilon = 1e-14);
        let v = hilbert_oracle(&re_s(&g), &g, 2.0, c(0.3, 0.0), w).unwrap();
        assert_abs_diff_eq!(v, (-0.6f64).exp() / 2.0, epsilon = 1e-10);
        let v = hilbert_oracle(&re_s2(&g), &g, 2.0, c(0.0, 0.5), w).unwrap();
        assert_abs_diff_eq!(v, (0.5f64).exp() / 2.0, epsilon = 1e-10);
        assert!(hilbert_oracle(&zero, &g, 2.0, c(1.0, 0.0), w).is_err());
    }

    fn atoms(m: usize, xs: &[f64], psi: impl Fn(Complex64, f64) -> f64) -> Vec<Atom> {
        let g = CircleGrid::new(m).unwrap();
        g.points()
            .iter()
            .flat_map(|&s| xs.iter().map(move |&x| (s, x)))
            .map(|(s, x)| Atom::new(s, x, psi(s, x)).unwrap())
            .collect()
    }

    #[test]
    fn constant_atoms() {
        let xs: Vec<f64> = (-3..=3).map(|i| i as f64 * 0.5).collect();
        let a = atoms(8, &xs, |_, _| 2.5);
        assert_abs_diff_eq!(real_hull_oracle(&a, c(0.1, 0.2), 0.3).unwrap(), 2.5, epsilon = 1e-12);
    }

    #[test]
    fn vertex_atom() {
        let xs: Vec<f64> = (-4..=4).map(|i| i as f64 * 0.5).collect();
        let a = atoms(8, &xs, |s, x| (x - s.re).powi(2) + x * x / 10.0);
        let s = CircleGrid::new(8).unwrap().point(3);
        let v = real_hull_oracle(&a, s, 1.0).unwrap();
        assert_abs_diff_eq!(v, (1.0 - s.re).powi(2) + 0.1, epsilon = 1e-10);
    }

    #[test]
    fn outside_hull_is_infeasible() {
        let xs = [-1.0, 0.0, 1.0];
        let a = atoms(8, &xs, |_, x| x * x);
        assert!(matches!(real_hull_oracle(&a, c(0.0, 0.0), 2.0), Err(Error::Infeasible)));
    }

    /// Least `Σ λ_i value_i` over all 4-atom subsets whose weights solve the
    /// constraints with `λ ≥ 0` (Carathéodory).
    fn exhaustive(atoms: &[Atom], t: Complex64, x: f64) -> f64 {
        let n = atoms.len();
        let mut best = f64::INFINITY;
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    for l in k + 1..n {
                        let idx = [i, j, k, l];
                        let m = nalgebra::Matrix4::from_fn(|r, col| {
                            let a = atoms[idx[col]];
                            [1.0, a.s.re, a.s.im, a.x][r]
                        });
                        let Some(inv) = m.try_inverse() else { continue };
                        let lam = inv * nalgebra::Vector4::new(1.0, t.re, t.im, x);
                        if lam.iter().all(|&v| v >= -1e-12) {
                            let v: f64 = (0..4).map(|c| lam[c] * atoms[idx[c]].value).sum();
                            best = best.min(v);
                        }
                    }
                }
            }
        }
        best
    }

    #[test]
    fn lp_matches_exhaustive_search() {
        let xs = [-1.5, -0.5, 0.0, 0.5, 1.5];
        let a = atoms(6, &xs, |s, x| (x - s.re).powi(2));
        for (t, x) in [(c(0.0, 0.0), 0.0), (c(0.2, -0.1), 0.3), (c(-0.3, 0.4), -0.6)] {
            let lp = real_hull_oracle(&a, t, x).unwrap();
            assert_abs_diff_eq!(lp, exhaustive(&a, t, x), epsilon = 1e-10);
        }
    }

    #[test]
    fn hull_is_below_atoms_and_convex_in_x() {
        let xs: Vec<f64> = (-8..=8).map(|i| i as f64 * 0.25).collect();
        let a = atoms(16, &xs, |s, x| (x - s.re).powi(2) + x * x / 10.0);
        let t = c(0.1, 0.3);
        let vals: Vec<f64> = (-4..=4).map(|i| real_hull_oracle(&a, t, i as f64 * 0.25).unwrap()).collect();
        for w in vals.windows(3) {
            assert!(w[1] <= 0.5 * (w[0] + w[2]) + 1e-10);
        }
        for at in &a {
            assert!(real_hull_oracle(&a, at.s, at.x).unwrap() <= at.value + 1e-10);
        }
    }

    #[test]
    fn large_atom_sets_keep_conjugation_symmetry() {
        // Im s_j is only ~1e-16 at s = ±1 on this grid
        let xs: Vec<f64> = (0..241).map(|i| -3.0 + 0.025 * i as f64).collect();
        let a = atoms(128, &xs, |s, x| (x - s.re).powi(2) + x * x / 10.0);
        for t in [c(0.4, 0.0), c(-0.4, 0.0)] {
            let on_axis = real_hull_oracle(&a, t, 1.0).unwrap();
            let above = real_hull_oracle(&a, t + c(0.0, 0.4), 1.0).unwrap();
            let below = real_hull_oracle(&a, t - c(0.0, 0.4), 1.0).unwrap();
            assert_abs_diff_eq!(above, below, epsilon = 1e-9);
            assert_abs_diff_eq!(on_axis, above, epsilon = 1e-3);
        }
    }

    #[test]
    fn rotated_squares_are_not_c_norms() {
        let g = CircleGrid::new(64).unwrap();
        let fam = NormFamily::from_fn(&g, |s| Norm::rotated_square(s.arg()));
        let r = c_norm_invariance_check(
            &fam,
            &g,
            &[2.0, 4.0],
            &[(c(0.0, 0.0), c(1.0, 0.0))],
            &[],
            &SolverParams::with_k(4),
        );
        assert!(matches!(r, Err(Error::NotComplexHomogeneous(_))));
    }

    #[test]
    fn euclidean_family_is_p_independent() {
        let g = CircleGrid::new(64).unwrap();
        let fam = NormFamily::constant(Norm::euclidean(), &g);
        let r = c_norm_invariance_check(
            &fam,
            &g,
            &[2.0, 3.0],
            &[(c(0.1, 0.2), c(1.0, -0.5))],
            &[c(0.2, 0.0)],
            &SolverParams::with_k(4),
        )
        .unwrap();
        assert!(r.max_cross_p_deviation < 1e-8);
        assert!(r.max_leaf_oscillation < 1e-8);
    }
}
