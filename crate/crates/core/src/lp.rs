//! Revised simplex for `min c·x  s.t.  A x = b, x ≥ 0` with few rows and many
//! columns. The basis is refactorised at every step.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

// consecutive degenerate pivots before switching to Bland's rule
const DEGENERATE_LIMIT: usize = 30;

struct Lp<'a> {
    a: &'a [Vec<f64>],
    b: DVector<f64>,
    // row signs making b ≥ 0
    sign: Vec<f64>,
    n: usize,
    basis: Vec<usize>,
}

impl Lp<'_> {
    fn m(&self) -> usize {
        self.b.len()
    }

    /// Column `j`; indices `n..n+m` are the artificial unit columns.
    fn column(&self, j: usize) -> DVector<f64> {
        let m = self.m();
        if j >= self.n {
            let mut e = DVector::zeros(m);
            e[j - self.n] = 1.0;
            e
        } else {
            DVector::from_fn(m, |r, _| self.sign[r] * self.a[r][j])
        }
    }

    fn basis_matrix(&self) -> DMatrix<f64> {
        let m = self.m();
        let mut bm = DMatrix::zeros(m, m);
        for (k, &j) in self.basis.iter().enumerate() {
            bm.set_column(k, &self.column(j));
        }
        bm
    }

    fn basic_solution(&self) -> Result<(nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>, DVector<f64>)> {
        let lu = self.basis_matrix().lu();
        let xb = lu.solve(&self.b).ok_or_else(|| Error::InvalidArgument("singular simplex basis".into()))?;
        Ok((lu, xb))
    }

    fn optimise(&mut self, cost: &[f64], allowed: impl Fn(usize) -> bool) -> Result<DVector<f64>> {
        let m = self.m();
        let total = self.n + m;
        let tol = 1e-10 * (1.0 + cost.iter().fold(0.0f64, |a, c| a.max(c.abs())));
        let mut bland = false;
        let mut degenerate = 0;
        for _ in 0..50 * total.max(100) {
            let (lu, xb) = self.basic_solution()?;
            let cb = DVector::from_iterator(m, self.basis.iter().map(|&j| cost[j]));
            let y = self
                .basis_matrix()
                .transpose()
                .lu()
                .solve(&cb)
                .ok_or_else(|| Error::InvalidArgument("singular simplex basis".into()))?;
            let reduced = |j: usize| cost[j] - y.dot(&self.column(j));
            let candidates = (0..total).filter(|&j| allowed(j) && !self.basis.contains(&j));
            let entering = if bland {
                candidates.into_iter().find(|&j| reduced(j) < -tol)
            } else {
                candidates
                    .map(|j| (reduced(j), j))
                    .filter(|&(d, _)| d < -tol)
                    .min_by(|p, q| p.0.total_cmp(&q.0))
                    .map(|p| p.1)
            };
            let Some(pc) = entering else { return Ok(xb) };
            let u =
                lu.solve(&self.column(pc)).ok_or_else(|| Error::InvalidArgument("singular simplex basis".into()))?;
            let mut leave: Option<(f64, usize)> = None;
            for r in 0..m {
                if u[r] > 1e-12 {
                    let ratio = xb[r].max(0.0) / u[r];
                    let better = match leave {
                        None => true,
                        Some((best, br)) => {
                            ratio < best - 1e-14 || (ratio <= best + 1e-14 && self.basis[r] < self.basis[br])
                        }
                    };
                    if better {
                        leave = Some((ratio, r));
                    }
                }
            }
            let Some((step, pr)) = leave else {
                return Err(Error::InvalidArgument("linear program is unbounded".into()));
            };
            if step <= 1e-14 {
                degenerate += 1;
                bland |= degenerate > DEGENERATE_LIMIT;
            } else {
                degenerate = 0;
            }
            self.basis[pr] = pc;
        }
        Err(Error::InvalidArgument("simplex iteration limit reached".into()))
    }
}

/// Returns the optimal value and a minimiser.
pub(crate) fn solve_equality_lp(a: &[Vec<f64>], b: &[f64], c: &[f64]) -> Result<(f64, Vec<f64>)> {
    let m = a.len();
    let n = c.len();
    if b.len() != m || a.iter().any(|row| row.len() != n) {
        return Err(Error::InvalidArgument("inconsistent linear program dimensions".into()));
    }
    let sign: Vec<f64> = b.iter().map(|&v| if v < 0.0 { -1.0 } else { 1.0 }).collect();
    let rhs = DVector::from_fn(m, |r, _| sign[r] * b[r]);
    let mut lp = Lp { a, b: rhs, sign, n, basis: (n..n + m).collect() };

    let phase1: Vec<f64> = (0..n + m).map(|j| if j < n { 0.0 } else { 1.0 }).collect();
    let xb = lp.optimise(&phase1, |_| true)?;
    let infeas: f64 = lp.basis.iter().zip(xb.iter()).filter(|(&j, _)| j >= n).map(|(_, &v)| v).sum();
    let scale = 1.0 + b.iter().map(|x| x.abs()).fold(0.0, f64::max);
    if infeas > 1e-9 * scale {
        return Err(Error::Infeasible);
    }
    // drive zero-level artificials out of the basis where possible
    for r in 0..m {
        if lp.basis[r] >= n {
            let (lu, _) = lp.basic_solution()?;
            let swap = (0..n)
                .filter(|j| !lp.basis.contains(j))
                .find(|&j| lu.solve(&lp.column(j)).is_some_and(|u| u[r].abs() > 1e-9));
            if let Some(j) = swap {
                lp.basis[r] = j;
            }
        }
    }
    let mut cost = c.to_vec();
    cost.extend(std::iter::repeat_n(0.0, m));
    let xb = lp.optimise(&cost, |j| j < n)?;
    let mut x = vec![0.0; n];
    for (r, &j) in lp.basis.iter().enumerate() {
        if j < n {
            x[j] = xb[r].max(0.0);
        }
    }
    let value = x.iter().zip(c).map(|(a, b)| a * b).sum();
    Ok((value, x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn small_lp() {
        // min x + 2y + 3z  s.t. x + y + z = 1, y − z = 0.2
        let a = vec![vec![1.0, 1.0, 1.0], vec![0.0, 1.0, -1.0]];
        let (v, x) = solve_equality_lp(&a, &[1.0, 0.2], &[1.0, 2.0, 3.0]).unwrap();
        assert_abs_diff_eq!(v, 1.2, epsilon = 1e-12);
        assert_abs_diff_eq!(x[0], 0.8, epsilon = 1e-12);
        assert_abs_diff_eq!(x[1], 0.2, epsilon = 1e-12);
    }

    #[test]
    fn infeasible_lp() {
        let a = vec![vec![1.0, 1.0], vec![1.0, -1.0]];
        assert!(matches!(solve_equality_lp(&a, &[1.0, 3.0], &[0.0, 0.0]), Err(Error::Infeasible)));
    }

    #[test]
    fn degenerate_rows() {
        // duplicated constraint row leaves an artificial at level zero
        let a = vec![vec![1.0, 1.0, 1.0], vec![2.0, 2.0, 2.0], vec![1.0, 0.0, -1.0]];
        let (v, _) = solve_equality_lp(&a, &[1.0, 2.0, 0.0], &[0.0, -1.0, 0.0]).unwrap();
        assert_abs_diff_eq!(v, -1.0, epsilon = 1e-12);
    }
}
