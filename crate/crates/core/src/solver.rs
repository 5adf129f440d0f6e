//! Log-barrier Newton method for
//!
//! ```text
//! minimise  Σ_j ω_j Φ_j(A_j x + b_j) + l·x
//! ```
//!
//! where each `Φ_j` is a [`Fiber`] (a maximum of smooth pieces) and `A_j` is
//! the `2 × d` block of rows `2j, 2j+1` of a dense matrix. Single-piece fibers
//! enter the objective directly. A fiber with several pieces gets an epigraph
//! variable `r_j` with constraints `π_k(v_j) ≤ r_j`, handled by a log barrier;
//! the `r_j` are eliminated blockwise so every Newton system is `d × d`.

use nalgebra::{DMatrix, DVector};

use crate::fiber::{piece_second_order, Fiber};
use crate::linalg::{Mat2, Vec2};

pub(crate) struct Problem<'a> {
    pub fibers: Vec<&'a Fiber>,
    pub weights: Vec<f64>,
    pub a: DMatrix<f64>,
    pub b: Vec<Vec2>,
    pub lin: DVector<f64>,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Options {
    pub max_iters: usize,
    pub tolerance: f64,
    pub barrier_factor: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct Outcome {
    pub x: DVector<f64>,
    pub value: f64,
    pub iterations: usize,
    pub stages: usize,
    pub newton_decrement: f64,
    pub barrier_gap: f64,
    pub converged: bool,
}

struct Local {
    grad: Vec2,
    hess: Mat2,
    // epigraph blocks only
    g_r: f64,
    h_rr: f64,
    h_rv: Vec2,
}

impl<'a> Problem<'a> {
    fn m(&self) -> usize {
        self.fibers.len()
    }

    fn dim(&self) -> usize {
        self.a.ncols()
    }

    fn points(&self, x: &DVector<f64>) -> Vec<Vec2> {
        let ax = &self.a * x;
        (0..self.m()).map(|j| Vec2::new(ax[2 * j], ax[2 * j + 1]) + self.b[j]).collect()
    }

    /// Plain objective value at `x`.
    pub fn value(&self, x: &DVector<f64>) -> f64 {
        let v = self.points(x);
        let sum: f64 = (0..self.m()).map(|j| self.weights[j] * self.fibers[j].value_vec(&v[j])).sum();
        sum + self.lin.dot(x)
    }

    fn barrier_value(&self, t: f64, x: &DVector<f64>, r: &[f64], epi: &[Option<usize>]) -> f64 {
        let v = self.points(x);
        let mut obj = self.lin.dot(x);
        let mut logs = 0.0;
        for j in 0..self.m() {
            match epi[j] {
                None => obj += self.weights[j] * self.fibers[j].value_vec(&v[j]),
                Some(i) => {
                    obj += self.weights[j] * r[i];
                    for piece in self.fibers[j].pieces() {
                        let s = r[i] - piece.iter().map(|term| term.value_at(&v[j])).sum::<f64>();
                        if !(s > 0.0) {
                            return f64::INFINITY;
                        }
                        logs += s.ln();
                    }
                }
            }
        }
        t * obj - logs
    }

    fn local(&self, t: f64, j: usize, v: &Vec2, r: Option<f64>) -> Local {
        let w = self.weights[j];
        match r {
            None => {
                let (_, g, h) = self.fibers[j].active_second_order(v);
                Local { grad: g * (t * w), hess: h * (t * w), g_r: 0.0, h_rr: 1.0, h_rv: Vec2::zeros() }
            }
            Some(r) => {
                let mut g_r = t * w;
                let mut h_rr = 0.0;
                let mut h_rv = Vec2::zeros();
                let mut g_v = Vec2::zeros();
                let mut h_vv = Mat2::zeros();
                for piece in self.fibers[j].pieces() {
                    let (val, g, h) = piece_second_order(piece, v);
                    let s = r - val;
                    let inv = 1.0 / s;
                    g_r -= inv;
                    h_rr += inv * inv;
                    h_rv -= g * (inv * inv);
                    g_v += g * inv;
                    h_vv += g * g.transpose() * (inv * inv) + h * inv;
                }
                // Schur complement on the epigraph variable
                let hess = h_vv - h_rv * h_rv.transpose() / h_rr;
                let grad = g_v - h_rv * (g_r / h_rr);
                Local { grad, hess, g_r, h_rr, h_rv }
            }
        }
    }

    pub fn solve(&self, opts: &Options) -> Outcome {
        let d = self.dim();
        let m = self.m();
        let mut epi: Vec<Option<usize>> = vec![None; m];
        let mut n_epi = 0;
        let mut n_logs = 0usize;
        for j in 0..m {
            if !self.fibers[j].is_smooth() {
                epi[j] = Some(n_epi);
                n_epi += 1;
                n_logs += self.fibers[j].pieces().len();
            }
        }
        let mut x = DVector::zeros(d);
        let v0 = self.points(&x);
        let mut r: Vec<f64> =
            (0..m).filter(|&j| epi[j].is_some()).map(|j| self.fibers[j].value_vec(&v0[j]) + 1.0).collect();

        let scale = 1.0 + self.value(&x).abs();
        let mut t = if n_logs == 0 { 1.0 } else { (n_logs as f64 / scale).max(1e-3) };
        let mut iterations = 0;
        let mut stages = 0;
        let mut last_dec = f64::INFINITY;
        let mut converged = false;

        'outer: loop {
            stages += 1;
            loop {
                if iterations >= opts.max_iters {
                    break 'outer;
                }
                iterations += 1;
                let v = self.points(&x);
                let locals: Vec<Local> = (0..m).map(|j| self.local(t, j, &v[j], epi[j].map(|i| r[i]))).collect();

                let mut sa = DMatrix::zeros(2 * m, d);
                let mut gv = DVector::zeros(2 * m);
                for (j, loc) in locals.iter().enumerate() {
                    let rows = self.a.rows(2 * j, 2);
                    sa.rows_mut(2 * j, 2).copy_from(&(loc.hess * rows));
                    gv[2 * j] = loc.grad[0];
                    gv[2 * j + 1] = loc.grad[1];
                }
                let hess = self.a.transpose() * sa;
                let grad = self.a.transpose() * gv + &self.lin * t;
                let dx = newton_direction(&hess, &grad);
                let adx = &self.a * &dx;
                let dr: Vec<f64> = (0..m)
                    .filter(|&j| epi[j].is_some())
                    .map(|j| {
                        let loc = &locals[j];
                        let dv = Vec2::new(adx[2 * j], adx[2 * j + 1]);
                        -(loc.g_r + loc.h_rv.dot(&dv)) / loc.h_rr
                    })
                    .collect();
                // with r eliminated, λ² = Δxᵀ H_red Δx = −g_red·Δx
                let dec = -grad.dot(&dx);
                last_dec = dec.max(0.0);
                let stop = if n_logs == 0 { opts.tolerance * scale } else { 1e-9 };
                if last_dec / 2.0 <= stop {
                    break;
                }

                let f0 = self.barrier_value(t, &x, &r, &epi);
                let mut step = 1.0;
                let mut accepted = false;
                for _ in 0..60 {
                    let xn = &x + &dx * step;
                    let rn: Vec<f64> = r.iter().zip(&dr).map(|(a, b)| a + step * b).collect();
                    let fn_ = self.barrier_value(t, &xn, &rn, &epi);
                    if fn_ <= f0 - 0.25 * step * last_dec {
                        // equality means the decrease is below rounding
                        accepted = fn_ < f0;
                        x = xn;
                        r = rn;
                        break;
                    }
                    step *= 0.5;
                }
                if !accepted {
                    // no progress at working precision
                    break;
                }
            }
            if n_logs == 0 {
                converged = last_dec / 2.0 <= opts.tolerance * scale;
                break;
            }
            let value_scale = 1.0 + self.value(&x).abs();
            if n_logs as f64 / t <= opts.tolerance * value_scale {
                // the centring error of the last stage is λ²/(2t) in objective units
                converged = last_dec / (2.0 * t) <= opts.tolerance * value_scale;
                break;
            }
            t *= opts.barrier_factor;
        }
        let value = self.value(&x);
        Outcome {
            barrier_gap: if n_logs == 0 { 0.0 } else { n_logs as f64 / t },
            x,
            value,
            iterations,
            stages,
            newton_decrement: last_dec,
            converged,
        }
    }
}

/// Solves `H dx = −g` by Cholesky, regularising if `H` is numerically singular.
fn newton_direction(h: &DMatrix<f64>, g: &DVector<f64>) -> DVector<f64> {
    let d = h.nrows();
    if d == 0 {
        return DVector::zeros(0);
    }
    let diag_max = (0..d).map(|i| h[(i, i)].abs()).fold(0.0, f64::max).max(1e-300);
    let mut reg = 0.0;
    loop {
        let mut m = h.clone();
        for i in 0..d {
            m[(i, i)] += reg;
        }
        if let Some(ch) = m.cholesky() {
            return -ch.solve(g);
        }
        reg = if reg == 0.0 { 1e-14 * diag_max } else { reg * 10.0 };
    }
}
