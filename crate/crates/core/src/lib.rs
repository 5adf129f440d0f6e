//! Complex interpolation of fiberwise-convex boundary data on the unit disc.
//!
//! Boundary data is a family of convex functions `φ_s` on `C ≅ R²`, one per
//! sample `s` of an equispaced grid on the unit circle. The interpolant
//! `[φ](t, w)` at an interior point `t` is bracketed by two convex programs over
//! truncated holomorphic discs:
//!
//! * the upper program minimises the Poisson average of `φ_s(F(s))` over
//!   polynomial discs `F` with `F(t) = w`;
//! * the lower program maximises `Re(g(t)·w) − P[φ*_s(g(s))](t)` over
//!   polynomial discs `g`.
//!
//! Their difference is a certificate for the truncation error. The optimal
//! upper disc is the leaf of the Monge–Ampère foliation through `(t, w)`.
//!
//! Fiber points are complex numbers (`n = 1`). The pairing used for Legendre
//! duality is `Re(z·w)` without conjugation.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod boundary;
pub mod cli;
pub mod config;
pub mod convex;
pub mod disc;
pub mod error;
pub mod fiber;
pub mod interp;
pub mod oracle;

mod linalg;
mod lp;
mod solver;

pub use boundary::{BoundaryData, CircleGrid, DataKind, Growth, GrowthReport, Norm, NormFamily};
pub use convex::{fenchel_audit, legendre_grid, legendre_point, legendre_radius, GridBox, GridFn, LegendreSearch};
pub use disc::{boundary_samples, eval_disc, poisson_extend, poisson_kernel, poisson_weights, DiscPoly};
pub use error::{Error, Result};
pub use fiber::{Fiber, ScalarConvex, Term};
pub use interp::{
    boundary_convergence, dual_leaf, duality_check, interpolate, leaf, lower_value, p_interp_norm, upper_value,
    DualLeafReport, HullCertificate, LeafReport, ProgramSolution, SolveDiagnostics, SolverParams,
};
pub use oracle::{c_norm_invariance_check, hilbert_oracle, real_hull_oracle, Atom, CNormReport};

pub use num_complex::Complex64;
