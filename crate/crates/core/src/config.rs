//! JSON run configuration: boundary data, solver parameters and queries.

use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::boundary::{BoundaryData, CircleGrid, Norm, NormFamily};
use crate::error::{Error, Result};
use crate::fiber::{Quadratic1D, ScalarConvex};
use crate::interp::SolverParams;

fn cfg(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

/// Pair `[re, im]`.
pub type C2 = [f64; 2];

pub fn to_c(v: C2) -> Complex64 {
    Complex64::new(v[0], v[1])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum NormSpec {
    Constant(Norm),
    /// `upper` for `Im s ≥ 0`, `lower` otherwise.
    Semicircle {
        upper: Norm,
        lower: Norm,
    },
    /// Square unit balls rotated by `rate · arg s`.
    RotatedSquare {
        rate: f64,
    },
    PerSample(Vec<Norm>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightSpec {
    /// `u(s) = Re s`
    ReS,
    /// `u(s) = Re s²`
    ReS2,
    Constant(f64),
    Samples(Vec<f64>),
}

/// `ψ_s(x) = a (x − center·Re s)² + b x²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadraticPsi {
    pub a: f64,
    #[serde(default)]
    pub b: f64,
    #[serde(default)]
    pub center: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DataSpec {
    NormPower {
        p: f64,
        #[serde(rename = "grid_M")]
        grid_m: usize,
        norms: NormSpec,
    },
    HilbertWeight {
        p: f64,
        #[serde(rename = "grid_M")]
        grid_m: usize,
        u: WeightSpec,
    },
    RealOnly {
        p: f64,
        #[serde(rename = "grid_M")]
        grid_m: usize,
        c0: f64,
        psi: QuadraticPsi,
    },
    Tabulated {
        p: f64,
        #[serde(rename = "grid_M")]
        grid_m: usize,
        /// CSV with `j,w_x,w_y,value` rows, relative to the config file.
        csv: String,
        dual_radius: f64,
        dual_resolution: usize,
    },
}

impl DataSpec {
    pub fn grid(&self) -> Result<CircleGrid> {
        let m = match self {
            DataSpec::NormPower { grid_m, .. }
            | DataSpec::HilbertWeight { grid_m, .. }
            | DataSpec::RealOnly { grid_m, .. }
            | DataSpec::Tabulated { grid_m, .. } => *grid_m,
        };
        CircleGrid::new(m)
    }

    /// Samples of `u` for Hilbert-weight data.
    pub fn weights(&self, grid: &CircleGrid) -> Option<Vec<f64>> {
        match self {
            DataSpec::HilbertWeight { u, .. } => Some(match u {
                WeightSpec::ReS => crate::boundary::re_s(grid),
                WeightSpec::ReS2 => crate::boundary::re_s2(grid),
                WeightSpec::Constant(a) => vec![*a; grid.len()],
                WeightSpec::Samples(v) => v.clone(),
            }),
            _ => None,
        }
    }

    pub fn norm_family(&self, grid: &CircleGrid) -> Option<NormFamily> {
        match self {
            DataSpec::NormPower { norms, .. } => Some(match norms {
                NormSpec::Constant(n) => NormFamily::constant(n.clone(), grid),
                NormSpec::Semicircle { upper, lower } => NormFamily::semicircle(upper.clone(), lower.clone(), grid),
                NormSpec::RotatedSquare { rate } => NormFamily::from_fn(grid, |s| Norm::rotated_square(rate * s.arg())),
                NormSpec::PerSample(v) => NormFamily::new(v.clone()),
            }),
            _ => None,
        }
    }

    /// Builds the boundary data; relative CSV paths resolve against `base`.
    pub fn build(&self, base: &Path) -> Result<BoundaryData> {
        let grid = self.grid()?;
        match self {
            DataSpec::NormPower { p, .. } => {
                let family = self.norm_family(&grid).expect("norm data");
                BoundaryData::norm_power(&family, *p, &grid)
            }
            DataSpec::HilbertWeight { p, .. } => {
                BoundaryData::hilbert_weight(&self.weights(&grid).expect("weight data"), *p, &grid)
            }
            DataSpec::RealOnly { p, c0, psi, .. } => {
                let psis: Vec<Arc<dyn ScalarConvex>> = grid
                    .points()
                    .iter()
                    .map(|s| {
                        let m = psi.center * s.re;
                        Arc::new(Quadratic1D { alpha: psi.a + psi.b, beta: -2.0 * psi.a * m, gamma: psi.a * m * m })
                            as Arc<dyn ScalarConvex>
                    })
                    .collect();
                BoundaryData::real_only(&psis, *c0, *p, &grid)
            }
            DataSpec::Tabulated { p, csv: path, dual_radius, dual_resolution, .. } => {
                let mut reader =
                    csv::ReaderBuilder::new().has_headers(false).comment(Some(b'#')).from_path(base.join(path))?;
                let mut rows = Vec::new();
                for rec in reader.deserialize() {
                    let row: (usize, f64, f64, f64) = rec?;
                    rows.push(row);
                }
                BoundaryData::tabulated(&rows, *p, &grid, *dual_radius, *dual_resolution)
            }
        }
    }

    /// `ψ_s(x)` for real-only data.
    pub fn psi_value(&self, s: Complex64, x: f64) -> Option<f64> {
        match self {
            DataSpec::RealOnly { psi, .. } => {
                let m = psi.center * s.re;
                Some(psi.a * (x - m).powi(2) + psi.b * x * x)
            }
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LeafQuery {
    pub t0: C2,
    pub w0: C2,
    pub test_points: Vec<C2>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryQuery {
    pub s_index: usize,
    pub radii: Vec<f64>,
    pub w_grid: Vec<C2>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DualityQuery {
    pub t0: Vec<C2>,
    pub z_points: Vec<C2>,
    #[serde(default = "default_search_resolution")]
    pub search_resolution: usize,
}

fn default_search_resolution() -> usize {
    5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleQuery {
    /// `[t_re, t_im, w_re, w_im]`
    pub points: Vec<[f64; 4]>,
    #[serde(default = "default_atom_grid")]
    pub atom_grid_m: usize,
    #[serde(default = "default_atom_range")]
    pub atom_x_range: [f64; 2],
    #[serde(default = "default_atom_count")]
    pub atom_x_count: usize,
    #[serde(default = "default_oracle_tolerance")]
    pub tolerance: f64,
}

fn default_atom_grid() -> usize {
    64
}

fn default_atom_range() -> [f64; 2] {
    [-3.0, 3.0]
}

fn default_atom_count() -> usize {
    121
}

fn default_oracle_tolerance() -> f64 {
    5e-3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateQuery {
    #[serde(default = "default_budget")]
    pub budget: usize,
    #[serde(default = "default_box")]
    pub convexity_radius: f64,
}

fn default_budget() -> usize {
    2000
}

fn default_box() -> f64 {
    3.0
}

impl Default for ValidateQuery {
    fn default() -> Self {
        Self { budget: default_budget(), convexity_radius: default_box() }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Queries {
    /// `[t_re, t_im, w_re, w_im]` points for `eval`.
    #[serde(default)]
    pub points: Vec<[f64; 4]>,
    #[serde(default)]
    pub leaf: Option<LeafQuery>,
    #[serde(default)]
    pub boundary: Option<BoundaryQuery>,
    #[serde(default)]
    pub duality: Option<DualityQuery>,
    #[serde(default)]
    pub oracle: Option<OracleQuery>,
    #[serde(default)]
    pub validate: ValidateQuery,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub data: DataSpec,
    #[serde(default)]
    pub solver: SolverParams,
    #[serde(default)]
    pub queries: Queries,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_gap_threshold")]
    pub gap_threshold: f64,
}

fn default_gap_threshold() -> f64 {
    1e-3
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| cfg(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| cfg(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// SHA-256 of the canonical JSON serialisation.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serialises");
        hex::encode(Sha256::digest(&bytes))
    }
}
