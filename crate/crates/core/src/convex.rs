//! Legendre transforms: pointwise by local search, on grids by brute force.

use std::io::{Read, Write};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boundary::Growth;
use crate::error::{invalid, Result};

/// Axis-aligned box `[x0, x1] × [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridBox {
    pub x: [f64; 2],
    pub y: [f64; 2],
}

impl GridBox {
    pub fn square(radius: f64) -> Self {
        Self { x: [-radius, radius], y: [-radius, radius] }
    }

    fn validate(&self) -> Result<()> {
        let ok = |a: [f64; 2]| a[0].is_finite() && a[1].is_finite() && a[0] < a[1];
        if ok(self.x) && ok(self.y) {
            Ok(())
        } else {
            Err(invalid(format!("degenerate box {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridHeader {
    #[serde(rename = "box")]
    pub bounds: GridBox,
    pub resolution: [usize; 2],
}

/// Function values on a rectangular grid; node `(i, k)` is stored at `k·nx + i`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFn {
    header: GridHeader,
    values: Vec<f64>,
}

impl GridFn {
    pub fn new(bounds: GridBox, resolution: [usize; 2], values: Vec<f64>) -> Result<Self> {
        bounds.validate()?;
        if resolution[0] < 3 || resolution[1] < 3 {
            return Err(invalid(format!("grid resolution must be at least 3 per axis, got {resolution:?}")));
        }
        if values.len() != resolution[0] * resolution[1] {
            return Err(invalid(format!("{} values for a {}×{} grid", values.len(), resolution[0], resolution[1])));
        }
        Ok(Self { header: GridHeader { bounds, resolution }, values })
    }

    pub fn sample(bounds: GridBox, resolution: [usize; 2], f: impl Fn(Complex64) -> f64 + Sync) -> Result<Self> {
        let mut g = Self::new(bounds, resolution, vec![0.0; resolution[0] * resolution[1]])?;
        let values: Vec<f64> = (0..g.len()).into_par_iter().map(|i| f(g.node(i))).collect();
        g.values = values;
        Ok(g)
    }

    pub fn header(&self) -> GridHeader {
        self.header
    }

    pub fn bounds(&self) -> GridBox {
        self.header.bounds
    }

    pub fn resolution(&self) -> [usize; 2] {
        self.header.resolution
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn step(&self) -> [f64; 2] {
        let b = self.header.bounds;
        let [nx, ny] = self.header.resolution;
        [(b.x[1] - b.x[0]) / (nx - 1) as f64, (b.y[1] - b.y[0]) / (ny - 1) as f64]
    }

    pub fn node(&self, index: usize) -> Complex64 {
        let nx = self.header.resolution[0];
        let [hx, hy] = self.step();
        let b = self.header.bounds;
        Complex64::new(b.x[0] + (index % nx) as f64 * hx, b.y[0] + (index / nx) as f64 * hy)
    }

    /// Bilinear interpolation inside the box, `+∞` outside.
    ///
    /// Bilinear weights reproduce affine functions, so the interpolant lies
    /// above the convex envelope of the nodes and agrees with it at nodes.
    pub fn interpolate(&self, w: Complex64) -> f64 {
        let b = self.header.bounds;
        let [nx, ny] = self.header.resolution;
        let [hx, hy] = self.step();
        let fx = (w.re - b.x[0]) / hx;
        let fy = (w.im - b.y[0]) / hy;
        let slack = 1e-9;
        if !(fx >= -slack && fy >= -slack && fx <= (nx - 1) as f64 + slack && fy <= (ny - 1) as f64 + slack) {
            return f64::INFINITY;
        }
        let i = (fx.max(0.0).floor() as usize).min(nx - 2);
        let k = (fy.max(0.0).floor() as usize).min(ny - 2);
        let (a, c) = ((fx - i as f64).clamp(0.0, 1.0), (fy - k as f64).clamp(0.0, 1.0));
        let v = |i: usize, k: usize| self.values[k * nx + i];
        (1.0 - a) * (1.0 - c) * v(i, k)
            + a * (1.0 - c) * v(i + 1, k)
            + (1.0 - a) * c * v(i, k + 1)
            + a * c * v(i + 1, k + 1)
    }

    pub fn nodes(&self) -> impl Iterator<Item = (Complex64, f64)> + '_ {
        (0..self.len()).map(|i| (self.node(i), self.values[i]))
    }

    /// Writes `x,y,value` rows with a header line.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x", "y", "value"])?;
        for (z, v) in self.nodes() {
            w.serialize((z.re, z.im, v))?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads rows written by [`GridFn::write_csv`]; the header supplies the geometry.
    pub fn read_csv<R: Read>(header: GridHeader, input: R) -> Result<Self> {
        let mut g =
            Self::new(header.bounds, header.resolution, vec![0.0; header.resolution[0] * header.resolution[1]])?;
        let mut r = csv::Reader::from_reader(input);
        let [hx, hy] = g.step();
        let mut seen = 0;
        for row in r.deserialize() {
            let (x, y, v): (f64, f64, f64) = row?;
            let i = ((x - header.bounds.x[0]) / hx).round();
            let k = ((y - header.bounds.y[0]) / hy).round();
            if i < 0.0 || k < 0.0 || i as usize >= header.resolution[0] || k as usize >= header.resolution[1] {
                return Err(invalid(format!("node ({x}, {y}) lies outside the grid")));
            }
            g.values[k as usize * header.resolution[0] + i as usize] = v;
            seen += 1;
        }
        if seen != g.len() {
            return Err(invalid(format!("expected {} rows, read {seen}", g.len())));
        }
        Ok(g)
    }
}

/// Discrete conjugate `g(z_k) = max_j Re(z_k·w_j) − f(w_j)` and, per dual node,
/// the index of the maximising primal node (lowest index on ties).
pub fn legendre_grid_argmax(
    f: &GridFn,
    dual_box: GridBox,
    dual_resolution: [usize; 2],
) -> Result<(GridFn, Vec<usize>)> {
    if f.is_empty() {
        return Err(invalid("empty grid"));
    }
    let mut g = GridFn::new(dual_box, dual_resolution, vec![0.0; dual_resolution[0] * dual_resolution[1]])?;
    let primal: Vec<(Complex64, f64)> = f.nodes().collect();
    let (values, argmax): (Vec<f64>, Vec<usize>) = (0..g.len())
        .into_par_iter()
        .map(|k| {
            let z = g.node(k);
            let mut best = (f64::NEG_INFINITY, 0);
            for (j, &(w, v)) in primal.iter().enumerate() {
                let cand = (z * w).re - v;
                if cand > best.0 {
                    best = (cand, j);
                }
            }
            best
        })
        .unzip();
    g.values = values;
    Ok((g, argmax))
}

pub fn legendre_grid(f: &GridFn, dual_box: GridBox, dual_resolution: [usize; 2]) -> Result<GridFn> {
    legendre_grid_argmax(f, dual_box, dual_resolution).map(|(g, _)| g)
}

/// Radius beyond which `Re(z·w) − f(w)` drops below `−f(0)` when
/// `lower·|w|^p − offset ≤ f(w) ≤ upper·|w|^p + offset`.
pub fn legendre_radius(growth: Growth, p: f64, z: Complex64) -> f64 {
    let c = growth.lower.max(f64::MIN_POSITIVE);
    let a = (2.0 * z.norm() / c).powf(1.0 / (p - 1.0));
    let b = (4.0 * growth.offset / c).powf(1.0 / p);
    a.max(b).max(1e-3)
}

/// Pointwise conjugate by a coarse grid over `[−radius, radius]²` followed by
/// compass search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LegendreSearch {
    pub radius: f64,
    pub resolution: usize,
    /// Compass search stops below this step, relative to `radius`.
    pub relative_step: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LegendreResult {
    pub value: f64,
    pub maximizer: Complex64,
    pub evaluations: usize,
}

impl LegendreSearch {
    pub fn new(radius: f64, resolution: usize) -> Self {
        Self { radius, resolution, relative_step: 1e-4 }
    }

    pub fn run(&self, f: impl Fn(Complex64) -> f64, z: Complex64) -> Result<LegendreResult> {
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(invalid(format!("search radius must be positive, got {}", self.radius)));
        }
        if self.resolution < 2 {
            return Err(invalid("search resolution must be at least 2"));
        }
        let mut evaluations = 0;
        let mut objective = |w: Complex64| {
            evaluations += 1;
            (z * w).re - f(w)
        };
        let n = self.resolution;
        let h = 2.0 * self.radius / (n - 1) as f64;
        let mut best = (f64::NEG_INFINITY, Complex64::new(0.0, 0.0));
        for k in 0..n {
            for i in 0..n {
                let w = Complex64::new(-self.radius + i as f64 * h, -self.radius + k as f64 * h);
                let v = objective(w);
                if v > best.0 {
                    best = (v, w);
                }
            }
        }
        let dirs =
            [Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0), Complex64::new(0.0, 1.0), Complex64::new(0.0, -1.0)];
        let mut step = 0.5 * h;
        let floor = self.relative_step * self.radius;
        let mut momentum: Option<Complex64> = None;
        while step > floor {
            let mut moved = false;
            if let Some(d) = momentum {
                let w = best.1 + d * step;
                let v = objective(w);
                if v > best.0 {
                    best = (v, w);
                    moved = true;
                }
            }
            if !moved {
                for d in dirs {
                    let w = best.1 + d * step;
                    let v = objective(w);
                    if v > best.0 {
                        best = (v, w);
                        momentum = Some(d);
                        moved = true;
                        break;
                    }
                }
            }
            if !moved {
                momentum = None;
                step *= 0.5;
            }
        }
        Ok(LegendreResult { value: best.0, maximizer: best.1, evaluations })
    }
}

/// `sup_{|w| ≤ radius} Re(z·w) − f(w)` by grid search refined by compass ascent.
pub fn legendre_point(
    f: impl Fn(Complex64) -> f64,
    z: Complex64,
    radius: f64,
    search_resolution: usize,
) -> Result<f64> {
    LegendreSearch::new(radius, search_resolution).run(f, z).map(|r| r.value)
}

/// Largest `Re(z·w) − f(w) − g(z)` over the pairs; `≤ 0` certifies `g ≥ f*` there.
pub fn fenchel_audit(
    f: impl Fn(Complex64) -> f64,
    g: impl Fn(Complex64) -> f64,
    pairs: &[(Complex64, Complex64)],
) -> f64 {
    pairs.iter().map(|&(w, z)| (z * w).re - f(w) - g(z)).fold(f64::NEG_INFINITY, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::Norm;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn half_square(w: Complex64) -> f64 {
        0.5 * w.norm_sqr()
    }

    #[test]
    fn pointwise_fixed_point_and_power() {
        assert_abs_diff_eq!(legendre_point(half_square, c(1.0, 1.0), 4.0, 9).unwrap(), 1.0, epsilon = 1e-8);
        let cube = |w: Complex64| w.norm().powi(3) / 3.0;
        // second order in the final compass step (relative 1e-4 of the radius)
        assert_abs_diff_eq!(legendre_point(cube, c(0.0, 1.0), 3.0, 9).unwrap(), 2.0 / 3.0, epsilon = 1e-7);
        assert!(legendre_point(half_square, c(1.0, 0.0), 0.0, 9).is_err());
    }

    #[test]
    fn pointwise_matches_brute_force_on_tabulated_square() {
        let norm = Norm::rotated_square(0.4);
        let f = GridFn::sample(GridBox::square(2.0), [41, 41], |w| 0.5 * norm.eval(w).powi(2)).unwrap();
        for z in [c(0.3, 0.2), c(-0.5, 0.1)] {
            let brute = f.nodes().map(|(w, v)| (z * w).re - v).fold(f64::NEG_INFINITY, f64::max);
            let search = LegendreSearch { radius: 2.0, resolution: 41, relative_step: 1e-6 };
            let found = search.run(|w| f.interpolate(w), z).unwrap().value;
            assert_abs_diff_eq!(found, brute, epsilon = 1e-6);
        }
    }

    #[test]
    fn grid_fixed_point() {
        let f = GridFn::sample(GridBox::square(2.0), [81, 81], half_square).unwrap();
        let g = legendre_grid(&f, GridBox::square(1.0), [21, 21]).unwrap();
        let h = f.step()[0];
        for (z, v) in g.nodes() {
            assert!((v - half_square(z)).abs() <= h * h / 4.0 + 1e-12);
        }
    }

    #[test]
    fn conjugate_of_max_of_affine() {
        // f(w) = max(x, −x) on a grid; f* is 0 on the slope segment z = (a, 0), |a| ≤ 1
        let f = GridFn::sample(GridBox::square(1.0), [21, 21], |w| w.re.abs()).unwrap();
        let g = legendre_grid(&f, GridBox { x: [-1.0, 1.0], y: [-0.5, 0.5] }, [9, 3]).unwrap();
        for (z, v) in g.nodes() {
            if z.im == 0.0 {
                assert_abs_diff_eq!(v, 0.0, epsilon = 1e-12);
            } else {
                // off the segment the discrete sup grows with the box
                assert!(v > 0.4);
            }
        }
    }

    #[test]
    fn lowest_index_wins_ties() {
        let f = GridFn::new(GridBox::square(1.0), [3, 3], vec![0.0; 9]).unwrap();
        let (_, arg) = legendre_grid_argmax(&f, GridBox::square(1.0), [3, 3]).unwrap();
        // z = 0 is the centre node; every primal node ties
        assert_eq!(arg[4], 0);
    }

    #[test]
    fn csv_round_trip() {
        let f = GridFn::sample(GridBox { x: [-1.0, 2.0], y: [0.0, 1.0] }, [4, 3], |w| w.re * 3.0 + w.im).unwrap();
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let header: GridHeader = serde_json::from_str(&serde_json::to_string(&f.header()).unwrap()).unwrap();
        let back = GridFn::read_csv(header, buf.as_slice()).unwrap();
        assert_eq!(back, f);
        assert!(GridFn::new(GridBox::square(1.0), [2, 3], vec![0.0; 6]).is_err());
    }

    #[test]
    fn audit_examples() {
        let pairs: Vec<_> = (0..50)
            .map(|i| {
                let a = i as f64 * 0.37;
                (Complex64::from_polar(1.0 + 0.01 * i as f64, a), Complex64::from_polar(0.5 + 0.02 * i as f64, -a))
            })
            .chain([(c(0.6, -0.3), c(0.6, 0.3))])
            .collect();
        let f = half_square;
        assert_abs_diff_eq!(fenchel_audit(f, half_square, &pairs), 0.0, epsilon = 1e-15);
        assert!(fenchel_audit(f, |z| z.norm_sqr(), &pairs) <= 0.0);
        assert_abs_diff_eq!(fenchel_audit(f, |z| half_square(z) - 0.1, &pairs), 0.1, epsilon = 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn order_reversal(shift in 0.0f64..1.0, bump in 0.0f64..2.0) {
            let b = GridBox::square(1.5);
            let f1 = GridFn::sample(b, [15, 15], half_square).unwrap();
            let f2 = GridFn::sample(b, [15, 15], |w| half_square(w) + shift + bump * w.re.abs()).unwrap();
            let g1 = legendre_grid(&f1, b, [11, 11]).unwrap();
            let g2 = legendre_grid(&f2, b, [11, 11]).unwrap();
            for (a, c) in g1.values().iter().zip(g2.values()) {
                prop_assert!(c <= a);
            }
        }
    }
}
