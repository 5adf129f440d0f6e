use std::f64::consts::PI;

use cinterp::{interpolate, upper_value, BoundaryData, CircleGrid, Complex64, Norm, NormFamily, SolverParams};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn semicircle(m: usize) -> BoundaryData {
    let g = CircleGrid::new(m).unwrap();
    BoundaryData::norm_power(&NormFamily::semicircle(Norm::l1(), Norm::linf(), &g), 2.0, &g).unwrap()
}

#[test]
fn bounds_tighten_with_degree() {
    let data = semicircle(64);
    let (t, w) = (c(0.3, -0.2), c(0.8, 0.6));
    let certs: Vec<_> =
        [1, 2, 4, 8].iter().map(|&k| interpolate(&data, t, w, &SolverParams::with_k(k)).unwrap()).collect();
    for p in certs.windows(2) {
        assert!(p[1].upper <= p[0].upper + 1e-8);
        assert!(p[1].lower >= p[0].lower - 1e-8);
    }
    for cert in &certs {
        assert!(cert.lower <= cert.upper + 2e-8);
    }
}

#[test]
fn interpolant_is_subharmonic_in_t() {
    // sub-mean value property on a small circle, up to the certificate error bars
    let data = semicircle(64);
    let params = SolverParams::with_k(6);
    let w = c(1.0, 0.4);
    let center = c(0.1, 0.2);
    let mid = interpolate(&data, center, w, &params).unwrap();
    let ring: Vec<_> = (0..8)
        .map(|k| interpolate(&data, center + Complex64::from_polar(0.25, k as f64 * PI / 4.0), w, &params).unwrap())
        .collect();
    let mean = ring.iter().map(|c| c.value()).sum::<f64>() / 8.0;
    let slack = mid.error_bar() + ring.iter().map(|c| c.error_bar()).fold(0.0, f64::max);
    assert!(mid.value() <= mean + slack, "{} > {mean} + {slack}", mid.value());
}

#[test]
fn upper_value_is_convex_in_w() {
    let data = semicircle(64);
    let params = SolverParams::with_k(6);
    let t = c(-0.2, 0.3);
    let f = |w: Complex64| upper_value(&data, t, w, &params).unwrap().value;
    for (a, b) in [(c(1.0, 0.0), c(0.0, 1.0)), (c(-0.5, 0.7), c(1.2, -0.3)), (c(0.2, 0.2), c(-1.0, -1.0))] {
        assert!(f((a + b) * 0.5) <= 0.5 * (f(a) + f(b)) + 1e-8);
    }
}

#[test]
fn scaling_and_homogeneity() {
    let data = semicircle(64);
    let params = SolverParams::with_k(4);
    let (t, w) = (c(0.2, 0.1), c(1.0, 0.5));
    let base = upper_value(&data, t, w, &params).unwrap().value;
    let scaled = data.scaled(3.0).unwrap();
    assert!((upper_value(&scaled, t, w, &params).unwrap().value - 3.0 * base).abs() < 1e-7);
    // p = 2 norm data is 2-homogeneous under complex scaling of w
    let rot = c(0.0, 2.0);
    assert!((upper_value(&data, t, w * rot, &params).unwrap().value - 4.0 * base).abs() < 1e-6);
}
