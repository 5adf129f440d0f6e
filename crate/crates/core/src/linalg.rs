use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;

pub(crate) type Vec2 = Vector2<f64>;
pub(crate) type Mat2 = Matrix2<f64>;

#[inline]
pub(crate) fn to_vec(w: Complex64) -> Vec2 {
    Vec2::new(w.re, w.im)
}

/// Matrix of the pairing `Re(z·w) = zᵀ J w` on `C ≅ R²`.
#[inline]
pub(crate) fn pairing() -> Mat2 {
    Mat2::new(1.0, 0.0, 0.0, -1.0)
}

pub(crate) fn rotation(angle: f64) -> Mat2 {
    let (s, c) = angle.sin_cos();
    Mat2::new(c, -s, s, c)
}
