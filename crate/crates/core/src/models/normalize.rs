use nalgebra::{Matrix3, Vector3};

/// Similarity transform moving the centroid to the origin with mean distance sqrt(2).
/// Points with zero weight are ignored. Returns `None` when all kept points coincide.
pub(crate) fn hartley<I>(points: I) -> Option<Matrix3<f64>>
where
    I: Iterator<Item = (f64, f64)> + Clone,
{
    let (mut cx, mut cy, mut n) = (0.0, 0.0, 0usize);
    for (x, y) in points.clone() {
        cx += x;
        cy += y;
        n += 1;
    }
    if n == 0 {
        return None;
    }
    cx /= n as f64;
    cy /= n as f64;
    let mean = points.map(|(x, y)| ((x - cx).powi(2) + (y - cy).powi(2)).sqrt()).sum::<f64>() / n as f64;
    if !(mean > 1e-12) {
        return None;
    }
    let s = std::f64::consts::SQRT_2 / mean;
    Some(Matrix3::new(s, 0.0, -s * cx, 0.0, s, -s * cy, 0.0, 0.0, 1.0))
}

#[inline]
pub(crate) fn apply(t: &Matrix3<f64>, x: f64, y: f64) -> Vector3<f64> {
    Vector3::new(t[(0, 0)] * x + t[(0, 2)], t[(1, 1)] * y + t[(1, 2)], 1.0)
}

/// Scales to unit Frobenius norm and fixes the sign so the largest-magnitude entry is positive.
pub(crate) fn canonical_matrix(m: &Matrix3<f64>) -> Option<Matrix3<f64>> {
    let norm = m.norm();
    if !(norm > 0.0) || !norm.is_finite() {
        return None;
    }
    let mut out = m / norm;
    let mut big = 0.0f64;
    for v in out.iter() {
        if v.abs() > big.abs() {
            big = *v;
        }
    }
    if big < 0.0 {
        out = -out;
    }
    Some(out)
}
