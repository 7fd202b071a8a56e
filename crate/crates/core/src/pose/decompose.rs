use nalgebra::{Matrix3, Vector3};

use super::{PoseSource, RelativePose};
use crate::error::{Error, Result};

/// `max |S_ij|` below which `S = Hn^T Hn - I` counts as zero (pure rotation).
pub const PURE_ROTATION_TOL: f64 = 1e-9;

/// Solutions of a homography decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct HomographyDecomposition {
    /// Up to four poses; each carries its plane normal in the first camera frame.
    pub poses: Vec<RelativePose>,
    /// The homography is a pure rotation: one pose with zero translation.
    pub pure_rotation: bool,
}

fn opposite_of_minor(m: &Matrix3<f64>, row: usize, col: usize) -> f64 {
    let x1 = if col == 0 { 1 } else { 0 };
    let x2 = if col == 2 { 1 } else { 2 };
    let y1 = if row == 0 { 1 } else { 0 };
    let y2 = if row == 2 { 1 } else { 2 };
    m[(y1, x2)] * m[(y2, x1)] - m[(y1, x1)] * m[(y2, x2)]
}

fn sign(x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

fn rotation_from(hn: &Matrix3<f64>, t_star: &Vector3<f64>, n: &Vector3<f64>, v: f64) -> Matrix3<f64> {
    let r = hn * (Matrix3::identity() - (2.0 / v) * t_star * n.transpose());
    if r.determinant() < 0.0 {
        -r
    } else {
        r
    }
}

/// Analytic decomposition of `H ~ K2 (R + t n^T) K1^-1` (Malis and Vargas).
///
/// The calibrated homography is scaled by its middle singular value. Each of
/// the (up to) four returned poses satisfies `±Hn = R + t n^T`; translations
/// are reported as unit directions.
pub fn decompose_homography(h: &Matrix3<f64>, k1: &Matrix3<f64>, k2: &Matrix3<f64>) -> Result<HomographyDecomposition> {
    let k2_inv = k2.try_inverse().ok_or(Error::DegenerateHomography("singular intrinsics"))?;
    let hn = k2_inv * h * k1;
    if !hn.iter().all(|v| v.is_finite()) {
        return Err(Error::DegenerateHomography("non-finite homography"));
    }
    let sv = hn.svd(false, false).singular_values;
    let mut s_sorted = [sv[0], sv[1], sv[2]];
    s_sorted.sort_by(|a, b| b.total_cmp(a));
    if s_sorted[2] <= 1e-12 * s_sorted[0] {
        return Err(Error::DegenerateHomography("singular homography"));
    }
    let hn = hn / s_sorted[1];
    let s = hn.transpose() * hn - Matrix3::identity();
    if s.amax() < PURE_ROTATION_TOL {
        let r = if hn.determinant() < 0.0 { -hn } else { hn };
        let pose = RelativePose {
            rotation: r,
            translation: Vector3::zeros(),
            source: PoseSource::FromHomography,
            support: 0,
            normal: None,
        };
        return Ok(HomographyDecomposition { poses: vec![pose], pure_rotation: true });
    }

    let m00 = opposite_of_minor(&s, 0, 0);
    let m11 = opposite_of_minor(&s, 1, 1);
    let m22 = opposite_of_minor(&s, 2, 2);
    let (rt00, rt11, rt22) = (m00.max(0.0).sqrt(), m11.max(0.0).sqrt(), m22.max(0.0).sqrt());
    let m01 = opposite_of_minor(&s, 0, 1);
    let m12 = opposite_of_minor(&s, 1, 2);
    let m02 = opposite_of_minor(&s, 0, 2);
    let (e12, e02, e01) = (sign(m12), sign(m02), sign(m01));

    let diag = [s[(0, 0)].abs(), s[(1, 1)].abs(), s[(2, 2)].abs()];
    let idx = if diag[1] > diag[0] && diag[1] >= diag[2] {
        1
    } else if diag[2] > diag[0] && diag[2] > diag[1] {
        2
    } else {
        0
    };
    let (npa, npb) = match idx {
        0 => (
            Vector3::new(s[(0, 0)], s[(0, 1)] + rt22, s[(0, 2)] + e12 * rt11),
            Vector3::new(s[(0, 0)], s[(0, 1)] - rt22, s[(0, 2)] - e12 * rt11),
        ),
        1 => (
            Vector3::new(s[(0, 1)] + rt22, s[(1, 1)], s[(1, 2)] - e02 * rt00),
            Vector3::new(s[(0, 1)] - rt22, s[(1, 1)], s[(1, 2)] + e02 * rt00),
        ),
        _ => (
            Vector3::new(s[(0, 2)] + e01 * rt11, s[(1, 2)] + rt00, s[(2, 2)]),
            Vector3::new(s[(0, 2)] - e01 * rt11, s[(1, 2)] - rt00, s[(2, 2)]),
        ),
    };
    let trace = s.trace();
    let v = 2.0 * (1.0 + trace - m00 - m11 - m22).max(0.0).sqrt();
    let esii = sign(s[(idx, idx)]);
    let r = (2.0 + trace + v).max(0.0).sqrt();
    let nt = (2.0 + trace - v).max(0.0).sqrt();
    let na = npa.normalize();
    let nb = npb.normalize();
    let ta_star = 0.5 * nt * (esii * r * nb - nt * na);
    let tb_star = 0.5 * nt * (esii * r * na - nt * nb);
    let ra = rotation_from(&hn, &ta_star, &na, v);
    let rb = rotation_from(&hn, &tb_star, &nb, v);
    let ta = ra * ta_star;
    let tb = rb * tb_star;

    let pose = |rot: Matrix3<f64>, t: Vector3<f64>, n: Vector3<f64>| RelativePose {
        rotation: rot,
        translation: t.normalize(),
        source: PoseSource::FromHomography,
        support: 0,
        normal: Some(n),
    };
    Ok(HomographyDecomposition {
        poses: vec![pose(ra, ta, na), pose(ra, -ta, -na), pose(rb, tb, nb), pose(rb, -tb, -nb)],
        pure_rotation: false,
    })
}

/// The four `(R, t)` factorisations of an essential matrix.
pub fn decompose_essential(e: &Matrix3<f64>) -> Result<Vec<RelativePose>> {
    let svd = e.svd(true, true);
    let (mut u, mut v_t) = (svd.u.expect("u requested"), svd.v_t.expect("v requested"));
    // nalgebra does not sort singular values; move the smallest to the last column.
    let sv = svd.singular_values;
    let k = sv.imin();
    if k != 2 {
        u.swap_columns(k, 2);
        v_t.swap_rows(k, 2);
    }
    if sv[k] > 1e-6 * sv.max() {
        log::debug!("essential matrix is not rank 2 (singular values {:?})", sv.as_slice());
    }
    if u.determinant() < 0.0 {
        u = -u;
    }
    if v_t.determinant() < 0.0 {
        v_t = -v_t;
    }
    let w = Matrix3::new(0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0);
    let r1 = u * w * v_t;
    let r2 = u * w.transpose() * v_t;
    let t: Vector3<f64> = u.column(2).into_owned();
    if !t.iter().all(|x| x.is_finite()) {
        return Err(Error::NoValidPose);
    }
    let pose = |rot: Matrix3<f64>, t: Vector3<f64>| RelativePose {
        rotation: rot,
        translation: t.normalize(),
        source: PoseSource::FromEssential,
        support: 0,
        normal: None,
    };
    Ok(vec![pose(r1, t), pose(r1, -t), pose(r2, t), pose(r2, -t)])
}

/// `E = [t]x R`.
pub fn essential_from_pose(rotation: &Matrix3<f64>, translation: &Vector3<f64>) -> Matrix3<f64> {
    translation.cross_matrix() * rotation
}
