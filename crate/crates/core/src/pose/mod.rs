//! Relative pose from homographies and essential matrices.

mod decompose;
mod select;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use decompose::{
    decompose_essential, decompose_homography, essential_from_pose, HomographyDecomposition, PURE_ROTATION_TOL,
};
pub use select::{
    pose_from_multi_h, select_pose, support_mask, translation_from_rotation, triangulate_midpoint, MultiHomographyPose,
    PoseOptions, PoseSelection,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PoseSource {
    FromEssential,
    FromHomography,
    Averaged,
}

/// Second camera relative to the first: `X2 = R X1 + t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelativePose {
    pub rotation: Matrix3<f64>,
    /// Unit direction, or zero for a pure rotation.
    pub translation: Vector3<f64>,
    pub source: PoseSource,
    pub support: usize,
    /// Plane normal in the first camera frame, for homography solutions.
    pub normal: Option<Vector3<f64>>,
}

impl RelativePose {
    pub fn new(rotation: Matrix3<f64>, translation: Vector3<f64>, source: PoseSource) -> Self {
        let t = if translation.norm() > 0.0 { translation.normalize() } else { translation };
        Self { rotation, translation: t, source, support: 0, normal: None }
    }

    pub fn is_pure_rotation(&self) -> bool {
        self.translation == Vector3::zeros()
    }
}

/// Geodesic angle between two rotations, in degrees.
pub fn rotation_error_deg(r: &Matrix3<f64>, r_gt: &Matrix3<f64>) -> f64 {
    let d = r * r_gt.transpose();
    let axis = Vector3::new(d[(2, 1)] - d[(1, 2)], d[(0, 2)] - d[(2, 0)], d[(1, 0)] - d[(0, 1)]);
    let cos = (d.trace() - 1.0) / 2.0;
    (0.5 * axis.norm()).atan2(cos).to_degrees()
}

/// Angle between two translation directions, in degrees.
pub fn translation_error_deg(t: &Vector3<f64>, t_gt: &Vector3<f64>) -> f64 {
    t.cross(t_gt).norm().atan2(t.dot(t_gt)).to_degrees()
}

/// Closest rotation in the Frobenius sense.
pub fn project_to_rotation(m: &Matrix3<f64>) -> Matrix3<f64> {
    let svd = m.svd(true, true);
    let (u, v_t) = (svd.u.expect("u requested"), svd.v_t.expect("v requested"));
    let mut s = Matrix3::identity();
    if (u * v_t).determinant() < 0.0 {
        s[(2, 2)] = -1.0;
    }
    u * s * v_t
}

/// Chordal mean of the rotations and normalised mean of the translations.
pub fn average_poses(poses: &[RelativePose]) -> Result<RelativePose> {
    if poses.is_empty() {
        return Err(Error::NoValidPose);
    }
    let r_sum = poses.iter().fold(Matrix3::zeros(), |acc, p| acc + p.rotation);
    let t_sum = poses.iter().fold(Vector3::zeros(), |acc, p| acc + p.translation);
    let mut pose = RelativePose::new(project_to_rotation(&r_sum), t_sum, PoseSource::Averaged);
    pose.support = poses.iter().map(|p| p.support).sum();
    Ok(pose)
}
