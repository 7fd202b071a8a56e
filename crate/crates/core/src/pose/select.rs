use nalgebra::{DMatrix, Matrix3, Vector3};

use super::{decompose_essential, decompose_homography, PoseSource, RelativePose};
use crate::engine::{fit, EngineConfig, FitReport};
use crate::error::{Error, Result};
use crate::models::{fit_nonminimal, ModelInstance, ModelType};
use crate::point::{DataPoint, PointSet};

/// Midpoint of the shortest segment between the two viewing rays, in the
/// first camera frame. `None` for parallel rays.
pub fn triangulate_midpoint(pose: &RelativePose, x1: &Vector3<f64>, x2: &Vector3<f64>) -> Option<Vector3<f64>> {
    let rt = pose.rotation.transpose();
    let c2 = -rt * pose.translation;
    let d1 = *x1;
    let d2 = rt * x2;
    // Minimise |a d1 - (c2 + b d2)|.
    let a11 = d1.dot(&d1);
    let a12 = -d1.dot(&d2);
    let a22 = d2.dot(&d2);
    let det = a11 * a22 - a12 * a12;
    if det.abs() <= 1e-14 * a11 * a22 {
        return None;
    }
    let r1 = d1.dot(&c2);
    let r2 = -d2.dot(&c2);
    let a = (a22 * r1 - a12 * r2) / det;
    let b = (a11 * r2 - a12 * r1) / det;
    Some(0.5 * (d1 * a + c2 + d2 * b))
}

fn homogeneous(k_inv: &Matrix3<f64>, (u, v): (f64, f64)) -> Vector3<f64> {
    k_inv * Vector3::new(u, v, 1.0)
}

fn project(k: &Matrix3<f64>, x: &Vector3<f64>) -> (f64, f64) {
    let p = k * x;
    (p.x / p.z, p.y / p.z)
}

fn pixel_error(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).hypot(a.1 - b.1)
}

/// Per-correspondence inlier flags of a pose: positive depth in both views
/// and reprojection error below `reproj_eps` in both images. Pure rotations
/// use the rotation-induced transfer error instead of triangulation.
pub fn support_mask(
    pose: &RelativePose,
    correspondences: &[DataPoint],
    k1: &Matrix3<f64>,
    k2: &Matrix3<f64>,
    reproj_eps: f64,
) -> Result<Vec<bool>> {
    let k1_inv = k1.try_inverse().ok_or(Error::InvalidConfig("singular intrinsics".into()))?;
    let k2_inv = k2.try_inverse().ok_or(Error::InvalidConfig("singular intrinsics".into()))?;
    Ok(correspondences
        .iter()
        .map(|c| {
            let x1 = homogeneous(&k1_inv, c.p1());
            let x2 = homogeneous(&k2_inv, c.p2());
            if pose.is_pure_rotation() {
                let y = pose.rotation * x1;
                return y.z > 0.0 && pixel_error(project(k2, &y), c.p2()) < reproj_eps;
            }
            let Some(x) = triangulate_midpoint(pose, &x1, &x2) else {
                return false;
            };
            let y = pose.rotation * x + pose.translation;
            x.z > 0.0
                && y.z > 0.0
                && pixel_error(project(k1, &x), c.p1()) < reproj_eps
                && pixel_error(project(k2, &y), c.p2()) < reproj_eps
        })
        .collect())
}

/// Outcome of [`select_pose`].
#[derive(Debug, Clone, PartialEq)]
pub struct PoseSelection {
    /// Winner, with re-estimated translation and its support.
    pub pose: RelativePose,
    /// Index of the winner among the candidates.
    pub index: usize,
    /// Support of every candidate as given.
    pub supports: Vec<usize>,
}

fn dehomogenise(p: &Vector3<f64>) -> Vector3<f64> {
    if p.z != 0.0 {
        p / p.z
    } else {
        *p
    }
}

/// Picks the candidate with the most reprojection inliers, essential-derived
/// poses first on ties, then re-estimates its translation from its inliers.
/// The returned support is that of the re-estimated pose.
pub fn select_pose(
    candidates: &[RelativePose],
    correspondences: &[DataPoint],
    k1: &Matrix3<f64>,
    k2: &Matrix3<f64>,
    reproj_eps: f64,
) -> Result<PoseSelection> {
    if candidates.is_empty() {
        return Err(Error::NoValidPose);
    }
    let masks = candidates
        .iter()
        .map(|c| support_mask(c, correspondences, k1, k2, reproj_eps))
        .collect::<Result<Vec<_>>>()?;
    let supports: Vec<usize> = masks.iter().map(|m| m.iter().filter(|&&b| b).count()).collect();
    let rank = |i: usize| (supports[i], candidates[i].source == PoseSource::FromEssential);
    let mut index = 0;
    for i in 1..candidates.len() {
        if rank(i) > rank(index) {
            index = i;
        }
    }
    if supports[index] == 0 {
        return Err(Error::NoValidPose);
    }
    let mut pose = candidates[index];
    pose.support = supports[index];
    if !pose.is_pure_rotation() {
        let k1_inv = k1.try_inverse().ok_or(Error::InvalidConfig("singular intrinsics".into()))?;
        let k2_inv = k2.try_inverse().ok_or(Error::InvalidConfig("singular intrinsics".into()))?;
        let inliers: Vec<(Vector3<f64>, Vector3<f64>)> = correspondences
            .iter()
            .zip(&masks[index])
            .filter(|(_, &m)| m)
            .map(|(c, _)| (homogeneous(&k1_inv, c.p1()), homogeneous(&k2_inv, c.p2())))
            .collect();
        match translation_from_rotation(&pose.rotation, &inliers) {
            Ok(t) => {
                let mut refined = pose;
                refined.translation = t;
                refined.support =
                    support_mask(&refined, correspondences, k1, k2, reproj_eps)?.iter().filter(|&&b| b).count();
                pose = refined;
            }
            Err(e) => log::debug!("translation re-estimation skipped: {e}"),
        }
    }
    Ok(PoseSelection { pose, index, supports })
}

/// Unit translation from a known rotation and normalised correspondences
/// `(p1, p2)` with `p2^T [t]x R p1 = 0`, as the least-squares null vector of
/// the stacked rows `R p1 x p2`. The sign makes most triangulated depths positive.
pub fn translation_from_rotation(rotation: &Matrix3<f64>, correspondences: &[(Vector3<f64>, Vector3<f64>)]) -> Result<Vector3<f64>> {
    if correspondences.len() < 2 {
        return Err(Error::RankDeficient);
    }
    let rows = correspondences.len().max(3);
    let mut a = DMatrix::<f64>::zeros(rows, 3);
    let mut scale = 0.0;
    for (i, (p1, p2)) in correspondences.iter().enumerate() {
        let q = rotation * p1;
        let row = q.cross(p2);
        a.row_mut(i).copy_from(&row.transpose());
        scale += (q.norm() * p2.norm()).powi(2);
    }
    let scale = scale.sqrt();
    let svd = a.svd(false, true);
    let v_t = svd.v_t.ok_or(Error::RankDeficient)?;
    let sv = &svd.singular_values;
    let rank = sv.iter().filter(|&&s| s > 1e-10 * scale).count();
    if rank < 2 {
        return Err(Error::RankDeficient);
    }
    let imin = sv.imin();
    let t = Vector3::new(v_t[(imin, 0)], v_t[(imin, 1)], v_t[(imin, 2)]).normalize();

    let votes = |t: Vector3<f64>| {
        let pose = RelativePose::new(*rotation, t, PoseSource::FromEssential);
        correspondences
            .iter()
            .filter(|(p1, p2)| {
                let (x1, x2) = (dehomogenise(p1), dehomogenise(p2));
                triangulate_midpoint(&pose, &x1, &x2).is_some_and(|x| x.z > 0.0 && (rotation * x + t).z > 0.0)
            })
            .count()
    };
    Ok(if votes(-t) > votes(t) { -t } else { t })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseOptions {
    /// Reprojection threshold in pixels.
    pub reproj_eps: f64,
    /// Also decompose an essential matrix fitted to all homography inliers.
    pub use_essential: bool,
}

impl Default for PoseOptions {
    fn default() -> Self {
        Self { reproj_eps: 4.0, use_essential: true }
    }
}

#[derive(Debug, Clone)]
pub struct MultiHomographyPose {
    pub selection: PoseSelection,
    pub candidates: Vec<RelativePose>,
    pub report: FitReport,
}

/// Fits homographies, decomposes each (and optionally an essential matrix
/// fitted to the union of their inliers), and selects one pose.
pub fn pose_from_multi_h(
    points: &PointSet,
    k1: &Matrix3<f64>,
    k2: &Matrix3<f64>,
    cfg: &EngineConfig,
    opts: &PoseOptions,
) -> Result<MultiHomographyPose> {
    let report = fit(points, ModelType::Homography, cfg)?;
    let mut candidates = Vec::new();
    for h in &report.instances {
        let ModelInstance::Homography(h) = h else { continue };
        match decompose_homography(&h.h, k1, k2) {
            Ok(d) => candidates.extend(d.poses),
            Err(e) => log::debug!("skipping homography: {e}"),
        }
    }
    if opts.use_essential && report.instances.len() >= 2 {
        let mut union = vec![false; points.len()];
        for j in 0..report.instances.len() {
            for i in report.inliers(j) {
                union[i] = true;
            }
        }
        let pts: Vec<DataPoint> = points.iter().zip(&union).filter(|(_, &u)| u).map(|(p, _)| *p).collect();
        if pts.len() >= 8 {
            let weights = vec![1.0; pts.len()];
            match fit_nonminimal(ModelType::FundamentalMatrix, &pts, &weights) {
                Ok(ModelInstance::FundamentalMatrix(f)) => {
                    let e = k2.transpose() * f.f * k1;
                    match decompose_essential(&e) {
                        Ok(poses) => candidates.extend(poses),
                        Err(err) => log::debug!("essential decomposition failed: {err}"),
                    }
                }
                Ok(_) => unreachable!("fundamental fit returns a fundamental matrix"),
                Err(e) => log::debug!("essential fit failed: {e}"),
            }
        }
    }
    let selection = select_pose(&candidates, points.points(), k1, k2, opts.reproj_eps)?;
    Ok(MultiHomographyPose { selection, candidates, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pose::{rotation_error_deg, translation_error_deg};
    use nalgebra::Rotation3;

    fn scene(t: Vector3<f64>, n: usize) -> (Matrix3<f64>, Vec<(Vector3<f64>, Vector3<f64>)>) {
        let r = *Rotation3::from_euler_angles(0.05, -0.1, 0.2).matrix();
        let pts = (0..n)
            .map(|i| {
                let f = i as f64;
                let x = Vector3::new((f * 0.37).sin(), (f * 0.73).cos(), 4.0 + (f * 1.3).sin());
                let y = r * x + t;
                (x / x.z, y / y.z)
            })
            .collect();
        (r, pts)
    }

    #[test]
    fn translation_noise_free() {
        let t = Vector3::new(0.4, -0.2, 0.1);
        let (r, pts) = scene(t, 10);
        let est = translation_from_rotation(&r, &pts).unwrap();
        assert!(translation_error_deg(&est, &t) < 1e-8);
        let (r, pts) = scene(t, 2);
        assert!(translation_error_deg(&translation_from_rotation(&r, &pts).unwrap(), &t) < 1e-8);
    }

    #[test]
    fn zero_translation_is_rank_deficient() {
        let (r, pts) = scene(Vector3::zeros(), 10);
        assert_eq!(translation_from_rotation(&r, &pts), Err(Error::RankDeficient));
        assert_eq!(translation_from_rotation(&r, &pts[..1]), Err(Error::RankDeficient));
    }

    #[test]
    fn midpoint_is_exact_without_noise() {
        let pose = RelativePose::new(*Rotation3::from_euler_angles(0.1, 0.0, 0.0).matrix(), Vector3::x(), PoseSource::FromEssential);
        let x = Vector3::new(0.2, -0.3, 5.0);
        let y = pose.rotation * x + pose.translation;
        let est = triangulate_midpoint(&pose, &(x / x.z), &(y / y.z)).unwrap();
        assert!((est - x).norm() < 1e-12);
    }

    #[test]
    fn single_candidate_gets_support() {
        let t = Vector3::new(1.0, 0.0, 0.0);
        let (r, pts) = scene(t, 20);
        let k = Matrix3::identity();
        let corr: Vec<DataPoint> = pts.iter().map(|(a, b)| DataPoint::correspondence(a.x, a.y, b.x, b.y)).collect();
        let cand = RelativePose::new(r, t, PoseSource::FromHomography);
        let sel = select_pose(&[cand], &corr, &k, &k, 1e-6).unwrap();
        assert_eq!(sel.index, 0);
        assert_eq!(sel.pose.support, 20);
        assert!(rotation_error_deg(&sel.pose.rotation, &r) == 0.0);
        // Flipped translation puts everything behind a camera.
        let decoy = RelativePose::new(r, -t, PoseSource::FromHomography);
        assert_eq!(select_pose(&[decoy], &corr, &k, &k, 1e-6), Err(Error::NoValidPose));
    }
}
