//! Geometric model classes: minimal and weighted solvers, residuals and
//! sample/model validity tests.
//!
//! Residual units are those of the input coordinates (pixels for image data):
//! point-to-line / point-to-plane distance, symmetric transfer error for
//! homographies and Sampson distance for fundamental matrices. All homogeneous
//! solvers work on Hartley-normalised coordinates.

mod fundamental;
mod homography;
mod line;
mod normalize;
mod plane;
mod poly;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use fundamental::Fundamental;
pub use homography::Homography;
pub use line::{Line2, Segment2};
pub use plane::Plane3;

use crate::error::{Error, Result};
use crate::point::DataPoint;

/// Triangle area (px^2) below which three points count as collinear.
pub const COLLINEARITY_AREA: f64 = 1.0;

/// Distance below which two sample points count as coincident.
pub const COINCIDENCE_DISTANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelType {
    Line2D,
    #[serde(rename = "segment2d")]
    LineSegment2D,
    Plane3D,
    Homography,
    #[serde(rename = "fundamental")]
    FundamentalMatrix,
}

impl ModelType {
    pub const ALL: [ModelType; 5] = [
        ModelType::Line2D,
        ModelType::LineSegment2D,
        ModelType::Plane3D,
        ModelType::Homography,
        ModelType::FundamentalMatrix,
    ];

    /// Minimal sample size.
    pub fn sample_size(self) -> usize {
        match self {
            ModelType::Line2D | ModelType::LineSegment2D => 2,
            ModelType::Plane3D => 3,
            ModelType::Homography => 4,
            ModelType::FundamentalMatrix => 7,
        }
    }

    pub fn point_dim(self) -> usize {
        match self {
            ModelType::Line2D | ModelType::LineSegment2D => 2,
            ModelType::Plane3D => 3,
            ModelType::Homography | ModelType::FundamentalMatrix => 4,
        }
    }

    pub fn param_len(self) -> usize {
        match self {
            ModelType::Line2D => 3,
            ModelType::LineSegment2D => 5,
            ModelType::Plane3D => 4,
            ModelType::Homography | ModelType::FundamentalMatrix => 9,
        }
    }

    /// Degrees of freedom of the residual, used to shape the MAGSAC++ loss.
    pub fn residual_dof(self) -> u32 {
        match self {
            ModelType::Line2D | ModelType::LineSegment2D | ModelType::Plane3D => 2,
            ModelType::Homography => 4,
            ModelType::FundamentalMatrix => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelType::Line2D => "line2d",
            ModelType::LineSegment2D => "segment2d",
            ModelType::Plane3D => "plane3d",
            ModelType::Homography => "homography",
            ModelType::FundamentalMatrix => "fundamental",
        }
    }
}

impl fmt::Display for ModelType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelType {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "line2d" | "line" => Ok(ModelType::Line2D),
            "segment2d" | "linesegment2d" | "segment" => Ok(ModelType::LineSegment2D),
            "plane3d" | "plane" => Ok(ModelType::Plane3D),
            "homography" | "h" => Ok(ModelType::Homography),
            "fundamental" | "fundamentalmatrix" | "f" => Ok(ModelType::FundamentalMatrix),
            other => Err(Error::InvalidConfig(format!("unknown model type '{other}'"))),
        }
    }
}

/// One fitted model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "RawInstance", try_from = "RawInstance")]
pub enum ModelInstance {
    Line2D(Line2),
    LineSegment2D(Segment2),
    Plane3D(Plane3),
    Homography(Homography),
    FundamentalMatrix(Fundamental),
}

impl ModelInstance {
    pub fn model_type(&self) -> ModelType {
        match self {
            ModelInstance::Line2D(_) => ModelType::Line2D,
            ModelInstance::LineSegment2D(_) => ModelType::LineSegment2D,
            ModelInstance::Plane3D(_) => ModelType::Plane3D,
            ModelInstance::Homography(_) => ModelType::Homography,
            ModelInstance::FundamentalMatrix(_) => ModelType::FundamentalMatrix,
        }
    }

    /// Builds an instance from a raw parameter vector, applying the type's normalisation.
    pub fn from_params(model_type: ModelType, params: &[f64]) -> Result<Self> {
        if params.len() != model_type.param_len() {
            return Err(Error::DimensionMismatch { expected: model_type.param_len(), found: params.len() });
        }
        if params.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig("non-finite model parameter".into()));
        }
        Ok(match model_type {
            ModelType::Line2D => ModelInstance::Line2D(Line2::from_coefficients(params[0], params[1], params[2])?),
            ModelType::LineSegment2D => ModelInstance::LineSegment2D(Segment2::from_params(params)?),
            ModelType::Plane3D => {
                ModelInstance::Plane3D(Plane3::from_coefficients(params[0], params[1], params[2], params[3])?)
            }
            ModelType::Homography => {
                ModelInstance::Homography(Homography::new(nalgebra::Matrix3::from_row_slice(params))?)
            }
            ModelType::FundamentalMatrix => {
                ModelInstance::FundamentalMatrix(Fundamental::new(nalgebra::Matrix3::from_row_slice(params))?)
            }
        })
    }

    pub fn params(&self) -> Vec<f64> {
        match self {
            ModelInstance::Line2D(l) => l.params().to_vec(),
            ModelInstance::LineSegment2D(s) => s.params().to_vec(),
            ModelInstance::Plane3D(p) => p.params().to_vec(),
            ModelInstance::Homography(h) => h.params().to_vec(),
            ModelInstance::FundamentalMatrix(f) => f.params().to_vec(),
        }
    }

    /// Point-to-model residual. The point dimension must match the model type.
    #[inline]
    pub fn residual(&self, p: &DataPoint) -> f64 {
        debug_assert_eq!(p.dim(), self.model_type().point_dim());
        match self {
            ModelInstance::Line2D(l) => l.distance(p.x(), p.y()),
            ModelInstance::LineSegment2D(s) => s.distance(p.x(), p.y()),
            ModelInstance::Plane3D(pl) => pl.distance(p.x(), p.y(), p.z()),
            ModelInstance::Homography(h) => h.symmetric_transfer_error(p),
            ModelInstance::FundamentalMatrix(f) => f.sampson_distance(p),
        }
    }

    /// Model-specific completion after fitting against the full data: line
    /// segments take their extent from the contiguous inliers of their line.
    pub fn finalize(&mut self, points: &[DataPoint], eps: f64) {
        if let ModelInstance::LineSegment2D(s) = self {
            s.extend_to_inliers(points, eps, 2.5 * eps);
        }
    }
}

#[derive(Serialize, Deserialize)]
struct RawInstance {
    model_type: ModelType,
    params: Vec<f64>,
}

impl From<ModelInstance> for RawInstance {
    fn from(h: ModelInstance) -> Self {
        RawInstance { model_type: h.model_type(), params: h.params() }
    }
}

impl TryFrom<RawInstance> for ModelInstance {
    type Error = Error;
    fn try_from(raw: RawInstance) -> Result<Self> {
        ModelInstance::from_params(raw.model_type, &raw.params)
    }
}

/// Residual of `point` w.r.t. `instance`.
#[inline]
pub fn residual(instance: &ModelInstance, point: &DataPoint) -> f64 {
    instance.residual(point)
}

fn check_dims(model_type: ModelType, points: &[DataPoint]) -> Result<()> {
    let d = model_type.point_dim();
    match points.iter().find(|p| p.dim() != d) {
        Some(p) => Err(Error::DimensionMismatch { expected: d, found: p.dim() }),
        None => Ok(()),
    }
}

/// Fits from a minimal sample. Returns every real solution (up to three for
/// the seven-point fundamental matrix, otherwise at most one).
pub fn fit_minimal(model_type: ModelType, sample: &[DataPoint]) -> Result<Vec<ModelInstance>> {
    let m = model_type.sample_size();
    if sample.len() != m {
        return Err(Error::ExhaustedData { needed: m, available: sample.len() });
    }
    check_dims(model_type, sample)?;
    Ok(match model_type {
        ModelType::Line2D => vec![ModelInstance::Line2D(Line2::through(
            (sample[0].x(), sample[0].y()),
            (sample[1].x(), sample[1].y()),
        )?)],
        ModelType::LineSegment2D => {
            let line = Line2::through((sample[0].x(), sample[0].y()), (sample[1].x(), sample[1].y()))?;
            let t0 = line.project(sample[0].x(), sample[0].y());
            let t1 = line.project(sample[1].x(), sample[1].y());
            vec![ModelInstance::LineSegment2D(Segment2::new(line, t0, t1))]
        }
        ModelType::Plane3D => vec![ModelInstance::Plane3D(Plane3::through(&sample[0], &sample[1], &sample[2])?)],
        ModelType::Homography => vec![ModelInstance::Homography(Homography::fit_minimal(sample)?)],
        ModelType::FundamentalMatrix => Fundamental::fit_seven_point(sample)?
            .into_iter()
            .map(ModelInstance::FundamentalMatrix)
            .collect(),
    })
}

/// Weighted least-squares fit: total least squares for lines and planes,
/// normalised DLT / eight-point (with rank-2 projection) for H and F.
pub fn fit_nonminimal(model_type: ModelType, points: &[DataPoint], weights: &[f64]) -> Result<ModelInstance> {
    if points.len() != weights.len() {
        return Err(Error::DimensionMismatch { expected: points.len(), found: weights.len() });
    }
    check_dims(model_type, points)?;
    let m = model_type.sample_size();
    let positive = weights.iter().filter(|&&w| w > 0.0).count();
    if positive < m {
        return Err(Error::ExhaustedData { needed: m, available: positive });
    }
    if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(Error::InvalidConfig("weights must be finite and nonnegative".into()));
    }
    Ok(match model_type {
        ModelType::Line2D => ModelInstance::Line2D(Line2::fit_tls(points, weights)?),
        ModelType::LineSegment2D => {
            let line = Line2::fit_tls(points, weights)?;
            let (lo, hi) = points
                .iter()
                .zip(weights)
                .filter(|(_, &w)| w > 0.0)
                .map(|(p, _)| line.project(p.x(), p.y()))
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), t| (lo.min(t), hi.max(t)));
            ModelInstance::LineSegment2D(Segment2::new(line, lo, hi))
        }
        ModelType::Plane3D => ModelInstance::Plane3D(Plane3::fit_tls(points, weights)?),
        ModelType::Homography => ModelInstance::Homography(Homography::fit_weighted(points, weights)?),
        ModelType::FundamentalMatrix => ModelInstance::FundamentalMatrix(Fundamental::fit_weighted(points, weights)?),
    })
}

#[inline]
fn tri_area(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> f64 {
    0.5 * ((b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0))
}

/// Degeneracy test for a minimal sample with the default collinearity tolerance.
pub fn sample_degenerate(model_type: ModelType, sample: &[DataPoint]) -> bool {
    sample_degenerate_with(model_type, sample, COLLINEARITY_AREA)
}

/// Degeneracy test with an explicit collinearity tolerance (triangle area).
pub fn sample_degenerate_with(model_type: ModelType, sample: &[DataPoint], area_tol: f64) -> bool {
    match model_type {
        ModelType::Line2D | ModelType::LineSegment2D => {
            sample.len() >= 2 && sample[0].distance(&sample[1]) <= COINCIDENCE_DISTANCE
        }
        ModelType::Plane3D => {
            if sample.len() < 3 {
                return false;
            }
            let p = |i: usize| nalgebra::Vector3::new(sample[i].x(), sample[i].y(), sample[i].z());
            0.5 * (p(1) - p(0)).cross(&(p(2) - p(0))).norm() < area_tol
        }
        ModelType::Homography => {
            if sample.len() < 4 {
                return false;
            }
            for img in [0usize, 1] {
                let pt = |i: usize| {
                    let c = sample[i].coords();
                    (c[2 * img], c[2 * img + 1])
                };
                for (a, b, c) in TRIPLES {
                    if tri_area(pt(a), pt(b), pt(c)).abs() < area_tol {
                        return true;
                    }
                }
            }
            false
        }
        ModelType::FundamentalMatrix => false,
    }
}

const TRIPLES: [(usize, usize, usize); 4] = [(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)];

/// Orientation consistency of a four-correspondence homography sample: every
/// triangle keeps its orientation between the two images.
pub fn sample_cheirality_ok(sample: &[DataPoint]) -> bool {
    if sample.len() != 4 {
        return false;
    }
    for (a, b, c) in TRIPLES {
        let s1 = tri_area(sample[a].p1(), sample[b].p1(), sample[c].p1());
        let s2 = tri_area(sample[a].p2(), sample[b].p2(), sample[c].p2());
        if s1 == 0.0 || s2 == 0.0 || s1.signum() != s2.signum() {
            return false;
        }
    }
    true
}

/// Oriented epipolar constraint over the sample used to fit `instance`.
/// Non-fundamental instances pass trivially.
pub fn oriented_epipolar_ok(instance: &ModelInstance, sample: &[DataPoint]) -> bool {
    match instance {
        ModelInstance::FundamentalMatrix(f) => f.oriented_ok(sample),
        _ => true,
    }
}

/// Dominant-plane check for a seven-point fundamental-matrix sample: true when
/// a homography fitted to some non-degenerate four-subset explains at least
/// five of the seven correspondences within `eps`.
pub fn fundamental_plane_degenerate(sample: &[DataPoint], eps: f64) -> bool {
    let n = sample.len();
    if n < 5 {
        return false;
    }
    let mut subset = [DataPoint::correspondence(0.0, 0.0, 0.0, 0.0); 4];
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                for d in c + 1..n {
                    subset[0] = sample[a];
                    subset[1] = sample[b];
                    subset[2] = sample[c];
                    subset[3] = sample[d];
                    if sample_degenerate(ModelType::Homography, &subset) {
                        continue;
                    }
                    let Ok(h) = Homography::fit_minimal(&subset) else { continue };
                    let support = sample.iter().filter(|p| h.symmetric_transfer_error(p) < eps).count();
                    if support >= 5 {
                        return true;
                    }
                }
            }
        }
    }
    false
}
