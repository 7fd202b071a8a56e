use nalgebra::{Matrix3, Rotation3, Unit, Vector3};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{Fundamental, Homography, Line2, ModelInstance, ModelType, Plane3, Segment2};
use crate::point::{DataPoint, PointSet};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub model_type: ModelType,
    pub instances: usize,
    pub points_per_instance: usize,
    pub outliers: usize,
    /// Gaussian noise standard deviation, in pixels (or length units).
    pub sigma: f64,
    /// Side length of the square field (cube for planes).
    pub extent: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn new(model_type: ModelType, instances: usize, points_per_instance: usize, outliers: usize) -> Self {
        Self { model_type, instances, points_per_instance, outliers, sigma: 1.0, extent: 1000.0, seed: 0 }
    }

    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma = sigma;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_extent(mut self, extent: f64) -> Self {
        self.extent = extent;
        self
    }
}

/// A generated scene with its ground truth. Label 0 marks outliers, label `j`
/// the inliers of `instances[j - 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticScene {
    pub points: PointSet,
    pub labels: Vec<u32>,
    pub instances: Vec<ModelInstance>,
    /// Shared intrinsics of both views for two-view models.
    pub intrinsics: Option<Matrix3<f64>>,
    /// Shared camera motion `(R, t)` of homography scenes, `X2 = R X1 + t`.
    pub motion: Option<(Matrix3<f64>, Vector3<f64>)>,
}

/// Camera used for the two-view generators: focal length equal to the field
/// size, principal point at its centre.
pub fn synthetic_intrinsics(extent: f64) -> Matrix3<f64> {
    Matrix3::new(extent, 0.0, 0.5 * extent, 0.0, extent, 0.5 * extent, 0.0, 0.0, 1.0)
}

struct Gen {
    rng: ChaCha8Rng,
    noise: Normal<f64>,
    extent: f64,
}

impl Gen {
    fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.rng.random::<f64>()
    }

    fn coord(&mut self) -> f64 {
        self.uniform(0.0, self.extent)
    }

    fn noise(&mut self) -> f64 {
        self.noise.sample(&mut self.rng)
    }

    fn unit_vector(&mut self) -> Vector3<f64> {
        loop {
            let v = Vector3::new(self.uniform(-1.0, 1.0), self.uniform(-1.0, 1.0), self.uniform(-1.0, 1.0));
            let n = v.norm();
            if n > 1e-3 && n <= 1.0 {
                return v / n;
            }
        }
    }

    fn rotation(&mut self, max_deg: f64) -> Rotation3<f64> {
        let axis = Unit::new_normalize(self.unit_vector());
        Rotation3::from_axis_angle(&axis, self.uniform(-max_deg, max_deg).to_radians())
    }

    /// Axis-aligned window of the field `(x0, y0, size)`.
    fn window(&mut self) -> (f64, f64, f64) {
        let size = self.uniform(0.3, 0.5) * self.extent;
        (self.uniform(0.0, self.extent - size), self.uniform(0.0, self.extent - size), size)
    }
}

pub fn synthesize(spec: &SyntheticSpec) -> Result<SyntheticScene> {
    if !(spec.sigma >= 0.0 && spec.sigma.is_finite()) || !(spec.extent > 0.0 && spec.extent.is_finite()) {
        return Err(Error::InvalidConfig(format!("invalid sigma {} or extent {}", spec.sigma, spec.extent)));
    }
    let mut g = Gen {
        rng: ChaCha8Rng::seed_from_u64(spec.seed),
        noise: Normal::new(0.0, spec.sigma).expect("finite sigma"),
        extent: spec.extent,
    };
    let mut rows: Vec<(DataPoint, u32)> = Vec::new();
    let mut instances = Vec::new();
    let mut intrinsics = None;
    let mut motion = None;
    match spec.model_type {
        ModelType::Line2D | ModelType::LineSegment2D => {
            for label in 1..=spec.instances as u32 {
                let (p, q) = loop {
                    let p = (g.coord(), g.coord());
                    let q = (g.coord(), g.coord());
                    if (p.0 - q.0).hypot(p.1 - q.1) >= 0.5 * spec.extent {
                        break (p, q);
                    }
                };
                let line = Line2::through(p, q)?;
                instances.push(if spec.model_type == ModelType::Line2D {
                    ModelInstance::Line2D(line)
                } else {
                    ModelInstance::LineSegment2D(Segment2::new(line, line.project(p.0, p.1), line.project(q.0, q.1)))
                });
                for _ in 0..spec.points_per_instance {
                    let s = g.rng.random::<f64>();
                    let (x, y) = (p.0 + s * (q.0 - p.0), p.1 + s * (q.1 - p.1));
                    rows.push((DataPoint::xy(x + g.noise(), y + g.noise()), label));
                }
            }
            for _ in 0..spec.outliers {
                rows.push((DataPoint::xy(g.coord(), g.coord()), 0));
            }
        }
        ModelType::Plane3D => {
            for label in 1..=spec.instances as u32 {
                let n = g.unit_vector();
                let c = Vector3::new(g.coord(), g.coord(), g.coord());
                let plane = Plane3::from_coefficients(n.x, n.y, n.z, -n.dot(&c))?;
                instances.push(ModelInstance::Plane3D(plane));
                let u = n.cross(&if n.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() }).normalize();
                let v = n.cross(&u);
                let half = 0.25 * spec.extent;
                for _ in 0..spec.points_per_instance {
                    let x = c + u * g.uniform(-half, half) + v * g.uniform(-half, half);
                    rows.push((DataPoint::xyz(x.x + g.noise(), x.y + g.noise(), x.z + g.noise()), label));
                }
            }
            for _ in 0..spec.outliers {
                rows.push((DataPoint::xyz(g.coord(), g.coord(), g.coord()), 0));
            }
        }
        ModelType::Homography | ModelType::FundamentalMatrix => {
            let k = synthetic_intrinsics(spec.extent);
            let k_inv = k.try_inverse().expect("invertible intrinsics");
            intrinsics = Some(k);
            let is_h = spec.model_type == ModelType::Homography;
            // Planes share one camera motion; independent motions each get their own.
            let shared = (g.rotation(10.0), g.unit_vector());
            if is_h {
                motion = Some((*shared.0.matrix(), shared.1));
            }
            for label in 1..=spec.instances as u32 {
                let mut attempts = 0;
                'instance: loop {
                    attempts += 1;
                    if attempts > 1000 {
                        return Err(Error::InvalidConfig("could not place a visible synthetic instance".into()));
                    }
                    let (rot, t) = if is_h { shared } else { (g.rotation(15.0), g.unit_vector()) };
                    let r = *rot.matrix();
                    let n = {
                        let tilt = g.rotation(40.0);
                        tilt * Vector3::z()
                    };
                    let d = g.uniform(4.0, 8.0);
                    let (x0, y0, size) = g.window();
                    let mut pts = Vec::with_capacity(spec.points_per_instance);
                    let mut tries = 0;
                    while pts.len() < spec.points_per_instance {
                        tries += 1;
                        if tries > 50 * spec.points_per_instance.max(1) {
                            continue 'instance;
                        }
                        let x1 = Vector3::new(x0 + g.uniform(0.0, size), y0 + g.uniform(0.0, size), 1.0);
                        let ray = k_inv * x1;
                        let depth = if is_h {
                            let den = n.dot(&ray);
                            if den <= 1e-9 {
                                continue;
                            }
                            d / den
                        } else {
                            g.uniform(4.0, 10.0)
                        };
                        let world = ray * depth;
                        let cam2 = r * world + t;
                        if cam2.z <= 0.5 {
                            continue;
                        }
                        let x2 = k * cam2 / cam2.z;
                        if !(0.0..=spec.extent).contains(&x2.x) || !(0.0..=spec.extent).contains(&x2.y) {
                            continue;
                        }
                        pts.push(DataPoint::correspondence(
                            x1.x + g.noise(),
                            x1.y + g.noise(),
                            x2.x + g.noise(),
                            x2.y + g.noise(),
                        ));
                    }
                    let model = if is_h {
                        ModelInstance::Homography(Homography::new(k * (r + t * n.transpose() / d) * k_inv)?)
                    } else {
                        let tx = t.cross_matrix();
                        ModelInstance::FundamentalMatrix(Fundamental::new_rank2(k_inv.transpose() * tx * r * k_inv)?)
                    };
                    instances.push(model);
                    rows.extend(pts.into_iter().map(|p| (p, label)));
                    break;
                }
            }
            for _ in 0..spec.outliers {
                rows.push((DataPoint::correspondence(g.coord(), g.coord(), g.coord(), g.coord()), 0));
            }
        }
    }
    rows.shuffle(&mut g.rng);
    let (points, labels): (Vec<DataPoint>, Vec<u32>) = rows.into_iter().unzip();
    Ok(SyntheticScene { points: PointSet::new(points), labels, instances, intrinsics, motion })
}
