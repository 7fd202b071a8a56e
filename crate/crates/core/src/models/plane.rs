use nalgebra::{Matrix3, SymmetricEigen, Vector3};

use crate::error::{Error, Result};
use crate::point::DataPoint;

/// Plane `n . p + d = 0` with unit normal `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plane3 {
    pub normal: Vector3<f64>,
    pub d: f64,
}

impl Plane3 {
    pub fn from_coefficients(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let n = Vector3::new(a, b, c);
        let norm = n.norm();
        if !(norm > 1e-300) || !norm.is_finite() {
            return Err(Error::DegenerateSample("plane normal vanishes"));
        }
        let mut normal = n / norm;
        let mut d = d / norm;
        let imax = normal.iamax();
        if normal[imax] < 0.0 {
            normal = -normal;
            d = -d;
        }
        Ok(Self { normal, d })
    }

    pub fn through(p: &DataPoint, q: &DataPoint, r: &DataPoint) -> Result<Self> {
        let p0 = Vector3::new(p.x(), p.y(), p.z());
        let u = Vector3::new(q.x(), q.y(), q.z()) - p0;
        let v = Vector3::new(r.x(), r.y(), r.z()) - p0;
        let n = u.cross(&v);
        if n.norm() <= 1e-12 * (u.norm() * v.norm()).max(1e-300) {
            return Err(Error::DegenerateSample("collinear plane sample"));
        }
        Self::from_coefficients(n.x, n.y, n.z, -n.dot(&p0))
    }

    /// Weighted total least squares via the smallest eigenvector of the weighted scatter.
    pub fn fit_tls(points: &[DataPoint], weights: &[f64]) -> Result<Self> {
        let mut sw = 0.0;
        let mut c = Vector3::zeros();
        for (p, &w) in points.iter().zip(weights) {
            sw += w;
            c += w * Vector3::new(p.x(), p.y(), p.z());
        }
        if !(sw > 0.0) {
            return Err(Error::DegenerateSample("no positive weights"));
        }
        c /= sw;
        let mut s = Matrix3::zeros();
        for (p, &w) in points.iter().zip(weights) {
            let d = Vector3::new(p.x(), p.y(), p.z()) - c;
            s += w * d * d.transpose();
        }
        let eig = SymmetricEigen::new(s);
        let mut order = [0usize, 1, 2];
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let (lo, mid, hi) = (eig.eigenvalues[order[0]], eig.eigenvalues[order[1]], eig.eigenvalues[order[2]]);
        if !(hi > 0.0) || mid <= 1e-14 * hi {
            return Err(Error::DegenerateSample("plane points are collinear"));
        }
        let _ = lo;
        let n = eig.eigenvectors.column(order[0]).into_owned();
        Self::from_coefficients(n.x, n.y, n.z, -n.dot(&c))
    }

    #[inline]
    pub fn distance(&self, x: f64, y: f64, z: f64) -> f64 {
        (self.normal.x * x + self.normal.y * y + self.normal.z * z + self.d).abs()
    }

    pub fn params(&self) -> [f64; 4] {
        [self.normal.x, self.normal.y, self.normal.z, self.d]
    }
}
