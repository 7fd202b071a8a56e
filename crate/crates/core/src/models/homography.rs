use nalgebra::{DMatrix, Matrix3, SMatrix, SymmetricEigen, Vector3};

use super::normalize::{apply, canonical_matrix, hartley};
use crate::error::{Error, Result};
use crate::point::DataPoint;

/// Planar homography mapping image-1 points to image-2 points.
/// Stores the inverse so symmetric transfer errors need no per-point inversion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Homography {
    pub h: Matrix3<f64>,
    pub h_inv: Matrix3<f64>,
}

impl Homography {
    pub fn new(h: Matrix3<f64>) -> Result<Self> {
        let h = canonical_matrix(&h).ok_or(Error::DegenerateSample("zero homography"))?;
        let inv = h.try_inverse().ok_or(Error::DegenerateSample("singular homography"))?;
        let h_inv = canonical_matrix(&inv).ok_or(Error::DegenerateSample("singular homography"))?;
        Ok(Self { h, h_inv })
    }

    /// Normalised four-point DLT. Exact for noise-free samples.
    pub fn fit_minimal(sample: &[DataPoint]) -> Result<Self> {
        let weights = vec![1.0; sample.len()];
        let (t1, t2) = normalizers(sample, &weights)?;
        let mut a = DMatrix::<f64>::zeros(9, 9);
        for (k, p) in sample.iter().enumerate() {
            let rows = dlt_rows(&t1, &t2, p);
            for c in 0..9 {
                a[(2 * k, c)] = rows[0][c];
                a[(2 * k + 1, c)] = rows[1][c];
            }
        }
        let svd = a.svd(false, true);
        let v_t = svd.v_t.ok_or(Error::DegenerateSample("svd failed"))?;
        let mut idx: Vec<usize> = (0..9).collect();
        idx.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
        let (s0, s1, smax) = (svd.singular_values[idx[0]], svd.singular_values[idx[1]], svd.singular_values[idx[8]]);
        if !(smax > 0.0) || s1 < 1e-10 * smax {
            return Err(Error::DegenerateSample("homography DLT rank deficient"));
        }
        let _ = s0;
        let hv = v_t.row(idx[0]);
        Self::denormalize(&t1, &t2, Matrix3::from_row_slice(hv.transpose().as_slice()))
    }

    /// Weighted normalised DLT over any number of correspondences.
    pub fn fit_weighted(points: &[DataPoint], weights: &[f64]) -> Result<Self> {
        let (t1, t2) = normalizers(points, weights)?;
        let mut ata = SMatrix::<f64, 9, 9>::zeros();
        for (p, &w) in points.iter().zip(weights) {
            if w <= 0.0 {
                continue;
            }
            for row in dlt_rows(&t1, &t2, p) {
                let r = SMatrix::<f64, 9, 1>::from_row_slice(&row);
                ata += w * r * r.transpose();
            }
        }
        let eig = SymmetricEigen::new(ata);
        let mut idx: Vec<usize> = (0..9).collect();
        idx.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let (l1, lmax) = (eig.eigenvalues[idx[1]], eig.eigenvalues[idx[8]]);
        if !(lmax > 0.0) || l1 < 1e-20 * lmax {
            return Err(Error::DegenerateSample("homography DLT rank deficient"));
        }
        let hv = eig.eigenvectors.column(idx[0]);
        Self::denormalize(&t1, &t2, Matrix3::from_row_slice(hv.as_slice()))
    }

    fn denormalize(t1: &Matrix3<f64>, t2: &Matrix3<f64>, hn: Matrix3<f64>) -> Result<Self> {
        let t2_inv = t2.try_inverse().ok_or(Error::DegenerateSample("normaliser"))?;
        Self::new(t2_inv * hn * t1)
    }

    /// Maps an image-1 point; `None` when it lands on the line at infinity.
    #[inline]
    pub fn map(&self, x: f64, y: f64) -> Option<(f64, f64)> {
        map_with(&self.h, x, y)
    }

    /// sqrt of the mean of squared forward and backward transfer errors.
    #[inline]
    pub fn symmetric_transfer_error(&self, p: &DataPoint) -> f64 {
        let (x1, y1) = p.p1();
        let (x2, y2) = p.p2();
        let Some((fx, fy)) = map_with(&self.h, x1, y1) else {
            return f64::INFINITY;
        };
        let Some((bx, by)) = map_with(&self.h_inv, x2, y2) else {
            return f64::INFINITY;
        };
        let fwd = (fx - x2).powi(2) + (fy - y2).powi(2);
        let bwd = (bx - x1).powi(2) + (by - y1).powi(2);
        (0.5 * (fwd + bwd)).sqrt()
    }

    pub fn params(&self) -> [f64; 9] {
        let mut out = [0.0; 9];
        for r in 0..3 {
            for c in 0..3 {
                out[3 * r + c] = self.h[(r, c)];
            }
        }
        out
    }
}

#[inline]
fn map_with(h: &Matrix3<f64>, x: f64, y: f64) -> Option<(f64, f64)> {
    let v = h * Vector3::new(x, y, 1.0);
    if v.z.abs() < 1e-12 {
        return None;
    }
    Some((v.x / v.z, v.y / v.z))
}

fn normalizers(points: &[DataPoint], weights: &[f64]) -> Result<(Matrix3<f64>, Matrix3<f64>)> {
    let kept = || points.iter().zip(weights).filter(|(_, &w)| w > 0.0).map(|(p, _)| p);
    let t1 = hartley(kept().map(|p| p.p1())).ok_or(Error::DegenerateSample("image-1 points coincide"))?;
    let t2 = hartley(kept().map(|p| p.p2())).ok_or(Error::DegenerateSample("image-2 points coincide"))?;
    Ok((t1, t2))
}

fn dlt_rows(t1: &Matrix3<f64>, t2: &Matrix3<f64>, p: &DataPoint) -> [[f64; 9]; 2] {
    let a = apply(t1, p.x(), p.y());
    let b = apply(t2, p.coords()[2], p.coords()[3]);
    let (x, y) = (a.x, a.y);
    let (u, v) = (b.x, b.y);
    [
        [0.0, 0.0, 0.0, -x, -y, -1.0, v * x, v * y, v],
        [x, y, 1.0, 0.0, 0.0, 0.0, -u * x, -u * y, -u],
    ]
}
