use nalgebra::{DMatrix, Matrix3, SMatrix, SymmetricEigen, Vector3};

use super::normalize::{apply, canonical_matrix, hartley};
use super::poly::real_cubic_roots;
use crate::error::{Error, Result};
use crate::point::DataPoint;

/// Fundamental matrix with `x2^T F x1 = 0`, unit Frobenius norm, rank 2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fundamental {
    pub f: Matrix3<f64>,
}

impl Fundamental {
    pub fn new(f: Matrix3<f64>) -> Result<Self> {
        let f = canonical_matrix(&f).ok_or(Error::DegenerateSample("zero fundamental matrix"))?;
        Ok(Self { f })
    }

    /// Forces rank 2 by zeroing the smallest singular value.
    pub fn new_rank2(f: Matrix3<f64>) -> Result<Self> {
        let mut svd = f.svd(true, true);
        let imin = svd.singular_values.imin();
        svd.singular_values[imin] = 0.0;
        let f = svd.recompose().map_err(|_| Error::DegenerateSample("svd failed"))?;
        Self::new(f)
    }

    /// Seven-point algorithm: up to three real solutions.
    pub fn fit_seven_point(sample: &[DataPoint]) -> Result<Vec<Self>> {
        let weights = vec![1.0; sample.len()];
        let (t1, t2) = normalizers(sample, &weights)?;
        let mut a = DMatrix::<f64>::zeros(9, 9);
        for (k, p) in sample.iter().take(7).enumerate() {
            let row = epipolar_row(&t1, &t2, p);
            for c in 0..9 {
                a[(k, c)] = row[c];
            }
        }
        let svd = a.svd(false, true);
        let v_t = svd.v_t.ok_or(Error::DegenerateSample("svd failed"))?;
        let mut idx: Vec<usize> = (0..9).collect();
        idx.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
        let smax = svd.singular_values[idx[8]];
        if !(smax > 0.0) || svd.singular_values[idx[2]] < 1e-10 * smax {
            return Err(Error::DegenerateSample("seven-point system rank deficient"));
        }
        let f1 = Matrix3::from_row_slice(v_t.row(idx[0]).transpose().as_slice());
        let f2 = Matrix3::from_row_slice(v_t.row(idx[1]).transpose().as_slice());
        // det(alpha F1 + (1 - alpha) F2) is cubic in alpha; interpolate from four samples.
        let det_at = |alpha: f64| (f1 * alpha + f2 * (1.0 - alpha)).determinant();
        let (p0, p1, pm1, p2) = (det_at(0.0), det_at(1.0), det_at(-1.0), det_at(2.0));
        let c0 = p0;
        let c2 = 0.5 * (p1 + pm1) - c0;
        let odd = 0.5 * (p1 - pm1);
        let c3 = (p2 - c0 - 4.0 * c2 - 2.0 * odd) / 6.0;
        let c1 = odd - c3;
        let t2t = t2.transpose();
        let mut out = Vec::new();
        for alpha in real_cubic_roots(c3, c2, c1, c0) {
            let fnorm = f1 * alpha + f2 * (1.0 - alpha);
            if let Ok(f) = Self::new(t2t * fnorm * t1) {
                out.push(f);
            }
        }
        Ok(out)
    }

    /// Weighted normalised eight-point algorithm with rank-2 projection.
    pub fn fit_weighted(points: &[DataPoint], weights: &[f64]) -> Result<Self> {
        let (t1, t2) = normalizers(points, weights)?;
        let mut ata = SMatrix::<f64, 9, 9>::zeros();
        let mut used = 0;
        for (p, &w) in points.iter().zip(weights) {
            if w <= 0.0 {
                continue;
            }
            used += 1;
            let r = SMatrix::<f64, 9, 1>::from_row_slice(&epipolar_row(&t1, &t2, p));
            ata += w * r * r.transpose();
        }
        if used < 7 {
            return Err(Error::DegenerateSample("fewer than seven weighted correspondences"));
        }
        let eig = SymmetricEigen::new(ata);
        let mut idx: Vec<usize> = (0..9).collect();
        idx.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let lmax = eig.eigenvalues[idx[8]];
        if !(lmax > 0.0) || eig.eigenvalues[idx[1]] < 1e-20 * lmax {
            if used == 7 {
                // Exactly-determined: fall back to the seven-point family's first root.
                let kept: Vec<DataPoint> =
                    points.iter().zip(weights).filter(|(_, &w)| w > 0.0).map(|(p, _)| *p).collect();
                return Self::fit_seven_point(&kept)?
                    .into_iter()
                    .next()
                    .ok_or(Error::DegenerateSample("no real seven-point root"));
            }
            return Err(Error::DegenerateSample("eight-point system rank deficient"));
        }
        let fv = eig.eigenvectors.column(idx[0]);
        let fn_ = Matrix3::from_row_slice(fv.as_slice());
        let fn_ = Self::new_rank2(fn_)?.f;
        Self::new_rank2(t2.transpose() * fn_ * t1)
    }

    /// First-order geometric error (square root of the Sampson error).
    #[inline]
    pub fn sampson_distance(&self, p: &DataPoint) -> f64 {
        let x1 = Vector3::new(p.coords()[0], p.coords()[1], 1.0);
        let x2 = Vector3::new(p.coords()[2], p.coords()[3], 1.0);
        let fx1 = self.f * x1;
        let ftx2 = self.f.transpose() * x2;
        let num = x2.dot(&fx1);
        let den = fx1.x * fx1.x + fx1.y * fx1.y + ftx2.x * ftx2.x + ftx2.y * ftx2.y;
        if den <= 0.0 {
            return if num == 0.0 { 0.0 } else { f64::INFINITY };
        }
        num.abs() / den.sqrt()
    }

    /// Epipole in image 2 (left null vector, `F^T e2 = 0`).
    pub fn epipole2(&self) -> Vector3<f64> {
        let svd = self.f.svd(true, false);
        let u = svd.u.expect("u requested");
        u.column(svd.singular_values.imin()).into_owned()
    }

    /// Oriented epipolar constraint: `(e2 x x2) . (F x1)` has the same sign for every correspondence.
    pub fn oriented_ok(&self, sample: &[DataPoint]) -> bool {
        let e2 = self.epipole2();
        let mut sign = 0.0f64;
        for p in sample {
            let x1 = Vector3::new(p.coords()[0], p.coords()[1], 1.0);
            let x2 = Vector3::new(p.coords()[2], p.coords()[3], 1.0);
            let s = e2.cross(&x2).dot(&(self.f * x1));
            if s == 0.0 {
                continue;
            }
            if sign == 0.0 {
                sign = s.signum();
            } else if s.signum() != sign {
                return false;
            }
        }
        true
    }

    pub fn params(&self) -> [f64; 9] {
        let mut out = [0.0; 9];
        for r in 0..3 {
            for c in 0..3 {
                out[3 * r + c] = self.f[(r, c)];
            }
        }
        out
    }
}

fn normalizers(points: &[DataPoint], weights: &[f64]) -> Result<(Matrix3<f64>, Matrix3<f64>)> {
    let kept = || points.iter().zip(weights).filter(|(_, &w)| w > 0.0).map(|(p, _)| p);
    let t1 = hartley(kept().map(|p| p.p1())).ok_or(Error::DegenerateSample("image-1 points coincide"))?;
    let t2 = hartley(kept().map(|p| p.p2())).ok_or(Error::DegenerateSample("image-2 points coincide"))?;
    Ok((t1, t2))
}

fn epipolar_row(t1: &Matrix3<f64>, t2: &Matrix3<f64>, p: &DataPoint) -> [f64; 9] {
    let a = apply(t1, p.coords()[0], p.coords()[1]);
    let b = apply(t2, p.coords()[2], p.coords()[3]);
    let (x1, y1, x2, y2) = (a.x, a.y, b.x, b.y);
    [x2 * x1, x2 * y1, x2, y2 * x1, y2 * y1, y2, x1, y1, 1.0]
}
